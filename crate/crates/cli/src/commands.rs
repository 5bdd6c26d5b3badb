use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, Utc};
use crisiswatch_core::corpus::{write_corpus, CorpusSpec};
use crisiswatch_core::ingest::{
    open_replay_source, open_stream_source, run_ingest, IngestError, IngestFailure, SourceError, SourceKind,
    StreamConfig, StreamHandle, TweetSource,
};
use crisiswatch_core::wire::RawRecord;
use crisiswatch_core::{
    Analyzer, DescriptiveStats, EngagementWeights, IngestReport, SentimentSeriesPoint, Store, StoreError, TimeRange,
    TrackingProfile, TrendingEntry, WeeklyAggregate,
};
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;

pub const TRENDING_IN_REPORT: usize = 10;

fn io_err(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{what} {}: {e}", path.display()))
}

fn source_error(e: &SourceError) -> CliError {
    match e {
        SourceError::Io { .. } | SourceError::Refused(_) | SourceError::Exhausted(_) => CliError::Io(e.to_string()),
        SourceError::Auth(_) | SourceError::Config(_) => CliError::Config(e.to_string()),
    }
}

fn ingest_error(f: &IngestFailure) -> CliError {
    match &f.error {
        IngestError::InactiveProfile(_) => CliError::Domain(f.error.to_string()),
        IngestError::Source(e) => source_error(e),
        IngestError::Store(e) => CliError::Io(e.to_string()),
    }
}

fn stream_config(cfg: &Config, profile: &TrackingProfile) -> Result<StreamConfig, CliError> {
    let section = cfg
        .stream
        .as_ref()
        .ok_or_else(|| CliError::Config("no [stream] section in the config file".into()))?;
    let token = std::env::var(&section.token_env)
        .map_err(|_| CliError::Config(format!("stream token variable {} is not set", section.token_env)))?;
    Ok(StreamConfig::new(
        section.base_url.clone(),
        token,
        profile.terms().to_vec(),
    ))
}

fn open_store(cfg: &Config) -> Result<Store, CliError> {
    Ok(Store::open(&cfg.store_path, cfg.sync)?)
}

/// Ingests one replay file (or the configured stream) and prints the report
/// as a single JSON line.
pub fn ingest(cfg: &Config, profile_id: &str, file: Option<&Path>, stream: bool) -> Result<(), CliError> {
    let profile = cfg.profile(profile_id)?;
    if !profile.is_active() {
        return Err(CliError::Domain(format!("profile {profile_id} is not active")));
    }
    let mut source: Box<dyn TweetSource> = match (file, stream) {
        (Some(path), false) => Box::new(open_replay_source(path).map_err(|e| source_error(&e))?),
        (None, true) => {
            let src = open_stream_source(stream_config(cfg, profile)?).map_err(|e| source_error(&e))?;
            close_on_interrupt(src.handle());
            Box::new(src)
        }
        _ => return Err(CliError::Config("give exactly one of a replay FILE or --stream".into())),
    };
    let store = open_store(cfg)?;
    let result = run_ingest(source.as_mut(), profile, &store);
    store.flush()?;
    match result {
        Ok(report) => {
            println!("{}", report.to_json_line());
            Ok(())
        }
        Err(failure) => {
            println!("{}", failure.report.to_json_line());
            Err(ingest_error(&failure))
        }
    }
}

/// Closes a stream source on Ctrl-C so the ingest loop ends cleanly.
fn close_on_interrupt(handle: StreamHandle) {
    std::thread::spawn(move || {
        let Ok(rt) = tokio::runtime::Builder::new_current_thread().enable_all().build() else {
            return;
        };
        rt.block_on(async {
            if tokio::signal::ctrl_c().await.is_ok() {
                tracing::info!("interrupt: closing stream");
                handle.close();
            }
        });
    });
}

pub fn gen_corpus(spec: &CorpusSpec, out: &Path) -> Result<(), CliError> {
    let file = File::create(out).map_err(|e| io_err("cannot create", out, e))?;
    let mut w = BufWriter::new(file);
    let n = write_corpus(spec, &mut w).map_err(|e| io_err("cannot write", out, e))?;
    w.flush().map_err(|e| io_err("cannot write", out, e))?;
    w.get_ref().sync_all().map_err(|e| io_err("cannot sync", out, e))?;
    println!(
        "{}",
        serde_json::json!({ "records": n, "out": out.display().to_string(), "seed": spec.seed })
    );
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct TrendingLine {
    pub rank: u32,
    pub tweet_id: String,
    pub engagement: f64,
}

impl From<&TrendingEntry> for TrendingLine {
    fn from(e: &TrendingEntry) -> Self {
        Self {
            rank: e.rank(),
            tweet_id: e.tweet_id().to_owned(),
            engagement: e.engagement(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub profile_id: String,
    pub window: TimeRange,
    pub descriptive_stats: DescriptiveStats,
    pub crisis_sentiment: SentimentSeriesPoint,
    pub weekly_counts: Vec<WeeklyAggregate>,
    pub trending: Vec<TrendingLine>,
}

pub fn build_report(an: &Analyzer, store: &Store, profile: &TrackingProfile, window: TimeRange) -> Report {
    let trending = an
        .trending(
            store,
            profile,
            window,
            TRENDING_IN_REPORT,
            &EngagementWeights::default(),
        )
        .expect("k is positive");
    Report {
        profile_id: profile.profile_id().to_owned(),
        window,
        descriptive_stats: an.descriptive_stats(store, profile, window),
        crisis_sentiment: an.window_sentiment(store, profile, window),
        weekly_counts: an.weekly_counts(store, profile, window),
        trending: trending.iter().map(TrendingLine::from).collect(),
    }
}

fn report_window(
    profile: &TrackingProfile,
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
) -> Result<TimeRange, CliError> {
    let crisis = profile.crisis_window();
    TimeRange::new(from.unwrap_or(crisis.start()), to.unwrap_or(crisis.end()))
        .map_err(|e| CliError::Domain(e.to_string()))
}

/// Prints descriptive stats, window sentiment, weekly counts and the top
/// trending tweets as one JSON line. Reads a store another process is
/// writing to without taking its lock.
pub fn report(
    cfg: &Config,
    profile_id: &str,
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
) -> Result<(), CliError> {
    let profile = cfg.profile(profile_id)?;
    let window = report_window(profile, from, to)?;
    let store = match Store::open(&cfg.store_path, cfg.sync) {
        Err(StoreError::Locked(_)) => Store::open_read_only(&cfg.store_path)?,
        other => other?,
    };
    let an = Analyzer::new(cfg.lexicon.clone());
    let report = build_report(&an, &store, profile, window);
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

/// Replay source that ends early once `stop` is set.
struct Interruptible<S> {
    inner: S,
    stop: Arc<AtomicBool>,
}

impl<S: TweetSource> TweetSource for Interruptible<S> {
    fn kind(&self) -> SourceKind {
        self.inner.kind()
    }

    fn next_record(&mut self) -> Option<Result<RawRecord, SourceError>> {
        if self.stop.load(Ordering::SeqCst) {
            return None;
        }
        self.inner.next_record()
    }
}

pub struct BackgroundIngest {
    pub profile_id: String,
    pub file: Option<PathBuf>,
}

fn spawn_ingest(
    store: Arc<Store>,
    profile: TrackingProfile,
    mut source: Box<dyn TweetSource + Send>,
) -> std::thread::JoinHandle<Result<IngestReport, Box<IngestFailure>>> {
    std::thread::spawn(move || {
        let result = run_ingest(source.as_mut(), &profile, &store);
        match &result {
            Ok(r) => tracing::info!(profile = profile.profile_id(), report = %r.to_json_line(), "ingest finished"),
            Err(f) => {
                tracing::error!(profile = profile.profile_id(), error = %f, report = %f.report.to_json_line(), "ingest failed")
            }
        }
        result
    })
}

/// Runs the API until SIGINT/SIGTERM, optionally ingesting in the background.
/// On shutdown background ingests stop at the next record, in-flight
/// requests drain, and the store is flushed.
pub fn serve(cfg: &Config, jobs: Vec<BackgroundIngest>) -> Result<(), CliError> {
    let service = cfg.service()?;
    let mut sources: Vec<(TrackingProfile, Box<dyn TweetSource + Send>)> = Vec::new();
    let stop = Arc::new(AtomicBool::new(false));
    let mut stream_handles = Vec::new();
    for job in &jobs {
        let profile = cfg.profile(&job.profile_id)?.clone();
        if !profile.is_active() {
            return Err(CliError::Domain(format!("profile {} is not active", job.profile_id)));
        }
        let source: Box<dyn TweetSource + Send> = match &job.file {
            Some(path) => Box::new(Interruptible {
                inner: open_replay_source(path).map_err(|e| source_error(&e))?,
                stop: stop.clone(),
            }),
            None => {
                let src = open_stream_source(stream_config(cfg, &profile)?).map_err(|e| source_error(&e))?;
                stream_handles.push(src.handle());
                Box::new(src)
            }
        };
        sources.push((profile, source));
    }

    let store = Arc::new(open_store(cfg)?);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Io(format!("cannot start runtime: {e}")))?;
    let listener = rt
        .block_on(tokio::net::TcpListener::bind(service.bind))
        .map_err(|e| CliError::Io(format!("cannot bind {}: {e}", service.bind)))?;
    let addr = listener.local_addr().map_err(|e| CliError::Io(e.to_string()))?;

    let workers: Vec<_> = sources
        .into_iter()
        .map(|(profile, source)| spawn_ingest(store.clone(), profile, source))
        .collect();

    let state = crisiswatch_server::AppState::new(
        store.clone(),
        cfg.profiles.clone(),
        Analyzer::new(cfg.lexicon.clone()),
        &service,
    );
    let app = crisiswatch_server::router(state, &service);
    tracing::info!(%addr, profiles = cfg.profiles.len(), "serving");
    println!("listening on http://{addr}");
    let _ = std::io::stdout().flush();

    let served = rt.block_on(crisiswatch_server::serve(listener, app, shutdown_signal()));
    stop.store(true, Ordering::SeqCst);
    for h in &stream_handles {
        h.close();
    }
    for w in workers {
        let _ = w.join();
    }
    store.flush()?;
    tracing::info!("store flushed; bye");
    served.map_err(|e| CliError::Io(format!("server error: {e}")))
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    tracing::info!("shutdown requested");
}

pub fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("{s:?}: {e}"))
}

pub fn parse_instant(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("{s:?}: {e}"))
}
