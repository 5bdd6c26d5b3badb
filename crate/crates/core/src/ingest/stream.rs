//! Long-lived HTTP client for a newline-delimited tweet stream.
//!
//! The client issues `GET {base_url}/stream?track=<terms>` with a bearer
//! token and reads one JSON record per line. Transient failures (connect
//! errors, 5xx/408/429, broken or ended bodies) trigger a reconnect after an
//! exponential backoff; 401/403 are fatal. Records whose `tweet_id` was
//! already yielded by this source are dropped, so a server that replays after
//! a reconnect does not produce duplicates.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::{SourceError, SourceKind, TweetSource};
use crate::model::TrackTerm;
use crate::wire::RawRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackoffPolicy {
    pub initial: Duration,
    pub factor: u32,
    pub max: Duration,
}

impl Default for BackoffPolicy {
    fn default() -> Self {
        Self {
            initial: Duration::from_secs(1),
            factor: 2,
            max: Duration::from_secs(60),
        }
    }
}

impl BackoffPolicy {
    /// Delay before reconnect attempt number `failures` (1-based).
    pub fn delay(&self, failures: u32) -> Duration {
        if failures == 0 {
            return Duration::ZERO;
        }
        let mut d = self.initial;
        for _ in 1..failures {
            d = d.saturating_mul(self.factor);
            if d >= self.max {
                return self.max;
            }
        }
        d.min(self.max)
    }
}

#[derive(Debug, Clone)]
pub struct StreamConfig {
    pub base_url: String,
    pub token: String,
    pub terms: Vec<TrackTerm>,
    pub backoff: BackoffPolicy,
    pub connect_timeout: Duration,
    /// Consecutive failed attempts tolerated before giving up; `None` retries forever.
    pub max_consecutive_failures: Option<u32>,
}

impl StreamConfig {
    pub fn new(base_url: impl Into<String>, token: impl Into<String>, terms: Vec<TrackTerm>) -> Self {
        Self {
            base_url: base_url.into(),
            token: token.into(),
            terms,
            backoff: BackoffPolicy::default(),
            connect_timeout: Duration::from_secs(10),
            max_consecutive_failures: None,
        }
    }

    /// Comma-separated subscription filter, e.g. `#measles,@cityhealth,outbreak`.
    pub fn track_param(&self) -> String {
        self.terms.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamStatus {
    Connecting,
    Connected,
    Disconnected { failures: u32, retry_in: Duration },
    Closed,
    Failed(String),
}

enum Attempt {
    Transient(String),
    Fatal(SourceError),
}

pub struct StreamSource {
    config: StreamConfig,
    agent: ureq::Agent,
    reader: Option<BufReader<Box<dyn Read + Send>>>,
    failures: u32,
    seen: HashSet<String>,
    position: u64,
    status: Arc<Mutex<StreamStatus>>,
    closed: Arc<AtomicBool>,
    done: bool,
    line: Vec<u8>,
}

/// Cloneable control for a running [`StreamSource`].
#[derive(Clone)]
pub struct StreamHandle {
    status: Arc<Mutex<StreamStatus>>,
    closed: Arc<AtomicBool>,
}

impl StreamHandle {
    /// Takes effect at the next record boundary or backoff tick.
    pub fn close(&self) {
        self.closed.store(true, Ordering::SeqCst);
    }

    pub fn status(&self) -> StreamStatus {
        self.status.lock().expect("status lock").clone()
    }
}

pub fn open_stream_source(config: StreamConfig) -> Result<StreamSource, SourceError> {
    if !(config.base_url.starts_with("http://") || config.base_url.starts_with("https://")) {
        return Err(SourceError::Config(format!(
            "base URL {:?} must be http(s)",
            config.base_url
        )));
    }
    if config.token.is_empty() {
        return Err(SourceError::Config("bearer token is empty".into()));
    }
    if config.terms.is_empty() {
        return Err(SourceError::Config("no terms to subscribe to".into()));
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_connect(Some(config.connect_timeout))
        .http_status_as_error(false)
        .build()
        .into();
    Ok(StreamSource {
        config,
        agent,
        reader: None,
        failures: 0,
        seen: HashSet::new(),
        position: 0,
        status: Arc::new(Mutex::new(StreamStatus::Connecting)),
        closed: Arc::new(AtomicBool::new(false)),
        done: false,
        line: Vec::new(),
    })
}

const MAX_LINE: usize = 1 << 20;

impl StreamSource {
    pub fn handle(&self) -> StreamHandle {
        StreamHandle {
            status: self.status.clone(),
            closed: self.closed.clone(),
        }
    }

    pub fn status(&self) -> StreamStatus {
        self.status.lock().expect("status lock").clone()
    }

    fn set_status(&self, s: StreamStatus) {
        *self.status.lock().expect("status lock") = s;
    }

    fn connect(&self) -> Result<BufReader<Box<dyn Read + Send>>, Attempt> {
        let url = format!("{}/stream", self.config.base_url.trim_end_matches('/'));
        let resp = self
            .agent
            .get(&url)
            .header("Authorization", format!("Bearer {}", self.config.token))
            .header("Accept", "application/x-ndjson")
            .query("track", self.config.track_param())
            .call()
            .map_err(|e| Attempt::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => {
                let reader: Box<dyn Read + Send> = Box::new(resp.into_body().into_reader());
                Ok(BufReader::new(reader))
            }
            401 | 403 => Err(Attempt::Fatal(SourceError::Auth(status))),
            408 | 429 | 500..=599 => Err(Attempt::Transient(format!("HTTP {status}"))),
            _ => Err(Attempt::Fatal(SourceError::Refused(status))),
        }
    }

    /// Sleeps in short slices so `close` is honored during long backoffs.
    fn wait(&self, d: Duration) -> bool {
        let until = Instant::now() + d;
        while Instant::now() < until {
            if self.closed.load(Ordering::SeqCst) {
                return false;
            }
            std::thread::sleep((until - Instant::now()).min(Duration::from_millis(50)));
        }
        !self.closed.load(Ordering::SeqCst)
    }

    fn fail(&mut self, why: &str) -> Option<SourceError> {
        self.reader = None;
        self.failures += 1;
        if let Some(limit) = self.config.max_consecutive_failures {
            if self.failures > limit {
                self.set_status(StreamStatus::Failed(why.to_owned()));
                return Some(SourceError::Exhausted(self.failures - 1));
            }
        }
        let retry_in = self.config.backoff.delay(self.failures);
        log::warn!("stream disconnected ({why}); retry {} in {:?}", self.failures, retry_in);
        self.set_status(StreamStatus::Disconnected {
            failures: self.failures,
            retry_in,
        });
        None
    }
}

impl TweetSource for StreamSource {
    fn kind(&self) -> SourceKind {
        SourceKind::Stream
    }

    fn next_record(&mut self) -> Option<Result<RawRecord, SourceError>> {
        loop {
            if self.done {
                return None;
            }
            if self.closed.load(Ordering::SeqCst) {
                self.done = true;
                self.set_status(StreamStatus::Closed);
                return None;
            }
            if self.reader.is_none() {
                if !self.wait(self.config.backoff.delay(self.failures)) {
                    continue;
                }
                self.set_status(StreamStatus::Connecting);
                match self.connect() {
                    Ok(r) => {
                        self.reader = Some(r);
                        self.failures = 0;
                        self.set_status(StreamStatus::Connected);
                    }
                    Err(Attempt::Fatal(e)) => {
                        self.done = true;
                        self.set_status(StreamStatus::Failed(e.to_string()));
                        return Some(Err(e));
                    }
                    Err(Attempt::Transient(why)) => {
                        if let Some(e) = self.fail(&why) {
                            self.done = true;
                            return Some(Err(e));
                        }
                        continue;
                    }
                }
            }
            let reader = self.reader.as_mut().expect("connected");
            self.line.clear();
            let read = reader.by_ref().take(MAX_LINE as u64).read_until(b'\n', &mut self.line);
            match read {
                Ok(0) => {
                    if let Some(e) = self.fail("stream ended") {
                        self.done = true;
                        return Some(Err(e));
                    }
                }
                Ok(_) => {
                    let text = String::from_utf8_lossy(&self.line);
                    let text = text.trim();
                    if text.is_empty() {
                        // keep-alive
                        continue;
                    }
                    let record = RawRecord::parse(self.position + 1, text);
                    if let Some(id) = record.tweet_id() {
                        if !self.seen.insert(id.to_owned()) {
                            continue;
                        }
                    }
                    self.position += 1;
                    return Some(Ok(record));
                }
                Err(e) => {
                    if let Some(e) = self.fail(&e.to_string()) {
                        self.done = true;
                        return Some(Err(e));
                    }
                }
            }
        }
    }
}
