//! TOML configuration file and environment overrides.
//!
//! ```toml
//! store_path = "data/store"          # relative paths resolve against this file
//! lexicon_path = "lexicon.tsv"       # optional; the bundled lexicon otherwise
//! sync = "always"                    # or "os"
//!
//! [service]
//! bind = "127.0.0.1:8080"
//! api_keys = ["change-me"]
//! ip_allowlist = ["127.0.0.1/32", "192.168.0.0/16"]
//! request_timeout_ms = 5000
//! cache_ttl_secs = 30
//! cors_origins = ["http://localhost:5173"]
//!
//! [[profiles]]
//! id = "measles"
//! name = "Measles outbreak"
//! active = true
//! terms = ["#measles", "@cityhealth", "measles outbreak"]
//! crisis_window = { start = "2024-03-04T00:00:00Z", end = "2024-04-01T00:00:00Z" }
//!
//! [stream]
//! base_url = "https://stream.example.org"
//! token_env = "CRISISWATCH_STREAM_TOKEN"
//! ```

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use crisiswatch_core::{normalize_term, Lexicon, SyncPolicy, TermKind, TimeRange, TrackTerm, TrackingProfile};
use crisiswatch_server::{parse_cidr, ServiceConfig};
use serde::Deserialize;

use crate::error::CliError;

pub const ENV_CONFIG: &str = "CRISISWATCH_CONFIG";
pub const ENV_BIND: &str = "CRISISWATCH_BIND";
pub const ENV_API_KEYS: &str = "CRISISWATCH_API_KEYS";
pub const ENV_ALLOWLIST: &str = "CRISISWATCH_IP_ALLOWLIST";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    store_path: PathBuf,
    lexicon_path: Option<PathBuf>,
    #[serde(default)]
    sync: SyncSetting,
    #[serde(default)]
    service: ServiceSection,
    #[serde(default)]
    profiles: Vec<ProfileSection>,
    stream: Option<StreamSection>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SyncSetting {
    #[default]
    Always,
    Os,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServiceSection {
    #[serde(default = "default_bind")]
    bind: String,
    #[serde(default)]
    api_keys: Vec<String>,
    #[serde(default)]
    ip_allowlist: Vec<String>,
    #[serde(default = "default_timeout_ms")]
    request_timeout_ms: u64,
    #[serde(default = "default_ttl_secs")]
    cache_ttl_secs: u64,
    #[serde(default)]
    cors_origins: Vec<String>,
}

impl Default for ServiceSection {
    fn default() -> Self {
        Self {
            bind: default_bind(),
            api_keys: Vec::new(),
            ip_allowlist: Vec::new(),
            request_timeout_ms: default_timeout_ms(),
            cache_ttl_secs: default_ttl_secs(),
            cors_origins: Vec::new(),
        }
    }
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

fn default_timeout_ms() -> u64 {
    ServiceConfig::DEFAULT_TIMEOUT.as_millis() as u64
}

fn default_ttl_secs() -> u64 {
    ServiceConfig::DEFAULT_CACHE_TTL.as_secs()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSection {
    id: String,
    name: Option<String>,
    #[serde(default = "yes")]
    active: bool,
    terms: Vec<String>,
    crisis_window: WindowSection,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowSection {
    start: String,
    end: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSection {
    pub base_url: String,
    #[serde(default = "default_token_env")]
    pub token_env: String,
}

fn default_token_env() -> String {
    "CRISISWATCH_STREAM_TOKEN".into()
}

/// Fully resolved settings. The service section is validated lazily so
/// commands that do not serve (ingest, report) work without API keys.
#[derive(Debug, Clone)]
pub struct Config {
    pub store_path: PathBuf,
    pub sync: SyncPolicy,
    pub lexicon: Arc<Lexicon>,
    pub profiles: Vec<TrackingProfile>,
    pub stream: Option<StreamSection>,
    service: ServiceSection,
}

/// `#tag` → hashtag, `@name` → username, anything else → keyword.
pub fn parse_term(s: &str) -> Result<TrackTerm, String> {
    let (kind, raw) = if let Some(rest) = s.strip_prefix('#') {
        (TermKind::Hashtag, rest)
    } else if let Some(rest) = s.strip_prefix('@') {
        (TermKind::Username, rest)
    } else {
        (TermKind::Keyword, s)
    };
    normalize_term(kind, raw).map_err(|e| e.to_string())
}

fn parse_time(field: &str, s: &str) -> Result<DateTime<Utc>, CliError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| CliError::Config(format!("{field}: {s:?} is not RFC 3339: {e}")))
}

impl Config {
    /// `explicit`, else `$CRISISWATCH_CONFIG`, else `./crisiswatch.toml`.
    pub fn locate(explicit: Option<&Path>) -> PathBuf {
        explicit
            .map(Path::to_owned)
            .or_else(|| std::env::var_os(ENV_CONFIG).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("crisiswatch.toml"))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let file: FileConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_relative() { base.join(p) } else { p.to_owned() };

        let lexicon = match &file.lexicon_path {
            Some(p) => Lexicon::load(resolve(p)).map_err(|e| CliError::Config(e.to_string()))?,
            None => Lexicon::bundled(),
        };

        let mut profiles = Vec::with_capacity(file.profiles.len());
        for p in &file.profiles {
            let terms = p
                .terms
                .iter()
                .map(|t| parse_term(t).map_err(|e| CliError::Config(format!("profile {}: {e}", p.id))))
                .collect::<Result<Vec<_>, _>>()?;
            let start = parse_time("crisis_window.start", &p.crisis_window.start)?;
            let end = parse_time("crisis_window.end", &p.crisis_window.end)?;
            let window = TimeRange::new(start, end).map_err(|e| CliError::Config(format!("profile {}: {e}", p.id)))?;
            let profile = TrackingProfile::new(
                p.id.clone(),
                p.name.clone().unwrap_or_else(|| p.id.clone()),
                terms,
                window,
                p.active,
            )
            .map_err(|e| CliError::Config(format!("profile {}: {e}", p.id)))?;
            if profiles
                .iter()
                .any(|q: &TrackingProfile| q.profile_id() == profile.profile_id())
            {
                return Err(CliError::Config(format!("duplicate profile id {}", p.id)));
            }
            profiles.push(profile);
        }

        let mut service = file.service;
        if let Ok(bind) = std::env::var(ENV_BIND) {
            service.bind = bind;
        }
        if let Ok(keys) = std::env::var(ENV_API_KEYS) {
            service.api_keys = split_list(&keys);
        }
        if let Ok(list) = std::env::var(ENV_ALLOWLIST) {
            service.ip_allowlist = split_list(&list);
        }

        Ok(Self {
            store_path: resolve(&file.store_path),
            sync: match file.sync {
                SyncSetting::Always => SyncPolicy::Always,
                SyncSetting::Os => SyncPolicy::Os,
            },
            lexicon: Arc::new(lexicon),
            profiles,
            stream: file.stream,
            service,
        })
    }

    pub fn profile(&self, id: &str) -> Result<&TrackingProfile, CliError> {
        self.profiles
            .iter()
            .find(|p| p.profile_id() == id)
            .ok_or_else(|| CliError::Domain(format!("unknown profile {id:?}")))
    }

    pub fn service(&self) -> Result<ServiceConfig, CliError> {
        let s = &self.service;
        let bind: SocketAddr = s
            .bind
            .parse()
            .map_err(|e| CliError::Config(format!("service.bind {:?}: {e}", s.bind)))?;
        let mut cfg = ServiceConfig::new(bind, s.api_keys.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.ip_allowlist = s
            .ip_allowlist
            .iter()
            .map(|c| parse_cidr(c))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(e.to_string()))?;
        cfg.request_timeout = Duration::from_millis(s.request_timeout_ms);
        cfg.cache_ttl = Duration::from_secs(s.cache_ttl_secs);
        cfg.cors_origins = s.cors_origins.clone();
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::to_owned)
        .collect()
}
