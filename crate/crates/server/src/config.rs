use std::net::SocketAddr;
use std::time::Duration;

use ipnet::IpNet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("at least one API key is required")]
    NoApiKeys,
    #[error("API keys must not be empty or contain whitespace")]
    BadApiKey,
    #[error("invalid allowlist entry {0:?}: expected an IP address or CIDR block")]
    BadCidr(String),
    #[error("request timeout must be positive")]
    ZeroTimeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub api_keys: Vec<String>,
    /// Empty allows every source address.
    pub ip_allowlist: Vec<IpNet>,
    pub request_timeout: Duration,
    /// Zero disables caching.
    pub cache_ttl: Duration,
    pub cors_origins: Vec<String>,
}

impl ServiceConfig {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);
    pub const DEFAULT_CACHE_TTL: Duration = Duration::from_secs(30);

    pub fn new(bind: SocketAddr, api_keys: Vec<String>) -> Result<Self, ConfigError> {
        let cfg = Self {
            bind,
            api_keys,
            ip_allowlist: Vec::new(),
            request_timeout: Self::DEFAULT_TIMEOUT,
            cache_ttl: Self::DEFAULT_CACHE_TTL,
            cors_origins: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.api_keys.is_empty() {
            return Err(ConfigError::NoApiKeys);
        }
        if self
            .api_keys
            .iter()
            .any(|k| k.is_empty() || k.chars().any(char::is_whitespace))
        {
            return Err(ConfigError::BadApiKey);
        }
        if self.request_timeout.is_zero() {
            return Err(ConfigError::ZeroTimeout);
        }
        Ok(())
    }
}

/// Parses `10.0.0.0/8`, `::1` or a bare address (taken as a host route).
pub fn parse_cidr(s: &str) -> Result<IpNet, ConfigError> {
    let s = s.trim();
    s.parse::<IpNet>()
        .or_else(|_| s.parse::<std::net::IpAddr>().map(IpNet::from))
        .map_err(|_| ConfigError::BadCidr(s.to_owned()))
}
