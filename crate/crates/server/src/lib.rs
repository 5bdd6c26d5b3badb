//! Read-only JSON API under `/api/v1/` for the crisis dashboard.
//!
//! Every route except `/healthz` requires `Authorization: Bearer <key>` and,
//! when an allowlist is configured, a source address inside it. Unknown keys
//! get 401; known keys from other addresses get 403.

pub mod app;
pub mod auth;
pub mod cache;
pub mod config;
pub mod error;

pub use app::{router, serve, AppState};
pub use auth::{key_id, Principal};
pub use config::{parse_cidr, ConfigError, ServiceConfig};
pub use error::ApiError;
