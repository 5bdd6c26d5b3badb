use std::collections::HashMap;
use std::net::IpAddr;

use ipnet::IpNet;
use sha2::{Digest, Sha256};

/// The caller behind an accepted request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Principal {
    /// Short fingerprint of the matched key; safe to log.
    pub key_id: String,
    pub source_ip: IpAddr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuthRejection {
    /// No bearer key, or one that is not configured.
    Unauthenticated,
    /// A valid key from an address outside the allowlist.
    Forbidden,
}

/// Keys are held only as SHA-256 digests, so lookups compare digests rather
/// than the secrets themselves.
#[derive(Debug, Clone)]
pub struct Authenticator {
    keys: HashMap<[u8; 32], String>,
    allowlist: Vec<IpNet>,
}

fn digest(key: &str) -> [u8; 32] {
    Sha256::digest(key.as_bytes()).into()
}

pub fn key_id(key: &str) -> String {
    let d = digest(key);
    let hex: String = d[..4].iter().map(|b| format!("{b:02x}")).collect();
    format!("key-{hex}")
}

impl Authenticator {
    pub fn new(api_keys: &[String], allowlist: Vec<IpNet>) -> Self {
        let keys = api_keys.iter().map(|k| (digest(k), key_id(k))).collect();
        Self { keys, allowlist }
    }

    pub fn allows_all_addresses(&self) -> bool {
        self.allowlist.is_empty()
    }

    /// Checks the key first, so an unknown caller learns nothing about the
    /// allowlist.
    pub fn authenticate(&self, authorization: Option<&str>, source_ip: IpAddr) -> Result<Principal, AuthRejection> {
        let key = authorization
            .and_then(|h| h.strip_prefix("Bearer "))
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .ok_or(AuthRejection::Unauthenticated)?;
        let key_id = self.keys.get(&digest(key)).ok_or(AuthRejection::Unauthenticated)?;
        let ip = source_ip.to_canonical();
        if !self.allowlist.is_empty() && !self.allowlist.iter().any(|net| net.contains(&ip)) {
            return Err(AuthRejection::Forbidden);
        }
        Ok(Principal {
            key_id: key_id.clone(),
            source_ip: ip,
        })
    }
}
