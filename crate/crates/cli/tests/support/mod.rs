//! Helpers for driving the `crisiswatch` binary.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

pub const BIN: &str = env!("CARGO_BIN_EXE_crisiswatch");
pub const KEY: &str = "acceptance-key";

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Writes `crisiswatch.toml` with a `measles` profile over
    /// 2024-03-04..2024-04-01 and an inactive `flu` profile.
    pub fn write_config(&self, store: &str, allow: &[&str], extra_service: &str) -> PathBuf {
        let allow: Vec<String> = allow.iter().map(|a| format!("{a:?}")).collect();
        let text = format!(
            r##"store_path = "{store}"
sync = "always"

[service]
bind = "127.0.0.1:0"
api_keys = ["{KEY}"]
ip_allowlist = [{allow}]
{extra_service}

[[profiles]]
id = "measles"
name = "Measles outbreak"
terms = ["#measles", "@cityhealth"]
crisis_window = {{ start = "2024-03-04T00:00:00Z", end = "2024-04-01T00:00:00Z" }}

[[profiles]]
id = "flu"
active = false
terms = ["flu"]
crisis_window = {{ start = "2024-01-01T00:00:00Z", end = "2024-02-01T00:00:00Z" }}
"##,
            allow = allow.join(", ")
        );
        let path = self.path("crisiswatch.toml");
        std::fs::write(&path, text).unwrap();
        path
    }
}

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CRISISWATCH_CONFIG")
        .env_remove("CRISISWATCH_API_KEYS")
        .env_remove("CRISISWATCH_IP_ALLOWLIST")
        .env_remove("CRISISWATCH_BIND")
        .output()
        .unwrap()
}

pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn gen_corpus(path: &Path, seed: u64, days: u32, per_day: u32) {
    run_ok(&[
        "gen-corpus",
        "--seed",
        &seed.to_string(),
        "--days",
        &days.to_string(),
        "--per-day",
        &per_day.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
}

pub struct Server {
    pub child: Child,
    pub base: String,
    stderr: Option<std::thread::JoinHandle<String>>,
}

impl Server {
    pub fn start(config: &Path, extra: &[&str]) -> Self {
        let mut child = Command::new(BIN)
            .arg("--config")
            .arg(config)
            .arg("serve")
            .args(extra)
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let mut stderr = child.stderr.take().unwrap();
        let stderr = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });
        let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
        let line = lines.next().expect("server printed nothing").unwrap();
        let base = line
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected first line {line:?}"))
            .to_owned();
        Self {
            child,
            base,
            stderr: Some(stderr),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    /// Sends SIGINT and waits for exit; returns the exit code and stderr.
    pub fn interrupt(mut self) -> (Option<i32>, String) {
        unsafe {
            libc::kill(self.child.id() as i32, libc::SIGINT);
        }
        let deadline = Instant::now() + Duration::from_secs(30);
        let status = loop {
            if let Some(s) = self.child.try_wait().unwrap() {
                break s;
            }
            if Instant::now() > deadline {
                self.child.kill().unwrap();
                panic!("server ignored SIGINT");
            }
            std::thread::sleep(Duration::from_millis(20));
        };
        let err = self.stderr.take().unwrap().join().unwrap();
        (status.code(), err)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .into()
}

/// `(status, body)` for a GET with an optional bearer key.
pub fn get(agent: &ureq::Agent, url: &str, key: Option<&str>) -> (u16, String) {
    let mut req = agent.get(url);
    if let Some(k) = key {
        req = req.header("Authorization", format!("Bearer {k}"));
    }
    let mut resp = req.call().unwrap();
    let status = resp.status().as_u16();
    (status, resp.body_mut().read_to_string().unwrap())
}
