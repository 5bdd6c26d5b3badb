//! Kill-and-reopen recovery. The test binary re-executes itself as a child
//! that inserts tweets and then waits to be SIGKILLed.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Command, Stdio};

use chrono::{TimeZone, Utc};
use crisiswatch_core::{Store, SyncPolicy, Tweet, TweetParts};

const CHILD_ENV: &str = "CRISISWATCH_DURABILITY_CHILD";

fn tweet(i: u64) -> Tweet {
    Tweet::new(TweetParts {
        tweet_id: format!("d{i}"),
        created_at: Utc.timestamp_opt(1_709_500_000 + i as i64 * 7, 0).unwrap(),
        author_id: format!("a{}", i % 13),
        author_handle: "someone".into(),
        text: format!("item {i} #measles"),
        like_count: i,
        retweet_count: 0,
        retweet_of: None,
    })
    .unwrap()
}

/// Child entry point; a no-op unless spawned by [`kill_after`].
#[test]
fn durability_child() {
    let Ok(spec) = std::env::var(CHILD_ENV) else { return };
    let (dir, n) = spec.split_once('|').unwrap();
    let n: u64 = n.parse().unwrap();
    let store = Store::open(dir, SyncPolicy::Always).unwrap();
    for i in 0..n {
        store.insert("p", tweet(i)).unwrap();
    }
    println!("inserted {n}");
    std::io::stdout().flush().unwrap();
    loop {
        std::thread::sleep(std::time::Duration::from_secs(60));
    }
}

fn kill_after(dir: &Path, n: u64) {
    let mut child = Command::new(std::env::current_exe().unwrap())
        .args(["--exact", "durability_child", "--nocapture", "--test-threads=1"])
        .env(CHILD_ENV, format!("{}|{n}", dir.display()))
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let out = child.stdout.take().unwrap();
    let mut lines = BufReader::new(out).lines();
    let expect = format!("inserted {n}");
    let ok = lines.any(|l| l.map(|l| l.contains(&expect)).unwrap_or(false));
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(ok, "child did not report completion");
}

fn check_recovered(dir: &Path, n: u64) {
    let store = Store::open(dir, SyncPolicy::Always).unwrap();
    assert_eq!(store.len("p"), n);
    for i in [0, n / 2, n - 1] {
        assert_eq!(store.get("p", &format!("d{i}")).unwrap().as_ref(), &tweet(i));
    }
}

#[test]
fn sigkill_loses_nothing_that_was_acknowledged() {
    for n in [1, 100, 10_000] {
        let dir = tempfile::tempdir().unwrap();
        kill_after(dir.path(), n);
        check_recovered(dir.path(), n);
    }
}

#[test]
fn torn_tail_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    {
        let store = Store::open(dir.path(), SyncPolicy::Always).unwrap();
        for i in 0..50 {
            store.insert("p", tweet(i)).unwrap();
        }
    }
    let log = dir.path().join("profiles").join("p.log");
    let mut f = OpenOptions::new().append(true).open(&log).unwrap();
    // A frame header promising 400 bytes followed by only a few.
    f.write_all(&400u32.to_le_bytes()).unwrap();
    f.write_all(&[1, 2, 3, 4, b'{', b'"']).unwrap();
    drop(f);
    check_recovered(dir.path(), 50);
    {
        let store = Store::open(dir.path(), SyncPolicy::Always).unwrap();
        store.insert("p", tweet(50)).unwrap();
    }
    check_recovered(dir.path(), 51);
}

#[test]
fn corrupt_tail_frame_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    {
        let store = Store::open(dir.path(), SyncPolicy::Always).unwrap();
        for i in 0..10 {
            store.insert("p", tweet(i)).unwrap();
        }
    }
    let log = dir.path().join("profiles").join("p.log");
    let mut bytes = std::fs::read(&log).unwrap();
    let last = bytes.len() - 3;
    bytes[last] ^= 0xff;
    std::fs::write(&log, bytes).unwrap();
    check_recovered(dir.path(), 9);
}
