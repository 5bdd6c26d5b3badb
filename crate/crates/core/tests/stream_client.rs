use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use chrono::{TimeZone, Utc};
use crisiswatch_core::ingest::{
    open_stream_source, run_ingest, BackoffPolicy, IngestError, SourceError, StreamConfig, StreamStatus, TweetSource,
};
use crisiswatch_core::wire::WireRecord;
use crisiswatch_core::{normalize_term, Store, SyncPolicy, TermKind, TimeRange, TrackingProfile};

enum Reply {
    Status(u16),
    /// 200 with these body lines, then the connection is dropped.
    Lines(Vec<String>),
}

struct Mock {
    url: String,
    requests: Arc<Mutex<Vec<String>>>,
}

/// Answers connections in order with `script`; later connections get 503.
fn mock(script: Vec<Reply>) -> Mock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = requests.clone();
    thread::spawn(move || {
        let mut script = script.into_iter();
        for conn in listener.incoming() {
            let Ok(conn) = conn else { break };
            let head = read_head(&conn);
            log.lock().unwrap().push(head);
            answer(conn, script.next().unwrap_or(Reply::Status(503)));
        }
    });
    Mock { url, requests }
}

fn read_head(conn: &TcpStream) -> String {
    let mut reader = BufReader::new(conn);
    let mut head = String::new();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
            break;
        }
        head.push_str(&line);
    }
    head
}

fn answer(mut conn: TcpStream, reply: Reply) {
    let _ = match reply {
        Reply::Status(code) => {
            write!(
                conn,
                "HTTP/1.1 {code} Nope\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"
            )
        }
        Reply::Lines(lines) => {
            let mut out =
                String::from("HTTP/1.1 200 OK\r\nContent-Type: application/x-ndjson\r\nConnection: close\r\n\r\n");
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
            conn.write_all(out.as_bytes())
        }
    };
}

fn record(i: u32) -> String {
    WireRecord {
        tweet_id: format!("s{i}"),
        created_at: Utc.timestamp_opt(1_709_500_000 + i64::from(i), 0).unwrap(),
        author_id: "a".into(),
        author_handle: "reporter".into(),
        text: format!("update {i} #measles"),
        like_count: 1,
        retweet_count: 0,
        retweet_of: None,
    }
    .to_line()
}

fn config(url: &str) -> StreamConfig {
    let mut cfg = StreamConfig::new(
        url,
        "secret-token",
        vec![normalize_term(TermKind::Hashtag, "measles").unwrap()],
    );
    cfg.backoff = BackoffPolicy {
        initial: Duration::from_millis(5),
        factor: 2,
        max: Duration::from_millis(40),
    };
    cfg.max_consecutive_failures = Some(3);
    cfg
}

#[test]
fn reconnects_and_drops_replayed_records() {
    let server = mock(vec![
        Reply::Lines(vec![record(1), record(2), String::new(), record(3)]),
        Reply::Status(503),
        Reply::Lines(vec![record(2), record(3), record(4), record(5)]),
    ]);
    let mut src = open_stream_source(config(&server.url)).unwrap();
    let mut ids = Vec::new();
    for _ in 0..5 {
        let rec = src.next_record().unwrap().unwrap();
        ids.push(rec.tweet_id().unwrap().to_owned());
    }
    assert_eq!(ids, ["s1", "s2", "s3", "s4", "s5"]);
    assert!(matches!(src.next_record(), Some(Err(SourceError::Exhausted(3)))));
    assert!(src.next_record().is_none());
    assert!(matches!(src.status(), StreamStatus::Failed(_)));

    let reqs = server.requests.lock().unwrap();
    assert!(
        reqs[0].starts_with("GET /stream?track=%23measles HTTP/1.1"),
        "{}",
        reqs[0]
    );
    assert!(reqs[0]
        .to_ascii_lowercase()
        .contains("authorization: bearer secret-token"));
}

#[test]
fn auth_failure_is_fatal() {
    for code in [401, 403] {
        let server = mock(vec![Reply::Status(code)]);
        let mut src = open_stream_source(config(&server.url)).unwrap();
        assert!(matches!(src.next_record(), Some(Err(SourceError::Auth(c))) if c == code));
        assert!(src.next_record().is_none());
        assert_eq!(server.requests.lock().unwrap().len(), 1);
    }
}

#[test]
fn other_client_errors_are_fatal() {
    let server = mock(vec![Reply::Status(404)]);
    let mut src = open_stream_source(config(&server.url)).unwrap();
    assert!(matches!(src.next_record(), Some(Err(SourceError::Refused(404)))));
}

#[test]
fn close_stops_a_retrying_source() {
    let mut cfg = config("http://127.0.0.1:9");
    cfg.max_consecutive_failures = None;
    cfg.backoff.initial = Duration::from_secs(30);
    let mut src = open_stream_source(cfg).unwrap();
    let handle = src.handle();
    let worker = thread::spawn(move || src.next_record().is_none());
    thread::sleep(Duration::from_millis(200));
    handle.close();
    assert!(worker.join().unwrap());
    assert_eq!(handle.status(), StreamStatus::Closed);
}

#[test]
fn stream_ingest_stores_each_tweet_once() {
    let server = mock(vec![
        Reply::Lines((1..=3).map(record).collect()),
        Reply::Lines((1..=6).map(record).chain(["{bad".to_owned()]).collect()),
    ]);
    let window = TimeRange::new(
        Utc.timestamp_opt(1_709_000_000, 0).unwrap(),
        Utc.timestamp_opt(1_710_000_000, 0).unwrap(),
    )
    .unwrap();
    let profile = TrackingProfile::new(
        "m",
        "Measles",
        vec![normalize_term(TermKind::Hashtag, "measles").unwrap()],
        window,
        true,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path(), SyncPolicy::Always).unwrap();
    let mut src = open_stream_source(config(&server.url)).unwrap();
    let failure = run_ingest(&mut src, &profile, &store).unwrap_err();
    assert!(matches!(failure.error, IngestError::Source(SourceError::Exhausted(_))));
    assert_eq!(failure.report.accepted_count(), 6);
    assert_eq!(failure.report.rejected_count(), 1);
    assert_eq!(store.len("m"), 6);
}
