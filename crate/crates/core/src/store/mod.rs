//! Durable, profile-partitioned tweet storage.
//!
//! Directory layout under the store root:
//!
//! ```text
//! FORMAT                    format marker, "crisiswatch-store 1"
//! LOCK                      held exclusively by the read-write owner
//! profiles/<profile_id>.log append-only checksummed tweet log per profile
//! ```
//!
//! Each profile shard keeps an in-memory ordered index keyed by
//! `(created_at, tweet_id)` that is rebuilt from its log on open.
//!
//! Pagination is *live*: a cursor is the last key returned, so a tweet
//! inserted after a cursor was issued shows up in later pages only if its key
//! sorts after that cursor. Pages already fetched never change.

mod cursor;
mod logfile;

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io;
use std::ops::Bound;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};

pub use cursor::Cursor;

use crate::model::{validate_profile_id, ModelError, TimeRange, Tweet};
use logfile::{LogWriter, Recovered};

const FORMAT_MARKER: &str = "crisiswatch-store 1\n";
pub const MAX_PAGE_SIZE: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("store at {0} is locked by another process")]
    Locked(PathBuf),
    #[error("{0} is not a crisiswatch store")]
    NotAStore(PathBuf),
    #[error("store is read-only")]
    ReadOnly,
    #[error("corrupt record in {path}: {detail}")]
    Corrupt { path: PathBuf, detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("page size {0} outside [1, {MAX_PAGE_SIZE}]")]
    InvalidPageSize(usize),
    #[error("invalid cursor")]
    InvalidCursor,
}

impl StoreError {
    fn io(path: &Path, source: io::Error) -> Self {
        StoreError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

/// When appended records are forced to stable storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncPolicy {
    /// `fsync` before every insert call returns.
    #[default]
    Always,
    /// Leave flushing to the OS; survives process crashes, not power loss.
    Os,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub items: Vec<Arc<Tweet>>,
    pub next_cursor: Option<Cursor>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct TweetKey {
    created_at: DateTime<Utc>,
    tweet_id: String,
}

impl TweetKey {
    fn of(t: &Tweet) -> Self {
        Self {
            created_at: t.created_at(),
            tweet_id: t.tweet_id().to_owned(),
        }
    }

    /// Smallest key at instant `t`; tweet ids are never empty.
    fn floor(t: DateTime<Utc>) -> Self {
        Self {
            created_at: t,
            tweet_id: String::new(),
        }
    }
}

#[derive(Default)]
struct ShardIndex {
    by_key: BTreeMap<TweetKey, Arc<Tweet>>,
    by_id: HashMap<String, DateTime<Utc>>,
}

impl ShardIndex {
    fn insert(&mut self, tweet: Arc<Tweet>) -> bool {
        if self.by_id.contains_key(tweet.tweet_id()) {
            return false;
        }
        self.by_id.insert(tweet.tweet_id().to_owned(), tweet.created_at());
        self.by_key.insert(TweetKey::of(&tweet), tweet);
        true
    }

    fn range(&self, range: TimeRange, after: Option<&TweetKey>) -> impl Iterator<Item = &Arc<Tweet>> {
        let floor = TweetKey::floor(range.start());
        let lower = match after {
            Some(k) if *k >= floor => Bound::Excluded(k.clone()),
            _ => Bound::Included(floor),
        };
        let upper = Bound::Excluded(TweetKey::floor(range.end()));
        let empty = match (&lower, &upper) {
            (Bound::Included(l) | Bound::Excluded(l), Bound::Excluded(u)) => l >= u,
            _ => false,
        };
        let iter = (!empty).then(|| self.by_key.range((lower, upper)).map(|(_, t)| t));
        iter.into_iter().flatten()
    }
}

struct Shard {
    path: PathBuf,
    writer: Option<Mutex<LogWriter>>,
    index: RwLock<ShardIndex>,
}

impl Shard {
    fn load(path: PathBuf, writable: bool) -> Result<Self> {
        let recovered: Recovered = logfile::recover(&path).map_err(|e| StoreError::io(&path, e))?;
        let mut index = ShardIndex::default();
        for payload in &recovered.payloads {
            let tweet: Tweet = serde_json::from_slice(payload).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                detail: e.to_string(),
            })?;
            index.insert(Arc::new(tweet));
        }
        let writer = if writable {
            Some(Mutex::new(
                LogWriter::open(&path, &recovered).map_err(|e| StoreError::io(&path, e))?,
            ))
        } else {
            None
        };
        Ok(Self {
            path,
            writer,
            index: RwLock::new(index),
        })
    }
}

/// Handle over a store directory. Cheap to share behind an `Arc`; all methods
/// take `&self`.
pub struct Store {
    root: PathBuf,
    sync: SyncPolicy,
    writable: bool,
    shards: RwLock<HashMap<String, Arc<Shard>>>,
    _lock: Option<File>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("root", &self.root)
            .field("writable", &self.writable)
            .finish_non_exhaustive()
    }
}

impl Store {
    /// Opens (creating if needed) a store for reading and writing. Only one
    /// process may hold a store open for writing.
    pub fn open(root: impl AsRef<Path>, sync: SyncPolicy) -> Result<Self> {
        let root = root.as_ref().to_owned();
        let profiles = root.join("profiles");
        fs::create_dir_all(&profiles).map_err(|e| StoreError::io(&profiles, e))?;
        let marker = root.join("FORMAT");
        match fs::read_to_string(&marker) {
            Ok(s) if s == FORMAT_MARKER => {}
            Ok(_) => return Err(StoreError::NotAStore(root)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                fs::write(&marker, FORMAT_MARKER).map_err(|e| StoreError::io(&marker, e))?;
            }
            Err(e) => return Err(StoreError::io(&marker, e)),
        }
        let lock_path = root.join("LOCK");
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(|e| StoreError::io(&lock_path, e))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(root)),
            Err(fs::TryLockError::Error(e)) => return Err(StoreError::io(&lock_path, e)),
        }
        let mut store = Self {
            root,
            sync,
            writable: true,
            shards: RwLock::new(HashMap::new()),
            _lock: Some(lock),
        };
        store.load_shards()?;
        Ok(store)
    }

    /// Opens an existing store without taking the write lock. Sees the state
    /// committed at open time.
    pub fn open_read_only(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_owned();
        match fs::read_to_string(root.join("FORMAT")) {
            Ok(s) if s == FORMAT_MARKER => {}
            _ => return Err(StoreError::NotAStore(root)),
        }
        let mut store = Self {
            root,
            sync: SyncPolicy::Os,
            writable: false,
            shards: RwLock::new(HashMap::new()),
            _lock: None,
        };
        store.load_shards()?;
        Ok(store)
    }

    fn load_shards(&mut self) -> Result<()> {
        let dir = self.root.join("profiles");
        let entries = fs::read_dir(&dir).map_err(|e| StoreError::io(&dir, e))?;
        let shards = self.shards.get_mut().expect("shard map lock");
        for entry in entries {
            let entry = entry.map_err(|e| StoreError::io(&dir, e))?;
            let path = entry.path();
            let Some(id) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(".log"))
            else {
                continue;
            };
            if validate_profile_id(id).is_err() {
                continue;
            }
            let shard = Shard::load(path.clone(), self.writable)?;
            shards.insert(id.to_owned(), Arc::new(shard));
        }
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn shard(&self, profile_id: &str) -> Option<Arc<Shard>> {
        self.shards.read().expect("shard map lock").get(profile_id).cloned()
    }

    fn shard_for_write(&self, profile_id: &str) -> Result<Arc<Shard>> {
        if !self.writable {
            return Err(StoreError::ReadOnly);
        }
        validate_profile_id(profile_id)?;
        if let Some(s) = self.shard(profile_id) {
            return Ok(s);
        }
        let mut shards = self.shards.write().expect("shard map lock");
        if let Some(s) = shards.get(profile_id) {
            return Ok(s.clone());
        }
        let path = self.root.join("profiles").join(format!("{profile_id}.log"));
        let shard = Arc::new(Shard::load(path, true)?);
        shards.insert(profile_id.to_owned(), shard.clone());
        Ok(shard)
    }

    /// Inserts one tweet; durable on return under [`SyncPolicy::Always`].
    pub fn insert(&self, profile_id: &str, tweet: Tweet) -> Result<InsertOutcome> {
        Ok(self.insert_batch(profile_id, vec![tweet])?[0])
    }

    /// Inserts many tweets with a single write and sync. Each record is still
    /// atomic on its own: after a crash any prefix of the batch may survive,
    /// never a partial record.
    pub fn insert_batch(&self, profile_id: &str, tweets: Vec<Tweet>) -> Result<Vec<InsertOutcome>> {
        let shard = self.shard_for_write(profile_id)?;
        let writer = shard.writer.as_ref().ok_or(StoreError::ReadOnly)?;
        let mut writer = writer.lock().expect("log writer lock");

        let mut outcomes = Vec::with_capacity(tweets.len());
        let mut fresh: Vec<Arc<Tweet>> = Vec::new();
        let mut frames = Vec::new();
        {
            let index = shard.index.read().expect("index lock");
            let mut batch_ids = std::collections::HashSet::new();
            for tweet in tweets {
                if index.by_id.contains_key(tweet.tweet_id()) || !batch_ids.insert(tweet.tweet_id().to_owned()) {
                    outcomes.push(InsertOutcome::Duplicate);
                    continue;
                }
                let payload = serde_json::to_vec(&tweet).expect("tweet serializes");
                logfile::encode_frame(&payload, &mut frames);
                fresh.push(Arc::new(tweet));
                outcomes.push(InsertOutcome::Inserted);
            }
        }
        if fresh.is_empty() {
            return Ok(outcomes);
        }
        writer
            .append(&frames, self.sync == SyncPolicy::Always)
            .map_err(|e| StoreError::io(&shard.path, e))?;
        let mut index = shard.index.write().expect("index lock");
        for tweet in fresh {
            index.insert(tweet);
        }
        Ok(outcomes)
    }

    pub fn get(&self, profile_id: &str, tweet_id: &str) -> Option<Arc<Tweet>> {
        let shard = self.shard(profile_id)?;
        let index = shard.index.read().expect("index lock");
        let created_at = *index.by_id.get(tweet_id)?;
        index
            .by_key
            .get(&TweetKey {
                created_at,
                tweet_id: tweet_id.to_owned(),
            })
            .cloned()
    }

    pub fn contains(&self, profile_id: &str, tweet_id: &str) -> bool {
        self.shard(profile_id)
            .is_some_and(|s| s.index.read().expect("index lock").by_id.contains_key(tweet_id))
    }

    /// One page of tweets with `created_at` in `range`, ordered by
    /// `(created_at, tweet_id)`.
    pub fn query(&self, profile_id: &str, range: TimeRange, cursor: Option<&Cursor>, page_size: usize) -> Result<Page> {
        if !(1..=MAX_PAGE_SIZE).contains(&page_size) {
            return Err(StoreError::InvalidPageSize(page_size));
        }
        let Some(shard) = self.shard(profile_id) else {
            return Ok(Page {
                items: Vec::new(),
                next_cursor: None,
            });
        };
        let index = shard.index.read().expect("index lock");
        let mut items: Vec<Arc<Tweet>> = index
            .range(range, cursor.map(Cursor::key))
            .take(page_size + 1)
            .cloned()
            .collect();
        let next_cursor = if items.len() > page_size {
            items.truncate(page_size);
            items.last().map(|t| Cursor::new(TweetKey::of(t)))
        } else {
            None
        };
        Ok(Page { items, next_cursor })
    }

    pub fn count(&self, profile_id: &str, range: TimeRange) -> u64 {
        self.shard(profile_id).map_or(0, |s| {
            s.index.read().expect("index lock").range(range, None).count() as u64
        })
    }

    /// Snapshot of every tweet in `range`, in key order.
    pub fn scan(&self, profile_id: &str, range: TimeRange) -> Vec<Arc<Tweet>> {
        self.shard(profile_id).map_or_else(Vec::new, |s| {
            s.index
                .read()
                .expect("index lock")
                .range(range, None)
                .cloned()
                .collect()
        })
    }

    /// Total tweets stored for a profile.
    pub fn len(&self, profile_id: &str) -> u64 {
        self.shard(profile_id)
            .map_or(0, |s| s.index.read().expect("index lock").by_key.len() as u64)
    }

    /// Profile ids that have a shard, sorted.
    pub fn profile_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.shards.read().expect("shard map lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Forces every shard log to stable storage.
    pub fn flush(&self) -> Result<()> {
        let shards: Vec<Arc<Shard>> = self.shards.read().expect("shard map lock").values().cloned().collect();
        for shard in shards {
            if let Some(w) = &shard.writer {
                w.lock()
                    .expect("log writer lock")
                    .sync()
                    .map_err(|e| StoreError::io(&shard.path, e))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TweetParts;
    use chrono::TimeZone;

    fn ts(s: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(s, 0).unwrap()
    }

    fn tweet(id: &str, at: i64) -> Tweet {
        Tweet::new(TweetParts {
            tweet_id: id.into(),
            created_at: ts(at),
            author_id: "a".into(),
            author_handle: "a".into(),
            text: format!("tweet {id} #measles"),
            like_count: 1,
            retweet_count: 0,
            retweet_of: None,
        })
        .unwrap()
    }

    fn all() -> TimeRange {
        TimeRange::new(ts(0), ts(1_000_000)).unwrap()
    }

    #[test]
    fn insert_get_duplicate_isolation() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), SyncPolicy::Always).unwrap();
        let t = tweet("1", 10);
        assert_eq!(store.insert("p", t.clone()).unwrap(), InsertOutcome::Inserted);
        assert_eq!(store.insert("p", t.clone()).unwrap(), InsertOutcome::Duplicate);
        assert_eq!(store.len("p"), 1);
        assert_eq!(*store.get("p", "1").unwrap(), t);
        assert!(store.get("p", "2").is_none());
        assert!(store.get("q", "1").is_none());
    }

    #[test]
    fn duplicate_with_other_timestamp_keeps_original() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), SyncPolicy::Os).unwrap();
        store.insert("p", tweet("1", 10)).unwrap();
        let outcomes = store
            .insert_batch("p", vec![tweet("1", 99), tweet("2", 5), tweet("2", 6)])
            .unwrap();
        assert_eq!(
            outcomes,
            [
                InsertOutcome::Duplicate,
                InsertOutcome::Inserted,
                InsertOutcome::Duplicate
            ]
        );
        assert_eq!(store.get("p", "1").unwrap().created_at(), ts(10));
        assert_eq!(store.count("p", all()), 2);
    }

    #[test]
    fn pagination_2_2_1() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), SyncPolicy::Os).unwrap();
        for i in 0..5 {
            store.insert("p", tweet(&i.to_string(), 100 + i)).unwrap();
        }
        let mut sizes = Vec::new();
        let mut cursor = None;
        loop {
            let page = store.query("p", all(), cursor.as_ref(), 2).unwrap();
            sizes.push(page.items.len());
            match page.next_cursor {
                Some(c) => cursor = Some(c),
                None => break,
            }
        }
        assert_eq!(sizes, [2, 2, 1]);
    }

    #[test]
    fn range_is_half_open_and_validated() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), SyncPolicy::Os).unwrap();
        store.insert("p", tweet("a", 10)).unwrap();
        store.insert("p", tweet("b", 20)).unwrap();
        let r = TimeRange::new(ts(10), ts(20)).unwrap();
        let page = store.query("p", r, None, 10).unwrap();
        assert_eq!(page.items.len(), 1);
        assert_eq!(page.items[0].tweet_id(), "a");
        let empty = TimeRange::new(ts(15), ts(15)).unwrap();
        let page = store.query("p", empty, None, 10).unwrap();
        assert!(page.items.is_empty() && page.next_cursor.is_none());
        assert!(matches!(
            store.query("p", r, None, 0),
            Err(StoreError::InvalidPageSize(0))
        ));
        assert!(matches!(
            store.query("p", r, None, 1001),
            Err(StoreError::InvalidPageSize(_))
        ));
    }

    #[test]
    fn live_pagination_semantics() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), SyncPolicy::Os).unwrap();
        for (id, at) in [("a", 10), ("b", 20), ("c", 30)] {
            store.insert("p", tweet(id, at)).unwrap();
        }
        let first = store.query("p", all(), None, 2).unwrap();
        let cursor = first.next_cursor.unwrap();
        // behind the cursor: never shown; ahead of it: shown on later pages
        store.insert("p", tweet("early", 5)).unwrap();
        store.insert("p", tweet("late", 40)).unwrap();
        let rest = store.query("p", all(), Some(&cursor), 10).unwrap();
        let ids: Vec<&str> = rest.items.iter().map(|t| t.tweet_id()).collect();
        assert_eq!(ids, ["c", "late"]);
    }

    #[test]
    fn reopen_recovers_and_lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = Store::open(dir.path(), SyncPolicy::Always).unwrap();
            store.insert("p", tweet("1", 1)).unwrap();
            store.insert("q", tweet("2", 2)).unwrap();
            assert!(matches!(
                Store::open(dir.path(), SyncPolicy::Always),
                Err(StoreError::Locked(_))
            ));
            let ro = Store::open_read_only(dir.path()).unwrap();
            assert_eq!(ro.len("p"), 1);
            assert!(matches!(ro.insert("p", tweet("3", 3)), Err(StoreError::ReadOnly)));
        }
        let store = Store::open(dir.path(), SyncPolicy::Always).unwrap();
        assert_eq!(store.profile_ids(), ["p", "q"]);
        assert_eq!(store.get("q", "2").unwrap().tweet_id(), "2");
    }

    #[test]
    fn rejects_foreign_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("FORMAT"), "something else").unwrap();
        assert!(matches!(
            Store::open(dir.path(), SyncPolicy::Os),
            Err(StoreError::NotAStore(_))
        ));
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(
            Store::open_read_only(empty.path()),
            Err(StoreError::NotAStore(_))
        ));
    }

    #[test]
    fn invalid_profile_id_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), SyncPolicy::Os).unwrap();
        assert!(matches!(
            store.insert("../x", tweet("1", 1)),
            Err(StoreError::Model(ModelError::InvalidProfileId(_)))
        ));
    }
}
