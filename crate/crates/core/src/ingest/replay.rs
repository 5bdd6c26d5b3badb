use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use super::{SourceError, SourceKind, TweetSource};
use crate::wire::{RawBody, RawRecord};

/// Newline-delimited replay file. Blank lines are skipped; every other line
/// is one record, malformed or not.
pub struct ReplaySource {
    path: PathBuf,
    reader: BufReader<File>,
    position: u64,
    buf: Vec<u8>,
    done: bool,
}

pub fn open_replay_source(path: impl AsRef<Path>) -> Result<ReplaySource, SourceError> {
    let path = path.as_ref().to_owned();
    let file = File::open(&path).map_err(|source| SourceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(ReplaySource {
        path,
        reader: BufReader::with_capacity(1 << 16, file),
        position: 0,
        buf: Vec::new(),
        done: false,
    })
}

impl TweetSource for ReplaySource {
    fn kind(&self) -> SourceKind {
        SourceKind::Replay
    }

    fn next_record(&mut self) -> Option<Result<RawRecord, SourceError>> {
        while !self.done {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    let line = trim_ascii(&self.buf);
                    if line.is_empty() {
                        continue;
                    }
                    self.position += 1;
                    let record = match std::str::from_utf8(line) {
                        Ok(s) => RawRecord::parse(self.position, s),
                        Err(e) => RawRecord {
                            position: self.position,
                            body: RawBody::Malformed(format!("invalid UTF-8: {e}")),
                        },
                    };
                    return Some(Ok(record));
                }
                Err(source) => {
                    self.done = true;
                    return Some(Err(SourceError::Io {
                        path: self.path.display().to_string(),
                        source,
                    }));
                }
            }
        }
        None
    }
}

fn trim_ascii(b: &[u8]) -> &[u8] {
    let start = b.iter().position(|c| !c.is_ascii_whitespace()).unwrap_or(b.len());
    let end = b
        .iter()
        .rposition(|c| !c.is_ascii_whitespace())
        .map_or(start, |i| i + 1);
    &b[start..end]
}
