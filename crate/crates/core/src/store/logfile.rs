//! Append-only, checksummed record log backing one profile shard.
//!
//! File layout: an 8-byte magic header followed by frames of
//! `[len: u32 LE][crc32(payload): u32 LE][payload]`, where the payload is the
//! JSON-encoded stored tweet. A torn or corrupt tail is detected on open and
//! discarded.

use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, ErrorKind, Read, Seek, SeekFrom, Write};
use std::path::Path;

pub(crate) const MAGIC: &[u8; 8] = b"CWLOG\x00\x01\n";
const FRAME_HEADER: usize = 8;
/// Upper bound on a single payload; anything larger is treated as corruption.
const MAX_PAYLOAD: u32 = 1 << 20;

pub(crate) struct Recovered {
    pub payloads: Vec<Vec<u8>>,
    /// Offset one past the last intact frame.
    pub valid_len: u64,
    pub file_len: u64,
}

pub(crate) fn encode_frame(payload: &[u8], out: &mut Vec<u8>) {
    let len = u32::try_from(payload.len()).expect("payload fits u32");
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(payload).to_le_bytes());
    out.extend_from_slice(payload);
}

/// Reads every intact frame. Missing files read as empty.
pub(crate) fn recover(path: &Path) -> io::Result<Recovered> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == ErrorKind::NotFound => {
            return Ok(Recovered {
                payloads: Vec::new(),
                valid_len: 0,
                file_len: 0,
            })
        }
        Err(e) => return Err(e),
    };
    let file_len = file.metadata()?.len();
    let mut reader = BufReader::with_capacity(1 << 16, file);
    let mut magic = [0u8; 8];
    if file_len < MAGIC.len() as u64 {
        return Ok(Recovered {
            payloads: Vec::new(),
            valid_len: 0,
            file_len,
        });
    }
    reader.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(
            ErrorKind::InvalidData,
            format!("{} is not a tweet log", path.display()),
        ));
    }
    let mut payloads = Vec::new();
    let mut offset = MAGIC.len() as u64;
    let mut header = [0u8; FRAME_HEADER];
    loop {
        if file_len - offset < FRAME_HEADER as u64 {
            break;
        }
        reader.read_exact(&mut header)?;
        let len = u32::from_le_bytes(header[..4].try_into().unwrap());
        let crc = u32::from_le_bytes(header[4..].try_into().unwrap());
        if len > MAX_PAYLOAD || file_len - offset - (FRAME_HEADER as u64) < u64::from(len) {
            break;
        }
        let mut payload = vec![0u8; len as usize];
        reader.read_exact(&mut payload)?;
        if crc32fast::hash(&payload) != crc {
            break;
        }
        offset += (FRAME_HEADER as u64) + u64::from(len);
        payloads.push(payload);
    }
    Ok(Recovered {
        payloads,
        valid_len: offset,
        file_len,
    })
}

/// Exclusive appender for one log file.
pub(crate) struct LogWriter {
    file: File,
    len: u64,
}

impl LogWriter {
    /// Opens for append, truncating any torn tail found at recovery.
    pub fn open(path: &Path, recovered: &Recovered) -> io::Result<Self> {
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        let mut len = recovered.valid_len;
        if len < MAGIC.len() as u64 {
            file.set_len(0)?;
            file.seek(SeekFrom::Start(0))?;
            file.write_all(MAGIC)?;
            file.sync_all()?;
            len = MAGIC.len() as u64;
        } else if recovered.file_len > len {
            log::warn!(
                "{}: discarding {} bytes of torn tail",
                path.display(),
                recovered.file_len - len
            );
            file.set_len(len)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::Start(len))?;
        Ok(Self { file, len })
    }

    /// Appends pre-encoded frames; on failure the file is rolled back to its
    /// previous length so no partial frame survives in a live process.
    pub fn append(&mut self, frames: &[u8], sync: bool) -> io::Result<()> {
        let result = self
            .file
            .write_all(frames)
            .and_then(|()| if sync { self.file.sync_data() } else { Ok(()) });
        match result {
            Ok(()) => {
                self.len += frames.len() as u64;
                Ok(())
            }
            Err(e) => {
                let _ = self.file.set_len(self.len);
                let _ = self.file.seek(SeekFrom::Start(self.len));
                Err(e)
            }
        }
    }

    pub fn sync(&mut self) -> io::Result<()> {
        self.file.sync_all()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.log");
        let rec = recover(&path).unwrap();
        assert!(rec.payloads.is_empty());
        let mut w = LogWriter::open(&path, &rec).unwrap();
        let mut buf = Vec::new();
        encode_frame(b"one", &mut buf);
        encode_frame(b"two", &mut buf);
        w.append(&buf, true).unwrap();
        drop(w);

        // torn tail: half a frame
        let mut partial = Vec::new();
        encode_frame(b"three", &mut partial);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(&partial[..6]).unwrap();
        drop(f);

        let rec = recover(&path).unwrap();
        assert_eq!(rec.payloads, vec![b"one".to_vec(), b"two".to_vec()]);
        assert!(rec.file_len > rec.valid_len);
        let w = LogWriter::open(&path, &rec).unwrap();
        drop(w);
        assert_eq!(std::fs::metadata(&path).unwrap().len(), rec.valid_len);
    }

    #[test]
    fn corrupt_checksum_stops_recovery() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.log");
        let mut bytes = MAGIC.to_vec();
        encode_frame(b"good", &mut bytes);
        let bad_at = bytes.len() + FRAME_HEADER;
        encode_frame(b"flipped", &mut bytes);
        bytes[bad_at] ^= 0xff;
        std::fs::write(&path, &bytes).unwrap();
        let rec = recover(&path).unwrap();
        assert_eq!(rec.payloads, vec![b"good".to_vec()]);
    }

    #[test]
    fn foreign_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.log");
        std::fs::write(&path, b"hello world, not a log").unwrap();
        assert_eq!(recover(&path).err().unwrap().kind(), ErrorKind::InvalidData);
    }
}
