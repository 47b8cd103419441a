//! PHES: the binary timestamped-event file format.
//!
//! Layout, little-endian throughout, no padding:
//!
//! ```text
//! offset  0  magic           4 bytes  "PHES"
//! offset  4  version         u8       1
//! offset  5  channel count   u8       distinct channel tags present
//! offset  6  duration_ps     u64
//! offset 14  event count     u64
//! offset 22  seed            u64
//! offset 30  records         event count × 10 bytes
//! ```
//!
//! Each record is `channel u8, origin u8, time u64` (picoseconds). Records
//! are stored in canonical stream order, so `read(write(s)) == s` exactly.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use upcon_core::events::{EventStream, Origin, PhotonEvent};

pub const MAGIC: [u8; 4] = *b"PHES";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 30;
pub const RECORD_LEN: usize = 10;

#[derive(Debug, Error)]
pub enum PhesError {
    #[error("bad magic at byte offset 0 (expected \"PHES\")")]
    BadMagic,
    #[error("unsupported version {found} at byte offset 4")]
    BadVersion { found: u8 },
    #[error("truncated file: needed {needed} bytes for {what} at byte offset {offset}")]
    Truncated { offset: usize, needed: usize, what: &'static str },
    #[error("invalid origin tag {value} at byte offset {offset}")]
    BadOrigin { offset: usize, value: u8 },
    #[error("event timestamp out of range at byte offset {offset}")]
    BadTimestamp { offset: usize },
    #[error("records out of canonical order at byte offset {offset}")]
    OutOfOrder { offset: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serialize a stream (with its generating seed) to a writer.
pub fn write_events_to<W: Write>(mut w: W, stream: &EventStream, seed: u64) -> Result<(), PhesError> {
    let channels: BTreeSet<u8> = stream.events().iter().map(|e| e.channel).collect();
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(&MAGIC);
    header.push(VERSION);
    header.push(channels.len() as u8);
    header.extend_from_slice(&(stream.duration() as u64).to_le_bytes());
    header.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    header.extend_from_slice(&seed.to_le_bytes());
    debug_assert_eq!(header.len(), HEADER_LEN);
    w.write_all(&header)?;

    let mut buf = Vec::with_capacity(RECORD_LEN * stream.len().min(1 << 20));
    for e in stream.events() {
        buf.push(e.channel);
        buf.push(e.origin.to_u8());
        buf.extend_from_slice(&(e.time as u64).to_le_bytes());
        if buf.len() >= (1 << 20) {
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_events(path: &Path, stream: &EventStream, seed: u64) -> Result<(), PhesError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_events_to(&mut w, stream, seed)?;
    w.flush()?;
    Ok(())
}

/// Parse a stream back; returns the stream and the recorded seed.
pub fn read_events_from<R: Read>(mut r: R) -> Result<(EventStream, u64), PhesError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    parse_events(&data)
}

pub fn read_events(path: &Path) -> Result<(EventStream, u64), PhesError> {
    let data = std::fs::read(path)?;
    parse_events(&data)
}

pub fn parse_events(data: &[u8]) -> Result<(EventStream, u64), PhesError> {
    if data.len() < 4 {
        return Err(PhesError::Truncated { offset: data.len(), needed: 4 - data.len(), what: "magic" });
    }
    if data[0..4] != MAGIC {
        return Err(PhesError::BadMagic);
    }
    if data.len() < 5 {
        return Err(PhesError::Truncated { offset: 4, needed: 1, what: "version" });
    }
    if data[4] != VERSION {
        return Err(PhesError::BadVersion { found: data[4] });
    }
    if data.len() < HEADER_LEN {
        return Err(PhesError::Truncated {
            offset: data.len(),
            needed: HEADER_LEN - data.len(),
            what: "header",
        });
    }
    let duration = u64::from_le_bytes(data[6..14].try_into().unwrap());
    let count = u64::from_le_bytes(data[14..22].try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(data[22..30].try_into().unwrap());
    if duration > i64::MAX as u64 {
        return Err(PhesError::BadTimestamp { offset: 6 });
    }

    let mut events = Vec::with_capacity(count);
    let mut offset = HEADER_LEN;
    let mut last_key = None;
    for _ in 0..count {
        if data.len() < offset + RECORD_LEN {
            return Err(PhesError::Truncated {
                offset,
                needed: offset + RECORD_LEN - data.len(),
                what: "event record",
            });
        }
        let channel = data[offset];
        let origin = Origin::from_u8(data[offset + 1])
            .ok_or(PhesError::BadOrigin { offset: offset + 1, value: data[offset + 1] })?;
        let time = u64::from_le_bytes(data[offset + 2..offset + 10].try_into().unwrap());
        if time > duration {
            return Err(PhesError::BadTimestamp { offset: offset + 2 });
        }
        let event = PhotonEvent::new(time as i64, channel, origin);
        if let Some(last) = last_key {
            if event.sort_key() < last {
                return Err(PhesError::OutOfOrder { offset });
            }
        }
        last_key = Some(event.sort_key());
        events.push(event);
        offset += RECORD_LEN;
    }
    let stream = EventStream::new(events, duration as i64)
        .expect("order and bounds were validated record by record");
    Ok((stream, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use upcon_core::events::channel;

    fn sample_stream(n: usize) -> EventStream {
        let events = (0..n)
            .map(|i| {
                PhotonEvent::new(
                    i as i64 * 137,
                    if i % 3 == 0 { channel::HBT_A } else { channel::HBT_B },
                    if i % 2 == 0 { Origin::Qd } else { Origin::Dark },
                )
            })
            .collect();
        EventStream::new(events, n as i64 * 137 + 10).unwrap()
    }

    #[test]
    fn empty_stream_round_trips() {
        let s = EventStream::empty(12345);
        let mut buf = Vec::new();
        write_events_to(&mut buf, &s, 99).unwrap();
        assert_eq!(buf.len(), HEADER_LEN);
        let (back, seed) = parse_events(&buf).unwrap();
        assert_eq!(back, s);
        assert_eq!(seed, 99);
    }

    #[test]
    fn large_stream_round_trips_bit_exact() {
        let s = sample_stream(1_000_000);
        let mut buf = Vec::new();
        write_events_to(&mut buf, &s, 7).unwrap();
        let (back, seed) = parse_events(&buf).unwrap();
        assert_eq!(back, s);
        assert_eq!(seed, 7);
        // Writing again produces identical bytes.
        let mut buf2 = Vec::new();
        write_events_to(&mut buf2, &s, 7).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn truncation_is_reported_at_the_exact_offset() {
        let s = sample_stream(10);
        let mut buf = Vec::new();
        write_events_to(&mut buf, &s, 1).unwrap();
        // Cut mid-way through the 4th record.
        let cut = HEADER_LEN + 3 * RECORD_LEN + 4;
        let err = parse_events(&buf[..cut]).unwrap_err();
        match err {
            PhesError::Truncated { offset, what, .. } => {
                assert_eq!(offset, HEADER_LEN + 3 * RECORD_LEN);
                assert_eq!(what, "event record");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_version_are_rejected() {
        let s = sample_stream(2);
        let mut buf = Vec::new();
        write_events_to(&mut buf, &s, 1).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(parse_events(&bad), Err(PhesError::BadMagic)));
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(parse_events(&bad), Err(PhesError::BadVersion { found: 9 })));
    }

    #[test]
    fn bad_origin_is_rejected_with_offset() {
        let s = sample_stream(3);
        let mut buf = Vec::new();
        write_events_to(&mut buf, &s, 1).unwrap();
        buf[HEADER_LEN + RECORD_LEN + 1] = 200;
        match parse_events(&buf).unwrap_err() {
            PhesError::BadOrigin { offset, value } => {
                assert_eq!(offset, HEADER_LEN + RECORD_LEN + 1);
                assert_eq!(value, 200);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.phes");
        let s = sample_stream(500);
        write_events(&path, &s, 42).unwrap();
        let (back, seed) = read_events(&path).unwrap();
        assert_eq!(back, s);
        assert_eq!(seed, 42);
    }
}
