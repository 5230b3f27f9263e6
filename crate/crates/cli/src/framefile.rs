//! Binary frame files.
//!
//! Little-endian layout:
//!
//! ```text
//! header (32 bytes):
//!   magic        4 bytes  "CSNS"
//!   version      u16      currently 1
//!   frame_len    u16      40 or 48
//!   event        u8       0 = event a, 1 = event b
//!   scenario     u8       scenario code (see Scenario::code)
//!   set_id       u32
//!   frame count  u64
//!   reserved     10 bytes zero
//! per frame (8 + 4 * frame_len bytes):
//!   burst_index  u32
//!   scenario     u8
//!   reserved     3 bytes zero
//!   values       frame_len * f32
//! ```
//!
//! One file holds one capture: a single scenario of a single set, so the
//! header's scenario and set id apply to every frame. Round trips are
//! bit-exact.

use std::path::Path;

use cirsense_core::channel::{Event, Scenario};
use cirsense_core::estimator::CirFrame;

use crate::conf::atomic_write;
use crate::error::{io_error, AppError, Result};

pub const MAGIC: [u8; 4] = *b"CSNS";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;
pub const FRAME_META_LEN: usize = 8;

/// Parsed file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameFileHeader {
    pub frame_len: u16,
    pub event: Event,
    pub scenario: Scenario,
    pub set_id: u32,
    pub count: u64,
}

/// Exact on-disk size of a file with `count` frames of `frame_len` values.
pub fn file_size(count: usize, frame_len: usize) -> usize {
    HEADER_LEN + count * (FRAME_META_LEN + 4 * frame_len)
}

/// Serialize frames to bytes, validating uniformity first.
pub fn encode_frames(frames: &[CirFrame]) -> Result<Vec<u8>> {
    let first = frames.first().ok_or_else(|| {
        AppError::Format("refusing to write a file with no frames".into())
    })?;
    let frame_len = first.frame_len();
    if frame_len != 40 && frame_len != 48 {
        return Err(AppError::Format(format!(
            "frame_len: {frame_len} is not a valid frame length (40 or 48)"
        )));
    }
    let scenario = first.label;
    let set_id = first.set_id;
    for f in frames {
        if f.frame_len() != frame_len || f.label != scenario || f.set_id != set_id {
            return Err(AppError::Format(
                "frames in one file must share frame_len, scenario and set_id".into(),
            ));
        }
    }
    let event = scenario.event();
    if frame_len != event.frame_len() {
        return Err(AppError::Format(format!(
            "frame_len: {frame_len} does not match event ({}) which records {}",
            event.name(),
            event.frame_len()
        )));
    }

    let mut bytes = Vec::with_capacity(file_size(frames.len(), frame_len));
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(frame_len as u16).to_le_bytes());
    bytes.push(event.code());
    bytes.push(scenario.code());
    bytes.extend_from_slice(&set_id.to_le_bytes());
    bytes.extend_from_slice(&(frames.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&[0u8; 10]);
    for f in frames {
        bytes.extend_from_slice(&f.burst_index.to_le_bytes());
        bytes.push(f.label.code());
        bytes.extend_from_slice(&[0u8; 3]);
        for v in &f.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(bytes)
}

/// Parse bytes produced by [`encode_frames`].
pub fn decode_frames(bytes: &[u8]) -> Result<(FrameFileHeader, Vec<CirFrame>)> {
    if bytes.len() < HEADER_LEN {
        return Err(AppError::Format(format!(
            "truncated: {} bytes is shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if bytes[0..4] != MAGIC {
        return Err(AppError::Format(format!(
            "magic: expected \"CSNS\", found {:?}",
            &bytes[0..4]
        )));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(AppError::Format(format!(
            "version: {version} unsupported (expected {FORMAT_VERSION})"
        )));
    }
    let frame_len = u16::from_le_bytes([bytes[6], bytes[7]]);
    if frame_len != 40 && frame_len != 48 {
        return Err(AppError::Format(format!(
            "frame_len: {frame_len} is not a valid frame length (40 or 48)"
        )));
    }
    let event = Event::from_code(bytes[8])
        .map_err(|_| AppError::Format(format!("event: unknown code {}", bytes[8])))?;
    let scenario = Scenario::from_code(bytes[9])
        .map_err(|_| AppError::Format(format!("scenario: unknown code {}", bytes[9])))?;
    if frame_len as usize != event.frame_len() {
        return Err(AppError::Format(format!(
            "frame_len: {frame_len} inconsistent with event ({})",
            event.name()
        )));
    }
    if scenario.event() != event {
        return Err(AppError::Format(format!(
            "scenario: `{}` does not belong to event ({})",
            scenario.name(),
            event.name()
        )));
    }
    let set_id = u32::from_le_bytes(bytes[10..14].try_into().unwrap());
    let count = u64::from_le_bytes(bytes[14..22].try_into().unwrap());

    let expected = file_size(count as usize, frame_len as usize);
    if bytes.len() != expected {
        return Err(AppError::Format(format!(
            "truncated: {} bytes for {count} frames of {frame_len} values (expected {expected})",
            bytes.len()
        )));
    }

    let mut frames = Vec::with_capacity(count as usize);
    let stride = FRAME_META_LEN + 4 * frame_len as usize;
    for k in 0..count as usize {
        let at = HEADER_LEN + k * stride;
        let burst_index = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let code = bytes[at + 4];
        if code != scenario.code() {
            return Err(AppError::Format(format!(
                "frame scenario: frame {k} carries code {code}, header says {}",
                scenario.code()
            )));
        }
        let mut values = Vec::with_capacity(frame_len as usize);
        for j in 0..frame_len as usize {
            let o = at + FRAME_META_LEN + 4 * j;
            values.push(f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()));
        }
        frames.push(CirFrame {
            values,
            label: scenario,
            set_id,
            burst_index,
        });
    }
    Ok((
        FrameFileHeader {
            frame_len,
            event,
            scenario,
            set_id,
            count,
        },
        frames,
    ))
}

/// Write a uniform frame list to `path` atomically.
pub fn write_frames(frames: &[CirFrame], path: &Path) -> Result<()> {
    let bytes = encode_frames(frames)
        .map_err(|e| e.in_stage(&path.display().to_string()))?;
    atomic_write(path, &bytes)
}

/// Read a frame file.
pub fn read_frames(path: &Path) -> Result<Vec<CirFrame>> {
    Ok(read_frame_file(path)?.1)
}

/// Read a frame file, returning the header as well.
pub fn read_frame_file(path: &Path) -> Result<(FrameFileHeader, Vec<CirFrame>)> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    decode_frames(&bytes).map_err(|e| e.in_stage(&path.display().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_frames(n: usize, scenario: Scenario, set_id: u32) -> Vec<CirFrame> {
        let len = scenario.event().frame_len();
        (0..n)
            .map(|k| CirFrame {
                values: (0..len).map(|j| (k * 100 + j) as f32 * 0.125 - 3.0).collect(),
                label: scenario,
                set_id,
                burst_index: k as u32,
            })
            .collect()
    }

    #[test]
    fn round_trip_is_exact() {
        let frames = sample_frames(17, Scenario::ConcealedWeapon, 2);
        let bytes = encode_frames(&frames).unwrap();
        let (header, back) = decode_frames(&bytes).unwrap();
        assert_eq!(header.frame_len, 48);
        assert_eq!(header.event, Event::B);
        assert_eq!(header.scenario, Scenario::ConcealedWeapon);
        assert_eq!(header.set_id, 2);
        assert_eq!(header.count, 17);
        assert_eq!(back, frames);
        // And a second encode is bit-identical.
        assert_eq!(encode_frames(&back).unwrap(), bytes);
    }

    #[test]
    fn file_size_arithmetic() {
        let frames = sample_frames(6500, Scenario::NoPerson, 1);
        let bytes = encode_frames(&frames).unwrap();
        assert_eq!(bytes.len(), 32 + 6500 * (8 + 40 * 4));
        assert_eq!(bytes.len(), file_size(6500, 40));
    }

    #[test]
    fn corrupted_magic_is_named() {
        let mut bytes = encode_frames(&sample_frames(3, Scenario::NoPerson, 1)).unwrap();
        bytes[0] = b'X';
        let err = decode_frames(&bytes).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(format!("{err}").contains("magic"));
    }

    #[test]
    fn truncation_is_named() {
        let bytes = encode_frames(&sample_frames(3, Scenario::NoPerson, 1)).unwrap();
        let err = decode_frames(&bytes[..bytes.len() - 5]).unwrap_err();
        assert!(format!("{err}").contains("truncated"));
        let err = decode_frames(&bytes[..10]).unwrap_err();
        assert!(format!("{err}").contains("truncated"));
    }

    #[test]
    fn bad_frame_len_is_named() {
        let mut bytes = encode_frames(&sample_frames(2, Scenario::NoPerson, 1)).unwrap();
        bytes[6] = 39;
        bytes[7] = 0;
        let err = decode_frames(&bytes).unwrap_err();
        assert!(format!("{err}").contains("frame_len"), "{err}");
    }

    #[test]
    fn mixed_frames_are_rejected_on_write() {
        let mut frames = sample_frames(2, Scenario::NoPerson, 1);
        frames.extend(sample_frames(1, Scenario::PersonMoving, 1));
        assert!(encode_frames(&frames).is_err());
        let mut frames = sample_frames(2, Scenario::NoPerson, 1);
        frames[1].set_id = 9;
        assert!(encode_frames(&frames).is_err());
        assert!(encode_frames(&[]).is_err());
    }

    #[test]
    fn toy_frame_lengths_are_rejected() {
        let frames = vec![CirFrame {
            values: vec![1.0, 2.0],
            label: Scenario::NoPerson,
            set_id: 1,
            burst_index: 0,
        }];
        let err = encode_frames(&frames).unwrap_err();
        assert!(format!("{err}").contains("frame_len"));
    }

    #[test]
    fn write_and_read_through_the_filesystem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set1_no_person.csns");
        let frames = sample_frames(64, Scenario::NoPerson, 1);
        write_frames(&frames, &path).unwrap();
        let back = read_frames(&path).unwrap();
        assert_eq!(back, frames);
        // No leftover temp file from the atomic write.
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
