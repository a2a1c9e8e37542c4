//! `OTMD` model container, laid out like the `OTWT` weight file:
//!
//! ```text
//! "OTMD"  u32 version  u32 payload_len  payload (UTF-8 JSON)  u32 CRC32 (IEEE) of payload
//! ```

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const OTMD_MAGIC: &[u8; 4] = b"OTMD";
pub const OTMD_VERSION: u32 = 1;

pub fn encode<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let payload = serde_json::to_vec(value)?;
    let len = u32::try_from(payload.len())
        .map_err(|_| Error::ModelFormat("model too large".into()))?;
    let mut out = Vec::with_capacity(payload.len() + 16);
    out.extend_from_slice(OTMD_MAGIC);
    out.extend_from_slice(&OTMD_VERSION.to_le_bytes());
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    Ok(out)
}

pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    if bytes.len() < 16 || &bytes[..4] != OTMD_MAGIC {
        return Err(Error::ModelFormat("not an OTMD file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != OTMD_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported OTMD version {version}"
        )));
    }
    let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if bytes.len() != 12 + len + 4 {
        return Err(Error::ModelFormat(format!(
            "payload length {len} does not match file size {}",
            bytes.len()
        )));
    }
    let payload = &bytes[12..12 + len];
    let crc = u32::from_le_bytes(bytes[12 + len..].try_into().unwrap());
    if crc32fast::hash(payload) != crc {
        return Err(Error::ModelFormat("OTMD checksum mismatch".into()));
    }
    Ok(serde_json::from_slice(payload)?)
}
