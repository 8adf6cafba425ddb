//! Binary index cache: a fixed header (magic, format version, corpus hash)
//! followed by a bincode payload. A cache whose corpus hash no longer
//! matches the live corpus is treated as absent.

use crate::util::fnv1a64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"FIMCTXIX";
const VERSION: u32 = 1;

/// Content fingerprint of a corpus: order-sensitive over ids and texts.
pub fn corpus_hash(docs: &[(String, String)]) -> u64 {
    let mut acc = fnv1a64(&(docs.len() as u64).to_le_bytes());
    for (id, text) in docs {
        acc ^= fnv1a64(id.as_bytes()).rotate_left(1);
        acc = acc.wrapping_mul(0x100000001b3);
        acc ^= fnv1a64(text.as_bytes());
        acc = acc.wrapping_mul(0x100000001b3);
    }
    acc
}

pub fn save_cache<T: Serialize>(
    path: &Path,
    corpus_hash: u64,
    payload: &T,
) -> std::io::Result<()> {
    let body = bincode::serialize(payload)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(MAGIC)?;
    file.write_all(&VERSION.to_le_bytes())?;
    file.write_all(&corpus_hash.to_le_bytes())?;
    file.write_all(&body)?;
    Ok(())
}

/// `Ok(None)` when the file is absent, carries a different version, or was
/// built from a different corpus — all three mean "rebuild".
pub fn load_cache<T: DeserializeOwned>(
    path: &Path,
    expected_corpus_hash: u64,
) -> std::io::Result<Option<T>> {
    let mut file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut header = [0u8; 20];
    if file.read_exact(&mut header).is_err() {
        return Ok(None);
    }
    if &header[..8] != MAGIC
        || u32::from_le_bytes(header[8..12].try_into().unwrap()) != VERSION
        || u64::from_le_bytes(header[12..20].try_into().unwrap()) != expected_corpus_hash
    {
        return Ok(None);
    }
    let mut body = Vec::new();
    file.read_to_end(&mut body)?;
    Ok(bincode::deserialize(&body).ok())
}
