//! Binary snapshot files.
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset | size      | field                                   |
//! |--------|-----------|-----------------------------------------|
//! | 0      | 8         | magic `CMKVSNAP`                        |
//! | 8      | 4         | format version, `u32` = 1               |
//! | 12     | 4         | reserved, zero                          |
//! | 16     | 8         | `n`, `u64`                              |
//! | 24     | 8         | `m`, `u64`                              |
//! | 32     | 8         | `d`, `u64`                              |
//! | 40     | 8         | time `t`, `f64`                         |
//! | 48     | 8         | seed, `u64`                             |
//! | 56     | 32        | SHA-256 digest of the resolved config   |
//! | 88     | `8·n·m·d` | positions, `f64`, particle-major        |
//!
//! Position `(k, j, c)` sits at index `(k·m + j)·d + c`.

use std::io::Write;

use cmkv_core::ParticleEnsemble;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 8] = b"CMKVSNAP";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 88;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub ensemble: ParticleEnsemble,
    pub seed: u64,
    pub config_digest: [u8; 32],
}

/// Parses a hex SHA-256 digest as produced by [`crate::config::hex_sha256`].
pub fn digest_bytes(hex: &str) -> Result<[u8; 32]> {
    let mut out = [0u8; 32];
    if hex.len() != 64 {
        return Err(CliError::Snapshot(format!("digest `{hex}` is not 64 hex digits")));
    }
    for (i, byte) in out.iter_mut().enumerate() {
        *byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
            .map_err(|_| CliError::Snapshot(format!("digest `{hex}` is not hex")))?;
    }
    Ok(out)
}

pub fn encode(snapshot: &Snapshot) -> Vec<u8> {
    let e = &snapshot.ensemble;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * e.positions().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in [e.n(), e.m(), e.d()] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&e.t().to_le_bytes());
    out.extend_from_slice(&snapshot.seed.to_le_bytes());
    out.extend_from_slice(&snapshot.config_digest);
    for x in e.positions() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("slice of eight bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(CliError::Snapshot("not a snapshot file".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("four bytes"));
    if version != VERSION {
        return Err(CliError::Snapshot(format!("unsupported version {version}")));
    }
    let (n, m, d) = (read_u64(bytes, 16), read_u64(bytes, 24), read_u64(bytes, 32));
    let t = f64::from_le_bytes(bytes[40..48].try_into().expect("eight bytes"));
    let seed = read_u64(bytes, 48);
    let config_digest: [u8; 32] = bytes[56..88].try_into().expect("32 bytes");
    let count = n
        .checked_mul(m)
        .and_then(|v| v.checked_mul(d))
        .filter(|&c| c.checked_mul(8).map(|b| b as usize == bytes.len() - HEADER_LEN) == Some(true))
        .ok_or_else(|| CliError::Snapshot(format!("payload does not hold {n}×{m}×{d} values")))?;
    let positions = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .take(count as usize)
        .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
        .collect();
    let ensemble = ParticleEnsemble::new(positions, n as usize, m as usize, d as usize, t)?;
    Ok(Snapshot { ensemble, seed, config_digest })
}

/// Git-style content hash: SHA-256 of `"blob <len>\0"` followed by the bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Long-form CSV with columns `particle, block, component, value`.
pub fn write_csv<W: Write>(ensemble: &ParticleEnsemble, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["particle", "block", "component", "value"])?;
    for k in 0..ensemble.n() {
        for j in 0..ensemble.m() {
            for (c, x) in ensemble.block(k, j).iter().enumerate() {
                w.write_record([k.to_string(), j.to_string(), c.to_string(), x.to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}
