//! Weights file: `TSCRL1`, a little-endian u32 layer-width count, the widths
//! (input first, output last), a u64 parameter count, then the parameters as
//! little-endian f64.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tsc_core::agent::AgentKind;
use tsc_core::nn::{Network, NetworkSpec};

pub const MAGIC: &[u8; 6] = b"TSCRL1";

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{path}: not a weights file (bad magic)")]
    BadMagic { path: PathBuf },
    #[error("{path}: truncated or malformed weights file: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("{path}: network {input}->{output} does not fit the {agent} agent (expects {want_in}->{want_out})")]
    AgentMismatch {
        path: PathBuf,
        agent: &'static str,
        input: usize,
        output: usize,
        want_in: usize,
        want_out: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub fn encode(net: &Network) -> Vec<u8> {
    let dims = net.spec().dims();
    let params = net.params();
    let mut out = Vec::with_capacity(6 + 4 + 4 * dims.len() + 8 + 8 * params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in &dims {
        out.extend_from_slice(&(*d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Network, ModelError> {
    let malformed = |reason: &str| ModelError::Malformed {
        path: path.into(),
        reason: reason.into(),
    };
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(ModelError::BadMagic { path: path.into() });
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
    };
    let n = r.u32().ok_or_else(|| malformed("missing layer count"))? as usize;
    if n < 2 {
        return Err(malformed("fewer than two layer widths"));
    }
    let mut dims = Vec::with_capacity(n.min(64));
    for _ in 0..n {
        dims.push(r.u32().ok_or_else(|| malformed("missing layer width"))? as usize);
    }
    let spec = NetworkSpec::new(dims[0], &dims[1..n - 1], dims[n - 1])
        .map_err(|e| malformed(&e.to_string()))?;
    let count = r.u64().ok_or_else(|| malformed("missing parameter count"))? as usize;
    if count != spec.param_count() {
        return Err(malformed("parameter count does not match the layer widths"));
    }
    let raw = r
        .take(count.checked_mul(8).ok_or_else(|| malformed("parameter count overflows"))?)
        .ok_or_else(|| malformed("parameters cut short"))?;
    if r.pos != bytes.len() {
        return Err(malformed("trailing bytes"));
    }
    let params = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Network::from_params(&spec, params).map_err(|e| malformed(&e.to_string()))
}

pub fn save(net: &Network, path: &Path) -> Result<String, ModelError> {
    let bytes = encode(net);
    std::fs::write(path, &bytes).map_err(|source| ModelError::Io {
        path: path.into(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}

/// Loads weights, checking the geometry against `agent` when given.
pub fn load(path: &Path, agent: Option<AgentKind>) -> Result<Network, ModelError> {
    let bytes = std::fs::read(path).map_err(|source| ModelError::Io {
        path: path.into(),
        source,
    })?;
    let net = decode(&bytes, path)?;
    if let Some(kind) = agent {
        if kind.check_network(&net).is_err() {
            return Err(ModelError::AgentMismatch {
                path: path.into(),
                agent: kind.name(),
                input: net.input_dim(),
                output: net.output_dim(),
                want_in: kind.input_dim(),
                want_out: kind.output_dim(),
            });
        }
    }
    Ok(net)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
