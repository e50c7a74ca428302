//! Model files.
//!
//! A line-oriented text format:
//!
//! ```text
//! rex-model <format version>
//! layout <feature layout version>
//! config <json>
//! weights <count>
//! <one weight per line>
//! pool <count>
//! <one canonical expression per line>
//! sha256 <hex digest of all preceding bytes>
//! ```
//!
//! Weights are written in shortest round-trip form, so loading a saved
//! model reproduces it exactly.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{Model, TrainConfig};
use crate::features::{FEATURE_LAYOUT_VERSION, PSI_DIM};
use crate::regex::{parse_regex, Pool};
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn encode(model: &Model) -> String {
    let mut s = String::new();
    writeln!(s, "rex-model {MODEL_FORMAT_VERSION}").unwrap();
    writeln!(s, "layout {FEATURE_LAYOUT_VERSION}").unwrap();
    writeln!(s, "config {}", serde_json::to_string(&model.config).unwrap()).unwrap();
    writeln!(s, "weights {}", model.weights.len()).unwrap();
    for w in &model.weights {
        writeln!(s, "{w:?}").unwrap();
    }
    writeln!(s, "pool {}", model.pool.len()).unwrap();
    for t in model.pool.texts() {
        writeln!(s, "{t}").unwrap();
    }
    let digest = hex(&Sha256::digest(s.as_bytes()));
    writeln!(s, "sha256 {digest}").unwrap();
    s
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Model(msg.into())
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| bad(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| bad(format!("expected `{key}`, found {line:?}")))
}

fn count(v: &str, key: &str) -> Result<usize> {
    v.parse().map_err(|_| bad(format!("bad {key} count {v:?}")))
}

pub(crate) fn decode(text: &str) -> Result<Model> {
    let body_end = text
        .rfind("sha256 ")
        .ok_or_else(|| bad("missing checksum"))?;
    let (body, tail) = text.split_at(body_end);
    let want = tail.trim_end().trim_start_matches("sha256 ");
    let got = hex(&Sha256::digest(body.as_bytes()));
    if want != got {
        return Err(bad("checksum mismatch"));
    }
    let mut lines = body.lines();
    let v = header(lines.next(), "rex-model")?;
    if v != MODEL_FORMAT_VERSION.to_string() {
        return Err(bad(format!("format version {v}, expected {MODEL_FORMAT_VERSION}")));
    }
    let v = header(lines.next(), "layout")?;
    if v != FEATURE_LAYOUT_VERSION.to_string() {
        return Err(bad(format!("feature layout {v}, expected {FEATURE_LAYOUT_VERSION}")));
    }
    let config: TrainConfig = serde_json::from_str(header(lines.next(), "config")?)
        .map_err(|e| bad(format!("bad config: {e}")))?;
    let n = count(header(lines.next(), "weights")?, "weight")?;
    if n != PSI_DIM {
        return Err(bad(format!("{n} weights, layout has {PSI_DIM}")));
    }
    let weights = (0..n)
        .map(|_| {
            let l = lines.next().ok_or_else(|| bad("truncated weights"))?;
            l.parse::<f64>().map_err(|_| bad(format!("bad weight {l:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = count(header(lines.next(), "pool")?, "pool")?;
    let mut pool = Pool::new();
    for _ in 0..n {
        let l = lines.next().ok_or_else(|| bad("truncated pool"))?;
        let r = parse_regex(l).map_err(|e| bad(format!("bad pool entry {l:?}: {e}")))?;
        pool.insert(r);
    }
    if pool.len() != n {
        return Err(bad("duplicate pool entries"));
    }
    if lines.next().is_some() {
        return Err(bad("trailing data before checksum"));
    }
    Ok(Model { weights, pool, config })
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, encode(model)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&text).map_err(|e| match e {
        Error::Model(msg) => Error::Model(format!("{}: {msg}", path.display())),
        e => e,
    })
}
