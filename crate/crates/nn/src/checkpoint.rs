//! Versioned checkpoint container.
//!
//! Layout: the 8-byte magic `MCGANCKP`, a little-endian `u32` format version,
//! a little-endian `u64` header length, a JSON header, then every tensor's
//! elements as little-endian `f64` in header order. The header records the
//! content hash of each stored network spec; loading parameters against a
//! different spec is refused.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::optim::Adam;
use crate::params::{Mode, ParamSet};
use crate::spec::NetworkSpec;
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"MCGANCKP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Checkpoint {
    pub iteration: u64,
    pub spec_hashes: BTreeMap<String, String>,
    pub tensors: BTreeMap<String, Tensor>,
    pub meta: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    iteration: u64,
    spec_hashes: BTreeMap<String, String>,
    meta: BTreeMap<String, serde_json::Value>,
    tensors: Vec<TensorEntry>,
}

fn ckpt_err(path: &Path, reason: impl Into<String>) -> NnError {
    NnError::Checkpoint {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

impl Checkpoint {
    pub fn new(iteration: u64) -> Self {
        Checkpoint {
            iteration,
            ..Default::default()
        }
    }

    /// Stores a parameter set under `prefix`, tagged with the spec hash.
    pub fn put_params(&mut self, prefix: &str, spec: &NetworkSpec, params: &ParamSet) {
        self.spec_hashes.insert(prefix.to_string(), spec.hash_hex());
        for (name, t) in &params.params {
            self.tensors.insert(format!("{prefix}/param/{name}"), t.clone());
        }
        for (name, t) in &params.buffers {
            self.tensors.insert(format!("{prefix}/buffer/{name}"), t.clone());
        }
        self.put_meta(&format!("{prefix}/mode"), &params.mode);
    }

    /// Restores a parameter set, refusing on spec-hash mismatch.
    pub fn params(&self, prefix: &str, spec: &NetworkSpec) -> Result<ParamSet> {
        let here = std::path::PathBuf::from(prefix);
        let stored = self
            .spec_hashes
            .get(prefix)
            .ok_or_else(|| ckpt_err(&here, "no network stored under this name"))?;
        let expected = spec.hash_hex();
        if *stored != expected {
            return Err(ckpt_err(
                &here,
                format!("spec hash mismatch: checkpoint {stored}, requested {expected}"),
            ));
        }
        let collect = |kind: &str| -> BTreeMap<String, Tensor> {
            let lead = format!("{prefix}/{kind}/");
            self.tensors
                .iter()
                .filter_map(|(k, t)| k.strip_prefix(&lead).map(|n| (n.to_string(), t.clone())))
                .collect()
        };
        let mode = self
            .meta::<Mode>(&format!("{prefix}/mode"))
            .unwrap_or(Mode::Train);
        let set = ParamSet {
            params: collect("param"),
            buffers: collect("buffer"),
            mode,
        };
        set.check_against(spec)?;
        Ok(set)
    }

    pub fn put_adam(&mut self, prefix: &str, opt: &Adam) {
        for (name, t) in &opt.first_moment {
            self.tensors.insert(format!("{prefix}/m/{name}"), t.clone());
        }
        for (name, t) in &opt.second_moment {
            self.tensors.insert(format!("{prefix}/v/{name}"), t.clone());
        }
        self.put_meta(&format!("{prefix}/config"), &opt.config);
        self.put_meta(&format!("{prefix}/step"), &opt.step);
    }

    pub fn adam(&self, prefix: &str) -> Result<Adam> {
        let here = std::path::PathBuf::from(prefix);
        let config = self
            .meta(&format!("{prefix}/config"))
            .ok_or_else(|| ckpt_err(&here, "no optimizer state"))?;
        let step = self.meta(&format!("{prefix}/step")).unwrap_or(0);
        let collect = |kind: &str| -> BTreeMap<String, Tensor> {
            let lead = format!("{prefix}/{kind}/");
            self.tensors
                .iter()
                .filter_map(|(k, t)| k.strip_prefix(&lead).map(|n| (n.to_string(), t.clone())))
                .collect()
        };
        Ok(Adam {
            config,
            step,
            first_moment: collect("m"),
            second_moment: collect("v"),
        })
    }

    pub fn put_meta<T: Serialize + ?Sized>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("checkpoint metadata serializes");
        self.meta.insert(key.to_string(), v);
    }

    pub fn meta<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        self.meta
            .get(key)
            .and_then(|v| serde_json::from_value(v.clone()).ok())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            iteration: self.iteration,
            spec_hashes: self.spec_hashes.clone(),
            meta: self.meta.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|(name, t)| TensorEntry {
                    name: name.clone(),
                    shape: t.shape().to_vec(),
                })
                .collect(),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        let payload: usize = self.tensors.values().map(Tensor::len).sum();
        let mut out = Vec::with_capacity(20 + header.len() + 8 * payload);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for t in self.tensors.values() {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| ckpt_err(path, "truncated before magic"))?;
        if &magic != MAGIC {
            return Err(ckpt_err(path, "not a checkpoint (bad magic)"));
        }
        let mut u32b = [0u8; 4];
        r.read_exact(&mut u32b)
            .map_err(|_| ckpt_err(path, "truncated before version"))?;
        let version = u32::from_le_bytes(u32b);
        if version != FORMAT_VERSION {
            return Err(ckpt_err(
                path,
                format!("unsupported format version {version} (expected {FORMAT_VERSION})"),
            ));
        }
        let mut u64b = [0u8; 8];
        r.read_exact(&mut u64b)
            .map_err(|_| ckpt_err(path, "truncated before header"))?;
        let hlen = u64::from_le_bytes(u64b) as usize;
        if r.len() < hlen {
            return Err(ckpt_err(path, "truncated header"));
        }
        let header: Header = serde_json::from_slice(&r[..hlen])
            .map_err(|e| ckpt_err(path, format!("malformed header: {e}")))?;
        r = &r[hlen..];
        let mut tensors = BTreeMap::new();
        for entry in header.tensors {
            let n: usize = entry.shape.iter().product();
            if r.len() < 8 * n {
                return Err(ckpt_err(path, format!("truncated data for {}", entry.name)));
            }
            let data = r[..8 * n]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            r = &r[8 * n..];
            tensors.insert(entry.name, Tensor::from_vec(&entry.shape, data)?);
        }
        if !r.is_empty() {
            return Err(ckpt_err(path, format!("{} trailing bytes", r.len())));
        }
        Ok(Checkpoint {
            iteration: header.iteration,
            spec_hashes: header.spec_hashes,
            tensors,
            meta: header.meta,
        })
    }

    /// Writes atomically via a sibling temporary file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |source| NnError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io)?;
        }
        let tmp = path.with_extension("ckpt.tmp");
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(&self.to_bytes()).map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| NnError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes, path)
    }
}
