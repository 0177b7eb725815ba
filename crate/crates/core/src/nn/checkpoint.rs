//! Binary checkpoint container.
//!
//! Layout: `VELOCKPT` magic, u32 LE header length, JSON header, then every
//! tensor as raw little-endian f32 in the order listed in the header.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mlp::{Dense, Mlp};
use super::params::{ArchConfig, ParameterSet};
use crate::error::{Error, Result};
use crate::sim::EnvConfig;

const MAGIC: &[u8; 8] = b"VELOCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Which latent source a policy uses at deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Teacher,
    Student,
    #[serde(alias = "dr")]
    DomainRandomized,
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Teacher => "teacher",
            Self::Student => "student",
            Self::DomainRandomized => "domain_randomized",
        })
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "teacher" => Ok(Self::Teacher),
            "student" => Ok(Self::Student),
            "dr" | "domain_randomized" => Ok(Self::DomainRandomized),
            other => Err(Error::InvalidConfig(format!("unknown policy kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub version: u32,
    pub kind: PolicyKind,
    pub config_hash: String,
    pub body_hash: String,
    pub step: u64,
    pub arch: ArchConfig,
    /// Simulator the policy was trained in; the encoder normalizes domain
    /// parameters against its ranges.
    #[serde(default)]
    pub env: EnvConfig,
    pub tensors: Vec<TensorInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: ParameterSet<f32>,
}

/// SHA-256 over the body's f32 weights, hex encoded.
pub fn body_hash(body: &Mlp<f32>) -> String {
    let mut h = Sha256::new();
    for s in body.slices() {
        for v in s {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn named_tensors(p: &ParameterSet<f32>) -> Vec<(String, Vec<usize>, &[f32])> {
    let mut out = Vec::new();
    for (name, net) in [
        ("encoder", &p.encoder),
        ("adaptation", &p.adaptation),
        ("body", &p.body),
        ("value", &p.value),
    ] {
        for (l, layer) in net.layers().iter().enumerate() {
            out.push((
                format!("{name}.{l}.weight"),
                layer.weight.shape().to_vec(),
                layer.weight.as_slice().expect("contiguous"),
            ));
            out.push((
                format!("{name}.{l}.bias"),
                layer.bias.shape().to_vec(),
                layer.bias.as_slice().expect("contiguous"),
            ));
        }
    }
    out.push(("log_std".into(), vec![p.log_std.len()], p.log_std.as_slice().expect("contiguous")));
    out
}

impl Checkpoint {
    pub fn new(
        kind: PolicyKind,
        config_hash: String,
        step: u64,
        arch: ArchConfig,
        env: EnvConfig,
        params: ParameterSet<f32>,
    ) -> Self {
        let tensors = named_tensors(&params)
            .into_iter()
            .map(|(name, shape, _)| TensorInfo { name, shape })
            .collect();
        Self {
            header: CheckpointHeader {
                version: CHECKPOINT_VERSION,
                kind,
                config_hash,
                body_hash: body_hash(&params.body),
                step,
                arch,
                env,
                tensors,
            },
            params,
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&self.header)?;
        let mut buf = Vec::with_capacity(16 + header.len() + self.params.num_params() * 4);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(header.len() as u32).to_le_bytes());
        buf.extend_from_slice(&header);
        for (_, _, data) in named_tensors(&self.params) {
            for v in data {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(Error::Checkpoint("missing magic".into()));
        }
        let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        let body = bytes
            .get(12..12 + hlen)
            .ok_or_else(|| Error::Checkpoint("truncated header".into()))?;
        let header: CheckpointHeader = serde_json::from_slice(body)?;
        if header.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", header.version)));
        }
        let mut params = ParameterSet::<f32>::zeros(&header.arch)?;
        let expected = named_tensors(&params);
        if expected.len() != header.tensors.len() {
            return Err(Error::Checkpoint("tensor count does not match architecture".into()));
        }
        for ((name, shape, _), info) in expected.iter().zip(&header.tensors) {
            if *name != info.name || *shape != info.shape {
                return Err(Error::Checkpoint(format!("unexpected tensor {} {:?}", info.name, info.shape)));
            }
        }
        let floats: Vec<f32> = bytes[12 + hlen..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        if floats.len() * 4 != bytes.len() - 12 - hlen || floats.len() != params.num_params() {
            return Err(Error::Checkpoint(format!(
                "expected {} weights, found {} bytes",
                params.num_params(),
                bytes.len() - 12 - hlen
            )));
        }
        let mut it = floats.into_iter();
        let mut fill = |net: &mut Mlp<f32>| {
            for Dense { weight, bias } in net.layers_mut() {
                weight.iter_mut().for_each(|v| *v = it.next().expect("counted"));
                bias.iter_mut().for_each(|v| *v = it.next().expect("counted"));
            }
        };
        fill(&mut params.encoder);
        fill(&mut params.adaptation);
        fill(&mut params.body);
        fill(&mut params.value);
        params.log_std = Array1::from_iter(it);
        let actual = body_hash(&params.body);
        if actual != header.body_hash {
            return Err(Error::BodyHashMismatch {
                expected: header.body_hash,
                actual,
            });
        }
        Ok(Self { header, params })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(f))
    }

    /// Refuses a student checkpoint whose body does not match `teacher`.
    pub fn check_body(&self, expected_hash: &str) -> Result<()> {
        if self.header.body_hash != expected_hash {
            return Err(Error::BodyHashMismatch {
                expected: expected_hash.to_string(),
                actual: self.header.body_hash.clone(),
            });
        }
        Ok(())
    }
}
