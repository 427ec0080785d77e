//! Binary container shared by the GAN and classifier checkpoints.
//!
//! Layout (little-endian): 4-byte magic, u32 version, u32 config length,
//! UTF-8 `key=value` config lines, u32 tensor count, then per tensor a u32
//! name length, the name, a u32 rank, u32 dims and f32 data.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

use crate::numcore::nn::Sequential;
use crate::numcore::{AdamState, Tensor};

pub const CONTAINER_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum CheckpointError {
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint truncated at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes after the last tensor")]
    Trailing(usize),
    #[error("config block: {0}")]
    Config(String),
    #[error("missing tensor {0}")]
    Missing(String),
    #[error("tensor {name}: shape {found:?}, expected {expected:?}")]
    Shape {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl NamedTensor {
    pub fn from_tensor(name: impl Into<String>, t: &Tensor<f32>) -> Self {
        Self {
            name: name.into(),
            shape: t.shape().to_vec(),
            data: t.data().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Container {
    pub config: BTreeMap<String, String>,
    pub tensors: Vec<NamedTensor>,
}

impl Container {
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<V, CheckpointError>
    where
        V::Err: Display,
    {
        let raw = self
            .config
            .get(key)
            .ok_or_else(|| CheckpointError::Config(format!("missing key {key}")))?;
        raw.parse()
            .map_err(|e| CheckpointError::Config(format!("{key}={raw}: {e}")))
    }

    pub fn push(&mut self, name: impl Into<String>, shape: &[usize], data: Vec<f32>) {
        self.tensors.push(NamedTensor {
            name: name.into(),
            shape: shape.to_vec(),
            data,
        });
    }

    pub fn tensor(&self, name: &str) -> Result<&NamedTensor, CheckpointError> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| CheckpointError::Missing(name.to_string()))
    }

    fn tensor_shaped(&self, name: &str, shape: &[usize]) -> Result<&[f32], CheckpointError> {
        let t = self.tensor(name)?;
        if t.shape != shape {
            return Err(CheckpointError::Shape {
                name: name.to_string(),
                expected: shape.to_vec(),
                found: t.shape.clone(),
            });
        }
        Ok(&t.data)
    }

    /// Stores parameters and batch-norm running statistics of a network.
    pub fn put_network(&mut self, prefix: &str, net: &Sequential<f32>) {
        for (i, p) in net.parameters().into_iter().enumerate() {
            self.tensors
                .push(NamedTensor::from_tensor(format!("{prefix}.{i}.{}", p.name), &p.value));
        }
        for (i, rs) in net.running_stats().into_iter().enumerate() {
            self.push(
                format!("{prefix}.bn{i}.running_mean"),
                &[rs.mean.len()],
                rs.mean.clone(),
            );
            self.push(format!("{prefix}.bn{i}.running_var"), &[rs.var.len()], rs.var.clone());
        }
    }

    /// Overwrites a freshly built network with stored values.
    pub fn load_network(&self, prefix: &str, net: &mut Sequential<f32>) -> Result<(), CheckpointError> {
        for (i, p) in net.parameters_mut().into_iter().enumerate() {
            let name = format!("{prefix}.{i}.{}", p.name);
            let data = self.tensor_shaped(&name, p.value.shape())?;
            p.value.data_mut().copy_from_slice(data);
            p.zero_grad();
        }
        for (i, rs) in net.running_stats_mut().into_iter().enumerate() {
            let n = rs.mean.len();
            rs.mean
                .copy_from_slice(self.tensor_shaped(&format!("{prefix}.bn{i}.running_mean"), &[n])?);
            rs.var
                .copy_from_slice(self.tensor_shaped(&format!("{prefix}.bn{i}.running_var"), &[n])?);
        }
        Ok(())
    }

    pub fn put_adam(&mut self, prefix: &str, state: &AdamState<f32>) {
        self.set(&format!("{prefix}.step_count"), state.step_count);
        self.set(&format!("{prefix}.learning_rate"), state.learning_rate);
        self.set(&format!("{prefix}.beta1"), state.beta1);
        self.set(&format!("{prefix}.beta2"), state.beta2);
        self.set(&format!("{prefix}.epsilon"), state.epsilon);
        for (i, (m, v)) in state.first_moment.iter().zip(&state.second_moment).enumerate() {
            self.tensors.push(NamedTensor::from_tensor(format!("{prefix}.m{i}"), m));
            self.tensors.push(NamedTensor::from_tensor(format!("{prefix}.v{i}"), v));
        }
    }

    /// Restores an optimizer state whose moment shapes are given by `template`.
    pub fn load_adam(&self, prefix: &str, template: &AdamState<f32>) -> Result<AdamState<f32>, CheckpointError> {
        let mut state = template.clone();
        state.step_count = self.get(&format!("{prefix}.step_count"))?;
        state.learning_rate = self.get(&format!("{prefix}.learning_rate"))?;
        state.beta1 = self.get(&format!("{prefix}.beta1"))?;
        state.beta2 = self.get(&format!("{prefix}.beta2"))?;
        state.epsilon = self.get(&format!("{prefix}.epsilon"))?;
        for (i, (m, v)) in state.first_moment.iter_mut().zip(&mut state.second_moment).enumerate() {
            let shape = m.shape().to_vec();
            m.data_mut()
                .copy_from_slice(self.tensor_shaped(&format!("{prefix}.m{i}"), &shape)?);
            v.data_mut()
                .copy_from_slice(self.tensor_shaped(&format!("{prefix}.v{i}"), &shape)?);
        }
        Ok(state)
    }

    pub fn encode(&self, magic: [u8; 4]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&magic);
        out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
        let config: String = self.config.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        out.extend_from_slice(&(config.len() as u32).to_le_bytes());
        out.extend_from_slice(config.as_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8], magic: [u8; 4]) -> Result<Self, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        let found: [u8; 4] = r.take(4)?.try_into().unwrap();
        if found != magic {
            return Err(CheckpointError::BadMagic { expected: magic, found });
        }
        let version = r.u32()?;
        if version != CONTAINER_VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }
        let len = r.u32()? as usize;
        let text = std::str::from_utf8(r.take(len)?).map_err(|e| CheckpointError::Config(e.to_string()))?;
        let mut config = BTreeMap::new();
        for line in text.lines() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CheckpointError::Config(format!("line {line:?} lacks '='")))?;
            config.insert(k.to_string(), v.to_string());
        }
        let count = r.u32()? as usize;
        let mut tensors = Vec::new();
        for _ in 0..count {
            let n = r.u32()? as usize;
            let name = String::from_utf8(r.take(n)?.to_vec()).map_err(|e| CheckpointError::Config(e.to_string()))?;
            let rank = r.u32()? as usize;
            let shape = (0..rank)
                .map(|_| r.u32().map(|d| d as usize))
                .collect::<Result<Vec<_>, _>>()?;
            let len = shape
                .iter()
                .try_fold(1usize, |a, &d| a.checked_mul(d))
                .ok_or(CheckpointError::Truncated(r.pos))?;
            let raw = r.take(len.checked_mul(4).ok_or(CheckpointError::Truncated(r.pos))?)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            tensors.push(NamedTensor { name, shape, data });
        }
        if r.pos != bytes.len() {
            return Err(CheckpointError::Trailing(bytes.len() - r.pos));
        }
        Ok(Self { config, tensors })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(CheckpointError::Truncated(self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_corruption() {
        let mut c = Container::default();
        c.set("epochs", 3);
        c.push("w", &[2, 2], vec![1.0, -2.0, 0.5, f32::MIN_POSITIVE]);
        c.push("empty", &[0, 2], vec![]);
        let bytes = c.encode(*b"TEST");
        assert_eq!(Container::decode(&bytes, *b"TEST").unwrap(), c);
        assert_eq!(c.get::<u32>("epochs").unwrap(), 3);
        assert!(matches!(
            Container::decode(&bytes, *b"GANC"),
            Err(CheckpointError::BadMagic { .. })
        ));
        for cut in [0, 3, 11, bytes.len() - 1] {
            assert!(matches!(
                Container::decode(&bytes[..cut], *b"TEST"),
                Err(CheckpointError::Truncated(_))
            ));
        }
        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(Container::decode(&long, *b"TEST"), Err(CheckpointError::Trailing(1)));
    }
}
