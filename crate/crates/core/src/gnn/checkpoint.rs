//! Model checkpoint files.
//!
//! Layout, all little-endian: the 8-byte magic `MXGCNCK\0`, `u32` format
//! version, `u8` task (0 graph, 1 node), `u32` convolution count, `u32` head
//! layer count, then per layer `u32 rows, u32 cols`, `rows*cols` weight
//! `f64`s row-major and `cols` bias `f64`s. Training metadata follows:
//! `u32 epochs, f64 learning rate, u64 seed, f64 train fraction,
//! f64 validation accuracy`.

use std::path::Path;

use super::model::{Dense, GcnModel};
use crate::codec::{read_file, Decoder, Encoder};
use crate::datasets::TaskKind;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"MXGCNCK\0";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub epochs: u32,
    pub learning_rate: f64,
    pub seed: u64,
    pub train_fraction: f64,
    pub validation_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub model: GcnModel,
    pub meta: TrainingMeta,
}

pub(crate) fn encode_task(task: TaskKind) -> u8 {
    match task {
        TaskKind::Graph => 0,
        TaskKind::Node => 1,
    }
}

pub(crate) fn decode_task(d: &Decoder<'_>, v: u8) -> Result<TaskKind> {
    match v {
        0 => Ok(TaskKind::Graph),
        1 => Ok(TaskKind::Node),
        other => Err(d.error(format!("unknown task code {other}"))),
    }
}

impl ModelCheckpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::default();
        e.raw(MODEL_MAGIC);
        e.u32(MODEL_FORMAT_VERSION);
        e.u8(encode_task(self.model.task));
        e.u32(self.model.conv.len() as u32);
        e.u32(self.model.mlp.len() as u32);
        for layer in self.model.conv.iter().chain(&self.model.mlp) {
            e.matrix(&layer.weight);
            e.f64s(&layer.bias);
        }
        e.u32(self.meta.epochs);
        e.f64(self.meta.learning_rate);
        e.u64(self.meta.seed);
        e.f64(self.meta.train_fraction);
        e.f64(self.meta.validation_accuracy);
        e.bytes
    }

    pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(path, bytes);
        if d.take(8)? != MODEL_MAGIC {
            return Err(d.error("not a model checkpoint"));
        }
        let version = d.u32()?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: MODEL_FORMAT_VERSION,
                found: version,
            });
        }
        let code = d.u8()?;
        let task = decode_task(&d, code)?;
        let conv_count = d.u32()? as usize;
        let mlp_count = d.u32()? as usize;
        let mut layers = Vec::with_capacity(conv_count + mlp_count);
        for _ in 0..conv_count + mlp_count {
            let weight = d.matrix()?;
            let bias = d.f64s(weight.cols())?;
            layers.push(Dense { weight, bias });
        }
        let mlp = layers.split_off(conv_count);
        let model = GcnModel { task, conv: layers, mlp };
        model.validate().map_err(|e| d.error(e.to_string()))?;
        let meta = TrainingMeta {
            epochs: d.u32()?,
            learning_rate: d.f64()?,
            seed: d.u64()?,
            train_fraction: d.f64()?,
            validation_accuracy: d.f64()?,
        };
        d.finish()?;
        Ok(ModelCheckpoint { model, meta })
    }
}

pub fn save_checkpoint(ckpt: &ModelCheckpoint, path: impl AsRef<Path>) -> Result<()> {
    Encoder {
        bytes: ckpt.to_bytes(),
    }
    .write_to(path.as_ref())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelCheckpoint> {
    let path = path.as_ref();
    ModelCheckpoint::from_bytes(path, &read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ModelCheckpoint {
        ModelCheckpoint {
            model: GcnModel::new(TaskKind::Graph, 4, 3, 9),
            meta: TrainingMeta {
                epochs: 12,
                learning_rate: 0.01,
                seed: 9,
                train_fraction: 0.8,
                validation_accuracy: 0.75,
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let ck = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&ck, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), ck);
    }

    #[test]
    fn rejects_other_version_and_truncation() {
        let mut bytes = sample().to_bytes();
        let p = Path::new("m.ckpt");
        ModelCheckpoint::from_bytes(p, &bytes[..bytes.len() - 3]).unwrap_err();
        bytes[8] = 7;
        assert!(matches!(
            ModelCheckpoint::from_bytes(p, &bytes),
            Err(Error::VersionMismatch { found: 7, .. })
        ));
        assert!(ModelCheckpoint::from_bytes(p, b"garbage!").is_err());
    }
}
