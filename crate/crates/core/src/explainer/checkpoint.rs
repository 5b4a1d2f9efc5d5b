//! Explainer files.
//!
//! Layout, little-endian: magic `MXATTNK\0`, `u32` format version, `u8` kind
//! (0 motif, 1 edge), `u8` task, `u32` hops, the attention matrix
//! (`u32 rows, u32 cols`, row-major `f64`s), then `u8` dictionary flag and,
//! when set, `f64` min support, `u64` unit count, `u32` entry count and per
//! entry a length-prefixed UTF-8 key and `f64` support.

use std::collections::BTreeMap;
use std::path::Path;

use super::attention::AttentionParams;
use super::{Explainer, ExplainerKind};
use crate::codec::{read_file, Decoder, Encoder};
use crate::error::{Error, Result};
use crate::gnn::{decode_task, encode_task};
use crate::motifs::MotifDictionary;

pub const EXPLAINER_MAGIC: &[u8; 8] = b"MXATTNK\0";
pub const EXPLAINER_FORMAT_VERSION: u32 = 1;

impl Explainer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::default();
        e.raw(EXPLAINER_MAGIC);
        e.u32(EXPLAINER_FORMAT_VERSION);
        e.u8(match self.kind {
            ExplainerKind::Motif => 0,
            ExplainerKind::Edge => 1,
        });
        e.u8(encode_task(self.task));
        e.u32(self.hops as u32);
        e.matrix(&self.params.weight);
        match &self.dictionary {
            None => e.u8(0),
            Some(d) => {
                e.u8(1);
                e.f64(d.min_support);
                e.u64(d.unit_count as u64);
                e.u32(d.support.len() as u32);
                for (k, &s) in &d.support {
                    e.string(k);
                    e.f64(s);
                }
            }
        }
        e.bytes
    }

    pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(path, bytes);
        if d.take(8)? != EXPLAINER_MAGIC {
            return Err(d.error("not an explainer file"));
        }
        let version = d.u32()?;
        if version != EXPLAINER_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: EXPLAINER_FORMAT_VERSION,
                found: version,
            });
        }
        let kind = match d.u8()? {
            0 => ExplainerKind::Motif,
            1 => ExplainerKind::Edge,
            other => return Err(d.error(format!("unknown explainer kind {other}"))),
        };
        let code = d.u8()?;
        let task = decode_task(&d, code)?;
        let hops = d.u32()? as usize;
        let weight = d.matrix()?;
        if weight.rows() != weight.cols() {
            return Err(d.error(format!("attention matrix is {}x{}", weight.rows(), weight.cols())));
        }
        let dictionary = match d.u8()? {
            0 => None,
            1 => {
                let min_support = d.f64()?;
                let unit_count = d.u64()? as usize;
                let n = d.u32()? as usize;
                let mut support = BTreeMap::new();
                for _ in 0..n {
                    let k = d.string()?;
                    support.insert(k, d.f64()?);
                }
                Some(MotifDictionary {
                    min_support,
                    unit_count,
                    support,
                })
            }
            other => return Err(d.error(format!("bad dictionary flag {other}"))),
        };
        d.finish()?;
        Ok(Explainer {
            kind,
            task,
            hops,
            params: AttentionParams { weight },
            dictionary,
        })
    }
}

pub fn save_explainer(explainer: &Explainer, path: impl AsRef<Path>) -> Result<()> {
    Encoder {
        bytes: explainer.to_bytes(),
    }
    .write_to(path.as_ref())
}

pub fn load_explainer(path: impl AsRef<Path>) -> Result<Explainer> {
    let path = path.as_ref();
    Explainer::from_bytes(path, &read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::TaskKind;
    use crate::motifs::MotifKey;
    use std::collections::BTreeSet;

    fn sample(dictionary: bool) -> Explainer {
        let keys = [BTreeSet::from([MotifKey("cycle:3:0,0,0".into())]), BTreeSet::new()];
        Explainer {
            kind: if dictionary { ExplainerKind::Motif } else { ExplainerKind::Edge },
            task: TaskKind::Node,
            hops: 3,
            params: AttentionParams::random(5, 1),
            dictionary: dictionary.then(|| MotifDictionary::from_key_sets(keys, 0.05).unwrap()),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for with in [true, false] {
            let e = sample(with);
            let path = dir.path().join("w.ckpt");
            save_explainer(&e, &path).unwrap();
            assert_eq!(load_explainer(&path).unwrap(), e);
        }
    }

    #[test]
    fn rejects_model_file_and_trailing_bytes() {
        let p = Path::new("w.ckpt");
        let mut bytes = sample(true).to_bytes();
        bytes.push(0);
        assert!(Explainer::from_bytes(p, &bytes).is_err());
        assert!(Explainer::from_bytes(p, b"MXGCNCK\0\x01\0\0\0").is_err());
    }
}
