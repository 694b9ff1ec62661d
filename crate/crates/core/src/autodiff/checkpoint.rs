//! Versioned JSON checkpoint container.
//!
//! Layout (one JSON object, keys in this order):
//!
//! ```text
//! {
//!   "format": "tdparse-checkpoint",
//!   "version": 1,
//!   "kind": "ranker" | "tagger" | "logreg",
//!   "hyperparameters": { ... model specific ... },
//!   "vocabularies": { "<name>": ["tok0", "tok1", ...], ... },
//!   "tensors": [ { "name": "...", "tensor": { "shape": [..], "data": [..] } }, ... ]
//! }
//! ```
//!
//! Serialization is deterministic: identical models give identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::ParamStore;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FORMAT: &str = "tdparse-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar, H: Serialize",
    deserialize = "T: Scalar, H: DeserializeOwned"
))]
pub struct Checkpoint<T, H> {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub hyperparameters: H,
    pub vocabularies: BTreeMap<String, Vec<String>>,
    pub tensors: ParamStore<T>,
}

impl<T: Scalar, H: Serialize + DeserializeOwned> Checkpoint<T, H> {
    pub fn new(
        kind: &str,
        hyperparameters: H,
        vocabularies: BTreeMap<String, Vec<String>>,
        tensors: ParamStore<T>,
    ) -> Self {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            kind: kind.to_string(),
            hyperparameters,
            vocabularies,
            tensors,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_bytes(bytes: &[u8], expected_kind: &str) -> Result<Self> {
        let ck: Self = serde_json::from_slice(bytes)?;
        if ck.format != FORMAT {
            return Err(Error::Checkpoint(format!("unknown format {:?}", ck.format)));
        }
        if ck.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {} (expected {VERSION})",
                ck.version
            )));
        }
        if ck.kind != expected_kind {
            return Err(Error::Checkpoint(format!(
                "expected a {expected_kind} checkpoint, found {}",
                ck.kind
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, expected_kind: &str) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, expected_kind)
    }
}

/// Reads only the `kind` field of a checkpoint file.
pub fn peek_kind(path: &Path) -> Result<String> {
    #[derive(Deserialize)]
    struct Head {
        format: String,
        kind: String,
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let head: Head = serde_json::from_slice(&bytes)?;
    if head.format != FORMAT {
        return Err(Error::Checkpoint(format!(
            "unknown format {:?}",
            head.format
        )));
    }
    Ok(head.kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;

    #[test]
    fn round_trip_is_exact() {
        let mut store = ParamStore::<f64>::new();
        store.add("a", Tensor::vector(vec![0.1, -1.0 / 3.0, 1e-300]));
        let mut vocab = BTreeMap::new();
        vocab.insert(
            "words".to_string(),
            vec!["<unk>".to_string(), "x".to_string()],
        );
        let ck = Checkpoint::new("ranker", 7u32, vocab, store);
        let bytes = ck.to_bytes().unwrap();
        let back: Checkpoint<f64, u32> = Checkpoint::from_bytes(&bytes, "ranker").unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_bytes().unwrap(), bytes);
        assert!(Checkpoint::<f64, u32>::from_bytes(&bytes, "tagger").is_err());
    }
}
