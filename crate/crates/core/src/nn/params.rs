//! Named, ordered parameter storage.
//!
//! All trainable tensors of a policy live in one `ParamSet`; layers hold
//! `ParamId` handles into it. The set's ordering is the canonical ordering
//! for gradients, optimizer state, checkpoints, and parameter audits.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::nn::tensor::Tensor;
use crate::rng::RandomStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub usize);

#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a tensor under a unique name.
    pub fn add(&mut self, name: &str, tensor: Tensor) -> ParamId {
        assert!(
            !self.names.iter().any(|n| n == name),
            "duplicate parameter name {name}"
        );
        self.names.push(name.to_string());
        self.tensors.push(tensor);
        ParamId(self.tensors.len() - 1)
    }

    /// Weight matrix drawn uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    pub fn add_weight(&mut self, name: &str, out_dim: usize, in_dim: usize, rng: &mut RandomStream) -> ParamId {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let data = (0..out_dim * in_dim).map(|_| rng.uniform_in(-bound, bound)).collect();
        self.add(name, Tensor { shape: vec![out_dim, in_dim], data })
    }

    /// Bias vector, zero-initialized.
    pub fn add_bias(&mut self, name: &str, dim: usize) -> ParamId {
        self.add(name, Tensor::zeros(&[dim]))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(|n| n.as_str()).zip(self.tensors.iter())
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    /// Total number of scalar parameters.
    pub fn total_params(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    /// Per-tensor breakdown, in registration order: (name, shape, count).
    pub fn audit(&self) -> Vec<(String, Vec<usize>, usize)> {
        self.iter().map(|(n, t)| (n.to_string(), t.shape.clone(), t.len())).collect()
    }

    // ── Checkpoint I/O ──────────────────────────────────────────────────
    //
    // JSON of decimal literals at 17 significant digits. 17 digits are
    // enough to round-trip any f64 exactly, so save followed by load is
    // bit-exact. The writer is hand-rolled to control the number format.

    pub fn save_json<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "{{\"version\":1,\"tensors\":[")?;
        for (i, (name, t)) in self.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            write!(w, "{{\"name\":{},\"shape\":[", serde_json::to_string(name).unwrap())?;
            for (j, d) in t.shape.iter().enumerate() {
                if j > 0 {
                    write!(w, ",")?;
                }
                write!(w, "{d}")?;
            }
            write!(w, "],\"data\":[")?;
            for (j, v) in t.data.iter().enumerate() {
                if j > 0 {
                    write!(w, ",")?;
                }
                write!(w, "{v:.16e}")?;
            }
            write!(w, "]}}")?;
        }
        write!(w, "]}}")?;
        Ok(())
    }

    pub fn save_file(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.save_json(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load_json<R: Read>(r: R) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct FileTensor {
            name: String,
            shape: Vec<usize>,
            data: Vec<f64>,
        }
        #[derive(serde::Deserialize)]
        struct File {
            version: u32,
            tensors: Vec<FileTensor>,
        }
        let file: File = serde_json::from_reader(r)
            .map_err(|e| Error::Serialization(format!("checkpoint parse: {e}")))?;
        if file.version != 1 {
            return Err(Error::Serialization(format!(
                "unsupported checkpoint version {}",
                file.version
            )));
        }
        let mut set = ParamSet::new();
        for t in file.tensors {
            let tensor = Tensor::new(t.shape, t.data)?;
            set.add(&t.name, tensor);
        }
        Ok(set)
    }

    pub fn load_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::load_json(std::io::BufReader::new(f))
    }

    /// Copy values from another set with identical names and shapes.
    /// Used to restore a checkpoint into an already-constructed policy.
    pub fn restore_from(&mut self, other: &ParamSet) -> Result<()> {
        if self.names != other.names {
            return Err(Error::Serialization(
                "checkpoint tensor names do not match this policy".into(),
            ));
        }
        for (dst, src) in self.tensors.iter_mut().zip(other.tensors.iter()) {
            if dst.shape != src.shape {
                return Err(Error::Serialization(format!(
                    "checkpoint shape mismatch: {:?} vs {:?}",
                    dst.shape, src.shape
                )));
            }
            dst.data.copy_from_slice(&src.data);
        }
        Ok(())
    }

    /// Stable name -> index map, for tests and tooling.
    pub fn name_index(&self) -> BTreeMap<String, usize> {
        self.names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect()
    }
}
