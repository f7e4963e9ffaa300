//! Parameter checkpoints: all ns parameter vectors with the family identity
//! and run seed. Values are stored as hexadecimal f64 bit patterns, so a
//! round trip through disk is exact to the bit.

use crate::RunError;
use ritzmin::ansatz::{AnsatzFamily, ParamVector};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub family_id: String,
    pub seed: u64,
    pub params: Vec<Vec<f64>>,
}

impl Checkpoint {
    pub fn new(family: &AnsatzFamily, seed: u64, params: &[ParamVector]) -> Self {
        Self {
            family_id: family.id(),
            seed,
            params: params.iter().map(|p| p.values.clone()).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("ritzmin checkpoint v1\n");
        out.push_str(&format!("family {}\n", self.family_id));
        out.push_str(&format!("seed {}\n", self.seed));
        out.push_str(&format!("ns {}\n", self.params.len()));
        for (i, values) in self.params.iter().enumerate() {
            out.push_str(&format!("state {i} {}\n", values.len()));
            for chunk in values.chunks(8) {
                let words: Vec<String> = chunk
                    .iter()
                    .map(|v| format!("{:016x}", v.to_bits()))
                    .collect();
                out.push_str(&words.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, RunError> {
        let bad = |msg: &str| RunError::Config(format!("checkpoint: {msg}"));
        let mut lines = text.lines();
        if lines.next() != Some("ritzmin checkpoint v1") {
            return Err(bad("bad header"));
        }
        let family_id = lines
            .next()
            .and_then(|l| l.strip_prefix("family "))
            .ok_or_else(|| bad("missing family"))?
            .to_string();
        let seed: u64 = lines
            .next()
            .and_then(|l| l.strip_prefix("seed "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing seed"))?;
        let ns: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("ns "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing ns"))?;
        let mut params = Vec::with_capacity(ns);
        for i in 0..ns {
            let header = lines.next().ok_or_else(|| bad("truncated"))?;
            let count: usize = header
                .strip_prefix(&format!("state {i} "))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad("bad state header"))?;
            let mut values = Vec::with_capacity(count);
            while values.len() < count {
                let line = lines.next().ok_or_else(|| bad("truncated values"))?;
                for word in line.split_whitespace() {
                    let bits = u64::from_str_radix(word, 16)
                        .map_err(|e| bad(&format!("bad value {word:?}: {e}")))?;
                    values.push(f64::from_bits(bits));
                }
            }
            if values.len() != count {
                return Err(bad("value count mismatch"));
            }
            params.push(values);
        }
        Ok(Self {
            family_id,
            seed,
            params,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        std::fs::write(path, self.to_text())
            .map_err(|e| RunError::Io(format!("write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Io(format!("read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Rehydrate parameter vectors for a family (identity must match).
    pub fn to_param_vectors(&self, family: &AnsatzFamily) -> Result<Vec<ParamVector>, RunError> {
        if family.id() != self.family_id {
            return Err(RunError::Config(format!(
                "checkpoint family `{}` does not match configured family `{}`",
                self.family_id,
                family.id()
            )));
        }
        Ok(self
            .params
            .iter()
            .enumerate()
            .map(|(i, v)| ParamVector::new(v.clone(), self.family_id.clone(), i))
            .collect())
    }
}
