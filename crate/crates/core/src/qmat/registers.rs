use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Register {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor factorization; the first register is the most significant
/// digit of a flat index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RegisterSystem {
    registers: Vec<Register>,
}

impl RegisterSystem {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        for (i, r) in registers.iter().enumerate() {
            if r.dim == 0 {
                return Err(Error::ZeroDimension(r.label.clone()));
            }
            if registers[..i].iter().any(|o| o.label == r.label) {
                return Err(Error::DuplicateLabel(r.label.clone()));
            }
        }
        Ok(Self { registers })
    }

    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(l, d)| Register {
                    label: l.to_string(),
                    dim: d,
                })
                .collect(),
        )
    }

    /// One qubit per label.
    pub fn qubits(labels: &[&str]) -> Result<Self> {
        Self::new(
            labels
                .iter()
                .map(|&l| Register {
                    label: l.to_string(),
                    dim: 2,
                })
                .collect(),
        )
    }

    /// The empty system (dimension 1).
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.registers.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.registers.iter().any(|r| r.label == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.registers[self.position(label)?].dim)
    }

    /// Product dimension of a label set.
    pub fn dim_of_all(&self, labels: &[&str]) -> Result<usize> {
        labels
            .iter()
            .try_fold(1usize, |acc, l| Ok(acc * self.dim_of(l)?))
    }

    /// `self ⊗ other`; labels must be disjoint.
    pub fn concat(&self, other: &RegisterSystem) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        Self::new(regs)
    }

    pub fn with(&self, label: &str, dim: usize) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.push(Register {
            label: label.to_string(),
            dim,
        });
        Self::new(regs)
    }

    /// Registers named in `labels`, in the order given.
    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        let regs = labels
            .iter()
            .map(|l| self.position(l).map(|p| self.registers[p].clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(regs)
    }

    /// Registers named in `labels`, in this system's order.
    pub fn restrict(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.position(l)?;
        }
        Self::new(
            self.registers
                .iter()
                .filter(|r| labels.contains(&r.label.as_str()))
                .cloned()
                .collect(),
        )
    }

    /// Registers not named in `labels`, in this system's order.
    pub fn complement(&self, labels: &[&str]) -> Result<Vec<&str>> {
        for l in labels {
            self.position(l)?;
        }
        Ok(self
            .registers
            .iter()
            .map(|r| r.label.as_str())
            .filter(|l| !labels.contains(l))
            .collect())
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let p = self.position(from)?;
        let mut regs = self.registers.clone();
        regs[p].label = to.to_string();
        Self::new(regs)
    }

    /// Appends `suffix` to every label.
    pub fn suffixed(&self, suffix: &str) -> Self {
        let regs = self
            .registers
            .iter()
            .map(|r| {
                let mut label = r.label.clone();
                label.push_str(suffix);
                Register { label, dim: r.dim }
            })
            .collect();
        Self { registers: regs }
    }

    /// Label not yet used, derived from `base`.
    pub fn fresh_label(&self, base: &str) -> String {
        if !self.contains(base) {
            return base.to_string();
        }
        let mut k = 1usize;
        loop {
            let cand = alloc::format!("{base}{k}");
            if !self.contains(&cand) {
                return cand;
            }
            k += 1;
        }
    }

    /// Digit decomposition of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = alloc::vec![0; self.registers.len()];
        for (k, r) in self.registers.iter().enumerate().rev() {
            out[k] = index % r.dim;
            index /= r.dim;
        }
        out
    }

    pub fn flat_index(&self, digits: &[usize]) -> usize {
        self.registers
            .iter()
            .zip(digits)
            .fold(0, |acc, (r, &d)| acc * r.dim + d)
    }

    /// Index bookkeeping for viewing this system as `selected ⊗ rest`.
    pub fn split(&self, selected: &[&str]) -> Result<Split> {
        let sel_pos = selected
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in sel_pos.iter().enumerate() {
            if sel_pos[..i].contains(p) {
                return Err(Error::DuplicateLabel(selected[i].to_string()));
            }
        }
        let rest_pos: Vec<usize> = (0..self.len()).filter(|p| !sel_pos.contains(p)).collect();
        let dims = self.dims();
        let d_sel: usize = sel_pos.iter().map(|&p| dims[p]).product();
        let d_rest: usize = rest_pos.iter().map(|&p| dims[p]).product();
        let mut strides = alloc::vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let offsets = |positions: &[usize], count: usize| -> Vec<usize> {
            let mut out = Vec::with_capacity(count);
            let mut digits = alloc::vec![0usize; positions.len()];
            for _ in 0..count {
                out.push(
                    positions
                        .iter()
                        .zip(&digits)
                        .map(|(&p, &d)| d * strides[p])
                        .sum(),
                );
                for k in (0..positions.len()).rev() {
                    digits[k] += 1;
                    if digits[k] < dims[positions[k]] {
                        break;
                    }
                    digits[k] = 0;
                }
            }
            out
        };
        Ok(Split {
            sel_offsets: offsets(&sel_pos, d_sel),
            rest_offsets: offsets(&rest_pos, d_rest),
        })
    }
}

/// Flat index of `(s, r)` in `selected ⊗ rest` is `sel_offsets[s] + rest_offsets[r]`.
#[derive(Clone, Debug)]
pub struct Split {
    pub sel_offsets: Vec<usize>,
    pub rest_offsets: Vec<usize>,
}

impl Split {
    pub fn d_sel(&self) -> usize {
        self.sel_offsets.len()
    }

    pub fn d_rest(&self) -> usize {
        self.rest_offsets.len()
    }

    #[inline]
    pub fn index(&self, s: usize, r: usize) -> usize {
        self.sel_offsets[s] + self.rest_offsets[r]
    }
}
