use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{inner, norm, HermitianEigen, Matrix, C64, ZERO};
use super::registers::RegisterSystem;
use crate::{Error, Result, TAU_HERM, TAU_NORM, TAU_PSD};

/// Normalized pure state on a register system.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    system: RegisterSystem,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(system: RegisterSystem, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                found: amplitudes.len(),
            });
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > TAU_NORM {
            return Err(Error::InvalidState(format!(
                "vector norm {n} differs from 1"
            )));
        }
        Ok(Self { system, amplitudes })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(system: RegisterSystem, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                found: amplitudes.len(),
            });
        }
        let n = norm(&amplitudes);
        if n < 1e-150 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        for a in amplitudes.iter_mut() {
            *a /= n;
        }
        Ok(Self { system, amplitudes })
    }

    pub(crate) fn from_parts(system: RegisterSystem, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), system.dim());
        Self { system, amplitudes }
    }

    /// Computational basis state with the given per-register digits.
    pub fn basis(system: RegisterSystem, digits: &[usize]) -> Result<Self> {
        if digits.len() != system.len() {
            return Err(Error::DimensionMismatch {
                expected: system.len(),
                found: digits.len(),
            });
        }
        for (d, r) in digits.iter().zip(system.registers()) {
            if *d >= r.dim {
                return Err(Error::InvalidParameter(format!(
                    "digit {d} out of range for `{}`",
                    r.label
                )));
            }
        }
        let mut amps = vec![ZERO; system.dim()];
        amps[system.flat_index(digits)] = C64::new(1.0, 0.0);
        Ok(Self {
            system,
            amplitudes: amps,
        })
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_parts(
            self.system.clone(),
            Matrix::outer(&self.amplitudes, &self.amplitudes),
            true,
        )
    }

    /// `⟨self|other⟩`
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        if self.system != other.system {
            return Err(Error::SystemMismatch);
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let system = self.system.concat(&other.system)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Ok(Self {
            system,
            amplitudes: amps,
        })
    }

    /// Reduced density operator on `keep` (registers keep their original order).
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        let sys = self.system.restrict(keep)?;
        let order = sys.labels();
        let sp = self.system.split(&order)?;
        let (ds, dr) = (sp.d_sel(), sp.d_rest());
        let mut m = Matrix::zeros(ds, ds);
        for i in 0..ds {
            for j in i..ds {
                let mut acc = ZERO;
                for r in 0..dr {
                    acc += self.amplitudes[sp.index(i, r)] * self.amplitudes[sp.index(j, r)].conj();
                }
                m[(i, j)] = acc;
                m[(j, i)] = acc.conj();
            }
        }
        Ok(DensityOperator::from_parts(sys, m, true))
    }

    /// Applies `op` to the registers `on` (in that order), identity elsewhere.
    /// The result need not be normalized, hence the raw amplitude return.
    pub fn apply_local_raw(&self, op: &Matrix, on: &[&str]) -> Result<Vec<C64>> {
        apply_local(&self.system, &self.amplitudes, op, on)
    }

    /// Applies a unitary (or isometry onto the same registers) on `on`.
    pub fn apply_local(&self, op: &Matrix, on: &[&str]) -> Result<Self> {
        let amps = self.apply_local_raw(op, on)?;
        Self::new(self.system.clone(), amps)
    }

    /// Same amplitudes viewed with registers listed in `order`.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        let (system, amplitudes) = permute_vector(&self.system, &self.amplitudes, order)?;
        Ok(Self { system, amplitudes })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            system: self.system.relabel(from, to)?,
            amplitudes: self.amplitudes.clone(),
        })
    }

    pub fn with_system(&self, system: RegisterSystem) -> Result<Self> {
        if system.dims() != self.system.dims() {
            return Err(Error::SystemMismatch);
        }
        Ok(Self {
            system,
            amplitudes: self.amplitudes.clone(),
        })
    }
}

/// `(I ⊗ op ⊗ I) v` with `op` acting on the registers `on` in the given order.
pub fn apply_local(
    system: &RegisterSystem,
    v: &[C64],
    op: &Matrix,
    on: &[&str],
) -> Result<Vec<C64>> {
    let sp = system.split(on)?;
    let d = sp.d_sel();
    if op.rows() != d || op.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.cols(),
        });
    }
    if v.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: v.len(),
        });
    }
    let mut out = vec![ZERO; v.len()];
    let mut buf = vec![ZERO; d];
    for r in 0..sp.d_rest() {
        for (s, b) in buf.iter_mut().enumerate() {
            *b = v[sp.index(s, r)];
        }
        for s in 0..d {
            let row = op.row(s);
            let mut acc = ZERO;
            for (a, b) in row.iter().zip(&buf) {
                acc += a * b;
            }
            out[sp.index(s, r)] = acc;
        }
    }
    Ok(out)
}

pub(crate) fn permute_vector(
    system: &RegisterSystem,
    v: &[C64],
    order: &[&str],
) -> Result<(RegisterSystem, Vec<C64>)> {
    if order.len() != system.len() {
        return Err(Error::InvalidParameter(format!(
            "reorder needs all {} labels, got {}",
            system.len(),
            order.len()
        )));
    }
    let target = system.select(order)?;
    let sp = system.split(order)?;
    let amps = (0..sp.d_sel()).map(|s| v[sp.index(s, 0)]).collect();
    Ok((target, amps))
}

/// Positive semidefinite operator of unit trace (or, when flagged, trace ≤ 1).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    system: RegisterSystem,
    matrix: Matrix,
    normalized: bool,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(system: RegisterSystem, matrix: Matrix) -> Result<Self> {
        let rho = Self::validated(system, matrix)?;
        let tr = rho.trace();
        if (tr - 1.0).abs() > TAU_NORM {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(rho)
    }

    /// Subnormalized variant: trace at most `1 + τ_norm`.
    pub fn subnormalized(system: RegisterSystem, matrix: Matrix) -> Result<Self> {
        let mut rho = Self::validated(system, matrix)?;
        let tr = rho.trace();
        if tr > 1.0 + TAU_NORM {
            return Err(Error::InvalidState(format!("trace {tr} exceeds 1")));
        }
        rho.normalized = (tr - 1.0).abs() <= TAU_NORM;
        Ok(rho)
    }

    fn validated(system: RegisterSystem, matrix: Matrix) -> Result<Self> {
        let d = system.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.rows(),
            });
        }
        let dev = matrix.hermitian_deviation();
        if dev > TAU_HERM {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {dev:e})"
            )));
        }
        let lo = HermitianEigen::new(&matrix).min_value();
        if lo < -TAU_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(Self {
            system,
            matrix: matrix.hermitian_part(),
            normalized: true,
        })
    }

    pub(crate) fn from_parts(system: RegisterSystem, matrix: Matrix, normalized: bool) -> Self {
        debug_assert_eq!(matrix.rows(), system.dim());
        Self {
            system,
            matrix,
            normalized,
        }
    }

    pub fn pure(psi: &StateVector) -> Self {
        psi.to_density()
    }

    pub fn maximally_mixed(system: RegisterSystem) -> Self {
        let d = system.dim();
        Self {
            system,
            matrix: Matrix::identity(d).scale(1.0 / d as f64),
            normalized: true,
        }
    }

    /// Diagonal state with the given probabilities.
    pub fn from_diagonal(system: RegisterSystem, probs: &[f64]) -> Result<Self> {
        if probs.len() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                found: probs.len(),
            });
        }
        if probs.iter().any(|&p| p < -TAU_PSD) {
            return Err(Error::InvalidState("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TAU_NORM {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            system,
            matrix: Matrix::diag_real(probs),
            normalized: true,
        })
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// False for the flagged subnormalized variant.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }

    /// Number of eigenvalues above the zero threshold.
    pub fn rank(&self) -> usize {
        self.eigenvalues()
            .iter()
            .filter(|&&x| x > crate::EIG_ZERO)
            .count()
    }

    /// PSD square root with clamped negative eigenvalues.
    pub fn sqrt(&self) -> Matrix {
        super::linalg::psd_sqrt(&self.matrix)
    }

    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.system.len() {
            return Err(Error::InvalidParameter(format!(
                "reorder needs all {} labels",
                self.system.len()
            )));
        }
        let target = self.system.select(order)?;
        let sp = self.system.split(order)?;
        let d = self.dim();
        let idx: Vec<usize> = (0..d).map(|s| sp.index(s, 0)).collect();
        let m = Matrix::from_fn(d, d, |i, j| self.matrix[(idx[i], idx[j])]);
        Ok(Self {
            system: target,
            matrix: m,
            normalized: self.normalized,
        })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            system: self.system.relabel(from, to)?,
            matrix: self.matrix.clone(),
            normalized: self.normalized,
        })
    }

    pub fn with_system(&self, system: RegisterSystem) -> Result<Self> {
        if system.dims() != self.system.dims() {
            return Err(Error::SystemMismatch);
        }
        Ok(Self {
            system,
            matrix: self.matrix.clone(),
            normalized: self.normalized,
        })
    }

    /// `(I ⊗ op ⊗ I) ρ (I ⊗ op ⊗ I)†` with `op` on `on`; no normalization.
    pub fn conjugate_local(&self, op: &Matrix, on: &[&str]) -> Result<Self> {
        let sp = self.system.split(on)?;
        let ds = sp.d_sel();
        if op.rows() != ds || op.cols() != ds {
            return Err(Error::DimensionMismatch {
                expected: ds,
                found: op.cols(),
            });
        }
        let full = embed(&sp, op, self.dim());
        let m = full.conjugate_by(&self.matrix);
        Ok(Self {
            system: self.system.clone(),
            matrix: m,
            normalized: false,
        })
    }

    /// Expectation `Tr(ρ (I ⊗ op ⊗ I))` with `op` on `on`.
    pub fn expectation_local(&self, op: &Matrix, on: &[&str]) -> Result<f64> {
        let reduced = super::partial_trace(self, on)?.reorder(on)?;
        Ok(reduced.matrix.trace_product(op).re)
    }
}

/// `I ⊗ op ⊗ I` as a full matrix, given a split of the system.
pub(crate) fn embed(sp: &super::registers::Split, op: &Matrix, d: usize) -> Matrix {
    let mut full = Matrix::zeros(d, d);
    for r in 0..sp.d_rest() {
        for a in 0..sp.d_sel() {
            for b in 0..sp.d_sel() {
                let v = op[(a, b)];
                if v != ZERO {
                    full[(sp.index(a, r), sp.index(b, r))] = v;
                }
            }
        }
    }
    full
}
