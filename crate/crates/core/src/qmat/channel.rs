use alloc::format;
use alloc::vec::Vec;

use super::linalg::{psd_sqrt, Matrix, C64};
use super::registers::RegisterSystem;
use super::state::{DensityOperator, StateVector};
use crate::{Error, Result, TAU_HERM};

/// Completely positive map given by Kraus operators (`out_dim × in_dim` each).
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    input: RegisterSystem,
    output: RegisterSystem,
    kraus: Vec<Matrix>,
    trace_preserving: bool,
}

fn gram_sum(kraus: &[Matrix], d: usize) -> Matrix {
    kraus
        .iter()
        .fold(Matrix::zeros(d, d), |acc, k| &acc + &k.adjoint_matmul(k))
}

fn check_shapes(input: &RegisterSystem, output: &RegisterSystem, kraus: &[Matrix]) -> Result<()> {
    if kraus.is_empty() {
        return Err(Error::InvalidParameter(
            "a channel needs at least one Kraus operator".into(),
        ));
    }
    for k in kraus {
        if k.cols() != input.dim() {
            return Err(Error::DimensionMismatch {
                expected: input.dim(),
                found: k.cols(),
            });
        }
        if k.rows() != output.dim() {
            return Err(Error::DimensionMismatch {
                expected: output.dim(),
                found: k.rows(),
            });
        }
    }
    Ok(())
}

impl KrausChannel {
    /// Requires `Σ K†K = I` within τ_herm.
    pub fn new(input: RegisterSystem, output: RegisterSystem, kraus: Vec<Matrix>) -> Result<Self> {
        check_shapes(&input, &output, &kraus)?;
        let dev = (&gram_sum(&kraus, input.dim()) - &Matrix::identity(input.dim())).max_abs();
        if dev > TAU_HERM {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self {
            input,
            output,
            kraus,
            trace_preserving: true,
        })
    }

    /// Trace non-increasing map (`Σ K†K ⪯ I`), e.g. a single measurement branch.
    pub fn subnormalized(
        input: RegisterSystem,
        output: RegisterSystem,
        kraus: Vec<Matrix>,
    ) -> Result<Self> {
        check_shapes(&input, &output, &kraus)?;
        let d = input.dim();
        let slack = &Matrix::identity(d) - &gram_sum(&kraus, d);
        let lo = super::linalg::HermitianEigen::new(&slack).min_value();
        if lo < -TAU_HERM {
            return Err(Error::NotTracePreserving(-lo));
        }
        Ok(Self {
            input,
            output,
            kraus,
            trace_preserving: lo.abs() <= TAU_HERM && slack.max_abs() <= TAU_HERM,
        })
    }

    pub fn unitary(system: RegisterSystem, u: Matrix) -> Result<Self> {
        Self::new(system.clone(), system, alloc::vec![u])
    }

    pub fn identity(system: RegisterSystem) -> Self {
        let d = system.dim();
        Self {
            input: system.clone(),
            output: system,
            kraus: alloc::vec![Matrix::identity(d)],
            trace_preserving: true,
        }
    }

    /// Complete dephasing in the computational basis of the whole system.
    pub fn dephasing(system: RegisterSystem) -> Self {
        let d = system.dim();
        let kraus = (0..d)
            .map(|i| {
                let mut k = Matrix::zeros(d, d);
                k[(i, i)] = C64::new(1.0, 0.0);
                k
            })
            .collect();
        Self {
            input: system.clone(),
            output: system,
            kraus,
            trace_preserving: true,
        }
    }

    pub fn input(&self) -> &RegisterSystem {
        &self.input
    }

    pub fn output(&self) -> &RegisterSystem {
        &self.output
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `max |Σ K†K − I|`
    pub fn trace_preserving_deviation(&self) -> f64 {
        let d = self.input.dim();
        (&gram_sum(&self.kraus, d) - &Matrix::identity(d)).max_abs()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<Self> {
        if next.input.dims() != self.output.dims() {
            return Err(Error::SystemMismatch);
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                kraus.push(b.matmul(a));
            }
        }
        Ok(Self {
            input: self.input.clone(),
            output: next.output.clone(),
            kraus,
            trace_preserving: self.trace_preserving && next.trace_preserving,
        })
    }

    /// `Σ K ρ K†` on raw matrices.
    pub fn apply_matrix(&self, rho: &Matrix) -> Matrix {
        let d = self.output.dim();
        self.kraus
            .iter()
            .fold(Matrix::zeros(d, d), |acc, k| &acc + &k.conjugate_by(rho))
    }
}

/// Linear map with `V†V = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    input: RegisterSystem,
    output: RegisterSystem,
    matrix: Matrix,
}

impl Isometry {
    pub fn new(input: RegisterSystem, output: RegisterSystem, matrix: Matrix) -> Result<Self> {
        if matrix.cols() != input.dim() {
            return Err(Error::DimensionMismatch {
                expected: input.dim(),
                found: matrix.cols(),
            });
        }
        if matrix.rows() != output.dim() {
            return Err(Error::DimensionMismatch {
                expected: output.dim(),
                found: matrix.rows(),
            });
        }
        if output.dim() < input.dim() {
            return Err(Error::NotIsometry(1.0));
        }
        let dev = (&matrix.adjoint_matmul(&matrix) - &Matrix::identity(input.dim())).max_abs();
        if dev > TAU_HERM {
            return Err(Error::NotIsometry(dev));
        }
        Ok(Self {
            input,
            output,
            matrix,
        })
    }

    pub fn input(&self) -> &RegisterSystem {
        &self.input
    }

    pub fn output(&self) -> &RegisterSystem {
        &self.output
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.system().dims() != self.input.dims() {
            return Err(Error::SystemMismatch);
        }
        Ok(StateVector::from_parts(
            self.output.clone(),
            self.matrix.mul_vec(psi.amplitudes()),
        ))
    }

    pub fn apply_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.system().dims() != self.input.dims() {
            return Err(Error::SystemMismatch);
        }
        Ok(DensityOperator::from_parts(
            self.output.clone(),
            self.matrix.conjugate_by(rho.matrix()),
            rho.is_normalized(),
        ))
    }
}

/// Measurement given by operators `A_i` with `Σ A_i†A_i = I`; outcome `i`
/// occurs with probability `Tr(A_i ρ A_i†)`. Effects are `A_i†A_i`, so
/// projective measurements can be given by their projectors directly.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    system: RegisterSystem,
    operators: Vec<Matrix>,
}

impl Povm {
    pub fn new(system: RegisterSystem, operators: Vec<Matrix>) -> Result<Self> {
        let d = system.dim();
        if operators.is_empty() {
            return Err(Error::IncompletePovm(1.0));
        }
        for a in &operators {
            if a.rows() != d || a.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.rows(),
                });
            }
        }
        let dev = (&gram_sum(&operators, d) - &Matrix::identity(d)).max_abs();
        if dev > TAU_HERM {
            return Err(Error::IncompletePovm(dev));
        }
        Ok(Self { system, operators })
    }

    /// From effects `0 ⪯ E_i ⪯ I`, using `A_i = √E_i`.
    pub fn from_effects(system: RegisterSystem, effects: &[Matrix]) -> Result<Self> {
        Self::new(system, effects.iter().map(psd_sqrt).collect())
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn operators(&self) -> &[Matrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn effects(&self) -> Vec<Matrix> {
        self.operators.iter().map(|a| a.adjoint_matmul(a)).collect()
    }

    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.system().dims() != self.system.dims() {
            return Err(Error::SystemMismatch);
        }
        Ok(self
            .effects()
            .iter()
            .map(|e| e.trace_product(rho.matrix()).re)
            .collect())
    }

    /// Unnormalized post-measurement state `A_i ρ A_i†`.
    pub fn branch(&self, rho: &DensityOperator, i: usize) -> Result<DensityOperator> {
        let a = self
            .operators
            .get(i)
            .ok_or_else(|| Error::InvalidParameter(format!("outcome {i} out of range")))?;
        if rho.system().dims() != self.system.dims() {
            return Err(Error::SystemMismatch);
        }
        Ok(DensityOperator::from_parts(
            rho.system().clone(),
            a.conjugate_by(rho.matrix()),
            false,
        ))
    }
}
