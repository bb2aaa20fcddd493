//! Dense complex matrices plus the two factorizations the rest of the crate
//! rests on: Hermitian eigendecomposition (cyclic Jacobi) and the singular
//! value decomposition (one-sided Jacobi).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    /// Real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(e, 0.0);
        }
        m
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Matrix whose columns are the given vectors (all of equal length).
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].re)
            .collect()
    }

    pub fn scale(&self, f: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * f).collect(),
        }
    }

    pub fn scale_c(&self, f: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * f).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        let mut out = Self::zeros(self.rows * r2, self.cols * c2);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..r2 {
                    let dst = (i * r2 + k) * out.cols + j * c2;
                    let src = &other.data[k * c2..(k + 1) * c2];
                    for (o, &b) in out.data[dst..dst + c2].iter_mut().zip(src) {
                        *o = a * b;
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self† · other` without materializing the adjoint.
    pub fn adjoint_matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.rows, other.rows, "adjoint_matmul shape mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        let n = other.cols;
        for k in 0..self.rows {
            let brow = &other.data[k * n..(k + 1) * n];
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                if a == ZERO {
                    continue;
                }
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `A X A†`
    pub fn conjugate_by(&self, x: &Matrix) -> Self {
        self.matmul(x).matmul(&self.adjoint())
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |a_ij − conj(a_ji)|`; zero for Hermitian matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Largest modulus among off-diagonal entries.
    pub fn off_diagonal_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    m = m.max(self[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.off_diagonal_max() <= tol
    }

    /// Keeps only the diagonal.
    pub fn diagonal_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            if i == j {
                self[(i, j)]
            } else {
                ZERO
            }
        })
    }

    /// Hilbert–Schmidt inner product `Tr(self† other)`.
    pub fn inner(&self, other: &Matrix) -> C64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Matrix) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "add shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sub shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// Unitary 2×2 Jacobi rotation annihilating the off-diagonal entry `b` of
/// the Hermitian block `[[a, b], [b*, d]]`. Returns `(c, s, phase)` where the
/// rotation is `[[c, s], [-s·phase*, c·phase*]]` with `phase = b/|b|`.
#[inline]
fn jacobi_rotation(a: f64, d: f64, b: C64) -> Option<(f64, f64, C64)> {
    let mag = b.norm();
    if mag == 0.0 {
        return None;
    }
    let theta = (d - a) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    Some((c, t * c, b / mag))
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, vectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl HermitianEigen {
    /// Only the Hermitian part of `a` is used.
    pub fn new(a: &Matrix) -> Self {
        assert!(a.is_square(), "eigendecomposition needs a square matrix");
        let n = a.rows();
        let mut m = a.hermitian_part();
        let mut v = Matrix::identity(n);
        let scale = m.frobenius_norm();
        if n > 1 && scale > 0.0 {
            let target = (1e-17 * scale) * (1e-17 * scale);
            for _sweep in 0..80 {
                let mut off = 0.0;
                for p in 0..n {
                    for q in (p + 1)..n {
                        off += m[(p, q)].norm_sqr();
                    }
                }
                if off <= target {
                    break;
                }
                for p in 0..n {
                    for q in (p + 1)..n {
                        let b = m[(p, q)];
                        if b.norm() <= 1e-300 {
                            continue;
                        }
                        let Some((c, s, ph)) = jacobi_rotation(m[(p, p)].re, m[(q, q)].re, b)
                        else {
                            continue;
                        };
                        let phc = ph.conj();
                        // columns: A ← A J
                        for i in 0..n {
                            let ap = m[(i, p)];
                            let aq = m[(i, q)];
                            m[(i, p)] = ap * c - aq * (phc * s);
                            m[(i, q)] = ap * s + aq * (phc * c);
                        }
                        // rows: A ← J† A
                        for j in 0..n {
                            let ap = m[(p, j)];
                            let aq = m[(q, j)];
                            m[(p, j)] = ap * c - aq * (ph * s);
                            m[(q, j)] = ap * s + aq * (ph * c);
                        }
                        m[(p, q)] = ZERO;
                        m[(q, p)] = ZERO;
                        m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                        m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                        for i in 0..n {
                            let vp = v[(i, p)];
                            let vq = v[(i, q)];
                            v[(i, p)] = vp * c - vq * (phc * s);
                            v[(i, q)] = vp * s + vq * (phc * c);
                        }
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let diag = m.real_diagonal();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V f(Λ) V†`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.dim();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = Matrix::zeros(n, n);
        for (k, &w) in fv.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> Matrix {
        self.map(|x| if keep(x) { 1.0 } else { 0.0 })
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Square root of a PSD matrix; negative eigenvalues are clamped to zero.
pub fn psd_sqrt(a: &Matrix) -> Matrix {
    HermitianEigen::new(a).map(|x| libm::sqrt(x.max(0.0)))
}

/// Singular value decomposition `A = U Σ V†` with `U` (m×m) and `V` (n×n)
/// unitary and singular values sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

/// One-sided Jacobi on the columns of a tall matrix (`rows ≥ cols`).
/// Returns the orthogonalized columns and, if requested, the accumulated
/// right rotation.
fn hestenes(a: &Matrix, want_v: bool) -> (Matrix, Option<Matrix>) {
    let (m, n) = (a.rows(), a.cols());
    // Work column-major for contiguous column access.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v = want_v.then(|| Matrix::identity(n));
    let scale = a.frobenius_norm();
    if scale > 0.0 {
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (alpha, beta, gamma) = {
                        let (cp, cq) = (&cols[p], &cols[q]);
                        let mut al = 0.0;
                        let mut be = 0.0;
                        let mut ga = ZERO;
                        for i in 0..m {
                            al += cp[i].norm_sqr();
                            be += cq[i].norm_sqr();
                            ga += cp[i].conj() * cq[i];
                        }
                        (al, be, ga)
                    };
                    if gamma.norm() <= 1e-16 * libm::sqrt(alpha * beta) || gamma.norm() < 1e-300 {
                        continue;
                    }
                    let Some((c, s, ph)) = jacobi_rotation(alpha, beta, gamma) else {
                        continue;
                    };
                    rotated = true;
                    let phc = ph.conj();
                    let (lo, hi) = cols.split_at_mut(q);
                    let (cp, cq) = (&mut lo[p], &mut hi[0]);
                    for i in 0..m {
                        let x = cp[i];
                        let y = cq[i];
                        cp[i] = x * c - y * (phc * s);
                        cq[i] = x * s + y * (phc * c);
                    }
                    if let Some(v) = v.as_mut() {
                        for i in 0..n {
                            let x = v[(i, p)];
                            let y = v[(i, q)];
                            v[(i, p)] = x * c - y * (phc * s);
                            v[(i, q)] = x * s + y * (phc * c);
                        }
                    }
                }
            }
            if !rotated {
                break;
            }
        }
    }
    (Matrix::from_columns(&cols), v)
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.adjoint()
    };
    let (cols, _) = hestenes(&work, false);
    let mut s: Vec<f64> = (0..cols.cols()).map(|j| norm(&cols.column(j))).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Sum of singular values.
pub fn trace_norm(a: &Matrix) -> f64 {
    singular_values(a).iter().sum()
}

pub fn svd(a: &Matrix) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let (m, n) = (a.rows(), a.cols());
    let (cols, v) = hestenes(a, true);
    let v = v.expect("rotation requested");
    let mut sv: Vec<(f64, usize)> = (0..n).map(|j| (norm(&cols.column(j)), j)).collect();
    sv.sort_by(|x, y| y.0.total_cmp(&x.0));
    let smax = sv.first().map_or(0.0, |x| x.0);
    let cutoff = smax * 1e-14;
    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(m);
    for &(s, j) in &sv {
        if s > cutoff && s > 1e-300 {
            ucols.push(cols.column(j).iter().map(|z| z / s).collect());
        }
    }
    let ucols = complete_orthonormal(ucols, m);
    let u = Matrix::from_columns(&ucols);
    let vperm = Matrix::from_fn(n, n, |i, k| v[(i, sv[k].1)]);
    Svd {
        u,
        singular_values: sv.iter().map(|x| x.0).collect(),
        v: vperm,
    }
}

/// Extends an orthonormal family to an orthonormal basis of `C^dim` using
/// modified Gram–Schmidt against the standard basis.
pub fn complete_orthonormal(mut basis: Vec<Vec<C64>>, dim: usize) -> Vec<Vec<C64>> {
    let mut k = 0;
    while basis.len() < dim && k < dim {
        let mut cand = vec![ZERO; dim];
        cand[k] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let ov = inner(b, &cand);
                for (c, bi) in cand.iter_mut().zip(b) {
                    *c -= ov * bi;
                }
            }
        }
        let nn = norm(&cand);
        if nn > 1e-6 {
            basis.push(cand.into_iter().map(|z| z / nn).collect());
        }
        k += 1;
    }
    basis
}
