//! Dense complex linear algebra shared by every module.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Normalized state vector. `basis` names the labeling of the components.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    pub amps: CVec,
    pub basis: Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `|j,m⟩`, m = j … −j.
    Spin,
    /// `|I,−m⟩|J,m⟩` with I = J, m = J … −J.
    Fz0Block,
    /// Anything else (tensor-product computational bases, plain vectors).
    Plain,
}

impl Ket {
    /// Normalizes `amps`; fails on a zero or non-finite vector.
    pub fn new(amps: CVec, basis: Basis) -> Result<Self> {
        let n = amps.norm();
        if !(n.is_finite() && n > 0.0) {
            return domain("ket has zero or non-finite norm");
        }
        Ok(Self { amps: amps.unscale(n), basis })
    }

    pub fn basis_state(dim: usize, index: usize, basis: Basis) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[index] = c(1.0);
        Self { amps, basis }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Probabilities `|c_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn overlap(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn projector(&self) -> CMat {
        &self.amps * self.amps.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Hermitian,
    Unitary,
    Density,
    General,
}

/// Square matrix tagged with the structural property it is meant to have.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub mat: CMat,
    pub kind: OpKind,
}

impl Operator {
    /// Wraps `mat` after verifying the property implied by `kind`.
    pub fn new(mat: CMat, kind: OpKind) -> Result<Self> {
        if !mat.is_square() {
            return domain("operator must be square");
        }
        match kind {
            OpKind::Hermitian => {
                let e = hermiticity_defect(&mat);
                if e > 1e-12 * mat.nrows().max(1) as f64 {
                    return domain(format!("not Hermitian (defect {e:e})"));
                }
            }
            OpKind::Unitary => {
                let e = unitarity_defect(&mat);
                if e > 1e-10 {
                    return domain(format!("not unitary (defect {e:e})"));
                }
            }
            OpKind::Density => check_density(&mat, 1e-10)?,
            OpKind::General => {}
        }
        Ok(Self { mat, kind })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |U U† − 1|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let mut p = u * u.adjoint();
    for k in 0..p.nrows() {
        p[(k, k)] -= c(1.0);
    }
    max_abs(&p)
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn check_density(rho: &CMat, tol: f64) -> Result<()> {
    let h = hermiticity_defect(rho);
    if h > tol {
        return domain(format!("density matrix not Hermitian (defect {h:e})"));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return domain(format!("density matrix trace {tr} != 1"));
    }
    let evals = hermitian_eigenvalues(rho);
    if let Some(&min) = evals.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -tol {
            return domain(format!("density matrix has eigenvalue {min:e}"));
        }
    }
    Ok(())
}

fn symmetrized(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = symmetrized(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Eigen-decomposition of a Hermitian matrix: (ascending eigenvalues, column eigenvectors).
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let e = SymmetricEigen::new(symmetrized(m));
    sort_eigen(e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

fn sort_eigen(vals: Vec<f64>, vecs: CMat) -> (Vec<f64>, CMat) {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted = idx.iter().map(|&k| vals[k]).collect();
    let cols: Vec<CVec> = idx.iter().map(|&k| vecs.column(k).into_owned()).collect();
    (sorted, CMat::from_columns(&cols))
}

/// `exp(−i t H)` for Hermitian `H`, by spectral decomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(h);
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::from_polar(1.0, -t * vals[k]);
    }
    scaled * vecs.adjoint()
}

/// `exp(−i t D)` for a real diagonal generator given by its diagonal.
pub fn expm_diagonal(diag: &[f64], t: f64) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        diag.len(),
        diag.iter().map(|&x| C64::from_polar(1.0, -t * x)),
    ))
}

/// Eigen-decomposition of a unitary matrix through the complex Schur form.
///
/// Returns phases in `[0, 2π)` and orthonormal eigenvector columns. The
/// residual `max_k ‖U v_k − e^{iφ_k} v_k‖` is checked against `tol`.
pub fn unitary_eigen(u: &CMat, tol: f64) -> Result<(Vec<f64>, CMat)> {
    if !u.is_square() {
        return domain("unitary_eigen needs a square matrix");
    }
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let lambdas: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let residual = (0..n)
        .map(|k| (u * q.column(k) - q.column(k) * lambdas[k]).norm())
        .fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::Numeric(format!(
            "eigenvector residual {residual:e} exceeds {tol:e}"
        )));
    }
    let phases = lambdas.iter().map(|l| wrap_phase(l.arg())).collect();
    Ok((phases, q))
}

pub fn wrap_phase(x: f64) -> f64 {
    let t = x.rem_euclid(std::f64::consts::TAU);
    if t >= std::f64::consts::TAU { 0.0 } else { t }
}

/// Shannon entropy (natural log) of a probability vector; zeros contribute nothing.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Partial trace over the second factor of a `dA·dB` operator.
pub fn partial_trace_b(rho: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da, da, |i, k| (0..db).map(|b| rho[(i * db + b, k * db + b)]).sum())
}

/// Partial trace over the first factor of a `dA·dB` operator.
pub fn partial_trace_a(rho: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(db, db, |b, e| (0..da).map(|a| rho[(a * db + b, a * db + e)]).sum())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}
