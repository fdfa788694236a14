//! State tomography from a weak continuous measurement record.
//!
//! A fixed observable `O₀` is measured after every kick; in the Heisenberg
//! picture step `i` reads `M_i = Tr(O_i ρ₀) + σ W_i` with `O_i = U†ⁱ O₀ Uⁱ`.
//! States are expanded as `ρ = 1/d + Σ_α r_α E_α` over an orthonormal traceless
//! Hermitian basis, which turns reconstruction into linear least squares on `r`.

pub mod experiment;

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{hermitian_eigen, shannon, CMat, Ket, RMat, RVec, C64, I};
use crate::rng::{family, normal, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Element {
    Sym(usize, usize),
    Anti(usize, usize),
    Diag(usize),
}

/// Generalized Gell-Mann basis of traceless Hermitian `d×d` matrices with
/// `Tr(E_α E_β) = δ_αβ`: for each pair `a < b` a symmetric then an
/// antisymmetric element, followed by the `d − 1` diagonal ladder elements.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    d: usize,
    elems: Vec<Element>,
}

impl OperatorBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return domain(format!("operator basis needs d >= 2, got {d}"));
        }
        let mut elems = Vec::with_capacity(d * d - 1);
        for a in 0..d {
            for b in a + 1..d {
                elems.push(Element::Sym(a, b));
                elems.push(Element::Anti(a, b));
            }
        }
        elems.extend((1..d).map(Element::Diag));
        Ok(Self { d, elems })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of elements, `d² − 1`.
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn element(&self, alpha: usize) -> CMat {
        let mut r = RVec::zeros(self.len());
        r[alpha] = 1.0;
        self.operator(&r)
    }

    pub fn matrices(&self) -> Vec<CMat> {
        (0..self.len()).map(|a| self.element(a)).collect()
    }

    /// `Re Tr(E_α O)` for every α; exact coefficients when `O` is Hermitian.
    pub fn coefficients(&self, o: &CMat) -> RVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        RVec::from_iterator(
            self.len(),
            self.elems.iter().map(|e| match *e {
                Element::Sym(a, b) => (o[(a, b)] + o[(b, a)]).re * s,
                Element::Anti(a, b) => -(o[(a, b)] - o[(b, a)]).im * s,
                Element::Diag(k) => {
                    let head: f64 = (0..k).map(|i| o[(i, i)].re).sum();
                    (head - k as f64 * o[(k, k)].re) / ((k * (k + 1)) as f64).sqrt()
                }
            }),
        )
    }

    /// `Σ_α r_α E_α`.
    pub fn operator(&self, r: &RVec) -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMat::zeros(self.d, self.d);
        for (e, &x) in self.elems.iter().zip(r.iter()) {
            match *e {
                Element::Sym(a, b) => {
                    m[(a, b)] += C64::new(x * s, 0.0);
                    m[(b, a)] += C64::new(x * s, 0.0);
                }
                Element::Anti(a, b) => {
                    m[(a, b)] -= I * (x * s);
                    m[(b, a)] += I * (x * s);
                }
                Element::Diag(k) => {
                    let n = x / ((k * (k + 1)) as f64).sqrt();
                    for i in 0..k {
                        m[(i, i)] += C64::new(n, 0.0);
                    }
                    m[(k, k)] -= C64::new(k as f64 * n, 0.0);
                }
            }
        }
        m
    }

    /// `1/d + Σ_α r_α E_α`.
    pub fn density(&self, r: &RVec) -> CMat {
        let mut m = self.operator(r);
        let w = 1.0 / self.d as f64;
        for i in 0..self.d {
            m[(i, i)] += C64::new(w, 0.0);
        }
        m
    }

    pub fn bloch_of_ket(&self, k: &Ket) -> RVec {
        self.coefficients(&k.projector())
    }

    /// Euclidean projection of `r` onto Bloch vectors of density matrices.
    /// The coefficient map is a Frobenius isometry, so this is the nearest
    /// density matrix: eigenvalues projected onto the probability simplex.
    pub fn project_physical(&self, r: &RVec) -> RVec {
        let (vals, vecs) = hermitian_eigen(&self.density(r));
        let p = simplex_projection(&vals);
        let mut scaled = vecs.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(p[k], 0.0);
        }
        self.coefficients(&(scaled * vecs.adjoint()))
    }

    pub fn min_eigenvalue(&self, r: &RVec) -> f64 {
        hermitian_eigen(&self.density(r)).0[0]
    }
}

/// Projection of `v` onto `{x ≥ 0, Σx = 1}`.
pub fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut tau = 0.0;
    for (k, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// `O_i = U†ⁱ O₀ Uⁱ` for i = 1…n_steps.
pub fn observable_history(u: &CMat, o0: &CMat, n_steps: usize) -> Result<Vec<CMat>> {
    if !u.is_square() || u.shape() != o0.shape() {
        return domain("unitary and observable dimensions differ");
    }
    let ud = u.adjoint();
    let mut o = o0.clone();
    let mut out = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        o = &ud * o * u;
        out.push(o.clone());
    }
    Ok(out)
}

/// Rows `Õ_{iα} = Tr(O_i E_α)`.
pub fn design_matrix(basis: &OperatorBasis, history: &[CMat]) -> RMat {
    let rows: Vec<RVec> = history.iter().map(|o| basis.coefficients(o)).collect();
    stack_rows(&rows, basis.len())
}

pub(crate) fn stack_rows(rows: &[RVec], p: usize) -> RMat {
    RMat::from_fn(rows.len(), p, |i, a| rows[i][a])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub values: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl MeasurementRecord {
    pub fn n_steps(&self) -> usize {
        self.values.len()
    }
}

/// `M_i = Tr(O_i ρ₀) + σ W_i` with `W_i` standard normal from the noise stream of `seed`.
pub fn simulate_record(rho0: &CMat, history: &[CMat], sigma: f64, seed: u64) -> Result<MeasurementRecord> {
    if !(sigma >= 0.0) {
        return domain("sigma must be non-negative");
    }
    crate::linalg::check_density(rho0, 1e-9)?;
    if history.iter().any(|o| o.shape() != rho0.shape()) {
        return domain("history and state dimensions differ");
    }
    let mut rng = stream(seed, family::NOISE, 0);
    let values = history
        .iter()
        .map(|o| (o * rho0).trace().re + sigma * normal(&mut rng))
        .collect();
    Ok(MeasurementRecord { values, sigma, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoMetrics {
    pub entropy_e: f64,
    pub fisher: f64,
    pub rank: usize,
}

/// Relative cut applied to eigenvalues of the inverse covariance: `(1e-10)²`,
/// matching the singular-value cut of the pseudoinverse.
pub const EIGEN_CUT: f64 = 1e-20;

/// Entropy (natural log) of the normalized spectrum of `C⁻¹` and the collective
/// Fisher information `1/Σ(1/λ_k)`, both over the nonzero eigenvalues.
pub fn info_metrics(eigs: &[f64]) -> Result<InfoMetrics> {
    if eigs.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return domain("inverse covariance eigenvalues must be finite and non-negative");
    }
    let max = eigs.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return domain("inverse covariance spectrum is all zero");
    }
    let nz: Vec<f64> = eigs.iter().copied().filter(|&x| x > EIGEN_CUT * max).collect();
    let total: f64 = nz.iter().sum();
    let p: Vec<f64> = nz.iter().map(|x| x / total).collect();
    Ok(InfoMetrics {
        entropy_e: shannon(&p),
        fisher: 1.0 / nz.iter().map(|x| 1.0 / x).sum::<f64>(),
        rank: nz.len(),
    })
}

/// Relative singular-value cut of the pseudoinverse.
pub const PINV_CUT: f64 = 1e-10;

/// Singular values of `Õ` sorted descending, truncated at the pseudoinverse cut.
pub fn design_singular_values(design: &RMat) -> Vec<f64> {
    let mut s: Vec<f64> = design.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let cut = s.first().copied().unwrap_or(0.0) * PINV_CUT;
    s.retain(|&x| x > cut && x > 0.0);
    s
}

/// Noise weighting: with σ = 0 the record is weighted as unit noise.
fn noise_var(sigma: f64) -> f64 {
    if sigma > 0.0 {
        sigma * sigma
    } else {
        1.0
    }
}

pub fn metrics_from_singular_values(s: &[f64], sigma: f64) -> Result<InfoMetrics> {
    let v = noise_var(sigma);
    info_metrics(&s.iter().map(|x| x * x / v).collect::<Vec<_>>())
}

/// Weight on unmeasured directions relative to the weakest measured one.
pub const NULL_WEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmOptions {
    pub max_iter: usize,
    /// Relative change of the objective between iterates.
    pub rel_tol: f64,
    /// Primal residual `‖x − z‖` relative to `max(‖z‖, 1)`.
    pub primal_tol: f64,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, rel_tol: 1e-8, primal_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityOutcome {
    pub r: RVec,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Linear estimator for a fixed design: thin SVD `Õ = U S Vᵀ` truncated at the
/// pseudoinverse cut. `C⁻¹ = V diag(s²/σ²) Vᵀ` on the measured subspace.
#[derive(Debug, Clone)]
pub struct Estimator {
    u_r: RMat,
    v_r: RMat,
    s: Vec<f64>,
    lambda: Vec<f64>,
    w_min: f64,
    sigma: f64,
}

impl Estimator {
    pub fn new(design: &RMat, sigma: f64) -> Result<Self> {
        if design.nrows() == 0 {
            return domain("empty measurement history");
        }
        if !(sigma >= 0.0) {
            return domain("sigma must be non-negative");
        }
        let svd = SVD::new(design.clone(), true, true);
        let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let smax = svd.singular_values[idx[0]];
        if smax <= 0.0 {
            return domain("design matrix is zero");
        }
        idx.retain(|&k| svd.singular_values[k] > PINV_CUT * smax);
        let s: Vec<f64> = idx.iter().map(|&k| svd.singular_values[k]).collect();
        let u_r = RMat::from_columns(&idx.iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>());
        let v_r = RMat::from_columns(&idx.iter().map(|&k| vt.row(k).transpose()).collect::<Vec<_>>());
        let var = noise_var(sigma);
        let lambda: Vec<f64> = s.iter().map(|x| x * x / var).collect();
        let w_min = lambda.last().copied().unwrap_or(1.0) * NULL_WEIGHT;
        Ok(Self { u_r, v_r, s, lambda, w_min, sigma })
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    pub fn inverse_covariance_eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn metrics(&self) -> Result<InfoMetrics> {
        info_metrics(&self.lambda)
    }

    /// `r_ML = Õ⁺ M̃` for a record with the `Tr(O_i)/d` offsets removed.
    pub fn r_ml(&self, traceless_record: &[f64]) -> Result<RVec> {
        if traceless_record.len() != self.u_r.nrows() {
            return domain("record and history lengths differ");
        }
        let m = RVec::from_column_slice(traceless_record);
        let mut c = self.u_r.tr_mul(&m);
        for (ck, sk) in c.iter_mut().zip(&self.s) {
            *ck /= sk;
        }
        Ok(&self.v_r * c)
    }

    /// `(x − r)ᵀ C⁻¹_reg (x − r)` with unmeasured directions weighted by `w_min`.
    pub fn objective(&self, x: &RVec, r: &RVec) -> f64 {
        let diff = x - r;
        let c = self.v_r.tr_mul(&diff);
        let measured: f64 = c.iter().zip(&self.lambda).map(|(ck, l)| l * ck * ck).sum();
        let null = (diff.norm_squared() - c.norm_squared()).max(0.0);
        measured + self.w_min * null
    }

    /// `(C⁻¹_reg + ρ)⁻¹ b` using the spectral form of the regularized metric.
    fn solve_shifted(&self, b: &RVec, rho: f64) -> RVec {
        let c = self.v_r.tr_mul(b);
        let outer = 1.0 / (self.w_min + rho);
        let inside = RVec::from_iterator(c.len(), c.iter().zip(&self.lambda).map(|(ck, l)| ck * (1.0 / (l + rho) - outer)));
        let mut x = b * outer;
        x.gemv(1.0, &self.v_r, &inside, 1.0);
        x
    }

    fn apply_metric(&self, r: &RVec) -> RVec {
        let c = self.v_r.tr_mul(r);
        let scaled = RVec::from_iterator(c.len(), c.iter().zip(&self.lambda).map(|(ck, l)| ck * (l - self.w_min)));
        let mut x = r * self.w_min;
        x.gemv(1.0, &self.v_r, &scaled, 1.0);
        x
    }

    /// Nearest physical Bloch vector to `r_ml` in the `C⁻¹` metric, by
    /// over-relaxed ADMM with residual balancing. `warm` seeds the constrained iterate.
    pub fn positivity(
        &self,
        basis: &OperatorBasis,
        r_ml: &RVec,
        warm: Option<&RVec>,
        opts: AdmmOptions,
    ) -> PositivityOutcome {
        const RELAX: f64 = 1.6;
        const CHECK_EVERY: usize = 5;
        let mut z = warm.map_or_else(|| basis.project_physical(r_ml), |w| basis.project_physical(w));
        let mut u = RVec::zeros(r_ml.len());
        let gr = self.apply_metric(r_ml);
        let mut sorted = self.lambda.clone();
        sorted.sort_by(f64::total_cmp);
        let mut rho = sorted.get(sorted.len() / 2).copied().unwrap_or(1.0).max(self.w_min);
        let mut f_prev = self.objective(&z, r_ml);
        let mut best = (f_prev, z.clone());
        for it in 1..=opts.max_iter {
            let b = &gr + (&z - &u) * rho;
            let x = self.solve_shifted(&b, rho);
            let x_hat = &x * RELAX + &z * (1.0 - RELAX);
            let z_old = z;
            z = basis.project_physical(&(&x_hat + &u));
            u += &x_hat - &z;
            let primal = (&x - &z).norm();
            let dual = rho * (&z - &z_old).norm();
            if it % CHECK_EVERY == 0 {
                let f = self.objective(&z, r_ml);
                if f < best.0 {
                    best = (f, z.clone());
                }
                let scale = z.norm().max(1.0);
                if (f - f_prev).abs() <= opts.rel_tol * f.max(f64::MIN_POSITIVE) && primal <= opts.primal_tol * scale {
                    return PositivityOutcome { objective: f, r: z, iterations: it, converged: true };
                }
                f_prev = f;
            }
            if primal > 10.0 * dual {
                rho *= 2.0;
                u /= 2.0;
            } else if dual > 10.0 * primal {
                rho /= 2.0;
                u *= 2.0;
            }
        }
        PositivityOutcome { objective: best.0, r: best.1, iterations: opts.max_iter, converged: false }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub entropy_e: f64,
    pub fisher: f64,
    pub rank: usize,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub r_ml: RVec,
    pub covariance_inverse_eigenvalues: Vec<f64>,
    pub r_bar: RVec,
    pub rho_bar: CMat,
    pub diagnostics: Diagnostics,
}

/// Tolerance below which `ρ(r_ML)` is accepted as physical.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Pseudoinverse estimate followed, when needed, by the positivity step.
pub fn reconstruct_with(
    basis: &OperatorBasis,
    est: &Estimator,
    traceless_record: &[f64],
    warm: Option<&RVec>,
    opts: AdmmOptions,
) -> Result<ReconstructionResult> {
    let r_ml = est.r_ml(traceless_record)?;
    let m = est.metrics()?;
    let (r_bar, objective, iterations, converged) = if basis.min_eigenvalue(&r_ml) >= -PHYSICAL_TOL {
        (r_ml.clone(), 0.0, 0, true)
    } else {
        let o = est.positivity(basis, &r_ml, warm, opts);
        (o.r, o.objective, o.iterations, o.converged)
    };
    let rho_bar = clipped_density(basis, &r_bar);
    Ok(ReconstructionResult {
        covariance_inverse_eigenvalues: est.inverse_covariance_eigenvalues().to_vec(),
        rho_bar,
        diagnostics: Diagnostics { entropy_e: m.entropy_e, fisher: m.fisher, rank: m.rank, objective, iterations, converged },
        r_ml,
        r_bar,
    })
}

/// Density matrix with eigenvalues clipped at zero and renormalized.
fn clipped_density(basis: &OperatorBasis, r: &RVec) -> CMat {
    let (vals, vecs) = hermitian_eigen(&basis.density(r));
    let clipped: Vec<f64> = vals.iter().map(|&x| x.max(0.0)).collect();
    let t: f64 = clipped.iter().sum();
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(clipped[k] / t, 0.0);
    }
    scaled * vecs.adjoint()
}

pub fn reconstruct(record: &MeasurementRecord, history: &[CMat]) -> Result<ReconstructionResult> {
    if record.values.is_empty() {
        return domain("empty measurement record");
    }
    if record.values.len() != history.len() {
        return domain("record and history lengths differ");
    }
    let d = history[0].nrows();
    let basis = OperatorBasis::new(d)?;
    let design = design_matrix(&basis, history);
    let est = Estimator::new(&design, record.sigma)?;
    let traceless: Vec<f64> = record
        .values
        .iter()
        .zip(history)
        .map(|(m, o)| m - o.trace().re / d as f64)
        .collect();
    reconstruct_with(&basis, &est, &traceless, None, AdmmOptions::default())
}

/// `⟨ψ|ρ̄|ψ⟩` clipped to `[0, 1]`.
pub fn fidelity(psi: &Ket, rho_bar: &CMat) -> Result<f64> {
    if psi.dim() != rho_bar.nrows() {
        return domain("state and density matrix dimensions differ");
    }
    let v = (psi.amps.adjoint() * rho_bar * &psi.amps)[(0, 0)].re;
    Ok(v.clamp(0.0, 1.0))
}

/// `Tr(ρ_ψ ρ(r)) = 1/d + r_ψ·r`, clipped to `[0, 1]`.
pub fn fidelity_bloch(d: usize, r_psi: &RVec, r: &RVec) -> f64 {
    (1.0 / d as f64 + r_psi.dot(r)).clamp(0.0, 1.0)
}
