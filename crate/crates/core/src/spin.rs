//! Angular momentum: spin matrices, Clebsch–Gordan coefficients, coherent
//! states, the F_z = 0 projected coherent states and Husimi functions.
//!
//! Basis vectors are always ordered m = +j, j−1, …, −j. For two equal spins in
//! the F_z = 0 block, index k stands for `|I,−m⟩|J,m⟩` with m = J − k.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{domain, Result};
use crate::linalg::{c, Basis, CMat, CVec, Ket, C64};

/// Spin magnitude stored as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SpinQuantum {
    twice: u32,
}

impl TryFrom<f64> for SpinQuantum {
    type Error = crate::error::Error;
    fn try_from(j: f64) -> Result<Self> {
        Self::new(j)
    }
}

impl From<SpinQuantum> for f64 {
    fn from(s: SpinQuantum) -> f64 {
        s.j()
    }
}

impl SpinQuantum {
    pub fn new(j: f64) -> Result<Self> {
        let twice = half_integer_twice(j, "spin")?;
        if twice < 0 {
            return domain(format!("spin must be non-negative, got {j}"));
        }
        Ok(Self { twice: twice as u32 })
    }

    pub fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    pub fn j(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// Magnetic quantum numbers in basis order, +j first.
    pub fn m_values(self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.j() - k as f64).collect()
    }
}

fn half_integer_twice(x: f64, what: &str) -> Result<i64> {
    let t = (2.0 * x).round();
    if !x.is_finite() || (2.0 * x - t).abs() > 1e-9 {
        return domain(format!("{what} = {x} is not a half-integer"));
    }
    Ok(t as i64)
}

#[derive(Debug, Clone)]
pub struct SpinOps {
    pub jx: CMat,
    pub jy: CMat,
    pub jz: CMat,
}

/// `J_x, J_y, J_z` in the `|j,m⟩` basis.
pub fn build_spin_ops(s: SpinQuantum) -> SpinOps {
    let d = s.dim();
    let j = s.j();
    let mut jp = CMat::zeros(d, d);
    for k in 1..d {
        let m = j - k as f64;
        jp[(k - 1, k)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt());
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).scale(0.5);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    let jz = CMat::from_diagonal(&CVec::from_iterator(d, s.m_values().into_iter().map(c)));
    SpinOps { jx, jy, jz }
}

/// Real symmetric `J_x` (the standard basis makes it real), used where a real
/// eigen-decomposition is preferable.
pub fn jx_real(s: SpinQuantum) -> nalgebra::DMatrix<f64> {
    let d = s.dim();
    let j = s.j();
    let mut m = nalgebra::DMatrix::zeros(d, d);
    for k in 1..d {
        let mm = j - k as f64;
        let v = 0.5 * (j * (j + 1.0) - mm * (mm + 1.0)).sqrt();
        m[(k - 1, k)] = v;
        m[(k, k - 1)] = v;
    }
    m
}

/// Clebsch–Gordan coefficients `⟨j1 m1; j2 M−m1 | J M⟩` for every admissible
/// `m1`, ascending in `m1`.
#[derive(Debug, Clone)]
pub struct CgColumn {
    /// `2·m1` of the first entry.
    pub twice_m1_min: i64,
    pub coeffs: Vec<f64>,
}

impl CgColumn {
    pub fn m1_min(&self) -> f64 {
        self.twice_m1_min as f64 / 2.0
    }

    pub fn get(&self, m1: f64) -> f64 {
        let t = (2.0 * m1).round() as i64;
        let off = t - self.twice_m1_min;
        if off < 0 || off % 2 != 0 {
            return 0.0;
        }
        self.coeffs.get((off / 2) as usize).copied().unwrap_or(0.0)
    }
}

/// Doubled quantum numbers for one coupling `j1 ⊗ j2 → J`, validated.
#[derive(Clone, Copy)]
struct Coupling {
    j1: i64,
    j2: i64,
    jj: i64,
    mm: i64,
}

impl Coupling {
    fn new(j1: f64, j2: f64, jj: f64, mm: f64) -> Result<Self> {
        let j1 = half_integer_twice(j1, "j1")?;
        let j2 = half_integer_twice(j2, "j2")?;
        let jj = half_integer_twice(jj, "J")?;
        let mm = half_integer_twice(mm, "M")?;
        if j1 < 0 || j2 < 0 || jj < 0 {
            return domain("angular momenta must be non-negative");
        }
        if jj < (j1 - j2).abs() || jj > j1 + j2 || (j1 + j2 + jj) % 2 != 0 {
            return domain(format!(
                "J = {} violates the triangle rule for {} ⊗ {}",
                jj as f64 / 2.0,
                j1 as f64 / 2.0,
                j2 as f64 / 2.0
            ));
        }
        if mm.abs() > jj || (jj - mm) % 2 != 0 {
            return domain(format!("M = {} is not admissible for J = {}", mm as f64 / 2.0, jj as f64 / 2.0));
        }
        Ok(Self { j1, j2, jj, mm })
    }
}

/// One column of Clebsch–Gordan coefficients at fixed (J, M).
///
/// The coefficients solve the three-term recursion that follows from
/// `J² |J M⟩ = J(J+1) |J M⟩` written in the uncoupled basis. The recursion is
/// run forward from the lowest m1 and backward from the highest; each run is
/// trusted only while its magnitude grows, and the two are joined by a least
/// squares scale fit over the region where both are trusted. Intermediates are
/// rescaled whenever they grow large, so no factorials are ever formed.
/// Sign: the coefficient at the largest m1 is positive (Condon–Shortley).
pub fn cg_column(j1: f64, j2: f64, jj: f64, mm: f64) -> Result<CgColumn> {
    let cp = Coupling::new(j1, j2, jj, mm)?;
    Ok(cg_column_checked(cp))
}

fn cg_column_checked(cp: Coupling) -> CgColumn {
    let (a, b) = (cp.j1 as f64 / 2.0, cp.j2 as f64 / 2.0);
    let big_m = cp.mm as f64 / 2.0;
    let lambda = (cp.jj as f64 / 2.0) * (cp.jj as f64 / 2.0 + 1.0);
    let t_lo = (-cp.j1).max(cp.mm - cp.j2);
    let t_hi = cp.j1.min(cp.mm + cp.j2);
    let n = ((t_hi - t_lo) / 2 + 1) as usize;
    let m1 = |k: usize| (t_lo as f64) / 2.0 + k as f64;

    let diag = |k: usize| {
        let x = m1(k);
        let y = big_m - x;
        a * (a + 1.0) + b * (b + 1.0) + 2.0 * x * y - lambda
    };
    // Coupling between entries k and k−1.
    let off = |k: usize| {
        let x = m1(k);
        let y = big_m - x;
        ((a * (a + 1.0) - x * (x - 1.0)) * (b * (b + 1.0) - y * (y + 1.0))).max(0.0).sqrt()
    };

    if n == 1 {
        return CgColumn { twice_m1_min: t_lo, coeffs: vec![1.0] };
    }

    const BIG: f64 = 1e100;
    let mut fwd = vec![0.0; n];
    fwd[0] = 1.0;
    for k in 0..n - 1 {
        let prev = if k > 0 { off(k) * fwd[k - 1] } else { 0.0 };
        fwd[k + 1] = -(diag(k) * fwd[k] + prev) / off(k + 1);
        if fwd[k + 1].abs() > BIG {
            fwd[..=k + 1].iter_mut().for_each(|v| *v /= BIG);
        }
    }
    let mut bwd = vec![0.0; n];
    bwd[n - 1] = 1.0;
    for k in (1..n).rev() {
        let next = if k + 1 < n { off(k + 1) * bwd[k + 1] } else { 0.0 };
        bwd[k - 1] = -(diag(k) * bwd[k] + next) / off(k);
        if bwd[k - 1].abs() > BIG {
            bwd[k - 1..].iter_mut().for_each(|v| *v /= BIG);
        }
    }

    // First local maximum of |fwd| seen from below, and of |bwd| from above.
    let kf = (0..n - 1).find(|&k| fwd[k + 1].abs() < fwd[k].abs()).unwrap_or(n - 1);
    let kb = (1..n).rev().find(|&k| bwd[k - 1].abs() < bwd[k].abs()).unwrap_or(0);
    let (lo, hi) = (kf.min(kb), kf.max(kb));
    let mid = (lo + hi) / 2;
    let (mut num, mut den) = (0.0, 0.0);
    for k in lo..=hi {
        num += fwd[k] * bwd[k];
        den += bwd[k] * bwd[k];
    }
    let scale = if den > 0.0 { num / den } else { fwd[mid] / bwd[mid] };

    let mut out: Vec<f64> = (0..n).map(|k| if k <= mid { fwd[k] } else { scale * bwd[k] }).collect();
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sign = if out[n - 1] < 0.0 { -1.0 } else { 1.0 };
    out.iter_mut().for_each(|v| *v *= sign / norm);
    CgColumn { twice_m1_min: t_lo, coeffs: out }
}

/// `⟨j1 m1; j2 m2 | J M⟩` with the Condon–Shortley phase convention.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, jj: f64, mm: f64) -> Result<f64> {
    let cp = Coupling::new(j1, j2, jj, mm)?;
    let t1 = half_integer_twice(m1, "m1")?;
    let t2 = half_integer_twice(m2, "m2")?;
    if t1.abs() > cp.j1 || (cp.j1 - t1) % 2 != 0 {
        return domain(format!("m1 = {m1} is not admissible for j1 = {j1}"));
    }
    if t2.abs() > cp.j2 || (cp.j2 - t2) % 2 != 0 {
        return domain(format!("m2 = {m2} is not admissible for j2 = {j2}"));
    }
    if t1 + t2 != cp.mm {
        return Ok(0.0);
    }
    Ok(cg_column_checked(cp).get(m1))
}

/// `c_F(m) = ⟨J,−m; J,m | F,0⟩` for all F = 0…2J, indexed `[F][k]` with
/// m = J − k (the F_z = 0 block ordering).
pub fn fz0_cg_table(s: SpinQuantum) -> Vec<Vec<f64>> {
    let j = s.twice() as i64;
    (0..=j)
        .map(|f| {
            let col = cg_column_checked(Coupling { j1: j, j2: j, jj: 2 * f, mm: 0 });
            // col is ascending in m1 = −m, i.e. already in block order.
            col.coeffs
        })
        .collect()
}

/// Spin coherent state pointing along polar angle `theta`, azimuth `phi`.
///
/// Amplitudes are ∝ μ^{j−m} √binom(2j, j−m) with μ = tan(θ/2) e^{iφ}; both poles
/// are returned exactly.
pub fn spin_coherent(s: SpinQuantum, theta: f64, phi: f64) -> Result<Ket> {
    if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
        return domain(format!("coherent state angles out of range: θ={theta}, φ={phi}"));
    }
    let d = s.dim();
    let n = s.twice() as u64;
    if theta == 0.0 {
        return Ok(Ket::basis_state(d, 0, Basis::Spin));
    }
    if theta == PI {
        return Ok(Ket::basis_state(d, d - 1, Basis::Spin));
    }
    let ln_mu = (theta / 2.0).tan().ln();
    let logs: Vec<f64> = (0..d).map(|k| k as f64 * ln_mu + 0.5 * ln_binomial(n, k as u64)).collect();
    let amps = from_log_amplitudes(&logs, |k| k as f64 * phi);
    Ket::new(amps, Basis::Spin)
}

fn from_log_amplitudes(logs: &[f64], phase: impl Fn(usize) -> f64) -> CVec {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    CVec::from_iterator(
        logs.len(),
        logs.iter().enumerate().map(|(k, &l)| C64::from_polar((l - top).exp(), phase(k))),
    )
}

/// Point of the reduced phase space: polar angle of J (I sits at π − δθ) and
/// the azimuth difference φ_I − φ_J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePointDiff {
    pub delta_theta: f64,
    pub delta_phi: f64,
}

impl PhasePointDiff {
    pub fn new(delta_theta: f64, delta_phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&delta_theta) {
            return domain(format!("delta_theta = {delta_theta} outside [0, π]"));
        }
        if !delta_phi.is_finite() {
            return domain("delta_phi must be finite");
        }
        Ok(Self { delta_theta, delta_phi: delta_phi.rem_euclid(TAU) })
    }
}

/// Normalized projection of `|θ_I, φ_I⟩ ⊗ |θ_J, φ_J⟩` onto F_z = 0, with
/// θ_J = δθ, θ_I = π − δθ and φ_I − φ_J = δφ.
///
/// Amplitude of block index k (m = J − k) is ∝ w^m binom(2J, J+m) where
/// w = μ_I/μ_J = cot²(δθ/2) e^{iδφ}.
pub fn project_fz0_coherent(s: SpinQuantum, p: PhasePointDiff) -> Ket {
    let d = s.dim();
    if p.delta_theta == 0.0 {
        return Ket::basis_state(d, 0, Basis::Fz0Block);
    }
    if p.delta_theta == PI {
        return Ket::basis_state(d, d - 1, Basis::Fz0Block);
    }
    let amps = fz0_coherent_amplitudes(s, p);
    Ket { amps, basis: Basis::Fz0Block }
}

fn fz0_coherent_amplitudes(s: SpinQuantum, p: PhasePointDiff) -> CVec {
    let d = s.dim();
    let j = s.j();
    let n = s.twice() as u64;
    let ln_w = -2.0 * (p.delta_theta / 2.0).tan().ln();
    let logs: Vec<f64> = (0..d)
        .map(|k| (j - k as f64) * ln_w + ln_binomial(n, k as u64))
        .collect();
    let v = from_log_amplitudes(&logs, |k| (j - k as f64) * p.delta_phi);
    let norm = v.norm();
    v.unscale(norm)
}

/// Cell-centre grid, `n × n`, uniform in (cos δθ, δφ). Row-major in δθ.
pub fn husimi_grid(n: usize) -> Vec<PhasePointDiff> {
    let mut g = Vec::with_capacity(n * n);
    for a in 0..n {
        let z = -1.0 + (a as f64 + 0.5) * 2.0 / n as f64;
        for b in 0..n {
            let phi = (b as f64 + 0.5) * TAU / n as f64;
            g.push(PhasePointDiff { delta_theta: z.acos(), delta_phi: phi });
        }
    }
    g
}

/// Rows are the conjugated projected coherent states at each grid point, so
/// `bras * psi` gives the overlaps `⟨δθ,δφ|ψ⟩`.
pub fn coherent_bras(s: SpinQuantum, grid: &[PhasePointDiff]) -> CMat {
    let d = s.dim();
    let mut m = CMat::zeros(grid.len(), d);
    for (r, p) in grid.iter().enumerate() {
        let k = project_fz0_coherent(s, *p);
        for i in 0..d {
            m[(r, i)] = k.amps[i].conj();
        }
    }
    m
}

fn block_spin(psi: &Ket) -> Result<SpinQuantum> {
    if psi.basis != Basis::Fz0Block {
        return domain("Husimi function needs a state in the F_z = 0 block basis");
    }
    if psi.dim() == 0 {
        return domain("empty state");
    }
    Ok(SpinQuantum::from_twice(psi.dim() as u32 - 1))
}

/// `Q(δθ,δφ) = |⟨δθ,δφ|ψ⟩|²` at every grid point.
pub fn husimi(psi: &Ket, grid: &[PhasePointDiff]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return domain("empty Husimi grid");
    }
    let s = block_spin(psi)?;
    let q = coherent_bras(s, grid) * &psi.amps;
    Ok(q.iter().map(|z| z.norm_sqr().min(1.0)).collect())
}

/// Entropy of a sampled Husimi distribution:
/// `S_Q = −Σ_k (Q_k / Σ_l Q_l) ln Q_k`, the equal-cell Riemann sum of
/// `−∫Q ln Q dμ / ∫Q dμ`. Non-negative because Q ≤ 1.
pub fn husimi_entropy_from_samples(q: &[f64]) -> f64 {
    let total: f64 = q.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -q.iter().filter(|&&x| x > 0.0).map(|&x| x / total * x.ln()).sum::<f64>()
}

pub fn husimi_entropy(psi: &Ket, resolution: usize) -> Result<f64> {
    if resolution < 16 {
        return domain(format!("Husimi resolution {resolution} below 16"));
    }
    let q = husimi(psi, &husimi_grid(resolution))?;
    Ok(husimi_entropy_from_samples(&q))
}

/// Husimi entropies of many block states at once (columns of `states`).
pub fn husimi_entropies(s: SpinQuantum, states: &CMat, resolution: usize) -> Result<Vec<f64>> {
    if resolution < 16 {
        return domain(format!("Husimi resolution {resolution} below 16"));
    }
    if states.nrows() != s.dim() {
        return domain("state dimension does not match the block");
    }
    let overlaps = coherent_bras(s, &husimi_grid(resolution)) * states;
    Ok(overlaps
        .column_iter()
        .map(|col| {
            let q: Vec<f64> = col.iter().map(|z| z.norm_sqr().min(1.0)).collect();
            husimi_entropy_from_samples(&q)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs, I};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sq(j: f64) -> SpinQuantum {
        SpinQuantum::new(j).unwrap()
    }

    #[test]
    fn spin_half_jz() {
        let ops = build_spin_ops(sq(0.5));
        assert_abs_diff_eq!(ops.jz[(0, 0)].re, 0.5);
        assert_abs_diff_eq!(ops.jz[(1, 1)].re, -0.5);
    }

    #[test]
    fn spin_one_commutator() {
        let o = build_spin_ops(sq(1.0));
        let r = commutator(&o.jx, &o.jy) - &o.jz * I;
        assert!(max_abs(&r) < 1e-14);
    }

    #[test]
    fn jz_spectrum_spin_ten() {
        let o = build_spin_ops(sq(10.0));
        for k in 0..21 {
            assert_eq!(o.jz[(k, k)].re, 10.0 - k as f64);
        }
    }

    #[test]
    fn rejects_non_half_integer() {
        assert!(SpinQuantum::new(0.3).is_err());
        assert!(SpinQuantum::new(-1.0).is_err());
    }

    #[test]
    fn singlets() {
        let a = clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(a, 0.5f64.sqrt(), epsilon = 1e-15);
        let b = clebsch_gordan(1.0, 1.0, 1.0, -1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(b, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        let c = clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(c, -(0.5f64.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn known_values() {
        // ⟨1 0; 1 0 | 1 0⟩ = 0, ⟨1 0; 1 0 | 2 0⟩ = √(2/3), ⟨3/2 1/2; 1 −1 | 1/2 −1/2⟩ = √(1/6).
        assert_abs_diff_eq!(clebsch_gordan(1.0, 0.0, 1.0, 0.0, 1.0, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            clebsch_gordan(1.0, 0.0, 1.0, 0.0, 2.0, 0.0).unwrap(),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(1.5, 0.5, 1.0, -1.0, 0.5, -0.5).unwrap(),
            (1.0f64 / 6.0).sqrt(),
            epsilon = 1e-14
        );
        assert_eq!(clebsch_gordan(1.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn invalid_quantum_numbers() {
        assert!(clebsch_gordan(1.0, 2.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(clebsch_gordan(1.0, 0.0, 1.0, 0.0, 3.0, 0.0).is_err());
        assert!(clebsch_gordan(1.0, 0.5, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    /// Independent oracle: CG columns as eigenvectors of F² in the M = 0
    /// uncoupled basis, which is symmetric tridiagonal.
    fn f2_eigen_oracle(j: f64) -> (Vec<f64>, nalgebra::DMatrix<f64>) {
        let d = (2.0 * j) as usize + 1;
        let mut f2 = nalgebra::DMatrix::<f64>::zeros(d, d);
        for k in 0..d {
            let m = j - k as f64;
            f2[(k, k)] = 2.0 * j * (j + 1.0) - 2.0 * m * m;
            if k + 1 < d {
                // ⟨m−1| J1+ J2− + J1− J2+ |m⟩ with m_I = −m.
                let v = j * (j + 1.0) - m * (m - 1.0);
                f2[(k, k + 1)] = v;
                f2[(k + 1, k)] = v;
            }
        }
        let e = nalgebra::SymmetricEigen::new(f2);
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    }

    #[test]
    fn block_table_matches_f2_eigenvectors() {
        let j = 12.0;
        let table = fz0_cg_table(sq(j));
        let (vals, vecs) = f2_eigen_oracle(j);
        for (f, col) in table.iter().enumerate() {
            let target = (f * (f + 1)) as f64;
            let idx = (0..vals.len())
                .min_by(|&a, &b| (vals[a] - target).abs().total_cmp(&(vals[b] - target).abs()))
                .unwrap();
            let v = vecs.column(idx);
            let dot: f64 = col.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(dot.abs(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn m0_reflection_symmetry() {
        let j = 7.0;
        let table = fz0_cg_table(sq(j));
        let d = table[0].len();
        for (f, col) in table.iter().enumerate() {
            let sign = if (14 - f) % 2 == 0 { 1.0 } else { -1.0 };
            for k in 0..d {
                assert_abs_diff_eq!(col[d - 1 - k], sign * col[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn orthonormal_columns_spin_twenty() {
        let table = fz0_cg_table(sq(20.0));
        for (f, a) in table.iter().enumerate() {
            for (g, b) in table.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if f == g { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "F={f} F'={g} dot={dot}");
            }
        }
    }

    #[test]
    fn large_spin_table_is_finite_and_orthonormal() {
        let table = fz0_cg_table(sq(150.0));
        let d = table.len();
        let mut worst: f64 = 0.0;
        for f in (0..d).step_by(7) {
            for g in (0..d).step_by(11) {
                let dot: f64 = table[f].iter().zip(&table[g]).map(|(x, y)| x * y).sum();
                let want = if f == g { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn coherent_poles() {
        let s = sq(5.0);
        let up = spin_coherent(s, 0.0, 0.0).unwrap();
        assert_eq!(up.amps[0], c(1.0));
        let down = spin_coherent(s, PI, 0.0).unwrap();
        assert_eq!(down.amps[10], c(1.0));
    }

    #[test]
    fn coherent_expectation() {
        let s = sq(20.0);
        let k = spin_coherent(s, PI / 3.0, 1.1).unwrap();
        let o = build_spin_ops(s);
        let ez = k.amps.dotc(&(&o.jz * &k.amps)).re / 20.0;
        let ex = k.amps.dotc(&(&o.jx * &k.amps)).re / 20.0;
        let ey = k.amps.dotc(&(&o.jy * &k.amps)).re / 20.0;
        assert_abs_diff_eq!(ez, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(ex, (PI / 3.0).sin() * 1.1f64.cos(), epsilon = 1e-10);
        assert_abs_diff_eq!(ey, (PI / 3.0).sin() * 1.1f64.sin(), epsilon = 1e-10);
    }

    #[test]
    fn projected_pole_state() {
        let s = sq(150.0);
        let k = project_fz0_coherent(s, PhasePointDiff::new(PI, 0.0).unwrap());
        assert_eq!(k.amps[300], c(1.0));
        let near = project_fz0_coherent(s, PhasePointDiff::new(PI - 1e-3, 0.0).unwrap());
        assert!(near.amps[300].norm() > 0.99);
    }

    /// Brute-force oracle: build both coherent states in the full product
    /// space, keep the m_I + m_J = 0 components, normalize.
    fn brute_force_projection(j: f64, p: PhasePointDiff) -> CVec {
        let s = sq(j);
        let ki = spin_coherent(s, PI - p.delta_theta, p.delta_phi).unwrap();
        let kj = spin_coherent(s, p.delta_theta, 0.0).unwrap();
        let d = s.dim();
        // Block index k: m_J = J − k at spin-J index k, m_I = −m_J at index d−1−k.
        let v = CVec::from_iterator(d, (0..d).map(|k| ki.amps[d - 1 - k] * kj.amps[k]));
        let n = v.norm();
        v.unscale(n)
    }

    fn phase_aligned_distance(a: &CVec, b: &CVec) -> f64 {
        let ov = a.dotc(b);
        let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { c(1.0) };
        (a * ph - b).norm()
    }

    #[test]
    fn projection_matches_brute_force() {
        let p = PhasePointDiff::new(PI / 2.0, PI / 3.0).unwrap();
        let fast = project_fz0_coherent(sq(20.0), p);
        let slow = brute_force_projection(20.0, p);
        assert!(phase_aligned_distance(&fast.amps, &slow) < 1e-10);
    }

    #[test]
    fn projection_matches_brute_force_on_grid() {
        for twice in 1..=50u32 {
            let j = twice as f64 / 2.0;
            for a in 0..5 {
                for b in 0..5 {
                    let p = PhasePointDiff::new(0.1 + a as f64 * 0.7, b as f64 * 1.2).unwrap();
                    let fast = project_fz0_coherent(sq(j), p);
                    let slow = brute_force_projection(j, p);
                    let e = phase_aligned_distance(&fast.amps, &slow);
                    assert!(e < 1e-10, "j={j} p={p:?} err={e}");
                }
            }
        }
    }

    #[test]
    fn husimi_self_overlap_is_one() {
        let s = sq(30.0);
        let p = PhasePointDiff::new(1.2, 2.5).unwrap();
        let k = project_fz0_coherent(s, p);
        let q = husimi(&k, &[p]).unwrap();
        assert_abs_diff_eq!(q[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn husimi_antipodal_decay() {
        let s = sq(50.0);
        let pole = project_fz0_coherent(s, PhasePointDiff::new(PI, 0.0).unwrap());
        let q = husimi(&pole, &[PhasePointDiff::new(0.0, 0.0).unwrap(), PhasePointDiff::new(0.05, 1.0).unwrap()])
            .unwrap();
        assert!(q.iter().all(|&x| x < 1e-6));
    }

    #[test]
    fn husimi_rejects_wrong_basis() {
        let k = Ket::basis_state(5, 0, Basis::Spin);
        assert!(husimi(&k, &husimi_grid(4)).is_err());
    }

    fn random_block_ket(j: f64, seed: u64) -> Ket {
        let mut rng = crate::rng::stream(seed, crate::rng::family::MISC, 0);
        let d = sq(j).dim();
        Ket::new(CVec::from_fn(d, |_, _| crate::rng::complex_normal(&mut rng)), Basis::Fz0Block).unwrap()
    }

    #[test]
    fn localized_state_has_lower_husimi_entropy() {
        let s = sq(50.0);
        let coh = project_fz0_coherent(s, PhasePointDiff::new(1.0, 2.0).unwrap());
        let rnd = random_block_ket(50.0, 3);
        assert!(husimi_entropy(&coh, 64).unwrap() < husimi_entropy(&rnd, 64).unwrap());
    }

    #[test]
    fn husimi_entropy_phi_translation_invariance() {
        let s = sq(50.0);
        let n = 64;
        let cell = TAU / n as f64;
        let a = project_fz0_coherent(s, PhasePointDiff::new(1.3, 0.5 * cell + 10.0 * cell).unwrap());
        let b = project_fz0_coherent(s, PhasePointDiff::new(1.3, 0.5 * cell + 37.0 * cell).unwrap());
        let d = (husimi_entropy(&a, n).unwrap() - husimi_entropy(&b, n).unwrap()).abs();
        assert!(d < 1e-3, "{d}");
    }

    #[test]
    fn husimi_entropy_converges_with_resolution() {
        let s = sq(50.0);
        let k = project_fz0_coherent(s, PhasePointDiff::new(1.1, 0.7).unwrap());
        let a = husimi_entropy(&k, 100).unwrap();
        let b = husimi_entropy(&k, 200).unwrap();
        assert!((a - b).abs() < 1e-2, "{a} {b}");
    }

    /// Under the equal-weight (cos δθ, δφ) measure the normalized projected
    /// states do not resolve the identity: the total Husimi mass depends on the
    /// state by a few percent. Measured here so any change is noticed.
    #[test]
    fn husimi_mass_under_uniform_measure() {
        let s = sq(50.0);
        let n = 200;
        let w = 2.0 * TAU / (n * n) as f64;
        let grid = husimi_grid(n);
        let bras = coherent_bras(s, &grid);
        let masses: Vec<f64> = [0usize, 50, 100]
            .iter()
            .map(|&k| bras.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>() * w)
            .collect();
        let spread = (masses[0] - masses[2]).abs() / masses[0];
        assert!(spread < 1e-6, "edge states are mirror images");
        let rel = (masses[0] - masses[1]).abs() / masses[0];
        assert!(rel > 0.03 && rel < 0.06, "relative spread {rel}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn spin_algebra(twice in 0u32..=40) {
            let s = SpinQuantum::from_twice(twice);
            let o = build_spin_ops(s);
            let j = s.j();
            prop_assert!(max_abs(&(commutator(&o.jx, &o.jy) - &o.jz * I)) < 1e-12);
            prop_assert!(max_abs(&(commutator(&o.jy, &o.jz) - &o.jx * I)) < 1e-12);
            prop_assert!(max_abs(&(commutator(&o.jz, &o.jx) - &o.jy * I)) < 1e-12);
            let mut cas = &o.jx * &o.jx + &o.jy * &o.jy + &o.jz * &o.jz;
            for k in 0..s.dim() { cas[(k, k)] -= c(j * (j + 1.0)); }
            prop_assert!(max_abs(&cas) < 1e-10);
        }

        #[test]
        fn cg_columns_orthonormal(t1 in 0i64..=60, t2 in 0i64..=60, tm in -60i64..=60) {
            // Any two columns with the same (j1, j2, M) are orthonormal.
            let (j1, j2) = (t1 as f64 / 2.0, t2 as f64 / 2.0);
            prop_assume!((t1 + t2 + tm) % 2 == 0 && tm.abs() <= t1 + t2);
            let fs: Vec<i64> = ((t1 - t2).abs()..=t1 + t2).step_by(2).filter(|f| *f >= tm.abs()).collect();
            let cols: Vec<CgColumn> = fs.iter()
                .map(|&f| cg_column(j1, j2, f as f64 / 2.0, tm as f64 / 2.0).unwrap())
                .collect();
            for a in &cols {
                for b in &cols {
                    let dot: f64 = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum();
                    let same = std::ptr::eq(a, b);
                    let want = if same { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-10, "dot {}", dot);
                }
            }
        }

        #[test]
        fn projected_states_normalized(twice in 1u32..=200, th in 0.0f64..PI, ph in 0.0f64..TAU) {
            let k = project_fz0_coherent(SpinQuantum::from_twice(twice), PhasePointDiff::new(th, ph).unwrap());
            prop_assert!((k.amps.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn husimi_in_unit_interval(seed in 0u64..1000) {
            let k = random_block_ket(8.0, seed);
            let q = husimi(&k, &husimi_grid(16)).unwrap();
            prop_assert!(q.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }
}
