//! The kicked top: Floquet operators with and without time-reversal symmetry,
//! its classical map on the unit sphere, and spectral diagnostics.
//!
//! Rotation convention: `exp(−iθ J_n)` rotates expectation vectors by +θ about
//! `n` (right-handed); the classical rotation matrices use the same sense.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{c, dagger, expm_hermitian, max_abs, unitary_eigen, CMat, C64};
use crate::spin::{build_spin_ops, jx_real, SpinQuantum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedTopSpec {
    pub spin: SpinQuantum,
    /// Linear precession angle about x.
    pub alpha: f64,
    /// Twist strength about z.
    pub lambda: f64,
}

/// One factor `exp(−i λ J_n²/2j − i α J_n)` per axis, applied z first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedTopNoTrSpec {
    pub spin: SpinQuantum,
    /// `(lambda, alpha)` for the x, y and z factors.
    pub axes: [(f64, f64); 3],
}

impl KickedTopNoTrSpec {
    /// Parameter set used by the examples and baselines.
    pub fn generic(spin: SpinQuantum) -> Self {
        Self { spin, axes: [(7.0, 1.4), (7.0, 1.1), (7.0, 0.9)] }
    }
}

/// `exp(−i t J_x)` through the real eigenbasis of `J_x`.
pub fn rotation_x(spin: SpinQuantum, t: f64) -> CMat {
    let e = SymmetricEigen::new(jx_real(spin));
    let d = spin.dim();
    let v = e.eigenvectors.map(c);
    let mut scaled = v.clone();
    for k in 0..d {
        let ph = C64::from_polar(1.0, -t * e.eigenvalues[k]);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    scaled * v.transpose()
}

/// `U = exp(−i λ J_z²/2j) · exp(−i α J_x)`.
pub fn floquet_kicked_top(spec: &KickedTopSpec) -> CMat {
    let s = spec.spin;
    let j = s.j().max(0.5);
    let mut u = rotation_x(s, spec.alpha);
    for (k, m) in s.m_values().into_iter().enumerate() {
        let ph = C64::from_polar(1.0, -spec.lambda * m * m / (2.0 * j));
        u.row_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    u
}

/// `U = F_x F_y F_z` with `F_n = exp(−i λ_n J_n²/2j − i α_n J_n)`.
pub fn floquet_kicked_top_no_tr(spec: &KickedTopNoTrSpec) -> CMat {
    let s = spec.spin;
    let j = s.j().max(0.5);
    let ops = build_spin_ops(s);
    let gens = [&ops.jx, &ops.jy, &ops.jz];
    let mut u = CMat::identity(s.dim(), s.dim());
    for (g, &(lambda, alpha)) in gens.iter().zip(spec.axes.iter()) {
        let h = (*g * *g).scale(lambda / (2.0 * j)) + g.scale(alpha);
        u = u * expm_hermitian(&h, 1.0);
    }
    u
}

/// `‖T conj(U) T† − U†‖_max`: zero when `U` is time-reversal invariant under
/// the antiunitary `T K`.
pub fn time_reversal_residual(u: &CMat, t_rot: &CMat) -> Result<f64> {
    if u.shape() != t_rot.shape() || !u.is_square() {
        return domain("time reversal check needs square matrices of equal size");
    }
    let lhs = t_rot * u.conjugate() * dagger(t_rot);
    Ok(max_abs(&(lhs - dagger(u))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return domain(format!("point ({x}, {y}, {z}) is not on the unit sphere"));
        }
        Ok(Self { x, y, z })
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self { x: theta.sin() * phi.cos(), y: theta.sin() * phi.sin(), z: theta.cos() }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

pub(crate) fn rot_x(p: [f64; 3], a: f64) -> [f64; 3] {
    let (s, c) = a.sin_cos();
    [p[0], c * p[1] - s * p[2], s * p[1] + c * p[2]]
}

pub(crate) fn rot_z(p: [f64; 3], a: f64) -> [f64; 3] {
    let (s, c) = a.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
}

/// One period of the classical top: rotate by α about x, then twist about z by
/// λ times the new z component.
pub fn classical_kicked_top_step(p: SpherePoint, alpha: f64, lambda: f64) -> SpherePoint {
    let q = rot_x([p.x, p.y, p.z], alpha);
    let r = rot_z(q, lambda * q[2]);
    SpherePoint { x: r[0], y: r[1], z: r[2] }
}

/// `n_steps` mapped points per seed (the seed itself is not included).
pub fn poincare_section(spec: &KickedTopSpec, seeds: &[SpherePoint], n_steps: usize) -> Vec<Vec<SpherePoint>> {
    seeds
        .iter()
        .map(|&s0| {
            let mut p = s0;
            (0..n_steps)
                .map(|_| {
                    p = classical_kicked_top_step(p, spec.alpha, spec.lambda);
                    p
                })
                .collect()
        })
        .collect()
}

/// Largest finite-time Lyapunov rate of the classical top (two trajectories,
/// renormalized every step, separation in R³).
pub fn kicked_top_lyapunov(p: SpherePoint, alpha: f64, lambda: f64, n_steps: usize) -> f64 {
    let d0 = 1e-8;
    let mut a = p;
    // Perturb along a tangent direction.
    let t = if p.z.abs() < 0.9 { [-p.y, p.x, 0.0] } else { [0.0, -p.z, p.y] };
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    let mut b = normalize([p.x + d0 * t[0] / tn, p.y + d0 * t[1] / tn, p.z + d0 * t[2] / tn]);
    let mut acc = 0.0;
    for _ in 0..n_steps {
        a = classical_kicked_top_step(a, alpha, lambda);
        b = classical_kicked_top_step(b, alpha, lambda);
        let diff = [b.x - a.x, b.y - a.y, b.z - a.z];
        let dist = (diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]).sqrt().max(1e-300);
        acc += (dist / d0).ln();
        let f = d0 / dist;
        b = normalize([a.x + f * diff[0], a.y + f * diff[1], a.z + f * diff[2]]);
    }
    acc / n_steps as f64
}

fn normalize(v: [f64; 3]) -> SpherePoint {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    SpherePoint { x: v[0] / n, y: v[1] / n, z: v[2] / n }
}

/// `U` restricted to the two eigenspaces of the parity `exp(−iπ J_x)`, which
/// commutes with the kicked top. Spacing statistics must be taken per sector.
pub fn parity_blocks(u: &CMat, spin: SpinQuantum) -> Result<Vec<CMat>> {
    if u.nrows() != spin.dim() || !u.is_square() {
        return domain("Floquet matrix does not match the spin dimension");
    }
    let e = SymmetricEigen::new(jx_real(spin));
    let j = spin.j();
    let mut sectors: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for k in 0..spin.dim() {
        // Eigenvalue of J_x is m_x; parity phase e^{−iπ m_x} splits by j − m_x parity.
        let mx = e.eigenvalues[k];
        let steps = (j - mx).round() as i64;
        sectors[(steps.rem_euclid(2)) as usize].push(k);
    }
    let v = e.eigenvectors.map(c);
    Ok(sectors
        .iter()
        .filter(|idx| !idx.is_empty())
        .map(|idx| {
            let b = CMat::from_columns(&idx.iter().map(|&k| v.column(k).into_owned()).collect::<Vec<_>>());
            b.adjoint() * u * b
        })
        .collect())
}

/// Unfolded nearest-neighbour eigenphase spacings, pooled over parity sectors.
pub fn parity_resolved_spacings(u: &CMat, spin: SpinQuantum) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for block in parity_blocks(u, spin)? {
        let (ph, _) = unitary_eigen(&block, 1e-8)?;
        out.extend(crate::ensembles::unfolded_circle_spacings(&ph));
    }
    Ok(out)
}
