//! Kicked coupled tops with I = J, restricted to the F_z = 0 block.
//!
//! One period: kick `exp(−iβ J_z)`, then coupling `exp(−i α I·J / J)`. In the
//! block basis `|I,−m⟩|J,m⟩` (m = J … −J) the Floquet matrix is
//! `U_{m'm} = Σ_F e^{−iαF(F+1)/2J} c_F(m') c_F(m) e^{−iβm}` up to a global phase.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kicked_top::rot_z;
use crate::linalg::{shannon, unitary_eigen, CMat, CVec, Ket, C64};
use crate::rng::{complex_normal, family, stream};
use crate::spin::{fz0_cg_table, husimi_entropies, project_fz0_coherent, PhasePointDiff, SpinQuantum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledTopsSpec {
    /// Common spin magnitude I = J.
    pub spin: SpinQuantum,
    /// Classical coupling; the quantum map uses α/J.
    pub alpha: f64,
    /// Kick angle about z.
    pub beta: f64,
}

/// Floquet matrix of the F_z = 0 block, dimension 2J+1.
pub fn floquet_coupled_block(spec: &CoupledTopsSpec) -> CMat {
    let s = spec.spin;
    let d = s.dim();
    let j = s.j();
    let table = fz0_cg_table(s);
    let mut w = CMat::zeros(d, d);
    for (f, col) in table.iter().enumerate() {
        let ff = f as f64;
        let ph = C64::from_polar(1.0, -spec.alpha * ff * (ff + 1.0) / (2.0 * j.max(0.5)));
        for a in 0..d {
            let ca = ph * col[a];
            for b in 0..d {
                w[(a, b)] += ca * col[b];
            }
        }
    }
    for (k, m) in s.m_values().into_iter().enumerate() {
        let ph = C64::from_polar(1.0, -spec.beta * m);
        w.column_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    w
}

/// Time-reversal rotation `exp(iβ J_z)` restricted to the block.
pub fn block_time_reversal_rotation(spec: &CoupledTopsSpec) -> CMat {
    crate::linalg::expm_diagonal(&spec.spin.m_values(), -spec.beta)
}

/// Classical state: unit vectors along the two spins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSpinState {
    pub i: [f64; 3],
    pub j: [f64; 3],
}

impl TwoSpinState {
    pub fn new(i: [f64; 3], j: [f64; 3]) -> Result<Self> {
        for v in [i, j] {
            if (norm3(v) - 1.0).abs() > 1e-12 {
                return domain("spin vectors must be unit vectors");
            }
        }
        Ok(Self { i, j })
    }

    /// J at polar angle δθ and azimuth 0; I at π − δθ and azimuth δφ.
    pub fn from_phase_point(p: PhasePointDiff) -> Self {
        let (st, ct) = p.delta_theta.sin_cos();
        let (sp, cp) = p.delta_phi.sin_cos();
        Self { i: [st * cp, st * sp, -ct], j: [st, 0.0, ct] }
    }

    pub fn fz(&self) -> f64 {
        self.i[2] + self.j[2]
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Rodrigues rotation of `v` by `angle` about the unit axis `k`.
fn rotate_about(v: [f64; 3], k: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    let cross = [k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]];
    [
        v[0] * c + cross[0] * s + k[0] * kv * (1.0 - c),
        v[1] * c + cross[1] * s + k[1] * kv * (1.0 - c),
        v[2] * c + cross[2] * s + k[2] * kv * (1.0 - c),
    ]
}

/// Kick J about z by β, then precess both spins about F = I + J by α|F|.
pub fn classical_coupled_step(s: TwoSpinState, alpha: f64, beta: f64) -> TwoSpinState {
    let j = rot_z(s.j, beta);
    let f = [s.i[0] + j[0], s.i[1] + j[1], s.i[2] + j[2]];
    let fn_ = norm3(f);
    if fn_ < 1e-300 {
        return TwoSpinState { i: s.i, j };
    }
    let axis = [f[0] / fn_, f[1] / fn_, f[2] / fn_];
    let angle = alpha * fn_;
    TwoSpinState { i: rotate_about(s.i, axis, angle), j: rotate_about(j, axis, angle) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub rate: f64,
    pub chaotic: bool,
}

pub const LYAPUNOV_D0: f64 = 1e-8;

/// Finite-time Lyapunov rate from two trajectories started 1e-8 apart in δθ,
/// renormalized to that separation after every step (distance in R⁶).
pub fn lyapunov_classify(
    p: PhasePointDiff,
    spec: &CoupledTopsSpec,
    n_steps: usize,
    threshold: f64,
) -> Result<LyapunovResult> {
    if n_steps < 500 {
        return domain(format!("Lyapunov estimate needs at least 500 steps, got {n_steps}"));
    }
    let d0 = LYAPUNOV_D0;
    let shifted = if p.delta_theta + d0 <= std::f64::consts::PI { p.delta_theta + d0 } else { p.delta_theta - d0 };
    let mut a = TwoSpinState::from_phase_point(p);
    let mut b = TwoSpinState::from_phase_point(PhasePointDiff { delta_theta: shifted, delta_phi: p.delta_phi });
    let dist = |a: &TwoSpinState, b: &TwoSpinState| {
        (0..3).map(|k| (a.i[k] - b.i[k]).powi(2) + (a.j[k] - b.j[k]).powi(2)).sum::<f64>().sqrt()
    };
    let start = dist(&a, &b);
    let mut acc = 0.0;
    for _ in 0..n_steps {
        a = classical_coupled_step(a, spec.alpha, spec.beta);
        b = classical_coupled_step(b, spec.alpha, spec.beta);
        let d = dist(&a, &b).max(1e-300);
        acc += (d / start).ln();
        let f = start / d;
        let mut i = [0.0; 3];
        let mut j = [0.0; 3];
        for k in 0..3 {
            i[k] = a.i[k] + f * (b.i[k] - a.i[k]);
            j[k] = a.j[k] + f * (b.j[k] - a.j[k]);
        }
        let (ni, nj) = (norm3(i), norm3(j));
        b = TwoSpinState { i: i.map(|x| x / ni), j: j.map(|x| x / nj) };
    }
    let rate = acc / n_steps as f64;
    Ok(LyapunovResult { rate, chaotic: rate > threshold })
}

/// Eigenphases in `[0, 2π)` and orthonormal eigenvector columns of a Floquet matrix.
#[derive(Debug, Clone)]
pub struct FloquetEigensystem {
    pub phases: Vec<f64>,
    pub vectors: CMat,
}

impl FloquetEigensystem {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn spin(&self) -> SpinQuantum {
        SpinQuantum::from_twice(self.dim() as u32 - 1)
    }

    pub fn state(&self, k: usize) -> Ket {
        Ket { amps: self.vectors.column(k).into_owned(), basis: crate::linalg::Basis::Fz0Block }
    }
}

pub fn floquet_eigensystem(u: &CMat) -> Result<FloquetEigensystem> {
    let (phases, vectors) = unitary_eigen(u, 1e-8)?;
    Ok(FloquetEigensystem { phases, vectors })
}

/// Entanglement of a block state: the Shannon entropy of `|c_m|²` (the block
/// basis is the Schmidt basis).
pub fn block_entanglement(amps: &[C64]) -> f64 {
    shannon(&amps.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())
}

pub fn eigenstate_entanglement(es: &FloquetEigensystem) -> Vec<f64> {
    es.vectors.column_iter().map(|c| block_entanglement(c.as_slice())).collect()
}

/// `E(n)` for n = 0…n_steps by repeated application of `U`.
pub fn evolve_entanglement_history(psi0: &Ket, u: &CMat, n_steps: usize) -> Result<Vec<f64>> {
    if psi0.dim() != u.nrows() {
        return domain("state and Floquet matrix dimensions differ");
    }
    let mut psi = psi0.amps.clone();
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(block_entanglement(psi.as_slice()));
    for _ in 0..n_steps {
        psi = u * psi;
        out.push(block_entanglement(psi.as_slice()));
    }
    Ok(out)
}

/// `ψ_n = Σ_k a_k e^{inφ_k} v_k` with `a = V†ψ₀`.
pub fn spectral_propagate(es: &FloquetEigensystem, psi0: &CVec, n: usize) -> CVec {
    let a = es.vectors.adjoint() * psi0;
    let scaled = CVec::from_iterator(
        a.len(),
        a.iter().zip(&es.phases).map(|(ak, &ph)| ak * C64::from_polar(1.0, n as f64 * ph)),
    );
    &es.vectors * scaled
}

/// Inclusive window of kick numbers over which entanglement is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: usize,
    pub end: usize,
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self { start: 300, end: 320 }
    }
}

/// Mean of `E(n)` over the window, for the projected coherent state at each
/// grid point. Spectral propagation, batched over grid points.
pub fn long_time_average_map(es: &FloquetEigensystem, grid: &[PhasePointDiff], window: TimeWindow) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return domain("empty grid");
    }
    if window.end < window.start {
        return domain("time window end precedes start");
    }
    let s = es.spin();
    let d = es.dim();
    let vdag = es.vectors.adjoint();
    const CHUNK: usize = 240;
    let chunks: Vec<&[PhasePointDiff]> = grid.chunks(CHUNK).collect();
    let parts: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|pts| {
            let psi0 = CMat::from_columns(&pts.iter().map(|p| project_fz0_coherent(s, *p).amps).collect::<Vec<_>>());
            let a = &vdag * psi0;
            let mut acc = vec![0.0; pts.len()];
            for n in window.start..=window.end {
                let mut scaled = a.clone();
                for k in 0..d {
                    let ph = C64::from_polar(1.0, n as f64 * es.phases[k]);
                    scaled.row_mut(k).iter_mut().for_each(|z| *z *= ph);
                }
                let psi = &es.vectors * scaled;
                for (c, col) in psi.column_iter().enumerate() {
                    acc[c] += block_entanglement(col.as_slice());
                }
            }
            let count = (window.end - window.start + 1) as f64;
            acc.into_iter().map(|x| x / count).collect()
        })
        .collect();
    Ok(parts.concat())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercivalSplit {
    pub chaotic: Vec<usize>,
    pub regular: Vec<usize>,
    pub s_q: Vec<f64>,
    pub jz_mean: Vec<f64>,
    pub sq_threshold: f64,
    pub jz_threshold: f64,
}

/// Percentile by linear interpolation between order statistics.
pub fn percentile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = (q / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// `⟨J_z⟩ = Σ m |c_m|²` for every eigenvector.
pub fn jz_means(es: &FloquetEigensystem) -> Vec<f64> {
    let ms = es.spin().m_values();
    es.vectors
        .column_iter()
        .map(|c| c.iter().zip(&ms).map(|(z, m)| m * z.norm_sqr()).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercivalOptions {
    /// Husimi entropy cut; `None` uses the 75th percentile of the spectrum's values.
    pub sq_threshold: Option<f64>,
    pub jz_threshold: f64,
    pub resolution: usize,
}

impl Default for PercivalOptions {
    fn default() -> Self {
        Self { sq_threshold: None, jz_threshold: 0.0, resolution: 64 }
    }
}

/// Eigenstates with both high Husimi entropy and positive `⟨J_z⟩` are chaotic.
pub fn percival_filter(es: &FloquetEigensystem, opts: PercivalOptions) -> Result<PercivalSplit> {
    let s_q = husimi_entropies(es.spin(), &es.vectors, opts.resolution)?;
    let jz_mean = jz_means(es);
    let sq_threshold = opts.sq_threshold.unwrap_or_else(|| percentile(&s_q, 75.0));
    let (mut chaotic, mut regular) = (Vec::new(), Vec::new());
    for k in 0..es.dim() {
        if s_q[k] > sq_threshold && jz_mean[k] > opts.jz_threshold {
            chaotic.push(k);
        } else {
            regular.push(k);
        }
    }
    Ok(PercivalSplit { chaotic, regular, s_q, jz_mean, sq_threshold, jz_threshold: opts.jz_threshold })
}

/// Mean entanglement of random states `Σ_k g_k v_k` over the given eigenvectors,
/// with `g_k` complex Gaussian. Sample `i` uses its own stream of `seed`.
pub fn chaotic_subspace_random_entanglement(
    es: &FloquetEigensystem,
    indices: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if indices.is_empty() {
        return domain("chaotic subspace is empty");
    }
    if n_samples == 0 {
        return domain("need at least one sample");
    }
    if let Some(&bad) = indices.iter().find(|&&k| k >= es.dim()) {
        return domain(format!("eigenstate index {bad} out of range"));
    }
    let basis = CMat::from_columns(&indices.iter().map(|&k| es.vectors.column(k).into_owned()).collect::<Vec<_>>());
    let samples: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, family::SUBSPACE, i as u64);
            let g = CVec::from_fn(indices.len(), |_, _| complex_normal(&mut rng));
            let psi = &basis * g;
            let n = psi.norm();
            block_entanglement(psi.unscale(n).as_slice())
        })
        .collect();
    Ok(samples.iter().sum::<f64>() / n_samples as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub delta_theta: f64,
    pub delta_phi: f64,
    pub e_avg: f64,
    pub lyapunov_rate: f64,
    pub chaotic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOptions {
    pub window: TimeWindow,
    pub lyapunov_steps: usize,
    pub lyapunov_threshold: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self { window: TimeWindow::default(), lyapunov_steps: 1000, lyapunov_threshold: 0.02 }
    }
}

/// Long-time entanglement and classical classification on a grid.
pub fn entanglement_map(
    spec: &CoupledTopsSpec,
    es: &FloquetEigensystem,
    grid: &[PhasePointDiff],
    opts: MapOptions,
) -> Result<Vec<MapPoint>> {
    let e = long_time_average_map(es, grid, opts.window)?;
    let lyap: Vec<LyapunovResult> = grid
        .par_iter()
        .map(|p| lyapunov_classify(*p, spec, opts.lyapunov_steps, opts.lyapunov_threshold))
        .collect::<Result<_>>()?;
    Ok(grid
        .iter()
        .zip(e)
        .zip(lyap)
        .map(|((p, e_avg), l)| MapPoint {
            delta_theta: p.delta_theta,
            delta_phi: p.delta_phi,
            e_avg,
            lyapunov_rate: l.rate,
            chaotic: l.chaotic,
        })
        .collect())
}

/// Equal-weight mean of `E_avg` over points classified chaotic (the grid is
/// uniform in the canonical measure). `None` if no point is chaotic.
pub fn chaotic_sea_average(points: &[MapPoint]) -> Option<f64> {
    let xs: Vec<f64> = points.iter().filter(|p| p.chaotic).map(|p| p.e_avg).collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Point-biserial correlation between the chaotic label and `E_avg`
/// (positive when chaotic points are more entangled).
pub fn point_biserial(points: &[MapPoint]) -> Option<f64> {
    let n = points.len() as f64;
    let ch: Vec<f64> = points.iter().filter(|p| p.chaotic).map(|p| p.e_avg).collect();
    let rg: Vec<f64> = points.iter().filter(|p| !p.chaotic).map(|p| p.e_avg).collect();
    if ch.is_empty() || rg.is_empty() {
        return None;
    }
    let mean = points.iter().map(|p| p.e_avg).sum::<f64>() / n;
    let sd = (points.iter().map(|p| (p.e_avg - mean).powi(2)).sum::<f64>() / n).sqrt();
    let m1 = ch.iter().sum::<f64>() / ch.len() as f64;
    let m0 = rg.iter().sum::<f64>() / rg.len() as f64;
    let (p1, p0) = (ch.len() as f64 / n, rg.len() as f64 / n);
    Some((m1 - m0) / sd * (p1 * p0).sqrt())
}
