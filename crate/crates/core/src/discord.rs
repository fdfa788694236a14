//! Entropic correlations of bipartite states, quantum discord with the
//! measurement on B, and the yield loss of communication protocols when B is
//! dephased. All entropies are in bits.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{
    c, hermitian_eigenvalues, hermiticity_defect, kron, max_abs, partial_trace_a, partial_trace_b, CMat, Ket, C64,
};

/// Eigenvalues below this are left out of entropy sums.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    rho: CMat,
    da: usize,
    db: usize,
}

impl BipartiteState {
    pub fn new(rho: CMat, da: usize, db: usize) -> Result<Self> {
        if da == 0 || db == 0 || rho.shape() != (da * db, da * db) {
            return domain(format!("state must be {0}x{0} for dims ({da}, {db})", da * db));
        }
        if (rho.trace().re - 1.0).abs() > 1e-10 || rho.trace().im.abs() > 1e-10 {
            return domain("state must have unit trace");
        }
        if hermiticity_defect(&rho) > 1e-10 {
            return domain("state must be Hermitian");
        }
        if hermitian_eigenvalues(&rho)[0] < -1e-10 {
            return domain("state must be positive semidefinite");
        }
        Ok(Self { rho, da, db })
    }

    pub fn from_ket(psi: &Ket, da: usize, db: usize) -> Result<Self> {
        Self::new(psi.projector(), da, db)
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    pub fn reduced_a(&self) -> CMat {
        partial_trace_b(&self.rho, self.da, self.db)
    }

    pub fn reduced_b(&self) -> CMat {
        partial_trace_a(&self.rho, self.da, self.db)
    }
}

/// `½(|0⟩⟨0|⊗|0⟩⟨0| + |1⟩⟨1|⊗|+⟩⟨+|)`: a classical A flag correlated with
/// non-orthogonal B states.
pub fn zero_plus_example() -> BipartiteState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut rho = CMat::zeros(4, 4);
    rho[(0, 0)] = c(0.5);
    let plus = [c(s), c(s)];
    for a in 0..2 {
        for b in 0..2 {
            rho[(2 + a, 2 + b)] = plus[a] * plus[b] * 0.5;
        }
    }
    BipartiteState { rho, da: 2, db: 2 }
}

pub fn von_neumann_bits(rho: &CMat) -> f64 {
    hermitian_eigenvalues(rho)
        .into_iter()
        .filter(|&x| x > EIGEN_FLOOR)
        .map(|x| -x * x.log2())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entropies {
    #[serde(rename = "S_A")]
    pub s_a: f64,
    #[serde(rename = "S_B")]
    pub s_b: f64,
    #[serde(rename = "S_AB")]
    pub s_ab: f64,
    #[serde(rename = "I")]
    pub mutual_information: f64,
    #[serde(rename = "S_A_given_B")]
    pub a_given_b: f64,
}

impl Entropies {
    /// `I(A⟩B) = S(B) − S(AB) = −S(A|B)`.
    pub fn coherent_information(&self) -> f64 {
        -self.a_given_b
    }
}

pub fn entropies(state: &BipartiteState) -> Entropies {
    let s_a = von_neumann_bits(&state.reduced_a());
    let s_b = von_neumann_bits(&state.reduced_b());
    let s_ab = von_neumann_bits(&state.rho);
    Entropies { s_a, s_b, s_ab, mutual_information: s_a + s_b - s_ab, a_given_b: s_ab - s_b }
}

/// Complete set of orthogonal projectors on B.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    projectors: Vec<CMat>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<CMat>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return domain("measurement needs at least one projector");
        };
        let d = first.nrows();
        if projectors.iter().any(|p| p.shape() != (d, d)) {
            return domain("projectors must share one square shape");
        }
        let mut sum = CMat::zeros(d, d);
        for (i, p) in projectors.iter().enumerate() {
            if hermiticity_defect(p) > 1e-10 {
                return domain(format!("projector {i} is not Hermitian"));
            }
            for (k, q) in projectors.iter().enumerate() {
                let want = if i == k { p.clone() } else { CMat::zeros(d, d) };
                if max_abs(&(p * q - want)) > 1e-10 {
                    return domain(format!("projectors {i} and {k} violate Π_iΠ_k = δ_ik Π_i"));
                }
            }
            sum += p;
        }
        if max_abs(&(sum - CMat::identity(d, d))) > 1e-10 {
            return domain("projectors must sum to the identity");
        }
        Ok(Self { projectors })
    }

    /// `Π_± = (1 ± n·σ)/2` with `n` at polar angle θ and azimuth φ.
    pub fn qubit(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let n_sigma = CMat::from_row_slice(2, 2, &[c(ct), C64::new(st * cp, -st * sp), C64::new(st * cp, st * sp), c(-ct)]);
        let id = CMat::identity(2, 2);
        Self { projectors: vec![(&id + &n_sigma) * c(0.5), (&id - &n_sigma) * c(0.5)] }
    }

    /// Projectors onto the computational basis of dimension `d`.
    pub fn computational(d: usize) -> Self {
        Self {
            projectors: (0..d)
                .map(|k| {
                    let mut p = CMat::zeros(d, d);
                    p[(k, k)] = c(1.0);
                    p
                })
                .collect(),
        }
    }

    pub fn projectors(&self) -> &[CMat] {
        &self.projectors
    }

    fn check_dim(&self, db: usize) -> Result<()> {
        if self.projectors[0].nrows() != db {
            return domain(format!("measurement acts on dimension {}, B has {db}", self.projectors[0].nrows()));
        }
        Ok(())
    }
}

/// Outcome probabilities and conditional states of A after measuring B.
pub fn conditional_states(state: &BipartiteState, m: &ProjectiveMeasurement) -> Result<Vec<(f64, CMat)>> {
    m.check_dim(state.db)?;
    let id_a = CMat::identity(state.da, state.da);
    Ok(m
        .projectors
        .iter()
        .map(|p| {
            let big = kron(&id_a, p);
            let post = &big * &state.rho * &big;
            let prob = post.trace().re;
            let cond = partial_trace_b(&post, state.da, state.db);
            (prob, if prob > 0.0 { cond / c(prob) } else { cond })
        })
        .collect())
}

/// `Σ_j p_j S(ρ_{A|j})`, which equals `S(A′|B′)` for the dephased state.
pub fn measured_conditional_entropy(state: &BipartiteState, m: &ProjectiveMeasurement) -> Result<f64> {
    Ok(conditional_states(state, m)?
        .into_iter()
        .filter(|(p, _)| *p > EIGEN_FLOOR)
        .map(|(p, rho)| p * von_neumann_bits(&rho))
        .sum())
}

/// `ρ′ = Σ_j (1⊗Π_j) ρ (1⊗Π_j)`.
pub fn dephase_b(state: &BipartiteState, m: &ProjectiveMeasurement) -> Result<BipartiteState> {
    m.check_dim(state.db)?;
    let id_a = CMat::identity(state.da, state.da);
    let mut out = CMat::zeros(state.rho.nrows(), state.rho.ncols());
    for p in &m.projectors {
        let big = kron(&id_a, p);
        out += &big * &state.rho * &big;
    }
    Ok(BipartiteState { rho: out, da: state.da, db: state.db })
}

/// Extra cost of merging A into B after B is measured: `S(A′|B′) − S(A|B)`.
pub fn merging_markup(state: &BipartiteState, m: &ProjectiveMeasurement) -> Result<f64> {
    let after = entropies(&dephase_b(state, m)?);
    Ok(after.a_given_b - entropies(state).a_given_b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub value: f64,
    /// Bloch angles `(θ, φ)` of the optimal qubit measurement.
    pub theta: f64,
    pub phi: f64,
    /// `min Σ_j p_j S(ρ_{A|j})`.
    pub conditional_entropy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordOptions {
    pub resolution: usize,
    /// Simplex spread in objective value at which refinement stops.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self { resolution: 64, ftol: 1e-7, max_iter: 2000 }
    }
}

/// Discord with a rank-one projective measurement on a qubit B: a cell-centre
/// grid over the Bloch sphere, then Nelder–Mead from the best cell.
pub fn discord(state: &BipartiteState, opts: DiscordOptions) -> Result<DiscordResult> {
    if state.db != 2 {
        return domain(format!("angle search needs dim B = 2, got {}; supply a measurement list", state.db));
    }
    if opts.resolution == 0 {
        return domain("search resolution must be positive");
    }
    let f = |x: [f64; 2]| -> f64 {
        measured_conditional_entropy(state, &ProjectiveMeasurement::qubit(x[0], x[1])).expect("qubit measurement")
    };
    let n = opts.resolution;
    let cells: Vec<([f64; 2], f64)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let x = [((k / n) as f64 + 0.5) * PI / n as f64, ((k % n) as f64 + 0.5) * TAU / n as f64];
            (x, f(x))
        })
        .collect();
    let (best, fbest) = cells.into_iter().fold(([0.0, 0.0], f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let step = [PI / n as f64, TAU / n as f64];
    let (x, fx) = nelder_mead(f, best, step, opts.ftol, opts.max_iter);
    let (x, fx) = if fx < fbest { (x, fx) } else { (best, fbest) };
    let e = entropies(state);
    Ok(DiscordResult { value: e.s_b - e.s_ab + fx, theta: x[0], phi: x[1].rem_euclid(TAU), conditional_entropy: fx })
}

/// Discord restricted to a supplied list of measurements (any dim B).
/// Returns the value and the index of the minimizing measurement.
pub fn discord_over(state: &BipartiteState, measurements: &[ProjectiveMeasurement]) -> Result<(f64, usize)> {
    if measurements.is_empty() {
        return domain("measurement list is empty");
    }
    let mut best = (f64::INFINITY, 0);
    for (k, m) in measurements.iter().enumerate() {
        let v = measured_conditional_entropy(state, m)?;
        if v < best.0 {
            best = (v, k);
        }
    }
    let e = entropies(state);
    Ok((e.s_b - e.s_ab + best.0, best.1))
}

/// Two-dimensional Nelder–Mead with standard coefficients.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: [f64; 2], ftol: f64, max_iter: usize) -> ([f64; 2], f64) {
    let mut s = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut v = s.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        s = idx.map(|k| s[k]);
        v = idx.map(|k| v[k]);
        if (v[2] - v[0]).abs() <= ftol {
            break;
        }
        let centroid = lerp(s[0], s[1], 0.5);
        let xr = lerp(centroid, s[2], -1.0);
        let fr = f(xr);
        if fr < v[0] {
            let xe = lerp(centroid, s[2], -2.0);
            let fe = f(xe);
            (s[2], v[2]) = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < v[1] {
            (s[2], v[2]) = (xr, fr);
        } else {
            let xc = if fr < v[2] { lerp(centroid, xr, 0.5) } else { lerp(centroid, s[2], 0.5) };
            let fc = f(xc);
            if fc < v[2].min(fr) {
                (s[2], v[2]) = (xc, fc);
            } else {
                for k in 1..3 {
                    s[k] = lerp(s[0], s[k], 0.5);
                    v[k] = f(s[k]);
                }
            }
        }
    }
    let k = (0..3).min_by(|&a, &b| v[a].total_cmp(&v[b])).expect("three vertices");
    (s[k], v[k])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Teleportation,
    Superdense,
    Distillation,
    Merging,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::Teleportation, Protocol::Superdense, Protocol::Distillation, Protocol::Merging];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Teleportation => "teleportation",
            Protocol::Superdense => "superdense",
            Protocol::Distillation => "distillation",
            Protocol::Merging => "merging",
        }
    }
}

/// Yield lost by a protocol when B is dephased by `m`, from the protocol's own
/// resource formula. Every protocol gives `S(A′|B′) − S(A|B)`, which is checked.
pub fn protocol_yield_delta(state: &BipartiteState, protocol: Protocol, m: &ProjectiveMeasurement) -> Result<f64> {
    let before = entropies(state);
    let after = entropies(&dephase_b(state, m)?);
    let delta = match protocol {
        // Qubits teleported per ebit-equivalent: coherent information.
        Protocol::Teleportation => before.coherent_information() - after.coherent_information(),
        // Classical bits through the channel: mutual information.
        Protocol::Superdense => before.mutual_information - after.mutual_information,
        // One-way hashing yield: coherent information.
        Protocol::Distillation => before.coherent_information() - after.coherent_information(),
        Protocol::Merging => after.a_given_b - before.a_given_b,
    };
    let cross = before.mutual_information - after.mutual_information;
    if (delta - cross).abs() > 1e-9 {
        return Err(Error::Numeric(format!(
            "{} yield delta {delta} differs from mutual-information loss {cross}",
            protocol.name()
        )));
    }
    Ok(delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordReport {
    #[serde(rename = "S_A")]
    pub s_a: f64,
    #[serde(rename = "S_B")]
    pub s_b: f64,
    #[serde(rename = "S_AB")]
    pub s_ab: f64,
    #[serde(rename = "I")]
    pub mutual_information: f64,
    pub discord: f64,
    /// `[θ, φ]` of the optimal measurement on B.
    pub optimal_angles: [f64; 2],
    /// Merging markup at the optimal measurement.
    pub markup: f64,
    pub protocol_deltas: BTreeMap<String, f64>,
    pub units: String,
}

pub fn discord_report(state: &BipartiteState, opts: DiscordOptions) -> Result<DiscordReport> {
    let e = entropies(state);
    let d = discord(state, opts)?;
    let m = ProjectiveMeasurement::qubit(d.theta, d.phi);
    let mut protocol_deltas = BTreeMap::new();
    for p in Protocol::ALL {
        protocol_deltas.insert(p.name().to_string(), protocol_yield_delta(state, p, &m)?);
    }
    Ok(DiscordReport {
        s_a: e.s_a,
        s_b: e.s_b,
        s_ab: e.s_ab,
        mutual_information: e.mutual_information,
        discord: d.value,
        optimal_angles: [d.theta, d.phi],
        markup: merging_markup(state, &m)?,
        protocol_deltas,
        units: "bits".into(),
    })
}

/// `|ψ⟩ = Σ_k √p_k |k⟩|k⟩` in dimension `d × d`.
pub fn schmidt_state(p: &[f64]) -> Result<Ket> {
    let d = p.len();
    let mut v = crate::linalg::CVec::zeros(d * d);
    for (k, &pk) in p.iter().enumerate() {
        v[k * d + k] = c(pk.max(0.0).sqrt());
    }
    Ket::new(v, crate::linalg::Basis::Plain)
}
