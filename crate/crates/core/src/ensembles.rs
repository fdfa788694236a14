//! Random states and matrices, the two-level COE spacing law, and closed-form
//! typical-entanglement values.

use std::f64::consts::PI;

use rand::Rng;
use statrs::function::gamma::digamma;

use crate::error::{domain, Result};
use crate::linalg::{c, Basis, CMat, CVec, Ket, C64};
use crate::rng::{complex_normal, normal};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryKind {
    Cue,
    Coe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HermitianKind {
    Goe,
    Gue,
}

/// Uniformly random unit vector: i.i.d. Gaussian components, normalized.
pub fn sample_state<R: Rng + ?Sized>(d: usize, field: Field, rng: &mut R) -> Ket {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let v = CVec::from_fn(d, |_, _| match field {
            Field::Complex => complex_normal(rng),
            Field::Real => c(normal(rng)),
        });
        if let Ok(k) = Ket::new(v, Basis::Plain) {
            return k;
        }
    }
}

/// Haar-random unitary: QR of a complex Ginibre matrix, with the phases of
/// R's diagonal moved into Q so the distribution is exactly Haar.
pub fn sample_cue<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(d, d, |_, _| complex_normal(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rk = r[(k, k)];
        let ph = if rk.norm() > 0.0 { rk / rk.norm() } else { c(1.0) };
        for i in 0..d {
            q[(i, k)] *= ph;
        }
    }
    q
}

pub fn sample_unitary<R: Rng + ?Sized>(d: usize, kind: UnitaryKind, rng: &mut R) -> CMat {
    let u = sample_cue(d, rng);
    match kind {
        UnitaryKind::Cue => u,
        UnitaryKind::Coe => u.transpose() * u,
    }
}

pub fn sample_hermitian<R: Rng + ?Sized>(d: usize, kind: HermitianKind, rng: &mut R) -> CMat {
    let a = CMat::from_fn(d, d, |_, _| match kind {
        HermitianKind::Goe => c(normal(rng)),
        HermitianKind::Gue => complex_normal(rng),
    });
    let h = match kind {
        HermitianKind::Goe => &a + a.transpose(),
        HermitianKind::Gue => &a + a.adjoint(),
    };
    h.scale(0.5)
}

/// Density of one eigenphase labeling of a 2×2 symmetric unitary with
/// reflection probability `r` and uniform phases: `sin(s/2) / (4π √(r − cos²(s/2)))`.
/// Integrates to 1/2 over its support.
pub fn coe2_spacing_branch_density(r: f64, s: f64) -> f64 {
    let c2 = (s / 2.0).cos().powi(2);
    if !(r > 0.0 && r <= 1.0) || c2 >= r {
        return 0.0;
    }
    (s / 2.0).sin().abs() / (4.0 * PI * (r - c2).sqrt())
}

/// Normalized spacing density: both preimages of the uniform phase difference
/// contribute, so it is twice the branch density.
pub fn coe2_spacing_pdf(r: f64, s: f64) -> f64 {
    2.0 * coe2_spacing_branch_density(r, s)
}

/// Support `(π − 2 asin √r, π + 2 asin √r)` of the spacing law.
pub fn coe2_support(r: f64) -> (f64, f64) {
    let a = 2.0 * r.sqrt().asin();
    (PI - a, PI + a)
}

/// Closed-form cumulative distribution of [`coe2_spacing_pdf`].
pub fn coe2_spacing_cdf(r: f64, s: f64) -> f64 {
    let (lo, hi) = coe2_support(r);
    if s <= lo {
        0.0
    } else if s >= hi {
        1.0
    } else {
        0.5 - ((s / 2.0).cos() / r.sqrt()).clamp(-1.0, 1.0).asin() / PI
    }
}

/// The 2×2 symmetric unitary `[[√R e^{iγ}, √T e^{iη}], [√T e^{iη}, −√R e^{i(2η−γ)}]]`.
pub fn coe2_matrix(r: f64, gamma: f64, eta: f64) -> CMat {
    let t = (1.0 - r).sqrt();
    let rs = r.sqrt();
    CMat::from_row_slice(
        2,
        2,
        &[
            C64::from_polar(rs, gamma),
            C64::from_polar(t, eta),
            C64::from_polar(t, eta),
            -C64::from_polar(rs, 2.0 * eta - gamma),
        ],
    )
}

/// Eigenphase difference `arg(λ₁/λ₂)` in `[0, 2π)` of a 2×2 matrix.
pub fn eigenphase_difference_2x2(u: &CMat) -> f64 {
    let tr = u[(0, 0)] + u[(1, 1)];
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    (l1 / l2).arg().rem_euclid(2.0 * PI)
}

/// Harmonic number: exact partial sum for integer `x`, `ψ(x+1) + γ` otherwise.
pub fn harmonic(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("harmonic number needs x > 0, got {x}"));
    }
    if x.fract() == 0.0 && x < 1e7 {
        let n = x as u64;
        // Summing small terms first keeps the rounding error at a few ulps.
        Ok((1..=n).rev().map(|k| 1.0 / k as f64).sum())
    } else {
        Ok(digamma(x + 1.0) + EULER_GAMMA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypicalKind {
    /// Entropy in a fixed basis of a random real vector: `H_{d/2} + ln 4 − 2`.
    RealSubspace,
    /// Same for a random complex vector: `H_d − 1`.
    ComplexSubspace,
    /// Mean entanglement of a Haar state on `d ⊗ d2`, `d ≤ d2`:
    /// `Σ_{k=d2+1}^{d·d2} 1/k − (d−1)/(2 d2)`.
    Page,
    /// Mean linear entropy of a random real vector: `1 − 3/(d+2)`.
    LinearReal,
    /// Mean linear entropy of a random complex vector: `1 − 2/(d+1)`.
    LinearComplex,
}

/// Closed-form typical entanglement (natural log).
pub fn typical_entanglement(kind: TypicalKind, d: usize, d2: Option<usize>) -> Result<f64> {
    if d == 0 {
        return domain("dimension must be positive");
    }
    let df = d as f64;
    match kind {
        TypicalKind::RealSubspace => Ok(harmonic(df / 2.0)? + 4f64.ln() - 2.0),
        TypicalKind::ComplexSubspace => Ok(harmonic(df)? - 1.0),
        TypicalKind::LinearReal => Ok(1.0 - 3.0 / (df + 2.0)),
        TypicalKind::LinearComplex => Ok(1.0 - 2.0 / (df + 1.0)),
        TypicalKind::Page => {
            let d2 = match d2 {
                Some(x) if x >= d => x,
                Some(x) => return domain(format!("page formula needs d2 >= d1, got d1={d}, d2={x}")),
                None => return domain("page formula needs a second dimension"),
            };
            let n = d * d2;
            let tail: f64 = (d2 + 1..=n).rev().map(|k| 1.0 / k as f64).sum();
            Ok(tail - (df - 1.0) / (2.0 * d2 as f64))
        }
    }
}

/// Entropy of the probabilities `|c_i|²` of a ket in its own basis.
pub fn basis_entropy(k: &Ket) -> f64 {
    crate::linalg::shannon(&k.probabilities())
}

/// Nearest-neighbour spacings of phases on the circle, divided by their mean
/// (the mean is 2π/n for n phases).
pub fn unfolded_circle_spacings(phases: &[f64]) -> Vec<f64> {
    let n = phases.len();
    if n < 2 {
        return Vec::new();
    }
    let mut p: Vec<f64> = phases.iter().map(|x| x.rem_euclid(2.0 * PI)).collect();
    p.sort_by(f64::total_cmp);
    let mean = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            let next = if k + 1 < n { p[k + 1] } else { p[0] + 2.0 * PI };
            (next - p[k]) / mean
        })
        .collect()
}

/// One-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Wigner surmise `P(s) = (π/2) s e^{−πs²/4}` as a cumulative distribution.
pub fn wigner_surmise_cdf(s: f64) -> f64 {
    1.0 - (-PI * s * s / 4.0).exp()
}

pub fn poisson_cdf(s: f64) -> f64 {
    1.0 - (-s).exp()
}
