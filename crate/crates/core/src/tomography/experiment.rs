//! Tomography experiments: a driver generates the observable history, shared
//! Haar-random targets are reconstructed from noisy records, and information
//! metrics are tracked step by step.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    design_singular_values, metrics_from_singular_values, reconstruct_with, stack_rows, AdmmOptions, Estimator,
    InfoMetrics, OperatorBasis,
};
use crate::ensembles::{sample_cue, sample_state, sample_unitary, Field, UnitaryKind};
use crate::error::{domain, Result};
use crate::kicked_top::{floquet_kicked_top, floquet_kicked_top_no_tr, KickedTopNoTrSpec, KickedTopSpec};
use crate::linalg::{CMat, RVec};
use crate::rng::{family, normal, stream};
use crate::spin::{build_spin_ops, SpinQuantum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Driver {
    KickedTop { lambda: f64, alpha: f64 },
    KickedTopNoTr,
    /// One COE matrix; `draw` selects the ensemble stream.
    CoeFixed { draw: u64 },
    CueFixed { draw: u64 },
    /// A new Haar unitary every step.
    HaarFresh,
}

impl Driver {
    pub fn name(&self) -> &'static str {
        match self {
            Driver::KickedTop { .. } => "kicked_top",
            Driver::KickedTopNoTr => "kicked_top_no_tr",
            Driver::CoeFixed { .. } => "coe_fixed",
            Driver::CueFixed { .. } => "cue_fixed",
            Driver::HaarFresh => "haar_fresh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub driver: Driver,
    pub spin: SpinQuantum,
    /// Record noise; `None` means `0.05·j`.
    pub sigma: Option<f64>,
    pub n_steps: usize,
    /// Number of Haar targets; 0 skips reconstruction.
    pub n_states: usize,
    pub seed: u64,
    /// Metrics are reported at multiples of this stride and at the last step.
    pub metrics_stride: usize,
    /// Fidelities are computed at multiples of this stride and at the last step.
    pub fidelity_stride: usize,
}

impl ExperimentConfig {
    pub fn new(driver: Driver, spin: SpinQuantum, n_steps: usize, n_states: usize, seed: u64) -> Self {
        Self { driver, spin, sigma: None, n_steps, n_states, seed, metrics_stride: 1, fidelity_stride: 10 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(0.05 * self.spin.j())
    }

    fn is_metric_step(&self, n: usize) -> bool {
        n % self.metrics_stride == 0 || n == self.n_steps
    }

    fn is_fidelity_step(&self, n: usize) -> bool {
        self.n_states > 0 && (n % self.fidelity_stride == 0 || n == self.n_steps)
    }

    fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return domain("n_steps must be positive");
        }
        if self.metrics_stride == 0 || self.fidelity_stride == 0 {
            return domain("strides must be positive");
        }
        if !(self.sigma() >= 0.0) || !self.sigma().is_finite() {
            return domain("sigma must be finite and non-negative");
        }
        if self.spin.dim() < 2 {
            return domain("tomography needs j >= 1/2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: usize,
    pub mean_fidelity: Option<f64>,
    pub entropy_e: f64,
    pub fisher: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<StepRow>,
    /// Positivity solves that hit the iteration cap.
    pub unconverged: usize,
    /// `log(d² − 1)`.
    pub entropy_max: f64,
}

impl ExperimentReport {
    pub fn row(&self, step: usize) -> Option<&StepRow> {
        self.rows.iter().find(|r| r.step == step)
    }
}

/// The fixed Floquet matrix of a driver, or `None` for fresh Haar driving.
pub fn driver_unitary(driver: Driver, spin: SpinQuantum, seed: u64) -> Option<CMat> {
    let d = spin.dim();
    match driver {
        Driver::KickedTop { lambda, alpha } => Some(floquet_kicked_top(&KickedTopSpec { spin, alpha, lambda })),
        Driver::KickedTopNoTr => Some(floquet_kicked_top_no_tr(&KickedTopNoTrSpec::generic(spin))),
        Driver::CoeFixed { draw } => Some(sample_unitary(d, UnitaryKind::Coe, &mut stream(seed, family::ENSEMBLE, draw))),
        Driver::CueFixed { draw } => Some(sample_unitary(d, UnitaryKind::Cue, &mut stream(seed, family::ENSEMBLE, draw))),
        Driver::HaarFresh => None,
    }
}

/// Design rows `Tr(O_i E_α)` for i = 1…n_steps with `O₀ = J_z`.
pub fn driver_design_rows(driver: Driver, spin: SpinQuantum, n_steps: usize, seed: u64) -> Vec<RVec> {
    let basis = OperatorBasis::new(spin.dim()).expect("dimension checked");
    let jz = build_spin_ops(spin).jz;
    let d = spin.dim();
    match driver_unitary(driver, spin, seed) {
        Some(u) => {
            let ud = u.adjoint();
            let mut o = jz;
            (0..n_steps)
                .map(|_| {
                    o = &ud * &o * &u;
                    basis.coefficients(&o)
                })
                .collect()
        }
        None => {
            let mut rng = stream(seed, family::ENSEMBLE, u64::from(u32::MAX));
            let mut w = CMat::identity(d, d);
            (0..n_steps)
                .map(|_| {
                    w = sample_cue(d, &mut rng) * &w;
                    basis.coefficients(&(w.adjoint() * &jz * &w))
                })
                .collect()
        }
    }
}

/// Metrics at the configured steps, from singular values only.
pub fn metric_curve(rows: &[RVec], p: usize, sigma: f64, steps: &[usize]) -> Result<Vec<InfoMetrics>> {
    steps
        .iter()
        .map(|&n| metrics_from_singular_values(&design_singular_values(&stack_rows(&rows[..n], p)), sigma))
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spin = cfg.spin;
    let d = spin.dim();
    let basis = OperatorBasis::new(d)?;
    let p = basis.len();
    let sigma = cfg.sigma();
    let rows = driver_design_rows(cfg.driver, spin, cfg.n_steps, cfg.seed);

    let targets: Vec<RVec> = (0..cfg.n_states)
        .map(|t| basis.bloch_of_ket(&sample_state(d, Field::Complex, &mut stream(cfg.seed, family::TARGETS, t as u64))))
        .collect();
    let noise: Vec<Vec<f64>> = (0..cfg.n_states)
        .map(|t| {
            let mut rng = stream(cfg.seed, family::NOISE, t as u64);
            (0..cfg.n_steps).map(|_| sigma * normal(&mut rng)).collect()
        })
        .collect();
    let signal: Vec<Vec<f64>> = targets.iter().map(|r| rows.iter().map(|row| row.dot(r)).collect()).collect();

    let mut warm: Vec<Option<RVec>> = vec![None; cfg.n_states];
    let mut out = Vec::new();
    let mut unconverged = 0;
    for n in 1..=cfg.n_steps {
        let fid_step = cfg.is_fidelity_step(n);
        if !fid_step && !cfg.is_metric_step(n) {
            continue;
        }
        let design = stack_rows(&rows[..n], p);
        if !fid_step {
            let m = metrics_from_singular_values(&design_singular_values(&design), sigma)?;
            out.push(StepRow { step: n, mean_fidelity: None, entropy_e: m.entropy_e, fisher: m.fisher, rank: m.rank });
            continue;
        }
        let est = Estimator::new(&design, sigma)?;
        let m = est.metrics()?;
        let results: Vec<(f64, RVec, bool)> = (0..cfg.n_states)
            .into_par_iter()
            .map(|t| {
                let rec: Vec<f64> = signal[t][..n].iter().zip(&noise[t][..n]).map(|(a, b)| a + b).collect();
                let res = reconstruct_with(&basis, &est, &rec, warm[t].as_ref(), AdmmOptions::default())?;
                let f = super::fidelity_bloch(d, &targets[t], &res.r_bar);
                Ok((f, res.r_bar, res.diagnostics.converged))
            })
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        for (t, (f, r, ok)) in results.into_iter().enumerate() {
            total += f;
            unconverged += usize::from(!ok);
            warm[t] = Some(r);
        }
        out.push(StepRow {
            step: n,
            mean_fidelity: Some(total / cfg.n_states as f64),
            entropy_e: m.entropy_e,
            fisher: m.fisher,
            rank: m.rank,
        });
    }
    Ok(ExperimentReport { config: *cfg, rows: out, unconverged, entropy_max: (p as f64).ln() })
}

/// `step,mean_fidelity,entropy_E,fisher,rank`; steps without a fidelity leave it empty.
pub fn write_csv<W: Write>(rows: &[StepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "step,mean_fidelity,entropy_E,fisher,rank")?;
    for r in rows {
        let f = r.mean_fidelity.map_or(String::new(), |x| format!("{x:.10e}"));
        writeln!(w, "{},{},{:.10e},{:.10e},{}", r.step, f, r.entropy_e, r.fisher, r.rank)?;
    }
    Ok(())
}

/// `‖a − b‖₂ / ‖b‖₂`.
pub fn relative_rms(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub steps: Vec<usize>,
    pub system_entropy: Vec<f64>,
    pub system_fisher: Vec<f64>,
    pub ensemble_entropy: Vec<f64>,
    pub ensemble_fisher: Vec<f64>,
    pub rms_entropy: f64,
    pub rms_fisher: f64,
    pub n_draws: usize,
}

/// Compares a driver's metric curves with the mean curves of `n_draws` fixed
/// draws from the matching circular ensemble.
pub fn baseline_comparison(
    system: Driver,
    ensemble: UnitaryKind,
    spin: SpinQuantum,
    sigma: f64,
    n_steps: usize,
    n_draws: usize,
    seed: u64,
) -> Result<BaselineReport> {
    if n_draws == 0 || n_steps == 0 {
        return domain("need at least one draw and one step");
    }
    let p = spin.dim() * spin.dim() - 1;
    let steps: Vec<usize> = (1..=n_steps).collect();
    let split = |ms: Vec<InfoMetrics>| -> (Vec<f64>, Vec<f64>) {
        (ms.iter().map(|m| m.entropy_e).collect(), ms.iter().map(|m| m.fisher).collect())
    };
    let (system_entropy, system_fisher) =
        split(metric_curve(&driver_design_rows(system, spin, n_steps, seed), p, sigma, &steps)?);
    let curves: Vec<(Vec<f64>, Vec<f64>)> = (0..n_draws as u64)
        .into_par_iter()
        .map(|draw| {
            let driver = match ensemble {
                UnitaryKind::Coe => Driver::CoeFixed { draw },
                UnitaryKind::Cue => Driver::CueFixed { draw },
            };
            metric_curve(&driver_design_rows(driver, spin, n_steps, seed), p, sigma, &steps).map(split)
        })
        .collect::<Result<_>>()?;
    let mean = |pick: fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<f64> {
        (0..n_steps).map(|i| curves.iter().map(|c| pick(c)[i]).sum::<f64>() / n_draws as f64).collect()
    };
    let ensemble_entropy = mean(|c| &c.0);
    let ensemble_fisher = mean(|c| &c.1);
    Ok(BaselineReport {
        rms_entropy: relative_rms(&system_entropy, &ensemble_entropy),
        rms_fisher: relative_rms(&system_fisher, &ensemble_fisher),
        steps,
        system_entropy,
        system_fisher,
        ensemble_entropy,
        ensemble_fisher,
        n_draws,
    })
}
