//! Command dispatch: runs one configured experiment, writes its CSV/JSON
//! artifacts and a manifest with checksums.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{
    BaselineParams, Command, CoupledParams, DiscordParams, DiscordStateName, DriverName, HistoryParams, HusimiParams,
    MapParams, PoincareParams, RunConfig, SpectrumParams, TomographyParams,
};
use crate::coupled_tops::{
    chaotic_sea_average, chaotic_subspace_random_entanglement, eigenstate_entanglement, entanglement_map,
    evolve_entanglement_history, floquet_coupled_block, floquet_eigensystem, point_biserial, percival_filter,
    CoupledTopsSpec, FloquetEigensystem, MapOptions, PercivalOptions, TimeWindow,
};
use crate::discord::{discord_report, schmidt_state, zero_plus_example, BipartiteState, DiscordOptions};
use crate::ensembles::UnitaryKind;
use crate::error::{domain, ConfigIssue, Error, Result};
use crate::kicked_top::{poincare_section, KickedTopSpec, SpherePoint};
use crate::linalg::CMat;
use crate::rng::{family, stream};
use crate::spin::{husimi, husimi_grid, project_fz0_coherent, PhasePointDiff};
use crate::tomography::experiment::{baseline_comparison, run_experiment, write_csv, Driver, ExperimentConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    /// SHA-256 of the compact JSON form of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<Artifact>,
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Numeric(_) => 3,
        Error::Io(_) => 1,
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    issues: Option<Vec<IssueJson<'a>>>,
    exit_code: i32,
}

#[derive(Serialize)]
struct IssueJson<'a> {
    key: &'a str,
    message: &'a str,
}

/// One-line JSON description of an error for stderr.
pub fn error_json(e: &Error) -> String {
    let kind = match e {
        Error::Config(_) => "config",
        Error::Domain(_) => "domain",
        Error::Numeric(_) => "numeric",
        Error::Io(_) => "io",
    };
    let issues = match e {
        Error::Config(v) => Some(v.iter().map(|i: &ConfigIssue| IssueJson { key: &i.key, message: &i.message }).collect()),
        _ => None,
    };
    let report = ErrorReport { error: kind, message: e.to_string(), issues, exit_code: exit_code(e) };
    serde_json::to_string(&report).expect("error report serializes")
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

/// Collects artifacts in memory; nothing touches disk until every output of a
/// command has been computed.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, name: &str, data: Vec<u8>) {
        self.files.push((name.to_string(), data));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut data = serde_json::to_vec_pretty(value).expect("report serializes");
        data.push(b'\n');
        self.add(name, data);
    }
}

fn e10(x: f64) -> String {
    format!("{x:.10e}")
}

/// Runs the configured command and writes its artifacts plus `manifest.json`
/// into `out_dir`, which is created if needed.
pub fn dispatch(cfg: &RunConfig, out_dir: &Path) -> Result<Manifest> {
    let mut out = Outputs::default();
    match &cfg.command {
        Command::Poincare(p) => run_poincare(p, cfg.seed, &mut out)?,
        Command::Husimi(p) => run_husimi(p, &mut out)?,
        Command::FloquetSpectrum(p) => run_spectrum(p, cfg.seed, &mut out)?,
        Command::EntanglementMap(p) => run_map(p, &mut out)?,
        Command::EntanglementHistory(p) => run_history(p, &mut out)?,
        Command::Tomography(p) => run_tomography(p, cfg.seed, &mut out)?,
        Command::RmtBaseline(p) => run_baseline(p, cfg.seed, &mut out)?,
        Command::Discord(p) => run_discord(p, &mut out)?,
    }

    fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::with_capacity(out.files.len());
    for (name, data) in &out.files {
        fs::File::create(out_dir.join(name))?.write_all(data)?;
        outputs.push(Artifact { file: name.clone(), sha256: sha256_hex(data), bytes: data.len() as u64 });
    }
    let config_json = serde_json::to_vec(cfg).expect("config serializes");
    let manifest = Manifest {
        command: cfg.command.name().to_string(),
        config: cfg.clone(),
        config_hash: sha256_hex(&config_json),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs,
    };
    let mut data = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    data.push(b'\n');
    fs::write(out_dir.join(MANIFEST_FILE), data)?;
    Ok(manifest)
}

fn coupled_spec(p: &CoupledParams) -> CoupledTopsSpec {
    CoupledTopsSpec { spin: p.j, alpha: p.alpha, beta: p.beta }
}

fn eigensystem(p: &CoupledParams) -> Result<FloquetEigensystem> {
    floquet_eigensystem(&floquet_coupled_block(&coupled_spec(p)))
}

/// Seeds uniform on the sphere, one MISC stream per seed.
fn run_poincare(p: &PoincareParams, seed: u64, out: &mut Outputs) -> Result<()> {
    let seeds: Vec<SpherePoint> = (0..p.n_seeds as u64)
        .map(|i| {
            let mut rng = stream(seed, family::MISC, i);
            let z: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            SpherePoint::from_angles(z.acos(), phi)
        })
        .collect();
    let spin = crate::spin::SpinQuantum::from_twice(2);
    let spec = KickedTopSpec { spin, alpha: p.alpha, lambda: p.lambda };
    let orbits = poincare_section(&spec, &seeds, p.n_steps);
    let mut csv = String::from("seed_id,step,X,Y,Z\n");
    for (id, orbit) in orbits.iter().enumerate() {
        for (step, q) in orbit.iter().enumerate() {
            csv += &format!("{id},{},{},{},{}\n", step + 1, e10(q.x), e10(q.y), e10(q.z));
        }
    }
    out.add("poincare.csv", csv.into_bytes());
    Ok(())
}

fn run_husimi(p: &HusimiParams, out: &mut Outputs) -> Result<()> {
    let es = eigensystem(&p.system)?;
    if let Some(&bad) = p.states.iter().find(|&&k| k >= es.dim()) {
        return domain(format!("eigenstate index {bad} out of range (dimension {})", es.dim()));
    }
    let grid = husimi_grid(p.resolution);
    let mut csv = String::from("state,eigenphase,delta_theta,delta_phi,Q\n");
    for &k in &p.states {
        let q = husimi(&es.state(k), &grid)?;
        for (pt, qv) in grid.iter().zip(&q) {
            csv += &format!("{k},{},{},{},{}\n", e10(es.phases[k]), e10(pt.delta_theta), e10(pt.delta_phi), e10(*qv));
        }
    }
    out.add("husimi.csv", csv.into_bytes());
    Ok(())
}

#[derive(Serialize)]
struct SpectrumSummary {
    dimension: usize,
    mean_eigenstate_entanglement: f64,
    sq_threshold: f64,
    jz_threshold: f64,
    chaotic_indices: Vec<usize>,
    chaotic_eigenstate_entanglement: Option<f64>,
    chaotic_subspace_random_entanglement: Option<f64>,
}

fn run_spectrum(p: &SpectrumParams, seed: u64, out: &mut Outputs) -> Result<()> {
    let es = eigensystem(&p.system)?;
    let ent = eigenstate_entanglement(&es);
    let probe = percival_filter(&es, PercivalOptions { sq_threshold: None, jz_threshold: p.jz_threshold, resolution: p.resolution })?;
    let sq_threshold = crate::coupled_tops::percentile(&probe.s_q, p.sq_percentile);
    let split = percival_filter(
        &es,
        PercivalOptions { sq_threshold: Some(sq_threshold), jz_threshold: p.jz_threshold, resolution: p.resolution },
    )?;
    let mut csv = String::from("eigenphase,entanglement,S_Q,Jz_mean\n");
    for k in 0..es.dim() {
        csv += &format!("{},{},{},{}\n", e10(es.phases[k]), e10(ent[k]), e10(split.s_q[k]), e10(split.jz_mean[k]));
    }
    out.add("eigensystem.csv", csv.into_bytes());
    let (chaotic_ent, sub) = if split.chaotic.is_empty() {
        (None, None)
    } else {
        let mean = split.chaotic.iter().map(|&k| ent[k]).sum::<f64>() / split.chaotic.len() as f64;
        (Some(mean), Some(chaotic_subspace_random_entanglement(&es, &split.chaotic, p.n_samples, seed)?))
    };
    out.json(
        "spectrum_summary.json",
        &SpectrumSummary {
            dimension: es.dim(),
            mean_eigenstate_entanglement: ent.iter().sum::<f64>() / es.dim() as f64,
            sq_threshold,
            jz_threshold: p.jz_threshold,
            chaotic_indices: split.chaotic,
            chaotic_eigenstate_entanglement: chaotic_ent,
            chaotic_subspace_random_entanglement: sub,
        },
    );
    Ok(())
}

#[derive(Serialize)]
struct MapSummary {
    points: usize,
    mean_e_avg: f64,
    chaotic_fraction: f64,
    chaotic_sea_average: Option<f64>,
    point_biserial: Option<f64>,
}

fn run_map(p: &MapParams, out: &mut Outputs) -> Result<()> {
    let spec = coupled_spec(&p.system);
    let es = eigensystem(&p.system)?;
    let grid = husimi_grid(p.grid);
    let opts = MapOptions {
        window: TimeWindow { start: p.window_start, end: p.window_end },
        lyapunov_steps: p.lyapunov_steps,
        lyapunov_threshold: p.lyapunov_threshold,
    };
    let map = entanglement_map(&spec, &es, &grid, opts)?;
    let mut csv = String::from("delta_theta,delta_phi,E_avg,lyapunov_rate,classification\n");
    for m in &map {
        let class = if m.chaotic { "chaotic" } else { "regular" };
        csv += &format!("{},{},{},{},{class}\n", e10(m.delta_theta), e10(m.delta_phi), e10(m.e_avg), e10(m.lyapunov_rate));
    }
    out.add("entanglement_map.csv", csv.into_bytes());
    let n = map.len() as f64;
    out.json(
        "map_summary.json",
        &MapSummary {
            points: map.len(),
            mean_e_avg: map.iter().map(|m| m.e_avg).sum::<f64>() / n,
            chaotic_fraction: map.iter().filter(|m| m.chaotic).count() as f64 / n,
            chaotic_sea_average: chaotic_sea_average(&map),
            point_biserial: point_biserial(&map),
        },
    );
    Ok(())
}

fn run_history(p: &HistoryParams, out: &mut Outputs) -> Result<()> {
    let u = floquet_coupled_block(&coupled_spec(&p.system));
    let psi0 = project_fz0_coherent(p.system.j, PhasePointDiff::new(p.delta_theta, p.delta_phi)?);
    let hist = evolve_entanglement_history(&psi0, &u, p.n_steps)?;
    let mut csv = String::from("step,entanglement\n");
    for (n, e) in hist.iter().enumerate() {
        csv += &format!("{n},{}\n", e10(*e));
    }
    out.add("entanglement_history.csv", csv.into_bytes());
    Ok(())
}

fn tomography_driver(name: DriverName, alpha: f64, lambda: f64, draw: u64) -> Driver {
    match name {
        DriverName::KickedTop => Driver::KickedTop { lambda, alpha },
        DriverName::KickedTopNoTr => Driver::KickedTopNoTr,
        DriverName::CoeFixed => Driver::CoeFixed { draw },
        DriverName::CueFixed => Driver::CueFixed { draw },
        DriverName::HaarFresh => Driver::HaarFresh,
    }
}

#[derive(Serialize)]
struct TomographySummary {
    driver: &'static str,
    dimension: usize,
    entropy_max: f64,
    unconverged: usize,
    final_mean_fidelity: Option<f64>,
}

fn run_tomography(p: &TomographyParams, seed: u64, out: &mut Outputs) -> Result<()> {
    let driver = tomography_driver(p.driver, p.alpha, p.lambda, p.draw);
    let mut cfg = ExperimentConfig::new(driver, p.j, p.n_steps, p.n_states, seed);
    cfg.sigma = Some(p.sigma);
    cfg.metrics_stride = p.metrics_stride;
    cfg.fidelity_stride = p.fidelity_stride;
    let report = run_experiment(&cfg)?;
    let mut csv = Vec::new();
    write_csv(&report.rows, &mut csv)?;
    out.add("tomography.csv", csv);
    out.json(
        "tomography_summary.json",
        &TomographySummary {
            driver: driver.name(),
            dimension: p.j.dim(),
            entropy_max: report.entropy_max,
            unconverged: report.unconverged,
            final_mean_fidelity: report.rows.last().and_then(|r| r.mean_fidelity),
        },
    );
    Ok(())
}

#[derive(Serialize)]
struct BaselineSummary {
    system: &'static str,
    ensemble: &'static str,
    n_draws: usize,
    rms_entropy: f64,
    rms_fisher: f64,
}

fn run_baseline(p: &BaselineParams, seed: u64, out: &mut Outputs) -> Result<()> {
    let (system, kind, ensemble) = match p.system {
        DriverName::KickedTop => (Driver::KickedTop { lambda: p.lambda, alpha: p.alpha }, UnitaryKind::Coe, "coe"),
        DriverName::KickedTopNoTr => (Driver::KickedTopNoTr, UnitaryKind::Cue, "cue"),
        other => return domain(format!("baseline system must be a kicked top, got {other:?}")),
    };
    let r = baseline_comparison(system, kind, p.j, p.sigma, p.n_steps, p.n_draws, seed)?;
    let mut csv = String::from("step,system_entropy_E,system_fisher,ensemble_entropy_E,ensemble_fisher\n");
    for i in 0..r.steps.len() {
        csv += &format!(
            "{},{},{},{},{}\n",
            r.steps[i],
            e10(r.system_entropy[i]),
            e10(r.system_fisher[i]),
            e10(r.ensemble_entropy[i]),
            e10(r.ensemble_fisher[i])
        );
    }
    out.add("rmt_baseline.csv", csv.into_bytes());
    out.json(
        "rmt_baseline_summary.json",
        &BaselineSummary { system: system.name(), ensemble, n_draws: r.n_draws, rms_entropy: r.rms_entropy, rms_fisher: r.rms_fisher },
    );
    Ok(())
}

/// Two-qubit states selectable from the configuration.
pub fn discord_state(name: DiscordStateName, p: f64) -> Result<BipartiteState> {
    match name {
        DiscordStateName::ZeroPlus => Ok(zero_plus_example()),
        DiscordStateName::Bell => BipartiteState::from_ket(&schmidt_state(&[0.5, 0.5])?, 2, 2),
        DiscordStateName::Werner => {
            let bell = schmidt_state(&[0.5, 0.5])?.amps;
            let rho: CMat = (&bell * bell.adjoint()).scale(p) + CMat::identity(4, 4).scale((1.0 - p) / 4.0);
            BipartiteState::new(rho, 2, 2)
        }
    }
}

fn run_discord(p: &DiscordParams, out: &mut Outputs) -> Result<()> {
    let state = discord_state(p.state, p.p)?;
    let opts = DiscordOptions { resolution: p.resolution, ..DiscordOptions::default() };
    out.json("discord.json", &discord_report(&state, opts)?);
    Ok(())
}
