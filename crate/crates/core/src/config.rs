//! Run configuration: `key=value` lines or one JSON object, validated into a
//! typed command. Every offending key is reported, not just the first.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigIssue, Error, Result};
use crate::spin::SpinQuantum;

/// Coupled-tops system shared by several commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledParams {
    pub j: SpinQuantum,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareParams {
    pub alpha: f64,
    pub lambda: f64,
    pub n_seeds: usize,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiParams {
    #[serde(flatten)]
    pub system: CoupledParams,
    pub resolution: usize,
    /// Eigenstate indices, eigenphases ascending.
    pub states: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    #[serde(flatten)]
    pub system: CoupledParams,
    pub resolution: usize,
    pub sq_percentile: f64,
    pub jz_threshold: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    #[serde(flatten)]
    pub system: CoupledParams,
    pub grid: usize,
    pub window_start: usize,
    pub window_end: usize,
    pub lyapunov_steps: usize,
    pub lyapunov_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryParams {
    #[serde(flatten)]
    pub system: CoupledParams,
    pub delta_theta: f64,
    pub delta_phi: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverName {
    KickedTop,
    KickedTopNoTr,
    CoeFixed,
    CueFixed,
    HaarFresh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyParams {
    pub driver: DriverName,
    pub j: SpinQuantum,
    pub alpha: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub n_steps: usize,
    pub n_states: usize,
    pub metrics_stride: usize,
    pub fidelity_stride: usize,
    pub draw: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    /// `kicked_top` (compared with COE) or `kicked_top_no_tr` (with CUE).
    pub system: DriverName,
    pub j: SpinQuantum,
    pub alpha: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub n_steps: usize,
    pub n_draws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscordStateName {
    /// `½(|00⟩⟨00| + |1+⟩⟨1+|)`.
    ZeroPlus,
    Bell,
    /// `p |Φ⁺⟩⟨Φ⁺| + (1 − p) 1/4`.
    Werner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordParams {
    pub state: DiscordStateName,
    pub p: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Poincare(PoincareParams),
    Husimi(HusimiParams),
    FloquetSpectrum(SpectrumParams),
    EntanglementMap(MapParams),
    EntanglementHistory(HistoryParams),
    Tomography(TomographyParams),
    RmtBaseline(BaselineParams),
    Discord(DiscordParams),
}

pub const COMMANDS: [&str; 8] = [
    "poincare",
    "husimi",
    "floquet-spectrum",
    "entanglement-map",
    "entanglement-history",
    "tomography",
    "rmt-baseline",
    "discord",
];

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Poincare(_) => "poincare",
            Command::Husimi(_) => "husimi",
            Command::FloquetSpectrum(_) => "floquet-spectrum",
            Command::EntanglementMap(_) => "entanglement-map",
            Command::EntanglementHistory(_) => "entanglement-history",
            Command::Tomography(_) => "tomography",
            Command::RmtBaseline(_) => "rmt-baseline",
            Command::Discord(_) => "discord",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 0;

/// Raw `key → value` pairs from either accepted syntax.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        return parse_json_pairs(trimmed);
    }
    let mut out = BTreeMap::new();
    let mut issues = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_string();
                if out.insert(k.clone(), v.trim().to_string()).is_some() {
                    issues.push(ConfigIssue::new(&k, "duplicate key"));
                }
            }
            None => issues.push(ConfigIssue::new(format!("line {}", n + 1), "expected key=value")),
        }
    }
    if issues.is_empty() {
        Ok(out)
    } else {
        Err(Error::Config(issues))
    }
}

fn parse_json_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(vec![ConfigIssue::new("json", e.to_string())]))?;
    let serde_json::Value::Object(map) = value else {
        return Err(Error::Config(vec![ConfigIssue::new("json", "expected a JSON object")]));
    };
    let mut out = BTreeMap::new();
    let mut issues = Vec::new();
    for (k, v) in map {
        let scalar = |v: &serde_json::Value| match v {
            serde_json::Value::String(s) => Some(s.clone()),
            serde_json::Value::Number(n) => Some(n.to_string()),
            serde_json::Value::Bool(b) => Some(b.to_string()),
            _ => None,
        };
        let text = match &v {
            serde_json::Value::Array(items) => items.iter().map(scalar).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
            other => scalar(other),
        };
        match text {
            Some(t) => {
                out.insert(k, t);
            }
            None => issues.push(ConfigIssue::new(&k, "expected a string, number, boolean or array of those")),
        }
    }
    if issues.is_empty() {
        Ok(out)
    } else {
        Err(Error::Config(issues))
    }
}

/// Typed access to raw pairs that records consumed keys and every problem.
struct Reader<'a> {
    raw: &'a BTreeMap<String, String>,
    used: BTreeSet<&'static str>,
    issues: Vec<ConfigIssue>,
}

impl<'a> Reader<'a> {
    fn new(raw: &'a BTreeMap<String, String>) -> Self {
        Self { raw, used: BTreeSet::new(), issues: Vec::new() }
    }

    fn get<T: std::str::FromStr>(&mut self, key: &'static str, default: T, ok: impl Fn(&T) -> bool, need: &str) -> T {
        self.used.insert(key);
        let Some(text) = self.raw.get(key) else {
            return default;
        };
        match text.parse::<T>() {
            Ok(v) if ok(&v) => v,
            Ok(_) => {
                self.issues.push(ConfigIssue::new(key, format!("out of range: {text:?} ({need})")));
                default
            }
            Err(_) => {
                self.issues.push(ConfigIssue::new(key, format!("cannot parse {text:?} ({need})")));
                default
            }
        }
    }

    fn real(&mut self, key: &'static str, default: f64, ok: impl Fn(f64) -> bool, need: &str) -> f64 {
        self.get(key, default, |v: &f64| v.is_finite() && ok(*v), need)
    }

    fn count(&mut self, key: &'static str, default: usize, min: usize) -> usize {
        self.get(key, default, |v: &usize| *v >= min, &format!("integer >= {min}"))
    }

    fn spin(&mut self, key: &'static str, default: f64, min_twice: u32) -> SpinQuantum {
        let j = self.real(key, default, |j| j >= 0.0, "non-negative multiple of 1/2");
        match SpinQuantum::new(j) {
            Ok(s) if s.twice() >= min_twice => s,
            Ok(_) => {
                self.issues.push(ConfigIssue::new(key, format!("must be at least {}", min_twice as f64 / 2.0)));
                SpinQuantum::from_twice(min_twice)
            }
            Err(e) => {
                self.issues.push(ConfigIssue::new(key, e.to_string()));
                SpinQuantum::from_twice(min_twice)
            }
        }
    }

    fn choice<T: Copy>(&mut self, key: &'static str, default: T, options: &[(&str, T)]) -> T {
        self.used.insert(key);
        let Some(text) = self.raw.get(key) else {
            return default;
        };
        match options.iter().find(|(name, _)| name == text) {
            Some((_, v)) => *v,
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.issues.push(ConfigIssue::new(key, format!("unknown value {text:?}; expected one of {}", names.join(", "))));
                default
            }
        }
    }

    fn index_list(&mut self, key: &'static str, default: Vec<usize>) -> Vec<usize> {
        self.used.insert(key);
        let Some(text) = self.raw.get(key) else {
            return default;
        };
        let parsed: std::result::Result<Vec<usize>, _> =
            text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect();
        match parsed {
            Ok(v) if !v.is_empty() => v,
            _ => {
                self.issues.push(ConfigIssue::new(key, format!("expected comma-separated indices, got {text:?}")));
                default
            }
        }
    }

    fn issue(&mut self, key: &str, msg: impl Into<String>) {
        self.issues.push(ConfigIssue::new(key, msg));
    }

    fn coupled(&mut self, alpha: f64) -> CoupledParams {
        CoupledParams {
            j: self.spin("j", 150.0, 1),
            alpha: self.real("alpha", alpha, |_| true, "real"),
            beta: self.real("beta", FRAC_PI_2, |_| true, "real"),
        }
    }

    fn finish(mut self) -> Vec<ConfigIssue> {
        for key in self.raw.keys() {
            if !self.used.contains(key.as_str()) {
                self.issues.push(ConfigIssue::new(key, "unknown key for this command"));
            }
        }
        self.issues
    }
}

const DRIVERS: [(&str, DriverName); 5] = [
    ("kicked_top", DriverName::KickedTop),
    ("kicked_top_no_tr", DriverName::KickedTopNoTr),
    ("coe_fixed", DriverName::CoeFixed),
    ("cue_fixed", DriverName::CueFixed),
    ("haar_fresh", DriverName::HaarFresh),
];

/// Parses and validates a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw = parse_pairs(text)?;
    let mut r = Reader::new(&raw);
    r.used.insert("command");
    let name = raw.get("command").cloned();
    let seed = r.get("seed", DEFAULT_SEED, |_| true, "unsigned 64-bit integer");
    r.used.insert("out_dir");
    let out_dir = raw.get("out_dir").map(PathBuf::from);
    let command = match name.as_deref() {
        None => {
            r.issue("command", "command required");
            None
        }
        Some("poincare") => Some(Command::Poincare(PoincareParams {
            alpha: r.real("alpha", 1.4, |_| true, "real"),
            lambda: r.real("lambda", 7.0, |_| true, "real"),
            n_seeds: r.count("n_seeds", 20, 1),
            n_steps: r.count("n_steps", 500, 1),
        })),
        Some("husimi") => Some(Command::Husimi(HusimiParams {
            system: r.coupled(1.5),
            resolution: r.count("resolution", 64, 16),
            states: r.index_list("states", vec![0]),
        })),
        Some("floquet-spectrum") => Some(Command::FloquetSpectrum(SpectrumParams {
            system: r.coupled(1.5),
            resolution: r.count("resolution", 64, 16),
            sq_percentile: r.real("sq_percentile", 75.0, |q| (0.0..=100.0).contains(&q), "percentile in [0, 100]"),
            jz_threshold: r.real("jz_threshold", 0.0, |_| true, "real"),
            n_samples: r.count("n_samples", 100, 1),
        })),
        Some("entanglement-map") => {
            let p = MapParams {
                system: r.coupled(6.0),
                grid: r.count("grid", 60, 1),
                window_start: r.count("window_start", 300, 0),
                window_end: r.count("window_end", 320, 0),
                lyapunov_steps: r.count("lyapunov_steps", 1000, 500),
                lyapunov_threshold: r.real("lyapunov_threshold", 0.02, |t| t >= 0.0, "non-negative real"),
            };
            if p.window_end < p.window_start {
                r.issue("window_end", "must not precede window_start");
            }
            Some(Command::EntanglementMap(p))
        }
        Some("entanglement-history") => Some(Command::EntanglementHistory(HistoryParams {
            system: r.coupled(1.5),
            delta_theta: r.real("delta_theta", PI, |t| (0.0..=PI).contains(&t), "angle in [0, pi]"),
            delta_phi: r.real("delta_phi", 0.0, |_| true, "real"),
            n_steps: r.count("n_steps", 500, 1),
        })),
        Some("tomography") => {
            let driver = r.choice("driver", DriverName::KickedTop, &DRIVERS);
            let j = r.spin("j", 10.0, 1);
            Some(Command::Tomography(TomographyParams {
                driver,
                j,
                alpha: r.real("alpha", 1.4, |_| true, "real"),
                lambda: r.real("lambda", 7.0, |_| true, "real"),
                sigma: r.real("sigma", 0.05 * j.j(), |s| s >= 0.0, "non-negative real"),
                n_steps: r.count("n_steps", 200, 1),
                n_states: r.count("n_states", 100, 0),
                metrics_stride: r.count("metrics_stride", 1, 1),
                fidelity_stride: r.count("fidelity_stride", 10, 1),
                draw: r.get("draw", 0, |_| true, "unsigned integer"),
            }))
        }
        Some("rmt-baseline") => {
            let system = r.choice("system", DriverName::KickedTop, &DRIVERS[..2]);
            let j = r.spin("j", 10.0, 1);
            Some(Command::RmtBaseline(BaselineParams {
                system,
                j,
                alpha: r.real("alpha", 1.4, |_| true, "real"),
                lambda: r.real("lambda", 7.0, |_| true, "real"),
                sigma: r.real("sigma", 0.05 * j.j(), |s| s >= 0.0, "non-negative real"),
                n_steps: r.count("n_steps", 200, 1),
                n_draws: r.count("n_draws", 20, 1),
            }))
        }
        Some("discord") => Some(Command::Discord(DiscordParams {
            state: r.choice(
                "state",
                DiscordStateName::ZeroPlus,
                &[("zero_plus", DiscordStateName::ZeroPlus), ("bell", DiscordStateName::Bell), ("werner", DiscordStateName::Werner)],
            ),
            p: r.real("p", 0.5, |p| (0.0..=1.0).contains(&p), "weight in [0, 1]"),
            resolution: r.count("resolution", 64, 1),
        })),
        Some(other) => {
            r.issue("command", format!("unknown command {other:?}; expected one of {}", COMMANDS.join(", ")));
            None
        }
    };
    // Without a known command every other key is unchecked, so only the
    // command problem is reported.
    let issues = if command.is_some() { r.finish() } else { r.issues };
    match command {
        Some(command) if issues.is_empty() => Ok(RunConfig { command, seed, out_dir }),
        _ => Err(Error::Config(issues)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issue_keys(e: Error) -> Vec<String> {
        match e {
            Error::Config(v) => v.into_iter().map(|i| i.key).collect(),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn poincare_example() {
        let c = parse_config("command=poincare\nalpha=1.4\nlambda=7.0\nseed=42").unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(
            c.command,
            Command::Poincare(PoincareParams { alpha: 1.4, lambda: 7.0, n_seeds: 20, n_steps: 500 })
        );
    }

    #[test]
    fn bad_number_names_key() {
        let keys = issue_keys(parse_config("command=poincare\nlambda=abc").unwrap_err());
        assert_eq!(keys, vec!["lambda"]);
    }

    #[test]
    fn empty_needs_command() {
        match parse_config("").unwrap_err() {
            Error::Config(v) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].key, "command");
                assert!(v[0].message.contains("command required"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn every_bad_key_listed() {
        let keys = issue_keys(
            parse_config("command=tomography\ndriver=foo\nj=0.3\nsigma=-1\ncolour=red\nn_steps=0").unwrap_err(),
        );
        let mut keys = keys;
        keys.sort();
        assert_eq!(keys, vec!["colour", "driver", "j", "n_steps", "sigma"]);
    }

    #[test]
    fn keys_are_per_command() {
        let keys = issue_keys(parse_config("command=poincare\nj=10").unwrap_err());
        assert_eq!(keys, vec!["j"]);
        assert!(parse_config("command=tomography\nj=10").is_ok());
    }

    #[test]
    fn unknown_command() {
        let keys = issue_keys(parse_config("command=fly\nfoo=1").unwrap_err());
        assert_eq!(keys, vec!["command"]);
    }

    #[test]
    fn json_equivalent() {
        let a = parse_config("command=tomography\ndriver=haar_fresh\nj=2\nn_steps=30\nseed=5").unwrap();
        let b = parse_config(r#"{"command":"tomography","driver":"haar_fresh","j":2,"n_steps":30,"seed":5}"#).unwrap();
        assert_eq!(a, b);
        let h = parse_config(r#"{"command":"husimi","states":[0,3,7],"j":10}"#).unwrap();
        match h.command {
            Command::Husimi(p) => assert_eq!(p.states, vec![0, 3, 7]),
            other => panic!("{other:?}"),
        }
        assert!(parse_config(r#"{"command":"discord","state":{"x":1}}"#).is_err());
        assert!(parse_config("[1,2]").is_err());
    }

    #[test]
    fn comments_duplicates_and_malformed_lines() {
        assert!(parse_config("# run\ncommand=discord\n\nstate=bell").is_ok());
        let keys = issue_keys(parse_config("command=discord\nstate=bell\nstate=werner").unwrap_err());
        assert_eq!(keys, vec!["state"]);
        let keys = issue_keys(parse_config("command=discord\nnonsense").unwrap_err());
        assert_eq!(keys, vec!["line 2"]);
    }

    #[test]
    fn defaults_and_window_check() {
        let c = parse_config("command=entanglement-map").unwrap();
        match c.command {
            Command::EntanglementMap(p) => {
                assert_eq!((p.grid, p.window_start, p.window_end, p.lyapunov_steps), (60, 300, 320, 1000));
                assert_eq!(p.system.j.twice(), 300);
                assert_eq!(p.system.alpha, 6.0);
            }
            other => panic!("{other:?}"),
        }
        let keys = issue_keys(parse_config("command=entanglement-map\nwindow_start=10\nwindow_end=5").unwrap_err());
        assert_eq!(keys, vec!["window_end"]);
        let c = parse_config("command=tomography\nj=4").unwrap();
        match c.command {
            Command::Tomography(p) => assert_eq!(p.sigma, 0.2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serializes_with_command_tag() {
        let c = parse_config("command=discord\nseed=3").unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["command"], "discord");
        assert_eq!(v["seed"], 3);
        let back: RunConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
