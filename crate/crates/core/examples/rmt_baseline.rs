//! Random-matrix baselines for tomography information gain.
//!
//! Compares covariance-entropy and Fisher curves of the chaotic kicked top with
//! fixed COE draws, the time-reversal-broken top with fixed CUE draws, and
//! shows fresh Haar driving approaching the entropy bound `log(d² − 1)`.
//!
//! Usage: `cargo run --release --example rmt_baseline -- [n_steps] [n_draws] [fresh_steps]`
//! (defaults 200, 20, 1000).

use std::time::Instant;

use qchaos::ensembles::UnitaryKind;
use qchaos::spin::SpinQuantum;
use qchaos::tomography::experiment::{baseline_comparison, run_experiment, Driver, ExperimentConfig};

fn main() -> qchaos::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("integer argument")).collect();
    let n_steps = args.first().copied().unwrap_or(200);
    let n_draws = args.get(1).copied().unwrap_or(20);
    let fresh_steps = args.get(2).copied().unwrap_or(1000);
    let spin = SpinQuantum::new(10.0)?;
    let sigma = 0.05 * spin.j();

    let pairs = [
        ("kicked top λ=7 vs COE", Driver::KickedTop { lambda: 7.0, alpha: 1.4 }, UnitaryKind::Coe),
        ("no-TR top vs CUE", Driver::KickedTopNoTr, UnitaryKind::Cue),
    ];
    for (label, driver, kind) in pairs {
        let t = Instant::now();
        let b = baseline_comparison(driver, kind, spin, sigma, n_steps, n_draws, 77)?;
        println!("{label}: relative RMS entropy {:.4}, Fisher {:.4} ({:.1?})", b.rms_entropy, b.rms_fisher, t.elapsed());
        for &k in &[10, 50, 100, n_steps] {
            if k <= n_steps {
                println!(
                    "  step {k:>4}: entropy {:.4} vs {:.4}, Fisher {:.4e} vs {:.4e}",
                    b.system_entropy[k - 1], b.ensemble_entropy[k - 1], b.system_fisher[k - 1], b.ensemble_fisher[k - 1]
                );
            }
        }
    }

    let t = Instant::now();
    let mut cfg = ExperimentConfig::new(Driver::HaarFresh, spin, fresh_steps, 0, 77);
    cfg.metrics_stride = 50;
    let rep = run_experiment(&cfg)?;
    println!("fresh Haar driving, bound log(d²−1) = {:.4} ({:.1?})", rep.entropy_max, t.elapsed());
    for r in &rep.rows {
        println!("  step {:>5}: entropy {:.4}  deficit {:.2}%", r.step, r.entropy_e, 100.0 * (1.0 - r.entropy_e / rep.entropy_max));
    }
    Ok(())
}
