//! Classical and quantum signatures of chaos in the single kicked top.
//!
//! Usage: `cargo run --release --example kicked_top_poincare -- [lambda] [j]`
//! (defaults 7.0, 200). Iterates a few classical orbits, estimates their
//! Lyapunov rates, then compares the quantum eigenphase spacings with the
//! Poisson and Wigner-surmise distributions.

use qchaos::ensembles::{ks_statistic, poisson_cdf, wigner_surmise_cdf};
use qchaos::kicked_top::{floquet_kicked_top, kicked_top_lyapunov, parity_resolved_spacings, poincare_section, KickedTopSpec, SpherePoint};
use qchaos::spin::SpinQuantum;

fn main() -> qchaos::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let lambda: f64 = args.first().map_or(7.0, |s| s.parse().expect("lambda"));
    let j: f64 = args.get(1).map_or(200.0, |s| s.parse().expect("j"));
    let alpha = std::f64::consts::FRAC_PI_2;

    let spec = KickedTopSpec { spin: SpinQuantum::new(j)?, alpha, lambda };
    let seeds = [
        SpherePoint::from_angles(0.3, 0.0),
        SpherePoint::from_angles(1.2, 1.0),
        SpherePoint::from_angles(2.0, 4.0),
        SpherePoint::from_angles(2.9, 2.5),
    ];
    let orbits = poincare_section(&spec, &seeds, 2000);
    println!("lambda = {lambda}");
    for (s, orbit) in seeds.iter().zip(&orbits) {
        let last = orbit.last().expect("non-empty orbit");
        let rate = kicked_top_lyapunov(*s, alpha, lambda, 2000);
        println!(
            "seed ({:+.3}, {:+.3}, {:+.3})  ->  ({:+.3}, {:+.3}, {:+.3})   lyapunov {rate:.4}",
            s.x, s.y, s.z, last.x, last.y, last.z
        );
    }

    let spacings = parity_resolved_spacings(&floquet_kicked_top(&spec), spec.spin)?;
    println!("{} unfolded spacings at j = {j}", spacings.len());
    println!("KS distance to Poisson  {:.4}", ks_statistic(&spacings, poisson_cdf));
    println!("KS distance to Wigner   {:.4}", ks_statistic(&spacings, wigner_surmise_cdf));
    Ok(())
}
