//! Random-matrix and random-state reference values.
//!
//! Usage: `cargo run --release --example random_ensembles -- [d] [samples]`
//! (defaults 64, 200). Samples circular ensembles and random vectors and
//! compares them with the closed-form predictions.

use qchaos::ensembles::{
    basis_entropy, ks_statistic, sample_state, sample_unitary, typical_entanglement, unfolded_circle_spacings,
    wigner_surmise_cdf, Field, TypicalKind, UnitaryKind,
};
use qchaos::linalg::unitary_eigen;
use qchaos::rng::{family, stream};

fn main() -> qchaos::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let d: usize = args.first().map_or(64, |s| s.parse().expect("d"));
    let samples: u64 = args.get(1).map_or(200, |s| s.parse().expect("samples"));

    for kind in [UnitaryKind::Coe, UnitaryKind::Cue] {
        let mut spacings = Vec::new();
        for i in 0..samples.min(50) {
            let u = sample_unitary(d, kind, &mut stream(11, family::ENSEMBLE, i));
            let (phases, _) = unitary_eigen(&u, 1e-8)?;
            spacings.extend(unfolded_circle_spacings(&phases));
        }
        println!("{kind:?}: {} spacings, KS distance to Wigner surmise {:.4}", spacings.len(), ks_statistic(&spacings, wigner_surmise_cdf));
    }

    for (field, kind) in [(Field::Real, TypicalKind::RealSubspace), (Field::Complex, TypicalKind::ComplexSubspace)] {
        let mean = (0..samples)
            .map(|i| basis_entropy(&sample_state(d, field, &mut stream(11, family::MISC, i))))
            .sum::<f64>()
            / samples as f64;
        println!("{field:?} vectors: sampled entropy {mean:.4}, predicted {:.4}", typical_entanglement(kind, d, None)?);
    }
    let da = (d as f64).sqrt().floor() as usize;
    println!("Page value for {da} x {da}: {:.4}", typical_entanglement(TypicalKind::Page, da, Some(da))?);
    Ok(())
}
