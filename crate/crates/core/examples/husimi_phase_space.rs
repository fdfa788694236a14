//! Husimi pictures of coupled-top Floquet eigenstates.
//!
//! Usage: `cargo run --release --example husimi_phase_space -- [J] [alpha]`
//! (defaults 40, 1.5). Prints a coarse ASCII map of Q(δθ, δφ) for the most
//! and least delocalized eigenstates, ranked by Husimi entropy.

use std::f64::consts::FRAC_PI_2;

use qchaos::coupled_tops::{floquet_coupled_block, floquet_eigensystem, CoupledTopsSpec};
use qchaos::spin::{husimi, husimi_entropies, husimi_grid, SpinQuantum};

const SHADES: &[u8] = b" .:-=+*#%@";

fn main() -> qchaos::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let j: f64 = args.first().map_or(40.0, |s| s.parse().expect("J"));
    let alpha: f64 = args.get(1).map_or(1.5, |s| s.parse().expect("alpha"));

    let spec = CoupledTopsSpec { spin: SpinQuantum::new(j)?, alpha, beta: FRAC_PI_2 };
    let es = floquet_eigensystem(&floquet_coupled_block(&spec))?;
    let s_q = husimi_entropies(spec.spin, &es.vectors, 64)?;
    let order = {
        let mut idx: Vec<usize> = (0..es.dim()).collect();
        idx.sort_by(|&a, &b| s_q[a].total_cmp(&s_q[b]));
        idx
    };

    let n = 32;
    let grid = husimi_grid(n);
    for (label, k) in [("most localized", order[0]), ("most delocalized", order[order.len() - 1])] {
        let q = husimi(&es.state(k), &grid)?;
        let peak = q.iter().cloned().fold(0.0, f64::max);
        println!("{label}: eigenstate {k}, phase {:+.4}, S_Q = {:.3}", es.phases[k], s_q[k]);
        println!("rows: cos(delta_theta) from -1 to 1; columns: delta_phi from 0 to 2pi");
        for row in q.chunks(n) {
            let line: String = row
                .iter()
                .map(|v| SHADES[((v / peak) * (SHADES.len() - 1) as f64).round() as usize] as char)
                .collect();
            println!("|{line}|");
        }
        println!();
    }
    Ok(())
}
