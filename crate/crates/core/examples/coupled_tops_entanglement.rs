//! Entanglement generation by kicked coupled tops.
//!
//! Usage: `cargo run --release --example coupled_tops_entanglement -- [J] [alpha] [grid]`
//! (defaults 150, 6.0, 60). Prints eigenstate and dynamical entanglement
//! averages next to the random-state predictions for the same dimension.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use qchaos::coupled_tops::{
    chaotic_sea_average, chaotic_subspace_random_entanglement, eigenstate_entanglement, entanglement_map,
    floquet_coupled_block, floquet_eigensystem, percival_filter, point_biserial, CoupledTopsSpec, MapOptions,
    PercivalOptions,
};
use qchaos::ensembles::{typical_entanglement, TypicalKind};
use qchaos::spin::{husimi_grid, SpinQuantum};

fn main() -> qchaos::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let j: f64 = args.first().map_or(150.0, |s| s.parse().expect("J"));
    let alpha: f64 = args.get(1).map_or(6.0, |s| s.parse().expect("alpha"));
    let res: usize = args.get(2).map_or(60, |s| s.parse().expect("grid"));

    let spec = CoupledTopsSpec { spin: SpinQuantum::new(j)?, alpha, beta: FRAC_PI_2 };
    let d = spec.spin.dim();
    let t = Instant::now();
    let es = floquet_eigensystem(&floquet_coupled_block(&spec))?;
    let ent = eigenstate_entanglement(&es);
    println!("J={j} alpha={alpha}  d={d}  diagonalized in {:.2?}", t.elapsed());
    println!("mean eigenstate entanglement   {:.4}", ent.iter().sum::<f64>() / d as f64);

    let t = Instant::now();
    let grid = husimi_grid(res);
    let map = entanglement_map(&spec, &es, &grid, MapOptions::default())?;
    let all = map.iter().map(|p| p.e_avg).sum::<f64>() / map.len() as f64;
    let n_chaotic = map.iter().filter(|p| p.chaotic).count();
    println!("grid {res}x{res} in {:.2?}", t.elapsed());
    println!("grid-averaged long-time E      {all:.4}");
    println!("chaotic fraction               {:.3}", n_chaotic as f64 / map.len() as f64);
    if let Some(sea) = chaotic_sea_average(&map) {
        println!("chaotic-sea average            {sea:.4}");
    }
    if let Some(r) = point_biserial(&map) {
        println!("point-biserial(E, chaotic)     {r:.3}");
    }

    let split = percival_filter(&es, PercivalOptions::default())?;
    println!("Percival chaotic eigenstates   {} of {d}", split.chaotic.len());
    if !split.chaotic.is_empty() {
        let sub = chaotic_subspace_random_entanglement(&es, &split.chaotic, 100, 7)?;
        println!("chaotic-subspace random mean   {sub:.4}");
    }
    println!("typical complex / real         {:.4} / {:.4}",
        typical_entanglement(TypicalKind::ComplexSubspace, d, None)?,
        typical_entanglement(TypicalKind::RealSubspace, d, None)?);
    Ok(())
}
