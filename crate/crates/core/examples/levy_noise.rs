// Cumulants of a Lévy noise and the per-site increments of the lattice
// noise, checked against their cumulant contract.

use levy_spde::lattice::LatticeConfig;
use levy_spde::levy::{sample_cumulants, step_rng, IncrementSampler, LevyParams};

pub fn run_example() -> levy_spde::Result<()> {
    let params = LevyParams::new(0.0, 0.5, 2.0, vec![(1.0, 0.5), (-1.0, 0.25), (2.0, 0.25)])?;
    let c = params.cumulants(6)?;
    println!("cumulants c1..c6 = {:?}", c.as_slice());
    let scaled = params.scale_jumps(2.0)?.cumulants(6)?;
    println!("jumps doubled: c4 {} -> {}", c.get(4), scaled.get(4));

    let cfg = LatticeConfig::new(1, 0.5, 8, 1.0)?;
    let dt = 0.1;
    let sampler = IncrementSampler::new(&params, &cfg, dt)?;
    let mut rng = step_rng(7, 0);
    let mut x = vec![0.0; 200_000];
    sampler.fill(&mut rng, &mut x);
    let [mean, var, _, k4] = sample_cumulants(&x);
    let vol = cfg.cell_volume();
    println!("increment mean {mean:.4} (expected {:.4})", c.get(1) * dt);
    println!("increment variance {var:.4} (expected {:.4})", c.get(2) * dt / vol);
    println!("increment fourth cumulant {k4:.3} (expected {:.3})", c.get(4) * dt / vol.powi(3));
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
