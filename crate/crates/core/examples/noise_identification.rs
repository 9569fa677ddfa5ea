// Identifying c₂, c₄ and the kurtosis by least squares: first on an
// exact model function, then on a simulated two-point function.

use levy_spde::evaluator::first_order_kernels;
use levy_spde::fitting::{fit_first_order, fit_first_order_with_tadpole, KurtosisThresholds};
use levy_spde::lattice::{LatticeConfig, SpatialField};
use levy_spde::levy::LevyParams;
use levy_spde::quadrature::QuadratureSpec;
use levy_spde::simulator::{estimate_correlation, simulate, CorrelationFunction, SimConfig};

pub fn run_example() -> levy_spde::Result<()> {
    let cfg = LatticeConfig::new(1, 1.0, 32, 1.0)?;
    let quad = QuadratureSpec::for_lattice(&cfg);
    let lambda = 0.1;
    let thresholds = KurtosisThresholds::default();

    let k = first_order_kernels(&cfg, &quad, None)?;
    let exact: Vec<f64> = k.p1.values().iter().zip(k.p2.values()).map(|(a, b)| 2.0 * a + 5.0 * lambda * b).collect();
    let fit = fit_first_order(&CorrelationFunction::analytic(&SpatialField::from_values(&cfg, exact)?), &k.p1, &k.p2, lambda)?;
    println!("exact model: c2 = {:.12}, c4 = {:.12}, Q = {:.1e}", fit.c2, fit.c4, fit.q);

    let sim = SimConfig { dt: 0.05, burn_in: 400, samples: 40_000, thinning: 10, seed: 5, lambda, p: 3, batches: 20, keep_snapshots: false };
    let traj = simulate(&LevyParams::rademacher(1.0, 1.0)?, &sim, &cfg, &SpatialField::zeros(&cfg))?;
    let f_em = estimate_correlation(&traj, 16)?;
    let k = first_order_kernels(&cfg, &quad, Some(sim.dt))?;
    let fit = fit_first_order_with_tadpole(&f_em, &k.p1, &k.p2, &k.tadpole, lambda)?;
    print!("{}", fit.report(&thresholds));
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
