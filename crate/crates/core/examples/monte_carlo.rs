// Explicit Euler simulation of the lattice SPDE and the empirical
// two-point function with batch-means error bars. At zero coupling the
// estimate is compared with the exact stationary covariance of the
// discrete-time chain.

use levy_spde::evaluator::momentum::p1_kernel_discrete;
use levy_spde::lattice::{LatticeConfig, SpatialField};
use levy_spde::levy::LevyParams;
use levy_spde::simulator::{estimate_correlation, simulate, SimConfig};

pub fn run_example() -> levy_spde::Result<()> {
    let cfg = LatticeConfig::new(1, 1.0, 16, 1.0)?;
    let sim = SimConfig { dt: 0.05, burn_in: 200, samples: 20_000, thinning: 10, seed: 3, lambda: 0.0, p: 3, batches: 20, keep_snapshots: false };
    let traj = simulate(&LevyParams::gaussian(1.0)?, &sim, &cfg, &SpatialField::zeros(&cfg))?;
    let corr = estimate_correlation(&traj, 4)?;
    let exact = p1_kernel_discrete(&cfg, sim.dt)?;
    for (i, &lag) in corr.lags.iter().enumerate() {
        let z = (corr.mean[i] - exact.values()[lag]) / corr.stderr[i];
        println!("lag {:>2}: {:.5} ± {:.5}  exact {:.5}  ({z:+.2} SE)", cfg.coords(lag)[0], corr.mean[i], corr.stderr[i], exact.values()[lag]);
    }

    let jumpy = SimConfig { lambda: 0.1, samples: 5_000, ..sim };
    let traj = simulate(&LevyParams::rademacher(1.0, 1.0)?, &jumpy, &cfg, &SpatialField::zeros(&cfg))?;
    let (mean, var) = traj.site_moments();
    println!("jump noise, lambda = 0.1: site mean {mean:.4}, variance {var:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
