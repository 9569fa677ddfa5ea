// The perturbative solution built order by order, and the same
// coefficients as sums over rooted trees, on one noise realization.

use levy_spde::evaluator::{perturbative_solution, tree_field, CausalConvolver, SpaceTimeField};
use levy_spde::lattice::{LatticeConfig, SpatialField};
use levy_spde::levy::LevyParams;
use levy_spde::trees::enumerate_trees;

pub fn run_example() -> levy_spde::Result<()> {
    let cfg = LatticeConfig::new(1, 1.0, 8, 1.0)?;
    let (dt, steps, p) = (0.05, 40, 3);
    let noise = SpaceTimeField::sample_noise(&LevyParams::rademacher(2.0, 1.0)?, &cfg, dt, steps, 11)?;
    let f = SpatialField::from_fn(&cfg, |x| 0.2 * (x[0] as f64 * 0.7).cos());
    let conv = CausalConvolver::new(&cfg, dt, steps)?;
    let xs = perturbative_solution(2, p, &noise, &f, &conv)?;
    for (j, xj) in xs.iter().enumerate() {
        let mut sum = SpaceTimeField::zeros(&cfg, dt, steps)?;
        for (tree, _) in enumerate_trees(j, p) {
            sum = sum.add(&tree_field(&tree, &noise, &f, &conv)?);
        }
        println!("order {j}: |recursion - tree sum| = {:.2e}, X_j(T, 0) = {:.6}", xj.max_abs_diff(&sum), xj.at(steps, 0));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
