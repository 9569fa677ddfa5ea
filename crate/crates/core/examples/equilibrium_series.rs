// Truncated two-point function through first order, as graph values
// and series coefficients, compared with closed momentum-space forms.

use levy_spde::evaluator::momentum::{p1_kernel, p2_kernel, tadpole_kernel};
use levy_spde::evaluator::{truncated_correlation_series, two_point_sites, SeriesOptions, TimeMode, DEFAULT_ORDER_CAP};
use levy_spde::lattice::LatticeConfig;
use levy_spde::levy::CumulantSet;
use levy_spde::quadrature::QuadratureSpec;

pub fn run_example() -> levy_spde::Result<()> {
    let cfg = LatticeConfig::new(1, 1.0, 6, 1.0)?;
    let quad = QuadratureSpec::for_lattice(&cfg);
    let (c2, c4) = (1.0, 0.5);
    let cumulants = CumulantSet::symmetric(c2, c4);
    let opts = SeriesOptions { points: 2, max_order: 1, p: 3, drop_tadpoles: false, order_cap: DEFAULT_ORDER_CAP };
    let points: Vec<Vec<usize>> = (0..=3).map(|l| two_point_sites(l).to_vec()).collect();
    let series = truncated_correlation_series(&opts, &points, &cumulants, &cfg, &quad, &TimeMode::Equilibrium)?;
    println!("{} graphs at order 1", series.orders[1].terms.len());

    let (p1, p2, t) = (p1_kernel(&cfg), p2_kernel(&cfg, &quad), tadpole_kernel(&cfg));
    for (i, pt) in points.iter().enumerate() {
        let lag = pt[1];
        let a0 = series.orders[0].coefficient[i];
        let a1 = series.orders[1].coefficient[i];
        let closed1 = c4 * p2.values()[lag] + c2 * c2 * t.values()[lag];
        println!(
            "lag {lag}: a0 = {a0:.10} (c2 P1 = {:.10}), a1 = {a1:.10} (c4 P2 + c2^2 T = {closed1:.10})",
            c2 * p1.values()[lag]
        );
    }
    let mut buf = Vec::new();
    series.write_assembled_csv(&cfg, 0.1, &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
