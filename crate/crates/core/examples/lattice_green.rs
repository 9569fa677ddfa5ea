// Heat kernel and causal Green function of `∂ₜ − Δ + m²` on a torus.

use levy_spde::lattice::{convolve, green, heat_kernel, LatticeConfig};

pub fn run_example() -> levy_spde::Result<()> {
    let cfg = LatticeConfig::new(1, 1.0, 16, 1.0)?;
    let (s, t) = (0.3, 0.7);
    let lhs = convolve(&heat_kernel(s, &cfg)?, &heat_kernel(t, &cfg)?)?;
    let rhs = heat_kernel(s + t, &cfg)?;
    println!("semigroup defect |G(s)*G(t) - G(s+t)| = {:.2e}", lhs.max_abs_diff(&rhs));
    for t in [0.5, 1.0, 2.0] {
        let g = heat_kernel(t, &cfg)?;
        println!("t = {t}: mass {:.12} vs e^(-t m^2) = {:.12}", g.integral(), (-t * cfg.mass_squared()).exp());
    }
    println!("causal Green function at t = 0 is zero: {}", green(0.0, &cfg).values().iter().all(|&v| v == 0.0));

    let mut buf = Vec::new();
    heat_kernel(1.0, &cfg)?.write_csv(&mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
