//! Heat-kernel identities, the decay bound, and the noise cumulant
//! contract.

use levy_spde::lattice::{convolve, heat_kernel, mu_squared, LatticeConfig, SpatialField};
use levy_spde::levy::{cumulant, sample_cumulants, sample_noise_increments, step_rng, IncrementSampler, LevyParams};
use proptest::prelude::*;
use rand::Rng;

fn cfg_strategy() -> impl Strategy<Value = LatticeConfig> {
    (1usize..=2, 0.25f64..2.0, 2usize..=9, 0.3f64..2.0)
        .prop_map(|(d, delta, l, m)| LatticeConfig::new(d, delta, if d == 2 { l.min(6) } else { l }, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup(cfg in cfg_strategy(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let m2 = cfg.mass_squared();
        let (s, t) = (a * 10.0 / m2, b * 10.0 / m2);
        let lhs = convolve(&heat_kernel(s, &cfg).unwrap(), &heat_kernel(t, &cfg).unwrap()).unwrap();
        let rhs = heat_kernel(s + t, &cfg).unwrap();
        let scale = rhs.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
    }

    #[test]
    fn mass_sum_rule_and_positivity(cfg in cfg_strategy(), t in 0.0f64..20.0) {
        let g = heat_kernel(t, &cfg).unwrap();
        prop_assert!((g.integral() - (-t * cfg.mass_squared()).exp()).abs() <= 1e-12);
        prop_assert!(g.values().iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn dispersion_is_bounded(cfg in cfg_strategy(), k in prop::collection::vec(-10.0f64..10.0, 2)) {
        let p = &k[..cfg.dim()];
        let mu2 = mu_squared(p, &cfg).unwrap();
        prop_assert!(mu2 >= cfg.mass_squared() - 1e-12 && mu2 <= cfg.max_mu_squared() + 1e-12);
    }

    #[test]
    fn jump_scaling_is_exact(c in prop::sample::select(vec![0.5, 2.0, -1.0, -4.0, 0.25]), z in 0.1f64..5.0) {
        // Binary scale factors commute exactly with floating-point rounding.
        let params = LevyParams::new(0.0, 0.0, z, vec![(1.0, 0.25), (-0.5, 0.5), (2.0, 0.25)]).unwrap();
        let scaled = params.scale_jumps(c).unwrap();
        for n in 1..=6 {
            prop_assert_eq!(cumulant(n, &scaled).unwrap(), c.powi(n as i32) * cumulant(n, &params).unwrap());
        }
        let k = |q: &LevyParams| cumulant(4, q).unwrap() / cumulant(2, q).unwrap().powi(2);
        prop_assert_eq!(k(&scaled), k(&params));
    }

    #[test]
    fn jump_scaling_holds_for_any_factor(c in -3.0f64..3.0, z in 0.1f64..5.0) {
        let params = LevyParams::new(0.0, 0.0, z, vec![(1.3, 0.4), (-0.7, 0.6)]).unwrap();
        let scaled = params.scale_jumps(c).unwrap();
        for n in 1..=6 {
            let want = c.powi(n as i32) * cumulant(n, &params).unwrap();
            prop_assert!((cumulant(n, &scaled).unwrap() - want).abs() <= 1e-14 * want.abs().max(1e-300));
        }
    }

    #[test]
    fn symmetric_laws_have_no_odd_cumulants(s in 0.1f64..3.0, w in 0.05f64..0.45, z in 0.1f64..4.0, sigma2 in 0.0f64..2.0) {
        let params = LevyParams::new(0.0, sigma2, z, vec![(s, w), (-s, w), (2.0 * s, 0.5 - w), (-2.0 * s, 0.5 - w)]).unwrap();
        prop_assert!(params.is_symmetric());
        for n in [3, 5, 7] {
            prop_assert_eq!(cumulant(n, &params).unwrap(), 0.0);
        }
    }
}

/// `sup_{t, x} |G(t, x)|·(1 + |x|²)^N·e^{tm²/2}` over `steps`
/// log-spaced times in `[10⁻⁸, 20/m²]`; the supremum is approached as
/// `t → 0⁺`, hence the logarithmic grid.
fn decay_sup(cfg: &LatticeConfig, n: i32, steps: usize) -> f64 {
    let (t0, t1) = (1e-8f64, 20.0 / cfg.mass_squared());
    let mut sup = 0.0f64;
    for k in 0..=steps {
        let t = t0 * (t1 / t0).powf(k as f64 / steps as f64);
        let g = heat_kernel(t, cfg).unwrap();
        for (x, v) in g.values().iter().enumerate() {
            let r2 = cfg.torus_norm(x).powi(2);
            sup = sup.max(v.abs() * (1.0 + r2).powi(n) * (t * cfg.mass_squared() / 2.0).exp());
        }
    }
    sup
}

#[test]
fn green_function_decay_bound_is_finite_and_grid_stable() {
    let cfg = LatticeConfig::new(1, 1.0, 16, 1.0).unwrap();
    for n in 1..=3 {
        let coarse = decay_sup(&cfg, n, 200);
        let fine = decay_sup(&cfg, n, 400);
        assert!(coarse.is_finite() && fine.is_finite());
        assert!(((fine - coarse) / fine).abs() < 1e-6, "N={n}: {coarse} vs {fine}");
    }
}

#[test]
fn tabulated_cumulant_examples() {
    let gauss = LevyParams::new(1.0, 4.0, 0.0, vec![]).unwrap();
    assert_eq!(gauss.cumulants(4).unwrap().as_slice(), &[1.0, 4.0, 0.0, 0.0]);
    let unit_jump = LevyParams::new(0.0, 0.0, 3.0, vec![(1.0, 1.0)]).unwrap();
    assert_eq!(unit_jump.cumulants(6).unwrap().as_slice(), &[3.0; 6]);
    let rademacher = LevyParams::new(0.0, 0.0, 2.0, vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap();
    assert_eq!(rademacher.cumulants(6).unwrap().as_slice(), &[0.0, 2.0, 0.0, 2.0, 0.0, 2.0]);
}

/// Standard error of the sample `k`-th cumulant by batch means.
fn batch_stderr(x: &[f64], batches: usize, stat: impl Fn(&[f64]) -> f64) -> f64 {
    let n = x.len() / batches;
    let vals: Vec<f64> = x.chunks(n).take(batches).map(&stat).collect();
    let mean = vals.iter().sum::<f64>() / batches as f64;
    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / ((batches - 1) * batches) as f64).sqrt()
}

#[test]
fn sampled_increments_reproduce_scaled_cumulants() {
    let cfg = LatticeConfig::new(2, 0.5, 4, 1.0).unwrap();
    let dt = 0.02;
    let params = LevyParams::new(0.0, 0.5, 3.0, vec![(1.0, 0.5), (-1.0, 0.25), (0.5, 0.25)]).unwrap();
    let sampler = IncrementSampler::new(&params, &cfg, dt).unwrap();
    let mut x = vec![0.0; 1_000_000];
    sampler.fill(&mut step_rng(42, 0), &mut x);
    let [_, k2, _, k4] = sample_cumulants(&x);
    let vol = cfg.cell_volume();
    let e2 = cumulant(2, &params).unwrap() * dt / vol;
    let e4 = cumulant(4, &params).unwrap() * dt / vol.powi(3);
    let se2 = batch_stderr(&x, 50, |b| sample_cumulants(b)[1]);
    let se4 = batch_stderr(&x, 50, |b| sample_cumulants(b)[3]);
    assert!((k2 - e2).abs() < 5.0 * se2, "k2 {k2} vs {e2} ± {se2}");
    assert!((k4 - e4).abs() < 5.0 * se4, "k4 {k4} vs {e4} ± {se4}");
}

#[test]
fn gaussian_increments_have_the_lattice_variance() {
    let cfg = LatticeConfig::new(1, 0.5, 8, 1.0).unwrap();
    let dt = 0.1;
    let noise = sample_noise_increments(&LevyParams::gaussian(2.0).unwrap(), &cfg, dt, 20_000, 9).unwrap();
    let x: Vec<f64> = noise.iter().flat_map(|f| f.values().to_vec()).collect();
    let [mean, var, _, k4] = sample_cumulants(&x);
    let expected = 2.0 * dt / cfg.cell_volume();
    assert!(mean.abs() < 5.0 * (expected / x.len() as f64).sqrt());
    assert!((var / expected - 1.0).abs() < 0.02, "{var} vs {expected}");
    assert!(k4.abs() < 0.05 * expected * expected);
}

#[test]
fn increment_sequences_are_reproducible() {
    let cfg = LatticeConfig::new(1, 1.0, 8, 1.0).unwrap();
    let params = LevyParams::rademacher(1.5, 0.7).unwrap();
    let a = sample_noise_increments(&params, &cfg, 0.05, 50, 3).unwrap();
    let b = sample_noise_increments(&params, &cfg, 0.05, 50, 3).unwrap();
    let c = sample_noise_increments(&params, &cfg, 0.05, 50, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let mut r = step_rng(3, 7);
    let first: f64 = r.random();
    assert_eq!(first, step_rng(3, 7).random::<f64>());
    let _ = SpatialField::zeros(&cfg);
}
