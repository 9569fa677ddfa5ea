//! Graph values against closed-form momentum-space oracles and the
//! time-domain limits of the evaluator.

use levy_spde::evaluator::momentum::{melon_kernel, p1_kernel, tadpole_graph_sum};
use levy_spde::evaluator::{
    connected_coefficient, evaluate_graph_equilibrium, evaluate_graph_finite_t,
    moment_coefficient, two_point_sites, TimeMode,
};
use levy_spde::graphs::{enumerate_graphs, filter_connected, prune_odd, simplify, PWGraph};
use levy_spde::lattice::{LatticeConfig, SpatialField};
use levy_spde::levy::CumulantSet;
use levy_spde::quadrature::QuadratureSpec;
use levy_spde::trees::RootedTree;

fn lattice(side: usize) -> LatticeConfig {
    LatticeConfig::new(1, 1.0, side, 1.0).unwrap()
}

fn free_graph() -> PWGraph {
    PWGraph::new(vec![RootedTree::Noise, RootedTree::Noise], vec![vec![0, 1]]).unwrap()
}

fn first_order_graphs() -> (Vec<PWGraph>, Vec<PWGraph>) {
    let gs = prune_odd(filter_connected(enumerate_graphs(1, 2, 3, true)));
    gs.into_iter().partition(|g| !g.has_tadpole())
}

#[test]
fn free_propagator_matches_seven_thirtieths() {
    let cfg = lattice(4);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let s = simplify(&free_graph()).unwrap();
    let v = evaluate_graph_equilibrium(&s, &two_point_sites(0), &CumulantSet::symmetric(1.0, 0.0), &cfg, &quad)
        .unwrap();
    assert!((v - 7.0 / 30.0).abs() < 1e-8, "{v}");
    let p1 = p1_kernel(&cfg);
    assert!((p1.values()[0] - 7.0 / 30.0).abs() < 1e-14);
    for lag in 0..4 {
        let v = evaluate_graph_equilibrium(&s, &two_point_sites(lag), &CumulantSet::symmetric(2.0, 0.0), &cfg, &quad)
            .unwrap();
        assert!((v - 2.0 * p1.values()[lag]).abs() < 1e-8);
    }
}

#[test]
fn melon_matches_momentum_closed_form() {
    let cfg = lattice(6);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let (melons, _) = first_order_graphs();
    assert_eq!(melons.len(), 2);
    let oracle = melon_kernel(&cfg, &quad);
    for g in &melons {
        let s = simplify(g).unwrap();
        for lag in 0..6 {
            let v = evaluate_graph_equilibrium(&s, &two_point_sites(lag), &CumulantSet::symmetric(0.0, 1.0), &cfg, &quad)
                .unwrap();
            assert!((v - oracle.values()[lag]).abs() < 1e-9, "lag {lag}: {v} vs {}", oracle.values()[lag]);
        }
    }
}

#[test]
fn tadpoles_match_mass_shift_closed_form() {
    let cfg = lattice(6);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let (_, tadpoles) = first_order_graphs();
    assert_eq!(tadpoles.len(), 6);
    let oracle = tadpole_graph_sum(&cfg);
    for lag in 0..6 {
        let total: f64 = tadpoles
            .iter()
            .map(|g| {
                evaluate_graph_equilibrium(&simplify(g).unwrap(), &two_point_sites(lag), &CumulantSet::symmetric(1.0, 0.0), &cfg, &quad)
                    .unwrap()
            })
            .sum();
        assert!((total - oracle.values()[lag]).abs() < 1e-9, "lag {lag}: {total} vs {}", oracle.values()[lag]);
    }
}

#[test]
fn melon_is_self_convergent() {
    let cfg = lattice(4);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let (melons, _) = first_order_graphs();
    let s = simplify(&melons[0]).unwrap();
    let c = CumulantSet::symmetric(0.0, 1.0);
    let a = evaluate_graph_equilibrium(&s, &two_point_sites(1), &c, &cfg, &quad).unwrap();
    let b = evaluate_graph_equilibrium(&s, &two_point_sites(1), &c, &cfg, &quad.refined()).unwrap();
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn finite_time_approaches_equilibrium() {
    let cfg = lattice(4);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let (melons, _) = first_order_graphs();
    let f = SpatialField::zeros(&cfg);
    let c = CumulantSet::symmetric(1.0, 1.0);
    for g in [free_graph(), melons[0].clone()] {
        let s = simplify(&g).unwrap();
        let eq = evaluate_graph_equilibrium(&s, &two_point_sites(1), &c, &cfg, &quad).unwrap();
        let mut prev = f64::INFINITY;
        for t in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let v = evaluate_graph_finite_t(&s, t, &two_point_sites(1), &c, &f, &cfg, &quad).unwrap();
            let d = (v - eq).abs();
            assert!(d <= prev + 1e-12, "t = {t}: {d} after {prev}");
            prev = d;
        }
        assert!(prev < 1e-6);
    }
}

#[test]
fn linked_cluster_identity_at_finite_time() {
    let cfg = lattice(4);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let f = SpatialField::from_fn(&cfg, |c| 0.5 + 0.25 * c[0] as f64);
    let mode = TimeMode::Finite { t: 1.5, initial: f };
    let c = CumulantSet::new(vec![0.3, 1.0, -0.4, 0.7]);
    let sites = [0usize, 1];
    for m in 0..=1 {
        let moment = moment_coefficient(m, 3, &sites, &c, &cfg, &quad, &mode).unwrap();
        let t2 = connected_coefficient(m, 3, &sites, &c, &cfg, &quad, &mode).unwrap();
        let mut products = 0.0;
        for a in 0..=m {
            let m0 = connected_coefficient(a, 3, &sites[..1], &c, &cfg, &quad, &mode).unwrap();
            let m1 = connected_coefficient(m - a, 3, &sites[1..], &c, &cfg, &quad, &mode).unwrap();
            products += m0 * m1;
        }
        assert!((moment - (t2 + products)).abs() < 1e-10, "m={m}: {moment} vs {}", t2 + products);
    }
}

#[test]
fn tree_sums_equal_the_recursion_on_seeded_noise() {
    use levy_spde::evaluator::{perturbative_solution, tree_field, CausalConvolver, SpaceTimeField};
    use levy_spde::levy::LevyParams;
    use levy_spde::trees::enumerate_trees;

    let cfg = LatticeConfig::new(1, 1.0, 8, 1.0).unwrap();
    let (dt, steps) = (0.05, 30);
    let noise = SpaceTimeField::sample_noise(&LevyParams::new(0.0, 1.0, 1.0, vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap(), &cfg, dt, steps, 17).unwrap();
    let f = SpatialField::from_fn(&cfg, |c| 0.3 * (c[0] as f64).sin());
    let conv = CausalConvolver::new(&cfg, dt, steps).unwrap();
    for p in [2, 3] {
        let xs = perturbative_solution(2, p, &noise, &f, &conv).unwrap();
        for (j, xj) in xs.iter().enumerate() {
            let mut sum = SpaceTimeField::zeros(&cfg, dt, steps).unwrap();
            for (t, _) in enumerate_trees(j, p) {
                sum = sum.add(&tree_field(&t, &noise, &f, &conv).unwrap());
            }
            assert!(xj.max_abs_diff(&sum) <= 1e-9, "p={p} j={j}");
        }
    }
}

#[test]
fn equilibrium_linked_cluster_identity() {
    let cfg = lattice(4);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let c = CumulantSet::new(vec![0.0, 1.0, 0.0, 0.7]);
    let sites = [0usize, 1];
    for m in 0..=1 {
        let moment = moment_coefficient(m, 3, &sites, &c, &cfg, &quad, &TimeMode::Equilibrium).unwrap();
        let mut composed = connected_coefficient(m, 3, &sites, &c, &cfg, &quad, &TimeMode::Equilibrium).unwrap();
        for a in 0..=m {
            let m0 = connected_coefficient(a, 3, &sites[..1], &c, &cfg, &quad, &TimeMode::Equilibrium).unwrap();
            let m1 = connected_coefficient(m - a, 3, &sites[1..], &c, &cfg, &quad, &TimeMode::Equilibrium).unwrap();
            composed += m0 * m1;
        }
        assert!((moment - composed).abs() <= 1e-10, "m={m}: {moment} vs {composed}");
    }
}

#[test]
fn series_has_the_first_order_structure() {
    use levy_spde::evaluator::momentum::p2_kernel;
    use levy_spde::evaluator::{p1_kernel, tadpole_kernel, truncated_correlation_series, SeriesOptions};

    let cfg = lattice(5);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let (c2, c4) = (1.3, 0.6);
    let c = CumulantSet::symmetric(c2, c4);
    let points: Vec<Vec<usize>> = (0..5).map(|l| two_point_sites(l).to_vec()).collect();
    let (p1, p2, t) = (p1_kernel(&cfg), p2_kernel(&cfg, &quad), tadpole_kernel(&cfg));
    for drop in [true, false] {
        let opts = SeriesOptions { points: 2, max_order: 1, p: 3, drop_tadpoles: drop, order_cap: 2 };
        let s = truncated_correlation_series(&opts, &points, &c, &cfg, &quad, &TimeMode::Equilibrium).unwrap();
        assert_eq!(s.orders[0].terms.len(), 1);
        assert_eq!(s.orders[1].terms.len(), if drop { 2 } else { 8 });
        for (i, pt) in points.iter().enumerate() {
            let l = pt[1];
            assert!((s.orders[0].coefficient[i] - c2 * p1.values()[l]).abs() < 1e-8);
            let want = c4 * p2.values()[l] + if drop { 0.0 } else { c2 * c2 * t.values()[l] };
            assert!((s.orders[1].coefficient[i] - want).abs() < 1e-8, "drop={drop} lag {l}");
            let summed: f64 = s.orders[1].terms.iter().map(|g| g.values[i]).sum();
            assert!((s.orders[1].coefficient[i] + summed).abs() < 1e-15);
        }
    }
}

#[test]
fn odd_pruning_does_not_change_symmetric_series() {
    use levy_spde::evaluator::evaluate_graph;

    let cfg = lattice(4);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let c = CumulantSet::new(vec![0.0, 1.0, 0.0, 0.5]);
    let mode = TimeMode::Finite { t: 2.0, initial: SpatialField::constant(&cfg, 0.4) };
    for m in 0..=1 {
        let all = filter_connected(enumerate_graphs(m, 2, 3, false));
        let even = prune_odd(all.clone());
        assert_eq!(even.len() < all.len(), m == 1);
        let sum = |gs: &[PWGraph]| -> f64 {
            gs.iter().map(|g| evaluate_graph(&simplify(g).unwrap(), &[0, 1], &c, &cfg, &quad, &mode).unwrap()).sum()
        };
        assert!((sum(&all) - sum(&even)).abs() < 1e-14);
    }
}

#[test]
fn zero_cumulants_give_zero_and_roots_translate() {
    let cfg = lattice(5);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let (melons, tadpoles) = first_order_graphs();
    for g in melons.iter().chain(&tadpoles).chain([free_graph()].iter()) {
        let s = simplify(g).unwrap();
        let zero = evaluate_graph_equilibrium(&s, &[0, 2], &CumulantSet::new(vec![0.0; 4]), &cfg, &quad).unwrap();
        assert_eq!(zero, 0.0);
        let c = CumulantSet::symmetric(1.0, 1.0);
        let a = evaluate_graph_equilibrium(&s, &[0, 2], &c, &cfg, &quad).unwrap();
        for shift in 1..5 {
            let b = evaluate_graph_equilibrium(&s, &[shift, cfg.add(2, shift)], &c, &cfg, &quad).unwrap();
            assert!((a - b).abs() <= 1e-12, "{g}: shift {shift}");
        }
    }
}

#[test]
fn finite_time_values_converge_within_the_exponential_envelope() {
    let cfg = lattice(4);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let (melons, _) = first_order_graphs();
    let c = CumulantSet::symmetric(1.0, 1.0);
    let zero = SpatialField::zeros(&cfg);
    for g in [free_graph(), melons[0].clone()] {
        let s = simplify(&g).unwrap();
        let eq = evaluate_graph_equilibrium(&s, &two_point_sites(1), &c, &cfg, &quad).unwrap();
        let scaled: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0]
            .iter()
            .map(|&t| {
                let v = evaluate_graph_finite_t(&s, t, &two_point_sites(1), &c, &zero, &cfg, &quad).unwrap();
                (v - eq).abs() * (t / 2.0f64).exp()
            })
            .collect();
        let envelope = scaled[0];
        assert!(scaled.iter().all(|&x| x <= envelope * (1.0 + 1e-9) + 1e-12), "{g}: {scaled:?}");
    }
}

#[test]
fn initial_condition_graphs_vanish_at_late_times() {
    let cfg = lattice(4);
    let quad = QuadratureSpec::for_lattice(&cfg);
    let c = CumulantSet::new(vec![0.3, 1.0, -0.4, 0.7]);
    let f = SpatialField::from_fn(&cfg, |x| 1.0 - 0.5 * x[0] as f64);
    let with_initial: Vec<PWGraph> = (0..=1)
        .flat_map(|m| filter_connected(enumerate_graphs(m, 2, 3, false)))
        .filter(PWGraph::has_initial_leaf)
        .collect();
    assert!(!with_initial.is_empty());
    for g in &with_initial {
        let s = simplify(g).unwrap();
        let v = evaluate_graph_finite_t(&s, 20.0, &two_point_sites(1), &c, &f, &cfg, &quad).unwrap();
        assert!(v.abs() < 1e-6, "{g}: {v}");
        let v0 = evaluate_graph_finite_t(&s, 20.0, &two_point_sites(1), &c, &SpatialField::zeros(&cfg), &cfg, &quad).unwrap();
        assert_eq!(v0, 0.0);
    }
}
