//! Every example in `examples/` runs to completion.

macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(tree_enumeration, "tree_enumeration.rs");
example!(graph_enumeration, "graph_enumeration.rs");
example!(lattice_green, "lattice_green.rs");
example!(levy_noise, "levy_noise.rs");
example!(tree_recursion, "tree_recursion.rs");
example!(equilibrium_series, "equilibrium_series.rs");
example!(monte_carlo, "monte_carlo.rs");
example!(noise_identification, "noise_identification.rs");
example!(config_driven_run, "config_driven_run.rs");

#[test]
fn examples_run() {
    tree_enumeration::run_example().unwrap();
    graph_enumeration::run_example().unwrap();
    lattice_green::run_example().unwrap();
    levy_noise::run_example().unwrap();
    tree_recursion::run_example().unwrap();
    equilibrium_series::run_example().unwrap();
    monte_carlo::run_example().unwrap();
    noise_identification::run_example().unwrap();
    config_driven_run::run_example().unwrap();
}
