//! Evaluation of trees and graphs: the perturbative recursion oracle,
//! position-space graph values, momentum-space closed forms and the
//! assembled correlation series.

pub mod graph;
pub mod momentum;
pub mod recursion;
pub mod series;

pub use graph::{evaluate_graph, evaluate_graph_equilibrium, evaluate_graph_finite_t, two_point_sites, TimeMode};
pub use momentum::{first_order_kernels, p1_kernel, p2_kernel, tadpole_kernel, FirstOrderKernels};
pub use recursion::{perturbative_solution, tree_field, tree_value, CausalConvolver, SpaceTimeField};
pub use series::{
    connected_coefficient, evaluate_pw_graph, moment_coefficient, truncated_correlation_series, SeriesCoefficients,
    SeriesOptions, DEFAULT_ORDER_CAP,
};
