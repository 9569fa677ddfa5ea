//! Truncated (connected) correlation functions as power series in `λ`.
//!
//! The coefficient of `λ^m` is `(−1)^m` times the sum over connected
//! graphs of order `m` of their values, each value already carrying its
//! cumulant and multiplicity factors.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphs::{decompose_components, drop_tadpoles, enumerate_graphs, filter_connected, prune_odd, simplify, PWGraph};
use crate::lattice::LatticeConfig;
use crate::levy::CumulantSet;
use crate::quadrature::QuadratureSpec;

use super::graph::{evaluate_graph, TimeMode};

/// Default cap on the perturbative order.
pub const DEFAULT_ORDER_CAP: usize = 2;

/// Options of a series evaluation.
#[derive(Clone, Debug)]
pub struct SeriesOptions {
    /// Number of roots `n`.
    pub points: usize,
    pub max_order: usize,
    /// Nonlinearity exponent.
    pub p: usize,
    pub drop_tadpoles: bool,
    pub order_cap: usize,
}

/// Value of one graph at every evaluation point.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphTerm {
    pub graph: PWGraph,
    pub values: Vec<f64>,
}

/// Graph values and the assembled coefficient of one order.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderCoefficients {
    pub order: usize,
    pub terms: Vec<GraphTerm>,
    /// `(−1)^m Σ_terms values`, per evaluation point.
    pub coefficient: Vec<f64>,
}

/// Coefficients of `⟨X(x₁)…X(x_n)⟩ᵀ = Σ_m λ^m a_m(x₁…x_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesCoefficients {
    /// Root sites of each evaluation point.
    pub points: Vec<Vec<usize>>,
    pub orders: Vec<OrderCoefficients>,
}

impl SeriesCoefficients {
    /// `Σ_m λ^m a_m` at every evaluation point.
    pub fn assemble(&self, lambda: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.points.len()];
        for o in &self.orders {
            let w = lambda.powi(o.order as i32);
            for (acc, c) in out.iter_mut().zip(&o.coefficient) {
                *acc += w * c;
            }
        }
        out
    }

    /// Per-graph values: `order,graph,<site columns>,value`.
    pub fn write_terms_csv<W: Write>(&self, cfg: &LatticeConfig, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["order".to_string(), "graph".to_string()];
        header.extend(self.site_header(cfg));
        header.push("value".into());
        wr.write_record(&header)?;
        for o in &self.orders {
            for t in &o.terms {
                for (pt, v) in self.points.iter().zip(&t.values) {
                    let mut row = vec![o.order.to_string(), t.graph.to_string()];
                    row.extend(site_columns(cfg, pt));
                    row.push(format!("{v:.16e}"));
                    wr.write_record(&row)?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Signed coefficients per order: `order,<site columns>,coefficient`.
    pub fn write_coefficients_csv<W: Write>(&self, cfg: &LatticeConfig, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["order".to_string()];
        header.extend(self.site_header(cfg));
        header.push("coefficient".into());
        wr.write_record(&header)?;
        for o in &self.orders {
            for (pt, v) in self.points.iter().zip(&o.coefficient) {
                let mut row = vec![o.order.to_string()];
                row.extend(site_columns(cfg, pt));
                row.push(format!("{v:.16e}"));
                wr.write_record(&row)?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Assembled series at coupling `lambda`: `<site columns>,value`.
    pub fn write_assembled_csv<W: Write>(&self, cfg: &LatticeConfig, lambda: f64, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = self.site_header(cfg);
        header.push("value".into());
        wr.write_record(&header)?;
        for (pt, v) in self.points.iter().zip(self.assemble(lambda)) {
            let mut row = site_columns(cfg, pt);
            row.push(format!("{v:.16e}"));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    fn site_header(&self, cfg: &LatticeConfig) -> Vec<String> {
        let roots = self.points.first().map_or(0, Vec::len);
        (0..roots).flat_map(|r| (0..cfg.dim()).map(move |j| format!("r{r}_x{j}"))).collect()
    }
}

fn site_columns(cfg: &LatticeConfig, sites: &[usize]) -> Vec<String> {
    sites.iter().flat_map(|&s| cfg.coords(s)).map(|c| c.to_string()).collect()
}

/// Graphs entering the truncated function at order `m`.
pub fn series_graphs(m: usize, opts: &SeriesOptions, cumulants: &CumulantSet, equilibrium: bool) -> Vec<PWGraph> {
    let mut gs = filter_connected(enumerate_graphs(m, opts.points, opts.p, equilibrium));
    if cumulants.odd_vanish() {
        gs = prune_odd(gs);
    }
    if opts.drop_tadpoles {
        gs = drop_tadpoles(gs);
    }
    gs
}

/// Truncated `n`-point function through order `max_order`, evaluated at
/// each entry of `points` (root sites).
pub fn truncated_correlation_series(
    opts: &SeriesOptions,
    points: &[Vec<usize>],
    cumulants: &CumulantSet,
    cfg: &LatticeConfig,
    quad: &QuadratureSpec,
    mode: &TimeMode,
) -> Result<SeriesCoefficients> {
    if opts.max_order > opts.order_cap {
        return Err(Error::OrderCap { requested: opts.max_order, cap: opts.order_cap });
    }
    if opts.points == 0 {
        return Err(Error::Config("a correlation function needs at least one point".into()));
    }
    if points.iter().any(|p| p.len() != opts.points) {
        return Err(Error::DimensionMismatch { expected: opts.points, got: points.first().map_or(0, Vec::len) });
    }
    let equilibrium = matches!(mode, TimeMode::Equilibrium);
    let mut orders = Vec::new();
    for m in 0..=opts.max_order {
        let graphs = series_graphs(m, opts, cumulants, equilibrium);
        let terms = graphs
            .into_par_iter()
            .map(|g| {
                let s = simplify(&g)?;
                let values = points
                    .iter()
                    .map(|pt| evaluate_graph(&s, pt, cumulants, cfg, quad, mode))
                    .collect::<Result<Vec<_>>>()?;
                Ok(GraphTerm { graph: g, values })
            })
            .collect::<Result<Vec<_>>>()?;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let mut coefficient = vec![0.0; points.len()];
        for t in &terms {
            for (c, v) in coefficient.iter_mut().zip(&t.values) {
                *c += sign * v;
            }
        }
        orders.push(OrderCoefficients { order: m, terms, coefficient });
    }
    Ok(SeriesCoefficients { points: points.to_vec(), orders })
}

/// Value of any graph, connected or not, as the product of the values of
/// its connected components.
pub fn evaluate_pw_graph(
    g: &PWGraph,
    root_sites: &[usize],
    cumulants: &CumulantSet,
    cfg: &LatticeConfig,
    quad: &QuadratureSpec,
    mode: &TimeMode,
) -> Result<f64> {
    let (classes, parts) = decompose_components(g);
    let mut v = 1.0;
    for (class, part) in classes.iter().zip(&parts) {
        let sites: Vec<usize> = class.iter().map(|&k| root_sites[k]).collect();
        v *= evaluate_graph(&simplify(part)?, &sites, cumulants, cfg, quad, mode)?;
        if v == 0.0 {
            break;
        }
    }
    Ok(v)
}

/// Unsigned order-`m` coefficient of the full moment
/// `E[X(x₁)…X(x_n)]`: the sum over all graphs, connected or not.
pub fn moment_coefficient(
    m: usize,
    p: usize,
    root_sites: &[usize],
    cumulants: &CumulantSet,
    cfg: &LatticeConfig,
    quad: &QuadratureSpec,
    mode: &TimeMode,
) -> Result<f64> {
    let equilibrium = matches!(mode, TimeMode::Equilibrium);
    enumerate_graphs(m, root_sites.len(), p, equilibrium)
        .par_iter()
        .map(|g| evaluate_pw_graph(g, root_sites, cumulants, cfg, quad, mode))
        .try_reduce(|| 0.0, |a, b| Ok(a + b))
}

/// Unsigned order-`m` coefficient of the truncated function: the sum
/// over connected graphs only.
pub fn connected_coefficient(
    m: usize,
    p: usize,
    root_sites: &[usize],
    cumulants: &CumulantSet,
    cfg: &LatticeConfig,
    quad: &QuadratureSpec,
    mode: &TimeMode,
) -> Result<f64> {
    let equilibrium = matches!(mode, TimeMode::Equilibrium);
    filter_connected(enumerate_graphs(m, root_sites.len(), p, equilibrium))
        .par_iter()
        .map(|g| evaluate_graph(&simplify(g)?, root_sites, cumulants, cfg, quad, mode))
        .try_reduce(|| 0.0, |a, b| Ok(a + b))
}
