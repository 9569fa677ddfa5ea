//! Position-space evaluation of simplified graphs by nested time
//! quadrature and exact lattice sums.
//!
//! Roots sit at fixed sites and a common time (0 in equilibrium, `t`
//! otherwise). Every inner and empty vertex is integrated over space and
//! over a time window below the earliest of its parents: the window is
//! `(t_parent − T_max, t_parent]` in equilibrium and `(0, t_parent]` at
//! finite time. Windows are split at the times of vertices fixed
//! earlier, where the integrand has kinks.
//!
//! Two reductions keep the nested sums small:
//! * an empty vertex all of whose legs come from a single parent is a
//!   translation-invariant factor `∫ dg δ^d Σ_y G̃_g(y)^l` on that parent;
//! * an initial-condition leaf under vertex `v` contributes
//!   `(G̃_{t_v} ⋆ f)(x_v)` (the time integral against `δ₀(t)` is done exactly).

use crate::error::{Error, Result};
use crate::graphs::{SimplifiedGraph, Vertex};
use crate::lattice::{convolve, heat_kernel_unchecked, LatticeConfig, SpatialField};
use crate::levy::CumulantSet;
use crate::quadrature::QuadratureSpec;

/// Where the roots sit in time and what feeds initial-condition leaves.
#[derive(Clone, Debug)]
pub enum TimeMode {
    /// Roots at time 0, vertices integrated over negative times.
    Equilibrium,
    /// Roots at time `t > 0`, vertices in `(0, t]`, initial field `initial`.
    Finite { t: f64, initial: SpatialField },
}

/// Value of a connected graph without initial-condition leaves with
/// roots at `root_sites` and time 0, including cumulant and multiplicity
/// factors.
pub fn evaluate_graph_equilibrium(
    g: &SimplifiedGraph,
    root_sites: &[usize],
    cumulants: &CumulantSet,
    cfg: &LatticeConfig,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if g.has_initial_leaf() {
        return Err(Error::InitialLeafInEquilibrium);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Engine::new(g, root_sites, cfg, quad, &TimeMode::Equilibrium)?.value(cumulants)
}

/// Value of a graph with all roots at time `t` and initial field `f`.
pub fn evaluate_graph_finite_t(
    g: &SimplifiedGraph,
    t: f64,
    root_sites: &[usize],
    cumulants: &CumulantSet,
    f: &SpatialField,
    cfg: &LatticeConfig,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    if f.config() != cfg {
        return Err(Error::ConfigMismatch);
    }
    let mode = TimeMode::Finite { t, initial: f.clone() };
    Engine::new(g, root_sites, cfg, quad, &mode)?.value(cumulants)
}

/// Dispatches on the time mode.
pub fn evaluate_graph(
    g: &SimplifiedGraph,
    root_sites: &[usize],
    cumulants: &CumulantSet,
    cfg: &LatticeConfig,
    quad: &QuadratureSpec,
    mode: &TimeMode,
) -> Result<f64> {
    match mode {
        TimeMode::Equilibrium => evaluate_graph_equilibrium(g, root_sites, cumulants, cfg, quad),
        TimeMode::Finite { t, initial } => {
            evaluate_graph_finite_t(g, *t, root_sites, cumulants, initial, cfg, quad)
        }
    }
}

struct Sink {
    parent: usize,
    legs: usize,
}

struct Engine<'a> {
    g: &'a SimplifiedGraph,
    cfg: LatticeConfig,
    quad: &'a QuadratureSpec,
    equilibrium: bool,
    root_time: f64,
    initial: Option<SpatialField>,
    /// Site index of `a − b`, row-major in `a`.
    diff: Vec<usize>,
    /// Integrated, positioned vertices in topological order.
    order: Vec<usize>,
    /// Level at which each vertex gets its time (roots: none).
    level_of: Vec<Option<usize>>,
    sinks: Vec<Sink>,
    /// Edges between positioned vertices, grouped by the level at which
    /// both ends first have positions (index 0: before any level).
    edges_at: Vec<Vec<(usize, usize)>>,
    /// Parents of initial-condition leaves, grouped like `edges_at`.
    initial_at: Vec<Vec<usize>>,
    root_sites: Vec<Option<usize>>,
}

impl<'a> Engine<'a> {
    fn new(
        g: &'a SimplifiedGraph,
        root_sites: &[usize],
        cfg: &LatticeConfig,
        quad: &'a QuadratureSpec,
        mode: &TimeMode,
    ) -> Result<Self> {
        let nv = g.vertices.len();
        let n = cfg.sites();
        let mut sites: Vec<Option<usize>> = vec![None; nv];
        for (v, kind) in g.vertices.iter().enumerate() {
            if let Vertex::Root(k) = kind {
                let s = *root_sites.get(*k).ok_or(Error::DimensionMismatch {
                    expected: g.roots(),
                    got: root_sites.len(),
                })?;
                if s >= n {
                    return Err(Error::Config(format!("root site {s} outside the lattice")));
                }
                sites[v] = Some(s);
            }
        }
        if root_sites.len() != g.roots() {
            return Err(Error::DimensionMismatch { expected: g.roots(), got: root_sites.len() });
        }

        // Classify vertices.
        let mut sinks = Vec::new();
        let mut initial_parents = Vec::new();
        let mut is_sink = vec![false; nv];
        for (v, kind) in g.vertices.iter().enumerate() {
            match kind {
                Vertex::Empty { legs } => {
                    let parents = g.parents(v);
                    if parents.is_empty() || parents.len() != *legs {
                        return Err(Error::MalformedGraph("empty vertex degree differs from legs".into()));
                    }
                    if parents.windows(2).all(|w| w[0] == w[1]) {
                        is_sink[v] = true;
                        sinks.push(Sink { parent: parents[0], legs: *legs });
                    }
                }
                Vertex::InitialLeaf => {
                    let parents = g.parents(v);
                    if parents.len() != 1 {
                        return Err(Error::MalformedGraph("initial leaf must have one parent".into()));
                    }
                    initial_parents.push(parents[0]);
                }
                _ => {}
            }
        }

        // Topological order of integrated vertices.
        let integrated: Vec<usize> = (0..nv)
            .filter(|&v| match g.vertices[v] {
                Vertex::Inner { .. } => true,
                Vertex::Empty { .. } => !is_sink[v],
                _ => false,
            })
            .collect();
        let mut placed: Vec<bool> = g.vertices.iter().map(|k| matches!(k, Vertex::Root(_))).collect();
        let mut order = Vec::with_capacity(integrated.len());
        while order.len() < integrated.len() {
            let next = integrated
                .iter()
                .copied()
                .find(|&v| !placed[v] && g.parents(v).iter().all(|&p| placed[p]))
                .ok_or_else(|| Error::MalformedGraph("cycle or orphan vertex".into()))?;
            placed[next] = true;
            order.push(next);
        }
        let mut level_of = vec![None; nv];
        for (i, &v) in order.iter().enumerate() {
            level_of[v] = Some(i);
        }

        // Group positioned edges and initial leaves by level (+1 shift:
        // slot 0 holds items depending on roots only).
        let slot = |v: usize| level_of[v].map_or(0, |l| l + 1);
        let mut edges_at = vec![Vec::new(); order.len() + 1];
        for &(a, b) in &g.edges {
            let positioned = |v: usize| level_of[v].is_some() || sites[v].is_some();
            if positioned(a) && positioned(b) {
                edges_at[slot(a).max(slot(b))].push((a, b));
            }
        }
        let mut initial_at = vec![Vec::new(); order.len() + 1];
        for &p in &initial_parents {
            initial_at[slot(p)].push(p);
        }

        let mut diff = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                diff[a * n + b] = cfg.sub(a, b);
            }
        }
        let (equilibrium, root_time, initial) = match mode {
            TimeMode::Equilibrium => (true, 0.0, None),
            TimeMode::Finite { t, initial } => (false, *t, Some(initial.clone())),
        };
        Ok(Engine {
            g,
            cfg: *cfg,
            quad,
            equilibrium,
            root_time,
            initial,
            diff,
            order,
            level_of,
            sinks,
            edges_at,
            initial_at,
            root_sites: sites,
        })
    }

    fn value(&self, cumulants: &CumulantSet) -> Result<f64> {
        let mut prefactor = self.g.multiplicity() as f64;
        for l in self.g.leg_counts() {
            prefactor *= cumulants.get(l);
        }
        if prefactor == 0.0 {
            return Ok(0.0);
        }
        let mut times = vec![self.root_time; self.g.vertices.len()];
        // Sinks hanging directly off roots.
        let mut acc = 1.0;
        for s in &self.sinks {
            if self.level_of[s.parent].is_none() {
                acc *= self.sink_factor(self.root_time, s.legs);
            }
        }
        let v = self.time_level(0, &mut times, acc);
        let result = prefactor * v;
        if !result.is_finite() {
            return Err(Error::InvalidQuadrature("non-finite graph value".into()));
        }
        Ok(result)
    }

    fn window(&self, hi: f64) -> f64 {
        if self.equilibrium {
            hi - self.quad.t_max()
        } else {
            0.0
        }
    }

    /// `∫ dg δ^d Σ_y G̃_g(y)^l` over the gap window below a parent at `t_p`.
    fn sink_factor(&self, t_parent: f64, legs: usize) -> f64 {
        let depth = t_parent - self.window(t_parent);
        let vol = self.cfg.cell_volume();
        self.quad
            .rule(0.0, depth)
            .into_iter()
            .map(|(gap, w)| {
                let k = heat_kernel_unchecked(gap, &self.cfg);
                w * vol * k.values().iter().map(|x| x.powi(legs as i32)).sum::<f64>()
            })
            .sum()
    }

    fn time_level(&self, level: usize, times: &mut Vec<f64>, acc: f64) -> f64 {
        if level == self.order.len() {
            return acc * self.spatial_sum(times);
        }
        let v = self.order[level];
        let parents = self.g.parents(v);
        let hi = parents.iter().map(|&p| times[p]).fold(f64::INFINITY, f64::min);
        let lo = self.window(hi);
        let splits: Vec<f64> = self.order[..level].iter().map(|&u| times[u]).collect();
        let rule = self.quad.rule_split(lo, hi, &splits);
        let mut total = 0.0;
        for (t, w) in rule {
            times[v] = t;
            let mut a = acc * w;
            for s in self.sinks.iter().filter(|s| s.parent == v) {
                a *= self.sink_factor(t, s.legs);
            }
            total += self.time_level(level + 1, times, a);
        }
        total
    }

    fn spatial_sum(&self, times: &[f64]) -> f64 {
        let n = self.cfg.sites();
        let kernels: Vec<Vec<(usize, usize, Vec<f64>)>> = self
            .edges_at
            .iter()
            .map(|es| {
                es.iter()
                    .map(|&(a, b)| (a, b, heat_kernel_unchecked(times[a] - times[b], &self.cfg).into_values()))
                    .collect()
            })
            .collect();
        let initial: Vec<Vec<(usize, Vec<f64>)>> = self
            .initial_at
            .iter()
            .map(|ps| {
                ps.iter()
                    .map(|&p| {
                        let f = self.initial.as_ref().expect("initial leaves only at finite time");
                        let k = heat_kernel_unchecked(times[p], &self.cfg);
                        (p, convolve(&k, f).expect("same lattice").into_values())
                    })
                    .collect()
            })
            .collect();
        let mut pos: Vec<usize> = self.root_sites.iter().map(|s| s.unwrap_or(0)).collect();
        let base = self.factor_at(0, &pos, &kernels, &initial);
        if base == 0.0 {
            return 0.0;
        }
        let vol = self.cfg.cell_volume().powi(self.order.len() as i32);
        vol * base * self.space_level(0, &mut pos, &kernels, &initial, n)
    }

    fn factor_at(
        &self,
        slot: usize,
        pos: &[usize],
        kernels: &[Vec<(usize, usize, Vec<f64>)>],
        initial: &[Vec<(usize, Vec<f64>)>],
    ) -> f64 {
        let n = self.cfg.sites();
        let mut f = 1.0;
        for (a, b, k) in &kernels[slot] {
            f *= k[self.diff[pos[*a] * n + pos[*b]]];
        }
        for (p, vals) in &initial[slot] {
            f *= vals[pos[*p]];
        }
        f
    }

    fn space_level(
        &self,
        level: usize,
        pos: &mut Vec<usize>,
        kernels: &[Vec<(usize, usize, Vec<f64>)>],
        initial: &[Vec<(usize, Vec<f64>)>],
        n: usize,
    ) -> f64 {
        if level == self.order.len() {
            return 1.0;
        }
        let v = self.order[level];
        let mut total = 0.0;
        for site in 0..n {
            pos[v] = site;
            let f = self.factor_at(level + 1, pos, kernels, initial);
            if f != 0.0 {
                total += f * self.space_level(level + 1, pos, kernels, initial, n);
            }
        }
        total
    }
}

/// Site list `[0, lag]` for a two-point function at spatial offset `lag`.
pub fn two_point_sites(lag: usize) -> [usize; 2] {
    [0, lag]
}
