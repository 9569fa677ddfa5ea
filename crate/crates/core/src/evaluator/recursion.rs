//! Space-time fields on a uniform time grid, the causal convolution
//! `G ∗ h`, tree values and the perturbative recursion.
//!
//! Both tree values and the recursion use the same discrete convolution
//! (trapezoid in time, exact lattice sum in space), so summing tree
//! values over all trees of an order reproduces the recursion up to
//! rounding.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{convolve, heat_kernel_unchecked, LatticeConfig, SpatialField};
use crate::levy::{sample_noise_increments, LevyParams};
use crate::trees::RootedTree;

/// Field values at times `t_k = k·dt`, `k = 0..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    dt: f64,
    slices: Vec<SpatialField>,
}

impl SpaceTimeField {
    pub fn new(dt: f64, slices: Vec<SpatialField>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidTimeStep(dt));
        }
        if slices.is_empty() {
            return Err(Error::Config("a space-time field needs at least one time slice".into()));
        }
        let cfg = *slices[0].config();
        if slices.iter().any(|s| *s.config() != cfg) {
            return Err(Error::ConfigMismatch);
        }
        Ok(SpaceTimeField { dt, slices })
    }

    pub fn zeros(cfg: &LatticeConfig, dt: f64, steps: usize) -> Result<Self> {
        Self::new(dt, vec![SpatialField::zeros(cfg); steps + 1])
    }

    /// Noise density sampled from a Lévy law: each slice is one step's
    /// increment divided by `dt`.
    pub fn sample_noise(params: &LevyParams, cfg: &LatticeConfig, dt: f64, steps: usize, seed: u64) -> Result<Self> {
        let inc = sample_noise_increments(params, cfg, dt, steps + 1, seed)?;
        Self::new(dt, inc.into_iter().map(|f| f.scale(1.0 / dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn config(&self) -> &LatticeConfig {
        self.slices[0].config()
    }

    /// Index of the last time slice.
    pub fn steps(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn slice(&self, k: usize) -> &SpatialField {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[SpatialField] {
        &self.slices
    }

    pub fn at(&self, k: usize, site: usize) -> f64 {
        self.slices[k].values()[site]
    }

    pub fn max_abs_diff(&self, other: &SpaceTimeField) -> f64 {
        self.slices.iter().zip(&other.slices).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    fn zip_with(&self, other: &SpaceTimeField, op: impl Fn(f64, f64) -> f64) -> SpaceTimeField {
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| {
                let v = a.values().iter().zip(b.values()).map(|(x, y)| op(*x, *y)).collect();
                SpatialField::from_values(a.config(), v).unwrap_or_else(|_| SpatialField::zeros(a.config()))
            })
            .collect();
        SpaceTimeField { dt: self.dt, slices }
    }

    pub fn add(&self, other: &SpaceTimeField) -> SpaceTimeField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &SpaceTimeField) -> SpaceTimeField {
        self.zip_with(other, |a, b| a * b)
    }

    fn scale(&self, s: f64) -> SpaceTimeField {
        SpaceTimeField { dt: self.dt, slices: self.slices.iter().map(|f| f.clone().scale(s)).collect() }
    }
}

/// Discrete causal convolution with the Green function on a fixed grid.
#[derive(Clone, Debug)]
pub struct CausalConvolver {
    cfg: LatticeConfig,
    dt: f64,
    kernels: Vec<SpatialField>,
}

impl CausalConvolver {
    /// Precomputes `G̃_{k·dt}` for `k = 0..=steps`.
    pub fn new(cfg: &LatticeConfig, dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidTimeStep(dt));
        }
        let kernels = (0..=steps).map(|k| heat_kernel_unchecked(k as f64 * dt, cfg)).collect();
        Ok(CausalConvolver { cfg: *cfg, dt, kernels })
    }

    fn check(&self, h: &SpaceTimeField) -> Result<()> {
        if *h.config() != self.cfg {
            return Err(Error::ConfigMismatch);
        }
        if h.dt != self.dt {
            return Err(Error::Config("time grids differ".into()));
        }
        if h.steps() + 1 > self.kernels.len() {
            return Err(Error::NoiseHorizon {
                needed: h.horizon(),
                available: (self.kernels.len() - 1) as f64 * self.dt,
            });
        }
        Ok(())
    }

    /// `(G ∗ h)(t_k) = ∫₀^{t_k} ds G̃_{t_k − s} ⋆ h(s)` by the trapezoid
    /// rule; the `s = t_k` node carries `G(0) = 0`.
    pub fn apply(&self, h: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check(h)?;
        let n = h.steps();
        // Convolve each source slice with every kernel it meets once.
        let mut slices = vec![SpatialField::zeros(&self.cfg); n + 1];
        for j in 0..n {
            let w = if j == 0 { 0.5 } else { 1.0 } * self.dt;
            for (k, slice) in slices.iter_mut().enumerate().skip(j + 1) {
                let c = convolve(&self.kernels[k - j], &h.slices[j])?;
                for (o, v) in slice.values_mut().iter_mut().zip(c.values()) {
                    *o += w * v;
                }
            }
        }
        SpaceTimeField::new(self.dt, slices)
    }

    /// Free evolution `G̃_{t_k} ⋆ f` on `steps + 1` slices.
    pub fn free(&self, f: &SpatialField, steps: usize) -> Result<SpaceTimeField> {
        if *f.config() != self.cfg {
            return Err(Error::ConfigMismatch);
        }
        if steps + 1 > self.kernels.len() {
            return Err(Error::NoiseHorizon {
                needed: steps as f64 * self.dt,
                available: (self.kernels.len() - 1) as f64 * self.dt,
            });
        }
        let slices = (0..=steps).map(|k| convolve(&self.kernels[k], f)).collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(self.dt, slices)
    }
}

/// Space-time field of a tree with its root at every grid point:
/// noise leaves give `G ∗ η`, initial leaves `G̃ₜ ⋆ f`, and an inner
/// vertex `M(v)·G ∗ Π(children)`.
pub fn tree_field(
    tree: &RootedTree,
    noise: &SpaceTimeField,
    f: &SpatialField,
    conv: &CausalConvolver,
) -> Result<SpaceTimeField> {
    let mut memo = HashMap::new();
    tree_field_memo(tree, noise, f, conv, &mut memo)
}

fn tree_field_memo(
    tree: &RootedTree,
    noise: &SpaceTimeField,
    f: &SpatialField,
    conv: &CausalConvolver,
    memo: &mut HashMap<RootedTree, SpaceTimeField>,
) -> Result<SpaceTimeField> {
    if let Some(v) = memo.get(tree) {
        return Ok(v.clone());
    }
    let value = match tree {
        RootedTree::Noise => conv.apply(noise)?,
        RootedTree::Initial => conv.free(f, noise.steps())?,
        RootedTree::Inner(children) => {
            let mut prod: Option<SpaceTimeField> = None;
            for c in children {
                let v = tree_field_memo(c, noise, f, conv, memo)?;
                prod = Some(match prod {
                    None => v,
                    Some(p) => p.mul(&v),
                });
            }
            let prod = prod.expect("inner vertex has children");
            conv.apply(&prod)?.scale(tree.vertex_multiplicity() as f64)
        }
    };
    memo.insert(tree.clone(), value.clone());
    Ok(value)
}

/// Value of a tree (including its multiplicity) at time `t_k`, site `x`.
pub fn tree_value(
    tree: &RootedTree,
    time_index: usize,
    site: usize,
    noise: &SpaceTimeField,
    f: &SpatialField,
    conv: &CausalConvolver,
) -> Result<f64> {
    if time_index > noise.steps() {
        return Err(Error::NoiseHorizon { needed: time_index as f64 * noise.dt, available: noise.horizon() });
    }
    Ok(tree_field(tree, noise, f, conv)?.at(time_index, site))
}

/// Coefficients `X₀ … X_J` of `X = Σ (−λ)^j X_j`:
/// `X₀ = G ∗ η + G̃ₜ ⋆ f` and
/// `X_j = G ∗ Σ p!/(n₀!n₁!…) Π X_i^{n_i}` over `Σ n_i = p`, `Σ i·n_i = j − 1`.
pub fn perturbative_solution(
    order: usize,
    p: usize,
    noise: &SpaceTimeField,
    f: &SpatialField,
    conv: &CausalConvolver,
) -> Result<Vec<SpaceTimeField>> {
    let steps = noise.steps();
    let mut xs = vec![conv.apply(noise)?.add(&conv.free(f, steps)?)];
    for j in 1..=order {
        let mut source = SpaceTimeField::zeros(noise.config(), noise.dt, steps)?;
        for counts in occupation_vectors(p, j - 1, j) {
            let mut coef = factorial(p);
            let mut term: Option<SpaceTimeField> = None;
            for (i, &n) in counts.iter().enumerate() {
                coef /= factorial(n);
                for _ in 0..n {
                    term = Some(match term {
                        None => xs[i].clone(),
                        Some(t) => t.mul(&xs[i]),
                    });
                }
            }
            let term = term.expect("p >= 1 factors");
            source = source.add(&term.scale(coef as f64));
        }
        xs.push(conv.apply(&source)?);
    }
    Ok(xs)
}

/// Vectors `(n_0, …, n_{len−1})` with `Σ n_i = p` and `Σ i·n_i = weight`.
fn occupation_vectors(p: usize, weight: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, len: usize, left: usize, weight: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == len {
            if left == 0 && weight == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for n in 0..=left {
            if i * n > weight {
                break;
            }
            cur.push(n);
            rec(i + 1, len, left - n, weight - i * n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, len, p, weight, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}
