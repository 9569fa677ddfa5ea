//! Time quadrature for nested vertex-time integrals.
//!
//! Integrands are sums of products of `e^{−μ²·gap}` factors: smooth inside
//! each integration window but varying fastest near the window ends,
//! where a gap to a neighbouring vertex closes. Windows are therefore
//! cut into panels graded geometrically toward both ends, with a fixed
//! rule on every panel.

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureScheme {
    /// Gauss–Legendre rule with `nodes_per_panel` nodes on each panel.
    GaussLegendre,
    /// Composite trapezoid on the same graded panels, subdivided uniformly.
    Trapezoid,
}

/// Truncation and resolution of time integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    t_max: f64,
    nodes_per_unit: usize,
    scheme: QuadratureScheme,
    smallest_panel: f64,
    gl: GaussLegendre,
}

impl QuadratureSpec {
    /// `t_max`: depth of each equilibrium integration window below the
    /// earliest parent time. `nodes_per_unit`: node density away from the
    /// window ends (panels are at most `nodes_per_panel / nodes_per_unit`
    /// long). `smallest_panel`: width of the first panel at each end.
    pub fn new(
        t_max: f64,
        nodes_per_unit: usize,
        scheme: QuadratureScheme,
        smallest_panel: f64,
    ) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidQuadrature(format!("t_max must be positive, got {t_max}")));
        }
        if nodes_per_unit == 0 {
            return Err(Error::InvalidQuadrature("nodes_per_unit must be positive".into()));
        }
        if !(smallest_panel > 0.0 && smallest_panel.is_finite()) {
            return Err(Error::InvalidQuadrature(format!(
                "smallest panel must be positive, got {smallest_panel}"
            )));
        }
        Ok(QuadratureSpec {
            t_max,
            nodes_per_unit,
            scheme,
            smallest_panel,
            gl: GaussLegendre::new(NODES_PER_PANEL),
        })
    }

    /// Defaults for a lattice: `t_max = 10/m²`, 8 nodes per unit time,
    /// Gauss–Legendre panels, finest panel `1/μ²_max`.
    pub fn for_lattice(cfg: &LatticeConfig) -> Self {
        Self::new(10.0 / cfg.mass_squared(), 8, QuadratureScheme::GaussLegendre, 1.0 / cfg.max_mu_squared())
            .expect("lattice-derived quadrature parameters are valid")
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn nodes_per_unit(&self) -> usize {
        self.nodes_per_unit
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    pub fn smallest_panel(&self) -> f64 {
        self.smallest_panel
    }

    pub fn with_t_max(mut self, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidQuadrature(format!("t_max must be positive, got {t_max}")));
        }
        self.t_max = t_max;
        Ok(self)
    }

    /// Same rule with twice the node density and half the finest panel.
    pub fn refined(&self) -> Self {
        let mut q = self.clone();
        q.nodes_per_unit *= 2;
        q.smallest_panel /= 2.0;
        q
    }

    fn max_panel(&self) -> f64 {
        NODES_PER_PANEL as f64 / self.nodes_per_unit as f64
    }

    /// Nodes and weights on `[a, b]`, graded toward both ends.
    pub fn rule(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        self.push_rule(a, b, &mut out);
        out
    }

    /// Rule on `[a, b]` with the interval first split at every point of
    /// `splits` lying strictly inside it.
    pub fn rule_split(&self, a: f64, b: f64, splits: &[f64]) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = splits.iter().copied().filter(|&s| s > a && s < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = Vec::new();
        let mut lo = a;
        for c in cuts.into_iter().chain(std::iter::once(b)) {
            self.push_rule(lo, c, &mut out);
            lo = c;
        }
        out
    }

    fn push_rule(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        if b <= a {
            return;
        }
        for w in self.panels(b - a).windows(2) {
            let (lo, hi) = (a + w[0], a + w[1]);
            match self.scheme {
                QuadratureScheme::GaussLegendre => {
                    let half = 0.5 * (hi - lo);
                    let mid = 0.5 * (hi + lo);
                    for (&x, &wt) in self.gl.nodes.iter().zip(&self.gl.weights) {
                        out.push((mid + half * x, half * wt));
                    }
                }
                QuadratureScheme::Trapezoid => {
                    let k = NODES_PER_PANEL;
                    let h = (hi - lo) / k as f64;
                    for i in 0..=k {
                        let wt = if i == 0 || i == k { 0.5 * h } else { h };
                        out.push((lo + i as f64 * h, wt));
                    }
                }
            }
        }
    }

    /// Panel boundaries on `[0, len]`: doubling from `smallest_panel` at
    /// both ends up to the maximal panel width, uniform in between.
    fn panels(&self, len: f64) -> Vec<f64> {
        let half = 0.5 * len;
        let max = self.max_panel();
        let mut left = vec![0.0];
        let mut h = self.smallest_panel.min(max);
        let mut x = 0.0;
        while x + h < half {
            x += h;
            left.push(x);
            h = (2.0 * h).min(max);
        }
        let mut bounds = left.clone();
        // Mirror the graded half; merge the two middle panels if the
        // remaining gap is tiny.
        let mut right: Vec<f64> = left.iter().rev().map(|&y| len - y).collect();
        if right[0] - bounds[bounds.len() - 1] < 0.25 * h.min(max) && bounds.len() > 1 {
            bounds.pop();
        }
        bounds.append(&mut right);
        bounds
    }
}

const NODES_PER_PANEL: usize = 8;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre polynomial from Chebyshev guesses.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        let sum: f64 = gl.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        for k in 0..16 {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let q: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(k)).sum();
            assert!((q - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn graded_rule_integrates_exponentials() {
        let q = QuadratureSpec::new(10.0, 8, QuadratureScheme::GaussLegendre, 0.05).unwrap();
        for rate in [0.5, 1.0, 5.0, 20.0] {
            let num: f64 = q.rule(0.0, 10.0).iter().map(|(t, w)| w * (-rate * t).exp()).sum();
            let exact = (1.0 - (-rate * 10.0f64).exp()) / rate;
            assert!((num - exact).abs() < 1e-12, "rate {rate}: {num} vs {exact}");
        }
    }

    #[test]
    fn trapezoid_is_second_order() {
        let q = QuadratureSpec::new(10.0, 8, QuadratureScheme::Trapezoid, 1.0).unwrap();
        let f = |t: f64| (-t).exp();
        let err = |q: &QuadratureSpec| {
            let num: f64 = q.rule(0.0, 4.0).iter().map(|&(t, w)| w * f(t)).sum();
            (num - (1.0 - (-4.0f64).exp())).abs()
        };
        let ratio = err(&q) / err(&q.refined());
        // Panel merging makes the ratio approach 4 only asymptotically.
        assert!(ratio > 3.0 && ratio < 6.0, "ratio {ratio}");
    }

    #[test]
    fn split_rule_covers_interval() {
        let q = QuadratureSpec::new(10.0, 4, QuadratureScheme::GaussLegendre, 0.1).unwrap();
        let r = q.rule_split(-3.0, 0.0, &[-1.0, -5.0, 0.0, -2.5]);
        let len: f64 = r.iter().map(|&(_, w)| w).sum();
        assert!((len - 3.0).abs() < 1e-13);
        assert!(r.iter().all(|&(t, _)| t > -3.0 && t < 0.0));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(QuadratureSpec::new(0.0, 8, QuadratureScheme::GaussLegendre, 0.1).is_err());
        assert!(QuadratureSpec::new(1.0, 0, QuadratureScheme::GaussLegendre, 0.1).is_err());
        assert!(QuadratureSpec::new(1.0, 8, QuadratureScheme::GaussLegendre, 0.0).is_err());
    }
}
