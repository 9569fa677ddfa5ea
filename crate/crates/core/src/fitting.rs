//! Least-squares identification of `c₂`, `c₄` from an empirical
//! two-point function with the first-order model
//! `F_th = c₂P₁ + λc₄P₂ (+ λc₂²T)`.
//!
//! With `α = ∫P₁²`, `β = λ²∫P₂²`, `γ = λ∫P₁P₂`, `a = ∫P₁F`, `b = λ∫P₂F`
//! (integrals are `δ^d Σ` over the lag grid), the minimizer of
//! `Q = ∫(F − F_th)²` is `c₂ = (aβ − γb)/(αβ − γ²)`,
//! `c₄ = (αb − γa)/(αβ − γ²)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::SpatialField;
use crate::simulator::CorrelationFunction;

/// Relative threshold below which `αβ − γ²` counts as degenerate.
const DEGENERACY: f64 = 1e-13;

/// Outcome of a fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub c2: f64,
    pub c4: f64,
    /// `c₄/c₂²`; undefined (NaN) when `c₂ ≤ 0`.
    pub kurtosis: f64,
    /// Residual `Q` at the minimizer.
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    /// `∫F²`, the constant term of `Q`.
    pub c: f64,
    pub lambda: f64,
    /// Whether the tadpole term `λc₂²T` was part of the model.
    pub with_tadpole: bool,
    /// Jackknife standard errors over batches, when batches exist.
    pub se_c2: Option<f64>,
    pub se_c4: Option<f64>,
    pub se_kurtosis: Option<f64>,
    pub warnings: Vec<String>,
}

impl FitResult {
    /// `Q(c₂, c₄)` from the design scalars (tadpole-free model).
    pub fn q_at(&self, c2: f64, c4: f64) -> f64 {
        self.c - 2.0 * (c2 * self.a + c4 * self.b)
            + c2 * c2 * self.alpha
            + 2.0 * c2 * c4 * self.gamma
            + c4 * c4 * self.beta
    }

    /// `(∂Q/∂c₂, ∂Q/∂c₄)` at the minimizer (tadpole-free model).
    pub fn normal_residuals(&self) -> (f64, f64) {
        (
            2.0 * (self.c2 * self.alpha + self.c4 * self.gamma - self.a),
            2.0 * (self.c2 * self.gamma + self.c4 * self.beta - self.b),
        )
    }

    pub fn classify(&self, thresholds: &KurtosisThresholds) -> Option<KurtosisClass> {
        self.kurtosis.is_finite().then(|| classify_kurtosis_with(self.kurtosis, thresholds))
    }

    /// Structured `key = value` report.
    pub fn report(&self, thresholds: &KurtosisThresholds) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.10e}"));
        s.push_str(&format!("model = {}\n", if self.with_tadpole { "c2*P1 + lambda*c4*P2 + lambda*c2^2*T" } else { "c2*P1 + lambda*c4*P2" }));
        s.push_str(&format!("lambda = {:.10e}\n", self.lambda));
        s.push_str(&format!("c2 = {:.10e}\n", self.c2));
        s.push_str(&format!("c2_stderr = {}\n", opt(self.se_c2)));
        s.push_str(&format!("c4 = {:.10e}\n", self.c4));
        s.push_str(&format!("c4_stderr = {}\n", opt(self.se_c4)));
        s.push_str(&format!("kurtosis = {:.10e}\n", self.kurtosis));
        s.push_str(&format!("kurtosis_stderr = {}\n", opt(self.se_kurtosis)));
        let label = self.classify(thresholds).map_or("undefined".to_string(), |c| c.to_string());
        s.push_str(&format!("label = {label}\n"));
        s.push_str(&format!("Q = {:.10e}\n", self.q));
        for (k, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
        ] {
            s.push_str(&format!("{k} = {v:.10e}\n"));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning = {w}\n"));
        }
        s
    }
}

fn dot(x: &[f64], y: &[f64], vol: f64) -> f64 {
    vol * x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
}

/// Closed-form minimizer on plain vectors.
fn solve(f: &[f64], p1: &[f64], p2: &[f64], lambda: f64, vol: f64) -> Result<FitResult> {
    let alpha = dot(p1, p1, vol);
    let beta = lambda * lambda * dot(p2, p2, vol);
    let gamma = lambda * dot(p1, p2, vol);
    let a = dot(p1, f, vol);
    let b = lambda * dot(p2, f, vol);
    let c = dot(f, f, vol);
    let det = alpha * beta - gamma * gamma;
    // Negated so that a NaN determinant is also rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(det > DEGENERACY * alpha * beta) || !det.is_finite() {
        return Err(Error::DegenerateDesign(det));
    }
    let c2 = (a * beta - gamma * b) / det;
    let c4 = (alpha * b - gamma * a) / det;
    let q = vol
        * f.iter()
            .zip(p1.iter().zip(p2))
            .map(|(fv, (u, v))| (fv - c2 * u - lambda * c4 * v).powi(2))
            .sum::<f64>();
    let mut warnings = Vec::new();
    let kurtosis = if c2 > 0.0 {
        c4 / (c2 * c2)
    } else {
        warnings.push(format!("fitted c2 = {c2:e} is not positive: model misfit, kurtosis undefined"));
        f64::NAN
    };
    Ok(FitResult {
        c2,
        c4,
        kurtosis,
        q,
        alpha,
        beta,
        gamma,
        a,
        b,
        c,
        lambda,
        with_tadpole: false,
        se_c2: None,
        se_c4: None,
        se_kurtosis: None,
        warnings,
    })
}

/// Solve with the tadpole `λc₂²T` moved to the data side. The fit is
/// linear in the data, so with `(c₂⁰, c₄⁰)` the tadpole-free fit of `F`
/// and `(τ₂, τ₄)` the fit of `T` alone, self-consistency reads
/// `c₂ = c₂⁰ − λτ₂c₂²`: a quadratic whose root continuous in `λ` is taken.
fn solve_with_tadpole(f: &[f64], p1: &[f64], p2: &[f64], t: &[f64], lambda: f64, vol: f64) -> Result<FitResult> {
    let free = solve(f, p1, p2, lambda, vol)?;
    let tau = solve(t, p1, p2, lambda, vol)?.c2;
    let k = lambda * tau;
    let disc = 1.0 + 4.0 * k * free.c2;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(disc >= 0.0) {
        let mut fit = free;
        fit.warnings.push(format!(
            "no self-consistent c2 with the tadpole term (discriminant {disc:e}); tadpole-free fit reported"
        ));
        return Ok(fit);
    }
    // c₂ = 2c₂⁰ / (1 + √disc), the stable form of (−1 + √disc)/(2k).
    let c2 = 2.0 * free.c2 / (1.0 + disc.sqrt());
    let shifted: Vec<f64> = f.iter().zip(t).map(|(fv, tv)| fv - lambda * c2 * c2 * tv).collect();
    let mut fit = solve(&shifted, p1, p2, lambda, vol)?;
    fit.with_tadpole = true;
    Ok(fit)
}

fn kernel_values(f_em: &CorrelationFunction, k: &SpatialField) -> Result<Vec<f64>> {
    f_em.restrict(k)
}

/// Fits `F_em ≈ c₂P₁ + λc₄P₂` on the lags of `F_em`.
pub fn fit_first_order(f_em: &CorrelationFunction, p1: &SpatialField, p2: &SpatialField, lambda: f64) -> Result<FitResult> {
    let (u, v) = (kernel_values(f_em, p1)?, kernel_values(f_em, p2)?);
    let vol = f_em.config().cell_volume();
    let mut fit = solve(&f_em.mean, &u, &v, lambda, vol)?;
    jackknife(&mut fit, f_em, |f| solve(f, &u, &v, lambda, vol));
    Ok(fit)
}

/// Fits `F_em ≈ c₂P₁ + λc₄P₂ + λc₂²T`.
pub fn fit_first_order_with_tadpole(
    f_em: &CorrelationFunction,
    p1: &SpatialField,
    p2: &SpatialField,
    tadpole: &SpatialField,
    lambda: f64,
) -> Result<FitResult> {
    let (u, v, t) = (kernel_values(f_em, p1)?, kernel_values(f_em, p2)?, kernel_values(f_em, tadpole)?);
    let vol = f_em.config().cell_volume();
    let mut fit = solve_with_tadpole(&f_em.mean, &u, &v, &t, lambda, vol)?;
    jackknife(&mut fit, f_em, |f| solve_with_tadpole(f, &u, &v, &t, lambda, vol));
    Ok(fit)
}

/// Delete-one-batch jackknife errors for `c₂`, `c₄` and `K`.
fn jackknife(fit: &mut FitResult, f_em: &CorrelationFunction, refit: impl Fn(&[f64]) -> Result<FitResult>) {
    let nb = f_em.batch_estimates.len();
    if nb < 2 {
        return;
    }
    let mut samples = Vec::with_capacity(nb);
    for b in 0..nb {
        let f = f_em.leave_one_out(b).expect("batch exists");
        match refit(&f) {
            Ok(r) => samples.push((r.c2, r.c4, r.kurtosis)),
            Err(_) => return,
        }
    }
    let se = |xs: Vec<f64>| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        ((n - 1.0) / n * xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
    };
    fit.se_c2 = Some(se(samples.iter().map(|s| s.0).collect()));
    fit.se_c4 = Some(se(samples.iter().map(|s| s.1).collect()));
    let k: Vec<f64> = samples.iter().map(|s| s.2).collect();
    if k.iter().all(|x| x.is_finite()) {
        fit.se_kurtosis = Some(se(k));
    }
}

/// Qualitative reading of the kurtosis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KurtosisClass {
    Diffusive,
    MixedDiffusive,
    JumpDominated,
}

impl fmt::Display for KurtosisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KurtosisClass::Diffusive => "diffusive",
            KurtosisClass::MixedDiffusive => "mixed, predominantly diffusive",
            KurtosisClass::JumpDominated => "jump-dominated",
        })
    }
}

/// `|K| ≤ zero` is diffusive, `|K| ≥ jump` is jump-dominated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KurtosisThresholds {
    pub zero: f64,
    pub jump: f64,
}

impl Default for KurtosisThresholds {
    fn default() -> Self {
        KurtosisThresholds { zero: 0.05, jump: 1.0 }
    }
}

pub fn classify_kurtosis(k: f64) -> KurtosisClass {
    classify_kurtosis_with(k, &KurtosisThresholds::default())
}

pub fn classify_kurtosis_with(k: f64, t: &KurtosisThresholds) -> KurtosisClass {
    let a = k.abs();
    if a <= t.zero {
        KurtosisClass::Diffusive
    } else if a < t.jump {
        KurtosisClass::MixedDiffusive
    } else {
        KurtosisClass::JumpDominated
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeConfig;

    fn kernels() -> (LatticeConfig, SpatialField, SpatialField) {
        let cfg = LatticeConfig::new(1, 1.0, 16, 1.0).unwrap();
        let p1 = cfg.from_spectrum(|m| 1.0 / (2.0 * m));
        let p2 = cfg.from_spectrum(|m| -1.0 / (m * m * m));
        (cfg, p1, p2)
    }

    fn combo(cfg: &LatticeConfig, p1: &SpatialField, p2: &SpatialField, x: f64, y: f64) -> SpatialField {
        let v = p1.values().iter().zip(p2.values()).map(|(a, b)| x * a + y * b).collect();
        SpatialField::from_values(cfg, v).unwrap()
    }

    #[test]
    fn recovers_exact_model() {
        let (cfg, p1, p2) = kernels();
        let lambda = 0.1;
        let f = CorrelationFunction::analytic(&combo(&cfg, &p1, &p2, 2.0, 5.0 * lambda));
        let fit = fit_first_order(&f, &p1, &p2, lambda).unwrap();
        assert!((fit.c2 - 2.0).abs() < 1e-9 && (fit.c4 - 5.0).abs() < 1e-7, "{fit:?}");
        assert!(fit.q <= 1e-18 * fit.c.max(1.0));
    }

    #[test]
    fn pure_free_data_gives_zero_kurtosis() {
        let (_, p1, p2) = kernels();
        let fit = fit_first_order(&CorrelationFunction::analytic(&p1), &p1, &p2, 0.3).unwrap();
        assert!((fit.c2 - 1.0).abs() < 1e-10 && fit.c4.abs() < 1e-8);
        assert_eq!(classify_kurtosis(fit.kurtosis), KurtosisClass::Diffusive);
    }

    #[test]
    fn degenerate_design_rejected() {
        let (_, p1, _) = kernels();
        let f = CorrelationFunction::analytic(&p1);
        assert!(matches!(fit_first_order(&f, &p1, &p1, 0.1), Err(Error::DegenerateDesign(_))));
        let (_, p1, p2) = kernels();
        assert!(fit_first_order(&f, &p1, &p2, 0.0).is_err());
    }

    #[test]
    fn negative_c2_is_reported_not_clamped() {
        let (_, p1, p2) = kernels();
        let f = CorrelationFunction::analytic(&p1.clone().scale(-1.0));
        let fit = fit_first_order(&f, &p1, &p2, 0.1).unwrap();
        assert!(fit.c2 < 0.0 && fit.kurtosis.is_nan() && !fit.warnings.is_empty());
        assert!(fit.classify(&KurtosisThresholds::default()).is_none());
    }

    #[test]
    fn tadpole_fit_recovers_its_model() {
        let (cfg, p1, p2) = kernels();
        let t = cfg.from_spectrum(|m| -0.7 / (m * m));
        let lambda = 0.2;
        let (c2, c4) = (1.3, 0.4);
        let v = (0..cfg.sites())
            .map(|i| c2 * p1.values()[i] + lambda * c4 * p2.values()[i] + lambda * c2 * c2 * t.values()[i])
            .collect();
        let f = CorrelationFunction::analytic(&SpatialField::from_values(&cfg, v).unwrap());
        let fit = fit_first_order_with_tadpole(&f, &p1, &p2, &t, lambda).unwrap();
        assert!((fit.c2 - c2).abs() < 1e-9 && (fit.c4 - c4).abs() < 1e-7, "{fit:?}");
        assert!(fit.with_tadpole);
    }

    #[test]
    fn classification_labels() {
        assert_eq!(classify_kurtosis(0.0).to_string(), "diffusive");
        assert_eq!(classify_kurtosis(0.3).to_string(), "mixed, predominantly diffusive");
        assert_eq!(classify_kurtosis(10.0).to_string(), "jump-dominated");
        assert_eq!(classify_kurtosis(-10.0), KurtosisClass::JumpDominated);
        let t = KurtosisThresholds { zero: 0.5, jump: 2.0 };
        assert_eq!(classify_kurtosis_with(0.3, &t), KurtosisClass::Diffusive);
    }
}
