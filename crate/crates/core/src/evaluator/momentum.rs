//! Closed-form two-point kernels in momentum space.
//!
//! In equilibrium all time integrals of the free propagator, the melon
//! and the tadpole graphs reduce to integrals of exponentials. They serve
//! as exact oracles for the position-space engine and as the fast path
//! for the fitting kernels:
//!
//! * `P₁(p) = 1/(2μ²)`, the free two-point function per unit `c₂`;
//! * one melon orientation: `V̂(p) = (1/(2μ²)) ∫₀^∞ dw Ĥ_w(p) e^{−wμ²}`
//!   with `H_w = G̃_w³`; the first-order kernel is `P₂ = −2V`;
//! * all six tadpole graphs together: `3 P₁(0) / (2μ⁴)` per unit `c₂²`,
//!   so the first-order kernel is `T = −3P₁(0)/(2μ⁴)`, a mass shift.
//!
//! Variants for the explicit Euler scheme replace `1/(2μ²)` by the
//! stationary variance per mode of the discrete recursion,
//! `1/(μ²(2 − dt·μ²))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{heat_kernel_unchecked, LatticeConfig, SpatialField};
use crate::quadrature::QuadratureSpec;

/// Cosine transform `ĥ(p) = δ^d Σ_x cos(p·x) h(x)` on the momentum grid
/// (fields here are even under `x → −x`).
pub fn forward(h: &SpatialField) -> Vec<f64> {
    let cfg = h.config();
    let table = phase_table(cfg);
    let n = cfg.sites();
    let vol = cfg.cell_volume();
    (0..n)
        .map(|k| vol * (0..n).map(|x| table[k * n + x] * h.values()[x]).sum::<f64>())
        .collect()
}

/// Inverse transform `h(x) = (Lδ)^{-d} Σ_p cos(p·x) ĥ(p)`.
pub fn inverse(cfg: &LatticeConfig, hat: &[f64]) -> SpatialField {
    let table = phase_table(cfg);
    let n = cfg.sites();
    let norm = 1.0 / (cfg.spacing() * cfg.side() as f64).powi(cfg.dim() as i32);
    let values = (0..n)
        .map(|x| norm * (0..n).map(|k| table[k * n + x] * hat[k]).sum::<f64>())
        .collect();
    SpatialField::from_values(cfg, values).expect("finite transform")
}

fn phase_table(cfg: &LatticeConfig) -> Vec<f64> {
    let n = cfg.sites();
    let l = cfg.side();
    let coords: Vec<Vec<usize>> = (0..n).map(|i| cfg.coords(i)).collect();
    let mut t = vec![0.0; n * n];
    for k in 0..n {
        for x in 0..n {
            let phase: usize = coords[k].iter().zip(&coords[x]).map(|(a, b)| (a * b) % l).sum();
            t[k * n + x] = (2.0 * PI * (phase % l) as f64 / l as f64).cos();
        }
    }
    t
}

/// `P₁(x)`: the free equilibrium two-point function per unit `c₂`.
pub fn p1_kernel(cfg: &LatticeConfig) -> SpatialField {
    cfg.from_spectrum(|mu2| 1.0 / (2.0 * mu2))
}

/// Stationary per-unit-`c₂` covariance of the explicit Euler scheme with
/// step `dt` for `λ = 0`.
pub fn p1_kernel_discrete(cfg: &LatticeConfig, dt: f64) -> Result<SpatialField> {
    check_step(cfg, dt)?;
    Ok(cfg.from_spectrum(|mu2| discrete_propagator(mu2, dt)))
}

fn discrete_propagator(mu2: f64, dt: f64) -> f64 {
    1.0 / (mu2 * (2.0 - dt * mu2))
}

fn discrete_propagator_slope(mu2: f64, dt: f64) -> f64 {
    let den = 2.0 * mu2 - dt * mu2 * mu2;
    -(2.0 - 2.0 * dt * mu2) / (den * den)
}

fn check_step(cfg: &LatticeConfig, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt * cfg.max_mu_squared() < 2.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    Ok(())
}

/// One orientation of the melon graph at `c₄ = 1`.
pub fn melon_kernel(cfg: &LatticeConfig, quad: &QuadratureSpec) -> SpatialField {
    let n = cfg.sites();
    let mu2 = cfg.mu_squared_grid();
    let mut inner = vec![0.0; n];
    for (w, weight) in quad.rule(0.0, quad.t_max()) {
        let g = heat_kernel_unchecked(w, cfg);
        let cube = SpatialField::from_values(cfg, g.values().iter().map(|v| v * v * v).collect())
            .expect("finite heat kernel");
        let hat = forward(&cube);
        for k in 0..n {
            inner[k] += weight * hat[k] * (-w * mu2[k]).exp();
        }
    }
    let hat: Vec<f64> = (0..n).map(|k| inner[k] / (2.0 * mu2[k])).collect();
    inverse(cfg, &hat)
}

/// First-order kernel multiplying `λ·c₄`: minus both melon orientations.
pub fn p2_kernel(cfg: &LatticeConfig, quad: &QuadratureSpec) -> SpatialField {
    melon_kernel(cfg, quad).scale(-2.0)
}

/// Sum of the six first-order tadpole graphs at `c₂ = 1`.
pub fn tadpole_graph_sum(cfg: &LatticeConfig) -> SpatialField {
    let p0 = p1_kernel(cfg).values()[0];
    cfg.from_spectrum(|mu2| 3.0 * p0 / (2.0 * mu2 * mu2))
}

/// First-order kernel multiplying `λ·c₂²`.
pub fn tadpole_kernel(cfg: &LatticeConfig) -> SpatialField {
    tadpole_graph_sum(cfg).scale(-1.0)
}

/// Tadpole kernel of the explicit Euler scheme: the mass shift
/// `3λc₂P₁^{dt}(0)` applied to the discrete propagator.
pub fn tadpole_kernel_discrete(cfg: &LatticeConfig, dt: f64) -> Result<SpatialField> {
    let p0 = p1_kernel_discrete(cfg, dt)?.values()[0];
    Ok(cfg.from_spectrum(|mu2| 3.0 * p0 * discrete_propagator_slope(mu2, dt)))
}

/// Kernels of the first-order two-point model
/// `F = c₂P₁ + λ(c₄P₂ + c₂²T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderKernels {
    pub p1: SpatialField,
    pub p2: SpatialField,
    pub tadpole: SpatialField,
}

/// Continuum-time kernels, or kernels matched to an explicit Euler
/// scheme with step `dt` (the melon keeps its continuum form).
pub fn first_order_kernels(
    cfg: &LatticeConfig,
    quad: &QuadratureSpec,
    dt: Option<f64>,
) -> Result<FirstOrderKernels> {
    let p2 = p2_kernel(cfg, quad);
    match dt {
        None => Ok(FirstOrderKernels { p1: p1_kernel(cfg), p2, tadpole: tadpole_kernel(cfg) }),
        Some(dt) => Ok(FirstOrderKernels {
            p1: p1_kernel_discrete(cfg, dt)?,
            p2,
            tadpole: tadpole_kernel_discrete(cfg, dt)?,
        }),
    }
}
