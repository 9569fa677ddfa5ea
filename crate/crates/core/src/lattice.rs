//! Periodic lattice geometry, the lattice dispersion relation and the
//! heat kernel / causal Green function of `∂ₜ − Δ + m²`.
//!
//! The lattice is a torus of `L^d` sites with spacing `δ`. Spatial
//! integrals are `∫ dx = δ^d Σₓ`, and the discrete Dirac delta at the
//! origin is `δ^{-d}` on site 0. The momentum grid is
//! `{2πk/(δL) : k = 0..L-1}^d`.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};

/// Geometry and mass of the discrete torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeConfig {
    dim: usize,
    spacing: f64,
    side: usize,
    mass: f64,
}

impl LatticeConfig {
    pub fn new(dim: usize, spacing: f64, side: usize, mass: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLattice("dimension must be at least 1".into()));
        }
        if side < 2 {
            return Err(Error::InvalidLattice(format!("side length {side} < 2")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidLattice(format!("spacing {spacing} must be positive")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidLattice(format!("mass {mass} must be positive")));
        }
        if side.checked_pow(dim as u32).is_none() {
            return Err(Error::InvalidLattice("too many sites".into()));
        }
        Ok(Self { dim, spacing, side, mass })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mass_squared(&self) -> f64 {
        self.mass * self.mass
    }

    /// Number of sites, `L^d`.
    pub fn sites(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Volume of one lattice cell, `δ^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Largest eigenvalue of `m² − Δ`, i.e. `4d/δ² + m²`.
    pub fn max_mu_squared(&self) -> f64 {
        4.0 * self.dim as f64 / (self.spacing * self.spacing) + self.mass_squared()
    }

    /// Integer coordinates of a linear site index (first coordinate slowest).
    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        for slot in c.iter_mut().rev() {
            *slot = index % self.side;
            index /= self.side;
        }
        c
    }

    /// Linear index of integer coordinates, reduced modulo `L`.
    pub fn index(&self, coords: &[i64]) -> usize {
        let l = self.side as i64;
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.side + c.rem_euclid(l) as usize)
    }

    /// Index of `a + b` on the torus.
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y| x + y)
    }

    /// Index of `a − b` on the torus.
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y| x - y)
    }

    fn combine(&self, mut a: usize, mut b: usize, op: impl Fn(i64, i64) -> i64) -> usize {
        let l = self.side as i64;
        let mut out = 0usize;
        let mut stride = 1usize;
        for _ in 0..self.dim {
            let x = (a % self.side) as i64;
            let y = (b % self.side) as i64;
            a /= self.side;
            b /= self.side;
            out += op(x, y).rem_euclid(l) as usize * stride;
            stride *= self.side;
        }
        out
    }

    /// Minimal-image Euclidean length of the lattice vector at `index`,
    /// in length units.
    pub fn torus_norm(&self, index: usize) -> f64 {
        let sq: usize = self
            .coords(index)
            .into_iter()
            .map(|c| {
                let m = c.min(self.side - c);
                m * m
            })
            .sum();
        self.spacing * (sq as f64).sqrt()
    }

    /// Momentum vector of grid point `k ∈ {0..L-1}^d` (given as a site index).
    pub fn momentum(&self, index: usize) -> Vec<f64> {
        let scale = 2.0 * PI / (self.spacing * self.side as f64);
        self.coords(index).into_iter().map(|k| scale * k as f64).collect()
    }

    /// `μ²` at every momentum grid point, indexed like sites.
    pub fn mu_squared_grid(&self) -> Vec<f64> {
        (0..self.sites())
            .map(|k| mu_squared(&self.momentum(k), self).expect("grid momentum has correct dimension"))
            .collect()
    }

    /// Field `h(x) = (Lδ)^{-d} Σ_p e^{-ip·x} ĥ(μ²(p))` for a spectral
    /// function of the dispersion. Exact direct sum over the momentum grid.
    pub fn from_spectrum(&self, spectrum: impl Fn(f64) -> f64) -> SpatialField {
        let n = self.sites();
        let mu2 = self.mu_squared_grid();
        let weights: Vec<f64> = mu2.iter().map(|&m| spectrum(m)).collect();
        let norm = 1.0 / (self.spacing * self.side as f64).powi(self.dim as i32);
        let l = self.side as f64;
        let coords: Vec<Vec<usize>> = (0..n).map(|i| self.coords(i)).collect();
        let values = (0..n)
            .map(|x| {
                let cx = &coords[x];
                let sum: f64 = (0..n)
                    .map(|k| {
                        let phase: f64 = coords[k]
                            .iter()
                            .zip(cx)
                            .map(|(&kk, &xx)| 2.0 * PI * ((kk * xx) % self.side) as f64 / l)
                            .sum();
                        phase.cos() * weights[k]
                    })
                    .sum();
                norm * sum
            })
            .collect();
        SpatialField { config: *self, values }
    }
}

/// A real field on the lattice sites.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialField {
    config: LatticeConfig,
    values: Vec<f64>,
}

impl SpatialField {
    pub fn zeros(config: &LatticeConfig) -> Self {
        Self { config: *config, values: vec![0.0; config.sites()] }
    }

    pub fn constant(config: &LatticeConfig, value: f64) -> Self {
        Self { config: *config, values: vec![value; config.sites()] }
    }

    pub fn from_values(config: &LatticeConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != config.sites() {
            return Err(Error::DimensionMismatch { expected: config.sites(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLattice("field values must be finite".into()));
        }
        Ok(Self { config: *config, values })
    }

    pub fn from_fn(config: &LatticeConfig, f: impl Fn(&[usize]) -> f64) -> Self {
        let values = (0..config.sites()).map(|i| f(&config.coords(i))).collect();
        Self { config: *config, values }
    }

    /// Discrete Dirac delta `δ^{-d}·[x = 0]`.
    pub fn dirac(config: &LatticeConfig) -> Self {
        let mut f = Self::zeros(config);
        f.values[0] = 1.0 / config.cell_volume();
        f
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, coords: &[i64]) -> f64 {
        self.values[self.config.index(coords)]
    }

    /// `∫ f dx = δ^d Σₓ f(x)`.
    pub fn integral(&self) -> f64 {
        self.config.cell_volume() * self.values.iter().sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &SpatialField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= s);
        self
    }

    /// Field translated so that `out(x) = self(x − shift)`.
    pub fn translate(&self, shift: usize) -> Self {
        let cfg = self.config;
        let mut out = vec![0.0; self.values.len()];
        for (x, v) in self.values.iter().enumerate() {
            out[cfg.add(x, shift)] = *v;
        }
        Self { config: cfg, values: out }
    }

    /// CSV with one row per site: integer coordinates then the value.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..self.config.dim).map(|j| format!("x{j}")).collect();
        header.push("value".into());
        wr.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.config.coords(i).iter().map(|c| c.to_string()).collect();
            row.push(format!("{v:.16e}"));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Lattice dispersion `μ²(p) = 2δ⁻²(d − Σⱼ cos(δpⱼ)) + m²`.
pub fn mu_squared(p: &[f64], cfg: &LatticeConfig) -> Result<f64> {
    if p.len() != cfg.dim {
        return Err(Error::DimensionMismatch { expected: cfg.dim, got: p.len() });
    }
    let d = cfg.spacing;
    let s: f64 = p.iter().map(|pj| 1.0 - (d * pj).cos()).sum();
    Ok(2.0 * s / (d * d) + cfg.mass_squared())
}

/// One-dimensional massless factor of the heat kernel,
/// `k_t(n) = (Lδ)^{-1} Σ_k cos(2πkn/L) e^{-2tδ⁻²(1 − cos(2πk/L))}`.
fn heat_kernel_1d(t: f64, cfg: &LatticeConfig) -> Vec<f64> {
    let l = cfg.side;
    let lf = l as f64;
    let rate = 2.0 * t / (cfg.spacing * cfg.spacing);
    let decay: Vec<f64> = (0..l)
        .map(|k| (-rate * (1.0 - (2.0 * PI * k as f64 / lf).cos())).exp())
        .collect();
    let norm = 1.0 / (lf * cfg.spacing);
    (0..l)
        .map(|n| {
            norm * (0..l)
                .map(|k| (2.0 * PI * ((k * n) % l) as f64 / lf).cos() * decay[k])
                .sum::<f64>()
        })
        .collect()
}

/// Heat kernel `G̃ₜ` with `F̃(G̃ₜ)(p) = e^{-tμ²(p)}`.
///
/// Normalized so that `δ^d Σₓ G̃ₜ(x) = e^{-tm²}` and `G̃₀ = δ^{-d}[x=0]`.
/// The kernel factorizes over dimensions, so each factor is a 1-D
/// momentum sum.
pub fn heat_kernel(t: f64, cfg: &LatticeConfig) -> Result<SpatialField> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok(heat_kernel_unchecked(t, cfg))
}

pub(crate) fn heat_kernel_unchecked(t: f64, cfg: &LatticeConfig) -> SpatialField {
    let factor = heat_kernel_1d(t, cfg);
    let mass = (-t * cfg.mass_squared()).exp();
    let values = (0..cfg.sites())
        .map(|i| {
            let mut idx = i;
            let mut v = mass;
            for _ in 0..cfg.dim {
                v *= factor[idx % cfg.side];
                idx /= cfg.side;
            }
            v
        })
        .collect();
    SpatialField { config: *cfg, values }
}

/// Causal Green function `G(t, ·) = θ(t) G̃ₜ` with `θ(0) = 0`.
pub fn green(t: f64, cfg: &LatticeConfig) -> SpatialField {
    if t > 0.0 {
        heat_kernel_unchecked(t, cfg)
    } else {
        SpatialField::zeros(cfg)
    }
}

/// Periodic convolution `(f ⋆ g)(x) = δ^d Σ_y f(x − y) g(y)`.
pub fn convolve(f: &SpatialField, g: &SpatialField) -> Result<SpatialField> {
    if f.config != g.config {
        return Err(Error::ConfigMismatch);
    }
    let cfg = f.config;
    let n = cfg.sites();
    let vol = cfg.cell_volume();
    let nonzero: Vec<(usize, f64)> =
        g.values.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
    let values = (0..n)
        .map(|x| vol * nonzero.iter().map(|&(y, gy)| f.values[cfg.sub(x, y)] * gy).sum::<f64>())
        .collect();
    Ok(SpatialField { config: cfg, values })
}

/// Lattice Laplacian `Δf(x) = δ⁻²[−2d f(x) + Σ_{|x−y|=δ} f(y)]`.
pub fn laplacian(f: &SpatialField) -> SpatialField {
    let cfg = f.config;
    let mut out = vec![0.0; cfg.sites()];
    laplacian_into(&cfg, &f.values, &mut out);
    SpatialField { config: cfg, values: out }
}

pub(crate) fn laplacian_into(cfg: &LatticeConfig, f: &[f64], out: &mut [f64]) {
    let l = cfg.side;
    let inv = 1.0 / (cfg.spacing * cfg.spacing);
    let two_d = 2.0 * cfg.dim as f64;
    for (x, o) in out.iter_mut().enumerate() {
        let mut acc = -two_d * f[x];
        let mut stride = 1;
        for _ in 0..cfg.dim {
            let c = (x / stride) % l;
            let up = if c + 1 == l { x + stride - l * stride } else { x + stride };
            let down = if c == 0 { x + (l - 1) * stride } else { x - stride };
            acc += f[up] + f[down];
            stride *= l;
        }
        *o = inv * acc;
    }
}
