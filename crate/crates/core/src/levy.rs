//! Lévy noise with all moments finite: drift `a`, Gaussian variance
//! density `σ²`, jump intensity `z` and a finite jump-size law `r`.
//!
//! The n-th cumulant density is `c_n = δ_{n1}·a + δ_{n2}·σ² + z·Σ wᵢ sᵢⁿ`.
//! On a lattice the noise integrated over one cell and one time step has
//! k-th cumulant `c_k · dt · δ^{d(1−k)}`: the white-noise density is
//! integrated over a space-time volume `dt·δ^d` and the field value is
//! that integral divided by the cell volume `δ^d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, SpatialField};

/// Parameters of the noise.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyParams {
    a: f64,
    sigma2: f64,
    z: f64,
    atoms: Vec<(f64, f64)>,
}

impl LevyParams {
    /// `atoms` lists `(jump size, probability)`; it may be empty only
    /// when `z = 0`.
    pub fn new(a: f64, sigma2: f64, z: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidNoise(format!("drift must be finite, got {a}")));
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidNoise(format!("sigma2 must be >= 0, got {sigma2}")));
        }
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::InvalidNoise(format!("jump intensity must be >= 0, got {z}")));
        }
        for &(s, w) in &atoms {
            if s == 0.0 || !s.is_finite() {
                return Err(Error::InvalidNoise(format!("jump atom must be finite and nonzero, got {s}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidNoise(format!("atom weight must be positive, got {w}")));
            }
        }
        if !atoms.is_empty() {
            let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidNoise(format!("atom weights sum to {total}, not 1")));
            }
        } else if z > 0.0 {
            return Err(Error::InvalidNoise("positive jump intensity needs a jump law".into()));
        }
        Ok(LevyParams { a, sigma2, z, atoms })
    }

    /// Centered Gaussian noise with variance density `sigma2`.
    pub fn gaussian(sigma2: f64) -> Result<Self> {
        Self::new(0.0, sigma2, 0.0, Vec::new())
    }

    /// Pure compound-Poisson noise with jumps `±size` of equal probability.
    pub fn rademacher(z: f64, size: f64) -> Result<Self> {
        Self::new(0.0, 0.0, z, vec![(-size, 0.5), (size, 0.5)])
    }

    pub fn drift(&self) -> f64 {
        self.a
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn intensity(&self) -> f64 {
        self.z
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Law with every jump size multiplied by `c`.
    pub fn scale_jumps(&self, c: f64) -> Result<Self> {
        Self::new(self.a, self.sigma2, self.z, self.atoms.iter().map(|&(s, w)| (c * s, w)).collect())
    }

    /// Whether the jump law is invariant under `s → −s`.
    pub fn is_symmetric(&self) -> bool {
        self.atoms.iter().all(|&(s, w)| {
            self.atoms.iter().any(|&(t, v)| t == -s && v == w)
        })
    }

    pub fn cumulants(&self, max_order: usize) -> Result<CumulantSet> {
        (1..=max_order).map(|n| cumulant(n, self)).collect::<Result<Vec<_>>>().map(CumulantSet::new)
    }
}

/// Cumulant densities `c₁ … c_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantSet {
    c: Vec<f64>,
}

impl CumulantSet {
    pub fn new(c: Vec<f64>) -> Self {
        CumulantSet { c }
    }

    /// Only `c₂` and `c₄` nonzero: the symmetric first-order model.
    pub fn symmetric(c2: f64, c4: f64) -> Self {
        CumulantSet { c: vec![0.0, c2, 0.0, c4] }
    }

    /// `c_n`, zero beyond the stored range.
    pub fn get(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.c.get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn max_order(&self) -> usize {
        self.c.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn odd_vanish(&self) -> bool {
        self.c.iter().step_by(2).all(|&x| x == 0.0)
    }
}

/// `c_n = δ_{n1}·a + δ_{n2}·σ² + z·Σ wᵢ sᵢⁿ`.
pub fn cumulant(n: usize, params: &LevyParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroCumulantOrder);
    }
    let jumps: f64 = params.atoms.iter().map(|&(s, w)| w * s.powi(n as i32)).sum();
    let mut c = params.z * jumps;
    match n {
        1 => c += params.a,
        2 => c += params.sigma2,
        _ => {}
    }
    Ok(c)
}

/// Per-site sampler of noise increments over one cell and one step.
#[derive(Clone, Debug)]
pub struct IncrementSampler {
    mean: f64,
    gauss_sd: f64,
    poisson: Option<Poisson<f64>>,
    jump_scale: f64,
    cumulative: Vec<f64>,
    sizes: Vec<f64>,
}

impl IncrementSampler {
    pub fn new(params: &LevyParams, cfg: &LatticeConfig, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidTimeStep(dt));
        }
        let vol = cfg.cell_volume();
        let rate = params.z * dt * vol;
        let poisson = if rate > 0.0 {
            Some(Poisson::new(rate).map_err(|e| Error::InvalidNoise(e.to_string()))?)
        } else {
            None
        };
        let mut acc = 0.0;
        let cumulative = params
            .atoms
            .iter()
            .map(|&(_, w)| {
                acc += w;
                acc
            })
            .collect();
        Ok(IncrementSampler {
            mean: params.a * dt,
            gauss_sd: (params.sigma2 * dt / vol).sqrt(),
            poisson,
            jump_scale: 1.0 / vol,
            cumulative,
            sizes: params.atoms.iter().map(|&(s, _)| s).collect(),
        })
    }

    /// One increment: `a·dt + √(σ²dt/δ^d)·N(0,1) + Σ_{Poisson(z·dt·δ^d)} s/δ^d`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut w = self.mean;
        if self.gauss_sd > 0.0 {
            let g: f64 = rng.sample(StandardNormal);
            w += self.gauss_sd * g;
        }
        if let Some(pois) = &self.poisson {
            let k = pois.sample(rng) as u64;
            for _ in 0..k {
                w += self.jump_scale * self.draw_size(rng);
            }
        }
        w
    }

    fn draw_size<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sizes.len() == 1 {
            return self.sizes[0];
        }
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c < u).min(self.sizes.len() - 1);
        self.sizes[i]
    }

    /// Fills `out` with independent increments.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for w in out {
            *w = self.sample(rng);
        }
    }
}

/// Random stream for time step `step`: ChaCha8 keyed by `seed`, stream
/// number `step`. Each step's increments are independent of how many
/// other steps are drawn.
pub fn step_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}

/// `steps` fields of per-site noise increments, deterministic in `seed`.
pub fn sample_noise_increments(
    params: &LevyParams,
    cfg: &LatticeConfig,
    dt: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<SpatialField>> {
    let sampler = IncrementSampler::new(params, cfg, dt)?;
    Ok((0..steps)
        .map(|k| {
            let mut rng = step_rng(seed, k as u64);
            let mut field = SpatialField::zeros(cfg);
            sampler.fill(&mut rng, field.values_mut());
            field
        })
        .collect())
}

/// First four sample cumulants of `x` (k-statistics are unnecessary at
/// the sample sizes used here).
pub fn sample_cumulants(x: &[f64]) -> [f64; 4] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    [mean, m2, m3, m4 - 3.0 * m2 * m2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_cumulants() {
        let p = LevyParams::new(1.0, 4.0, 0.0, vec![]).unwrap();
        let c: Vec<f64> = (1..=4).map(|n| cumulant(n, &p).unwrap()).collect();
        assert_eq!(c, vec![1.0, 4.0, 0.0, 0.0]);

        let p = LevyParams::new(0.0, 0.0, 3.0, vec![(1.0, 1.0)]).unwrap();
        for n in 1..=8 {
            assert_eq!(cumulant(n, &p).unwrap(), 3.0);
        }

        let p = LevyParams::rademacher(2.0, 1.0).unwrap();
        for n in 1..=8 {
            let expect = if n % 2 == 0 { 2.0 } else { 0.0 };
            assert_eq!(cumulant(n, &p).unwrap(), expect);
        }
        assert!(matches!(cumulant(0, &p), Err(Error::ZeroCumulantOrder)));
    }

    #[test]
    fn parameter_validation() {
        assert!(LevyParams::new(0.0, -1.0, 0.0, vec![]).is_err());
        assert!(LevyParams::new(0.0, 1.0, 1.0, vec![]).is_err());
        assert!(LevyParams::new(0.0, 1.0, 1.0, vec![(0.0, 1.0)]).is_err());
        assert!(LevyParams::new(0.0, 1.0, 1.0, vec![(1.0, 0.6), (2.0, 0.3)]).is_err());
        assert!(LevyParams::new(0.0, 1.0, 1.0, vec![(1.0, 0.7), (-2.0, 0.3)]).is_ok());
    }

    #[test]
    fn symmetry_detection() {
        assert!(LevyParams::rademacher(1.0, 2.0).unwrap().is_symmetric());
        assert!(!LevyParams::new(0.0, 0.0, 1.0, vec![(1.0, 1.0)]).unwrap().is_symmetric());
    }

    #[test]
    fn sampler_rejects_bad_step() {
        let cfg = LatticeConfig::new(1, 1.0, 4, 1.0).unwrap();
        let p = LevyParams::gaussian(1.0).unwrap();
        assert!(matches!(sample_noise_increments(&p, &cfg, 0.0, 1, 0), Err(Error::InvalidTimeStep(_))));
        assert!(sample_noise_increments(&p, &cfg, -1.0, 1, 0).is_err());
    }

    #[test]
    fn sampler_is_reproducible() {
        let cfg = LatticeConfig::new(1, 0.5, 8, 1.0).unwrap();
        let p = LevyParams::new(0.1, 1.0, 2.0, vec![(1.0, 0.5), (-1.5, 0.5)]).unwrap();
        let a = sample_noise_increments(&p, &cfg, 0.01, 5, 42).unwrap();
        let b = sample_noise_increments(&p, &cfg, 0.01, 5, 42).unwrap();
        let c = sample_noise_increments(&p, &cfg, 0.01, 5, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pure_jump_increments_are_multiples_of_scaled_atom() {
        let cfg = LatticeConfig::new(1, 0.5, 16, 1.0).unwrap();
        let p = LevyParams::new(0.0, 0.0, 4.0, vec![(1.0, 1.0)]).unwrap();
        let w = sample_noise_increments(&p, &cfg, 0.1, 50, 7).unwrap();
        let scale = 1.0 / cfg.cell_volume();
        for f in &w {
            for &v in f.values() {
                let k = v / scale;
                assert!((k - k.round()).abs() < 1e-12 && k >= 0.0);
            }
        }
    }
}
