//! Explicit Euler time stepping of `∂X/∂t = ΔX − m²X − λXᵖ + η` on the
//! lattice and estimation of the stationary two-point function.
//!
//! One step is `X ← X + dt(ΔX − m²X − λXᵖ) + W` with `W` the per-site
//! noise increment of [`crate::levy`]; the increments of step `k` come
//! from the random stream `(seed, k)`, so they coincide with
//! [`crate::levy::sample_noise_increments`] for the same seed.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, SpatialField};
use crate::levy::{step_rng, IncrementSampler, LevyParams};

/// Minimum number of batches for batch-means error bars.
pub const MIN_BATCHES: usize = 20;

/// Time stepping and measurement schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Steps discarded before the first measurement.
    pub burn_in: usize,
    /// Number of retained measurements.
    pub samples: usize,
    /// Steps between measurements.
    pub thinning: usize,
    pub seed: u64,
    pub lambda: f64,
    pub p: usize,
    /// Batches for batch means.
    pub batches: usize,
    /// Keep every measured field (memory grows with `samples`).
    pub keep_snapshots: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            burn_in: 2_000,
            samples: 20_000,
            thinning: 10,
            seed: 1,
            lambda: 0.1,
            p: 3,
            batches: MIN_BATCHES,
            keep_snapshots: false,
        }
    }
}

impl SimConfig {
    /// Checks the explicit-scheme margin `dt·(4d/δ² + m²) < 0.5` and the
    /// measurement schedule.
    pub fn validate(&self, cfg: &LatticeConfig) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidTimeStep(self.dt));
        }
        let margin = self.dt * cfg.max_mu_squared();
        if margin >= 0.5 {
            return Err(Error::Unstable(margin));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.thinning == 0 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        if self.p == 0 {
            return Err(Error::Config("nonlinearity exponent must be at least 1".into()));
        }
        if !self.lambda.is_finite() {
            return Err(Error::Config("coupling must be finite".into()));
        }
        if self.batches == 0 {
            return Err(Error::Config("batches must be at least 1".into()));
        }
        Ok(())
    }

    /// Diagnostics that do not prevent a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.p.is_multiple_of(2) && self.lambda != 0.0 {
            w.push(format!("even exponent p = {} is not confining; blow-up is possible", self.p));
        }
        if self.lambda < 0.0 {
            w.push("negative coupling is not confining".into());
        }
        w
    }

    /// Total number of time steps.
    pub fn total_steps(&self) -> usize {
        self.burn_in + self.samples * self.thinning
    }
}

/// Per-batch sums of lag products and field means.
#[derive(Clone, Debug, PartialEq)]
struct Batch {
    count: usize,
    mean: f64,
    products: Vec<f64>,
}

/// Measurements of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    config: LatticeConfig,
    batches: Vec<Batch>,
    snapshots: Vec<SpatialField>,
    final_field: SpatialField,
    steps: usize,
    sim: Option<SimConfig>,
}

impl Trajectory {
    /// Statistics of an explicit sequence of fields, split into
    /// `batches` consecutive batches.
    pub fn from_snapshots(config: &LatticeConfig, snapshots: Vec<SpatialField>, batches: usize) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::TooFewSamples { samples: 0, batches });
        }
        let mut acc = Accumulator::new(config, snapshots.len(), batches)?;
        for (i, s) in snapshots.iter().enumerate() {
            if s.config() != config {
                return Err(Error::ConfigMismatch);
            }
            acc.record(i, s.values());
        }
        let final_field = snapshots.last().expect("nonempty").clone();
        Ok(Trajectory { config: *config, batches: acc.batches, snapshots, final_field, steps: 0, sim: None })
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn snapshots(&self) -> &[SpatialField] {
        &self.snapshots
    }

    pub fn final_field(&self) -> &SpatialField {
        &self.final_field
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn samples(&self) -> usize {
        self.batches.iter().map(|b| b.count).sum()
    }

    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    pub fn sim_config(&self) -> Option<&SimConfig> {
        self.sim.as_ref()
    }

    /// Pools the batches of independent runs on the same lattice.
    pub fn merge(runs: Vec<Trajectory>) -> Result<Trajectory> {
        let mut it = runs.into_iter();
        let mut first = it.next().ok_or(Error::TooFewSamples { samples: 0, batches: 0 })?;
        for r in it {
            if r.config != first.config {
                return Err(Error::ConfigMismatch);
            }
            first.batches.extend(r.batches);
            first.snapshots.extend(r.snapshots);
            first.steps += r.steps;
        }
        Ok(first)
    }

    /// Per-site mean and variance averaged over all measurements.
    pub fn site_moments(&self) -> (f64, f64) {
        let n: usize = self.samples();
        let mean = self.batches.iter().map(|b| b.mean).sum::<f64>() / n as f64;
        let second = self.batches.iter().map(|b| b.products[0]).sum::<f64>() / n as f64;
        (mean, second - mean * mean)
    }
}

struct Accumulator {
    sites: usize,
    samples: usize,
    batches: Vec<Batch>,
    /// `shift[x·N + y]` = index of `y + x`.
    shift: Vec<usize>,
}

impl Accumulator {
    fn new(cfg: &LatticeConfig, samples: usize, batches: usize) -> Result<Self> {
        if batches == 0 || samples < batches {
            return Err(Error::TooFewSamples { samples, batches });
        }
        let n = cfg.sites();
        let mut shift = vec![0; n * n];
        for x in 0..n {
            for y in 0..n {
                shift[x * n + y] = cfg.add(y, x);
            }
        }
        Ok(Accumulator {
            sites: n,
            samples,
            batches: vec![Batch { count: 0, mean: 0.0, products: vec![0.0; n] }; batches],
            shift,
        })
    }

    fn record(&mut self, index: usize, x: &[f64]) {
        let n = self.sites;
        let b = index * self.batches.len() / self.samples;
        let batch = &mut self.batches[b];
        batch.count += 1;
        batch.mean += x.iter().sum::<f64>() / n as f64;
        let inv = 1.0 / n as f64;
        for (lag, slot) in batch.products.iter_mut().enumerate() {
            let row = &self.shift[lag * n..(lag + 1) * n];
            let mut s = 0.0;
            for y in 0..n {
                s += x[y] * x[row[y]];
            }
            *slot += s * inv;
        }
    }
}

/// Runs the explicit scheme from initial field `f`.
pub fn simulate(params: &LevyParams, sim: &SimConfig, cfg: &LatticeConfig, f: &SpatialField) -> Result<Trajectory> {
    sim.validate(cfg)?;
    if f.config() != cfg {
        return Err(Error::ConfigMismatch);
    }
    let sampler = IncrementSampler::new(params, cfg, sim.dt)?;
    let mut acc = Accumulator::new(cfg, sim.samples, sim.batches)?;
    let n = cfg.sites();
    let m2 = cfg.mass_squared();
    let (dt, lambda, p) = (sim.dt, sim.lambda, sim.p as i32);
    let mut x = f.values().to_vec();
    let neighbors = neighbor_table(cfg);
    let deg = 2 * cfg.dim();
    let inv_d2 = 1.0 / (cfg.spacing() * cfg.spacing());
    let diag = -(deg as f64) * inv_d2 - m2;
    let mut prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut snapshots = Vec::new();
    let mut measured = 0;
    for step in 0..sim.total_steps() {
        let mut rng = step_rng(sim.seed, step as u64);
        sampler.fill(&mut rng, &mut w);
        prev.copy_from_slice(&x);
        let mut check = 0.0;
        for i in 0..n {
            let xi = prev[i];
            let nb: f64 = neighbors[i * deg..(i + 1) * deg].iter().map(|&j| prev[j]).sum();
            // ΔX − m²X − λXᵖ with the lattice Laplacian written out.
            let drift = inv_d2 * nb + diag * xi - lambda * xi.powi(p);
            let v = xi + dt * drift + w[i];
            x[i] = v;
            check += v;
        }
        if !check.is_finite() {
            return Err(Error::BlowUp { step: step + 1 });
        }
        let done = step + 1;
        if done > sim.burn_in && (done - sim.burn_in).is_multiple_of(sim.thinning) {
            acc.record(measured, &x);
            if sim.keep_snapshots {
                snapshots.push(SpatialField::from_values(cfg, x.clone())?);
            }
            measured += 1;
        }
    }
    Ok(Trajectory {
        config: *cfg,
        batches: acc.batches,
        snapshots,
        final_field: SpatialField::from_values(cfg, x)?,
        steps: sim.total_steps(),
        sim: Some(sim.clone()),
    })
}

/// Indices of the `2d` nearest neighbours of every site.
fn neighbor_table(cfg: &LatticeConfig) -> Vec<usize> {
    let n = cfg.sites();
    let d = cfg.dim();
    let mut out = Vec::with_capacity(2 * d * n);
    for i in 0..n {
        let c = cfg.coords(i);
        for j in 0..d {
            for step in [1i64, -1] {
                let mut cc: Vec<i64> = c.iter().map(|&v| v as i64).collect();
                cc[j] += step;
                out.push(cfg.index(&cc));
            }
        }
    }
    out
}

/// Independent runs with seeds `seed, seed+1, …` in parallel, pooled.
pub fn simulate_replicas(
    params: &LevyParams,
    sim: &SimConfig,
    cfg: &LatticeConfig,
    f: &SpatialField,
    replicas: usize,
) -> Result<Trajectory> {
    let runs = (0..replicas.max(1))
        .into_par_iter()
        .map(|r| {
            let s = SimConfig { seed: sim.seed.wrapping_add(r as u64), ..sim.clone() };
            simulate(params, &s, cfg, f)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::merge(runs)
}

/// Where a correlation function came from.
#[derive(Clone, Debug, PartialEq)]
pub enum CorrelationSource {
    Simulation(SimConfig),
    Analytic,
    File,
}

/// Two-point function on a set of lags with batch-means error bars.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationFunction {
    config: LatticeConfig,
    /// Lag site indices.
    pub lags: Vec<usize>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Estimate from each batch alone (empty for analytic data).
    pub batch_estimates: Vec<Vec<f64>>,
    pub source: CorrelationSource,
}

impl CorrelationFunction {
    /// Exact values of a field on all lags, zero error.
    pub fn analytic(field: &SpatialField) -> Self {
        let n = field.config().sites();
        CorrelationFunction {
            config: *field.config(),
            lags: (0..n).collect(),
            mean: field.values().to_vec(),
            stderr: vec![0.0; n],
            batch_estimates: Vec::new(),
            source: CorrelationSource::Analytic,
        }
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    /// Values of `field` on this function's lags.
    pub fn restrict(&self, field: &SpatialField) -> Result<Vec<f64>> {
        if *field.config() != self.config {
            return Err(Error::LagMismatch);
        }
        Ok(self.lags.iter().map(|&l| field.values()[l]).collect())
    }

    /// Same estimate from a single batch, for jackknife resampling.
    pub fn leave_one_out(&self, batch: usize) -> Option<Vec<f64>> {
        let b = self.batch_estimates.len();
        if b < 2 || batch >= b {
            return None;
        }
        Some(
            (0..self.lags.len())
                .map(|i| {
                    let s: f64 = self.batch_estimates.iter().map(|e| e[i]).sum();
                    (s - self.batch_estimates[batch][i]) / (b - 1) as f64
                })
                .collect(),
        )
    }

    /// CSV: lag coordinates, mean, stderr, then one column per batch.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let d = self.config.dim();
        let mut header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
        header.push("mean".into());
        header.push("stderr".into());
        header.extend((0..self.batch_estimates.len()).map(|b| format!("batch{b}")));
        wr.write_record(&header)?;
        for (i, &lag) in self.lags.iter().enumerate() {
            let mut row: Vec<String> = self.config.coords(lag).iter().map(ToString::to_string).collect();
            row.push(format!("{:.16e}", self.mean[i]));
            row.push(format!("{:.16e}", self.stderr[i]));
            row.extend(self.batch_estimates.iter().map(|e| format!("{:.16e}", e[i])));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the format of [`CorrelationFunction::write_csv`]; batch
    /// columns are optional.
    pub fn read_csv<R: Read>(config: &LatticeConfig, r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let d = config.dim();
        let col = |name: &str| header.iter().position(|h| h == name);
        let coord_cols: Vec<usize> = (0..d)
            .map(|j| col(&format!("x{j}")).ok_or_else(|| Error::Config(format!("missing column x{j}"))))
            .collect::<Result<_>>()?;
        let mean_col = col("mean").ok_or_else(|| Error::Config("missing column mean".into()))?;
        let se_col = col("stderr");
        let batch_cols: Vec<usize> = (0..).map_while(|b| col(&format!("batch{b}"))).collect();
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number {s:?}: {e}")));
        let mut out = CorrelationFunction {
            config: *config,
            lags: Vec::new(),
            mean: Vec::new(),
            stderr: Vec::new(),
            batch_estimates: vec![Vec::new(); batch_cols.len()],
            source: CorrelationSource::File,
        };
        for rec in rd.records() {
            let rec = rec?;
            let coords: Vec<i64> = coord_cols
                .iter()
                .map(|&c| rec[c].trim().parse::<i64>().map_err(|e| Error::Config(format!("bad lag: {e}"))))
                .collect::<Result<_>>()?;
            out.lags.push(config.index(&coords));
            out.mean.push(parse(&rec[mean_col])?);
            out.stderr.push(match se_col {
                Some(c) => parse(&rec[c])?,
                None => 0.0,
            });
            for (b, &c) in batch_cols.iter().enumerate() {
                out.batch_estimates[b].push(parse(&rec[c])?);
            }
        }
        Ok(out)
    }
}

/// Lags whose minimal-image coordinates are all at most `max_lag`.
pub fn lags_within(cfg: &LatticeConfig, max_lag: usize) -> Vec<usize> {
    (0..cfg.sites())
        .filter(|&i| cfg.coords(i).iter().all(|&c| c.min(cfg.side() - c) <= max_lag))
        .collect()
}

/// `F̂(x) = ⟨X(y)X(y+x)⟩ − ⟨X⟩²` averaged over measurements and sites,
/// with batch-means standard errors.
pub fn estimate_correlation(traj: &Trajectory, max_lag: usize) -> Result<CorrelationFunction> {
    let b = traj.batches.len();
    let samples = traj.samples();
    if b < MIN_BATCHES || traj.batches.iter().any(|x| x.count == 0) {
        return Err(Error::TooFewSamples { samples, batches: b });
    }
    let lags = lags_within(&traj.config, max_lag);
    let estimate = |count: usize, mean_sum: f64, products: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mean = mean_sum / count as f64;
        lags.iter().map(|&l| products(l) / count as f64 - mean * mean).collect()
    };
    let batch_estimates: Vec<Vec<f64>> =
        traj.batches.iter().map(|bt| estimate(bt.count, bt.mean, &|l| bt.products[l])).collect();
    let total_mean: f64 = traj.batches.iter().map(|bt| bt.mean).sum();
    let mean = estimate(samples, total_mean, &|l| traj.batches.iter().map(|bt| bt.products[l]).sum());
    let stderr = (0..lags.len())
        .map(|i| {
            let avg = batch_estimates.iter().map(|e| e[i]).sum::<f64>() / b as f64;
            let var = batch_estimates.iter().map(|e| (e[i] - avg).powi(2)).sum::<f64>() / (b - 1) as f64;
            (var / b as f64).sqrt()
        })
        .collect();
    let source = match &traj.sim {
        Some(s) => CorrelationSource::Simulation(s.clone()),
        None => CorrelationSource::File,
    };
    Ok(CorrelationFunction { config: traj.config, lags, mean, stderr, batch_estimates, source })
}
