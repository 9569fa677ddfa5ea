//! Batch entry points: a plain `key = value` configuration with
//! `--key value` overrides, and one function per subcommand.
//!
//! Every run writes its outputs into the directory `out`, together with
//! the effective configuration as `config.txt`; feeding that file back
//! through `--config` reproduces the run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::evaluator::{first_order_kernels, truncated_correlation_series, SeriesOptions, TimeMode, DEFAULT_ORDER_CAP};
use crate::fitting::{fit_first_order, fit_first_order_with_tadpole, FitResult, KurtosisThresholds};
use crate::graphs::{drop_tadpoles, enumerate_graphs, filter_connected, format_graph_records, prune_odd};
use crate::lattice::{LatticeConfig, SpatialField};
use crate::levy::LevyParams;
use crate::quadrature::{QuadratureScheme, QuadratureSpec};
use crate::simulator::{estimate_correlation, lags_within, simulate, CorrelationFunction, SimConfig};
use crate::trees::{enumerate_trees, format_tree_records};

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Unknown key, malformed value or violated parameter invariant.
pub const EXIT_CONFIG: i32 = 2;
/// Blow-up, degenerate design or another numeric failure.
pub const EXIT_NUMERIC: i32 = 3;
/// Missing or unreadable input, unwritable output.
pub const EXIT_IO: i32 = 4;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        Error::BlowUp { .. } | Error::DegenerateDesign(_) | Error::TooFewSamples { .. } => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    /// Rooted trees of one order with multiplicities.
    Trees,
    /// Parisi–Wu graphs of one order.
    Graphs,
    /// Graph values and series coefficients of the truncated function.
    Eval,
    /// Monte Carlo run and empirical two-point function.
    Simulate,
    /// Least-squares identification from a two-point function file.
    Fit,
    /// Simulate, fit and classify.
    Pipeline,
    /// Print the effective configuration.
    Config,
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "trees" => Subcommand::Trees,
            "graphs" => Subcommand::Graphs,
            "eval" => Subcommand::Eval,
            "simulate" => Subcommand::Simulate,
            "fit" => Subcommand::Fit,
            "pipeline" => Subcommand::Pipeline,
            "config" => Subcommand::Config,
            other => return Err(Error::Config(format!("unknown subcommand {other:?}"))),
        })
    }
}

/// Kernels used as fit templates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelChoice {
    /// Continuous-time graph values.
    Continuum,
    /// Kernels of the explicit Euler chain with the configured `dt`.
    Discrete,
}

/// Every tunable of every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub spacing: f64,
    pub side: usize,
    pub mass: f64,

    pub a: f64,
    pub sigma2: f64,
    pub z: f64,
    /// Jump law as `(size, weight)` atoms.
    pub atoms: Vec<(f64, f64)>,

    pub dt: f64,
    pub burn_in: usize,
    pub samples: usize,
    pub thinning: usize,
    pub seed: u64,
    pub lambda: f64,
    pub p: usize,
    pub batches: usize,

    /// `None`: `10/m²`.
    pub t_max: Option<f64>,
    pub nodes_per_unit: usize,
    pub scheme: QuadratureScheme,
    /// `None`: `1/μ²_max`.
    pub smallest_panel: Option<f64>,

    /// Tree order for `trees`.
    pub order: usize,
    /// Number of points of the correlation function.
    pub points: usize,
    /// Perturbative order for `graphs` and highest order for `eval`.
    pub max_order: usize,
    pub order_cap: usize,
    /// `None`: half the side length.
    pub max_lag: Option<usize>,
    pub connected: bool,
    pub equilibrium: bool,
    pub even_only: bool,
    pub drop_tadpoles: bool,
    /// Evaluation time for `eval`; `None` is the equilibrium limit.
    pub time: Option<f64>,
    /// Constant initial field.
    pub initial: f64,
    pub kernels: KernelChoice,
    /// Include the tadpole term in the fit model.
    pub tadpole: bool,
    pub k_zero: f64,
    pub k_jump: f64,
    /// Two-point function read by `fit`; `None`: `out/correlation.csv`.
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub timestamp: bool,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = KurtosisThresholds::default();
        RunConfig {
            dim: 1,
            spacing: 1.0,
            side: 32,
            mass: 1.0,
            a: 0.0,
            sigma2: 1.0,
            z: 0.0,
            atoms: Vec::new(),
            dt: 0.05,
            burn_in: 400,
            samples: 400_000,
            thinning: 10,
            seed: 1,
            lambda: 0.1,
            p: 3,
            batches: 20,
            t_max: None,
            nodes_per_unit: 8,
            scheme: QuadratureScheme::GaussLegendre,
            smallest_panel: None,
            order: 1,
            points: 2,
            max_order: 1,
            order_cap: DEFAULT_ORDER_CAP,
            max_lag: None,
            connected: false,
            equilibrium: false,
            even_only: false,
            drop_tadpoles: false,
            time: None,
            initial: 0.0,
            kernels: KernelChoice::Discrete,
            tadpole: true,
            k_zero: t.zero,
            k_jump: t.jump,
            input: None,
            out: PathBuf::from("."),
            timestamp: true,
            threads: 0,
        }
    }
}

/// Keys that may be given as bare flags.
const BOOL_KEYS: [&str; 6] = ["connected", "equilibrium", "even_only", "drop_tadpoles", "timestamp", "tadpole"];

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::Config(format!("{key} = {v:?}: {e}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key} = {v:?}: expected true or false"))),
    }
}

fn parse_auto<T: FromStr>(key: &str, v: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if v == "auto" {
        Ok(None)
    } else {
        parse_num(key, v).map(Some)
    }
}

/// `size:weight` pairs separated by commas; `none` for no jumps.
fn parse_atoms(v: &str) -> Result<Vec<(f64, f64)>> {
    if v.is_empty() || v == "none" {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let (s, w) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("atom {item:?} is not size:weight")))?;
            Ok((parse_num("atoms", s.trim())?, parse_num("atoms", w.trim())?))
        })
        .collect()
}

fn auto<T: std::fmt::Debug>(v: &Option<T>) -> String {
    v.as_ref().map_or("auto".to_string(), |x| format!("{x:?}"))
}

impl RunConfig {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        let k = key.as_str();
        let v = value.trim();
        match k {
            "dim" => self.dim = parse_num(k, v)?,
            "spacing" => self.spacing = parse_num(k, v)?,
            "side" => self.side = parse_num(k, v)?,
            "mass" => self.mass = parse_num(k, v)?,
            "a" => self.a = parse_num(k, v)?,
            "sigma2" => self.sigma2 = parse_num(k, v)?,
            "z" => self.z = parse_num(k, v)?,
            "atoms" => self.atoms = parse_atoms(v)?,
            "dt" => self.dt = parse_num(k, v)?,
            "burn_in" => self.burn_in = parse_num(k, v)?,
            "samples" => self.samples = parse_num(k, v)?,
            "thinning" => self.thinning = parse_num(k, v)?,
            "seed" => self.seed = parse_num(k, v)?,
            "lambda" => self.lambda = parse_num(k, v)?,
            "p" => self.p = parse_num(k, v)?,
            "batches" => self.batches = parse_num(k, v)?,
            "t_max" => self.t_max = parse_auto(k, v)?,
            "nodes_per_unit" => self.nodes_per_unit = parse_num(k, v)?,
            "scheme" => {
                self.scheme = match v {
                    "gauss" | "gauss_legendre" => QuadratureScheme::GaussLegendre,
                    "trapezoid" => QuadratureScheme::Trapezoid,
                    _ => return Err(Error::Config(format!("scheme = {v:?}: expected gauss or trapezoid"))),
                }
            }
            "smallest_panel" => self.smallest_panel = parse_auto(k, v)?,
            "order" => self.order = parse_num(k, v)?,
            "points" => self.points = parse_num(k, v)?,
            "max_order" => self.max_order = parse_num(k, v)?,
            "order_cap" => self.order_cap = parse_num(k, v)?,
            "max_lag" => self.max_lag = parse_auto(k, v)?,
            "connected" => self.connected = parse_bool(k, v)?,
            "equilibrium" => self.equilibrium = parse_bool(k, v)?,
            "even_only" => self.even_only = parse_bool(k, v)?,
            "drop_tadpoles" => self.drop_tadpoles = parse_bool(k, v)?,
            "time" => self.time = if v == "inf" { None } else { Some(parse_num(k, v)?) },
            "initial" => self.initial = parse_num(k, v)?,
            "kernels" => {
                self.kernels = match v {
                    "discrete" => KernelChoice::Discrete,
                    "continuum" => KernelChoice::Continuum,
                    _ => return Err(Error::Config(format!("kernels = {v:?}: expected discrete or continuum"))),
                }
            }
            "tadpole" => self.tadpole = parse_bool(k, v)?,
            "k_zero" => self.k_zero = parse_num(k, v)?,
            "k_jump" => self.k_jump = parse_num(k, v)?,
            "input" => self.input = if v == "auto" { None } else { Some(PathBuf::from(v)) },
            "out" => self.out = PathBuf::from(v),
            "timestamp" => self.timestamp = parse_bool(k, v)?,
            "threads" => self.threads = parse_num(k, v)?,
            _ => return Err(Error::UnknownKey(key.clone())),
        }
        Ok(())
    }

    /// Applies a `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    /// The effective configuration as `key = value` lines; reading it
    /// back yields an identical configuration.
    pub fn dump(&self) -> String {
        let atoms = if self.atoms.is_empty() {
            "none".to_string()
        } else {
            self.atoms.iter().map(|(s, w)| format!("{s:?}:{w:?}")).collect::<Vec<_>>().join(", ")
        };
        let scheme = match self.scheme {
            QuadratureScheme::GaussLegendre => "gauss",
            QuadratureScheme::Trapezoid => "trapezoid",
        };
        let kernels = match self.kernels {
            KernelChoice::Discrete => "discrete",
            KernelChoice::Continuum => "continuum",
        };
        let entries: Vec<(&str, String)> = vec![
            ("dim", self.dim.to_string()),
            ("spacing", format!("{:?}", self.spacing)),
            ("side", self.side.to_string()),
            ("mass", format!("{:?}", self.mass)),
            ("a", format!("{:?}", self.a)),
            ("sigma2", format!("{:?}", self.sigma2)),
            ("z", format!("{:?}", self.z)),
            ("atoms", atoms),
            ("dt", format!("{:?}", self.dt)),
            ("burn_in", self.burn_in.to_string()),
            ("samples", self.samples.to_string()),
            ("thinning", self.thinning.to_string()),
            ("seed", self.seed.to_string()),
            ("lambda", format!("{:?}", self.lambda)),
            ("p", self.p.to_string()),
            ("batches", self.batches.to_string()),
            ("t_max", auto(&self.t_max)),
            ("nodes_per_unit", self.nodes_per_unit.to_string()),
            ("scheme", scheme.to_string()),
            ("smallest_panel", auto(&self.smallest_panel)),
            ("order", self.order.to_string()),
            ("points", self.points.to_string()),
            ("max_order", self.max_order.to_string()),
            ("order_cap", self.order_cap.to_string()),
            ("max_lag", auto(&self.max_lag)),
            ("connected", self.connected.to_string()),
            ("equilibrium", self.equilibrium.to_string()),
            ("even_only", self.even_only.to_string()),
            ("drop_tadpoles", self.drop_tadpoles.to_string()),
            ("time", self.time.map_or("inf".to_string(), |t| format!("{t:?}"))),
            ("initial", format!("{:?}", self.initial)),
            ("kernels", kernels.to_string()),
            ("tadpole", self.tadpole.to_string()),
            ("k_zero", format!("{:?}", self.k_zero)),
            ("k_jump", format!("{:?}", self.k_jump)),
            ("input", self.input.as_ref().map_or("auto".to_string(), |p| p.display().to_string())),
            ("out", self.out.display().to_string()),
            ("timestamp", self.timestamp.to_string()),
            ("threads", self.threads.to_string()),
        ];
        entries.into_iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k} = {v}");
            s
        })
    }

    pub fn lattice(&self) -> Result<LatticeConfig> {
        LatticeConfig::new(self.dim, self.spacing, self.side, self.mass)
    }

    pub fn noise(&self) -> Result<LevyParams> {
        LevyParams::new(self.a, self.sigma2, self.z, self.atoms.clone())
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig {
            dt: self.dt,
            burn_in: self.burn_in,
            samples: self.samples,
            thinning: self.thinning,
            seed: self.seed,
            lambda: self.lambda,
            p: self.p,
            batches: self.batches,
            keep_snapshots: false,
        }
    }

    pub fn quadrature(&self, cfg: &LatticeConfig) -> Result<QuadratureSpec> {
        QuadratureSpec::new(
            self.t_max.unwrap_or(10.0 / cfg.mass_squared()),
            self.nodes_per_unit,
            self.scheme,
            self.smallest_panel.unwrap_or(1.0 / cfg.max_mu_squared()),
        )
    }

    pub fn thresholds(&self) -> Result<KurtosisThresholds> {
        if !(self.k_zero >= 0.0 && self.k_jump > self.k_zero) {
            return Err(Error::Config(format!(
                "kurtosis thresholds need 0 <= k_zero < k_jump, got {} and {}",
                self.k_zero, self.k_jump
            )));
        }
        Ok(KurtosisThresholds { zero: self.k_zero, jump: self.k_jump })
    }

    pub fn lag_radius(&self) -> usize {
        self.max_lag.unwrap_or(self.side / 2)
    }

    /// Checks every parameter against its module's invariants.
    pub fn validate(&self) -> Result<()> {
        let cfg = self.lattice()?;
        self.noise()?;
        self.sim().validate(&cfg)?;
        self.quadrature(&cfg)?;
        self.thresholds()?;
        if self.points == 0 {
            return Err(Error::Config("points must be at least 1".into()));
        }
        if self.max_order > self.order_cap {
            return Err(Error::OrderCap { requested: self.max_order, cap: self.order_cap });
        }
        if let Some(t) = self.time {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("time must be positive or inf, got {t}")));
            }
        }
        if !self.initial.is_finite() {
            return Err(Error::Config("initial value must be finite".into()));
        }
        Ok(())
    }
}

/// Parses `argv` (without the program name): a subcommand followed by
/// `--config FILE`, `--key value`, bare boolean flags and `--no-flag`.
/// The config file is applied first, then the overrides in order.
pub fn parse_args(args: &[String]) -> Result<(Subcommand, RunConfig)> {
    let (cmd, rest) = args.split_first().ok_or_else(|| Error::Config("missing subcommand".into()))?;
    let cmd: Subcommand = cmd.parse()?;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut config_file = None;
    let mut i = 0;
    while i < rest.len() {
        let flag = rest[i]
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected --key, got {:?}", rest[i])))?
            .replace('-', "_");
        let next = rest.get(i + 1);
        if flag == "config" {
            config_file = Some(next.ok_or_else(|| Error::Config("--config needs a file".into()))?.clone());
            i += 2;
        } else if let Some(b) = flag.strip_prefix("no_").filter(|b| BOOL_KEYS.contains(b)) {
            overrides.push((b.to_string(), "false".into()));
            i += 1;
        } else if BOOL_KEYS.contains(&flag.as_str()) {
            match next.map(String::as_str) {
                Some(v @ ("true" | "false")) => {
                    overrides.push((flag, v.to_string()));
                    i += 2;
                }
                _ => {
                    overrides.push((flag, "true".into()));
                    i += 1;
                }
            }
        } else {
            let v = next.ok_or_else(|| Error::Config(format!("--{flag} needs a value")))?;
            overrides.push((flag, v.clone()));
            i += 2;
        }
    }
    let mut cfg = match config_file {
        Some(f) => RunConfig::from_file(Path::new(&f))?,
        None => RunConfig::default(),
    };
    for (k, v) in overrides {
        cfg.set(&k, &v)?;
    }
    Ok((cmd, cfg))
}

/// Files written and a human-readable summary.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl RunOutput {
    fn write(&mut self, cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
        let path = cfg.out.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    /// Text file with an optional timestamp header line.
    fn write_text(&mut self, cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
        let mut s = String::new();
        if cfg.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            let _ = writeln!(s, "# generated_at = {secs}");
        }
        s.push_str(contents);
        self.write(cfg, name, &s)
    }
}

/// Validates the configuration and runs one subcommand on a thread pool
/// of `threads` workers.
pub fn run(cmd: Subcommand, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if cmd == Subcommand::Config {
        return Ok(RunOutput { files: Vec::new(), summary: cfg.dump() });
    }
    fs::create_dir_all(&cfg.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut out = RunOutput::default();
        out.write_text(cfg, "config.txt", &cfg.dump())?;
        match cmd {
            Subcommand::Trees => run_trees(cfg, &mut out)?,
            Subcommand::Graphs => run_graphs(cfg, &mut out)?,
            Subcommand::Eval => run_eval(cfg, &mut out)?,
            Subcommand::Simulate => {
                run_simulate(cfg, &mut out)?;
            }
            Subcommand::Fit => {
                let lattice = cfg.lattice()?;
                let input = cfg.input.clone().unwrap_or_else(|| cfg.out.join("correlation.csv"));
                let f_em = CorrelationFunction::read_csv(&lattice, fs::File::open(&input)?)?;
                run_fit(cfg, &f_em, &mut out)?;
            }
            Subcommand::Pipeline => {
                let f_em = run_simulate(cfg, &mut out)?;
                run_fit(cfg, &f_em, &mut out)?;
            }
            Subcommand::Config => unreachable!("handled above"),
        }
        Ok(out)
    })
}

fn run_trees(cfg: &RunConfig, out: &mut RunOutput) -> Result<()> {
    let trees = enumerate_trees(cfg.order, cfg.p);
    let text = format_tree_records(&trees);
    out.write_text(cfg, "trees.txt", &text)?;
    let _ = writeln!(out.summary, "{} trees of order {} (p = {})", trees.len(), cfg.order, cfg.p);
    out.summary.push_str(&text);
    Ok(())
}

fn run_graphs(cfg: &RunConfig, out: &mut RunOutput) -> Result<()> {
    let mut gs = enumerate_graphs(cfg.max_order, cfg.points, cfg.p, cfg.equilibrium);
    if cfg.connected {
        gs = filter_connected(gs);
    }
    if cfg.even_only {
        gs = prune_odd(gs);
    }
    if cfg.drop_tadpoles {
        gs = drop_tadpoles(gs);
    }
    let text = format_graph_records(&gs);
    out.write_text(cfg, "graphs.txt", &text)?;
    let _ = writeln!(
        out.summary,
        "{} graphs with {} roots at order {} (p = {})",
        gs.len(),
        cfg.points,
        cfg.max_order,
        cfg.p
    );
    out.summary.push_str(&text);
    Ok(())
}

/// Evaluation points: first root at the origin, the others anywhere
/// within the lag radius.
fn eval_points(cfg: &RunConfig, lattice: &LatticeConfig) -> Vec<Vec<usize>> {
    let lags = lags_within(lattice, cfg.lag_radius());
    let mut points = vec![vec![0]];
    for _ in 1..cfg.points {
        points = points
            .into_iter()
            .flat_map(|pt| {
                lags.iter().map(move |&l| {
                    let mut q = pt.clone();
                    q.push(l);
                    q
                })
            })
            .collect();
    }
    points
}

fn run_eval(cfg: &RunConfig, out: &mut RunOutput) -> Result<()> {
    let lattice = cfg.lattice()?;
    let quad = cfg.quadrature(&lattice)?;
    let legs = cfg.points + cfg.max_order * cfg.p.saturating_sub(1);
    let cumulants = cfg.noise()?.cumulants(legs.max(1))?;
    let opts = SeriesOptions {
        points: cfg.points,
        max_order: cfg.max_order,
        p: cfg.p,
        drop_tadpoles: cfg.drop_tadpoles,
        order_cap: cfg.order_cap,
    };
    let mode = match cfg.time {
        None => TimeMode::Equilibrium,
        Some(t) => TimeMode::Finite { t, initial: SpatialField::constant(&lattice, cfg.initial) },
    };
    let points = eval_points(cfg, &lattice);
    let series = truncated_correlation_series(&opts, &points, &cumulants, &lattice, &quad, &mode)?;
    let mut buf = Vec::new();
    series.write_terms_csv(&lattice, &mut buf)?;
    out.write(cfg, "eval_terms.csv", &String::from_utf8_lossy(&buf))?;
    buf.clear();
    series.write_coefficients_csv(&lattice, &mut buf)?;
    out.write(cfg, "eval_coefficients.csv", &String::from_utf8_lossy(&buf))?;
    buf.clear();
    series.write_assembled_csv(&lattice, cfg.lambda, &mut buf)?;
    out.write(cfg, "eval_assembled.csv", &String::from_utf8_lossy(&buf))?;
    let graphs: usize = series.orders.iter().map(|o| o.terms.len()).sum();
    let _ = writeln!(
        out.summary,
        "evaluated {graphs} graphs through order {} at {} points",
        cfg.max_order,
        points.len()
    );
    Ok(())
}

fn run_simulate(cfg: &RunConfig, out: &mut RunOutput) -> Result<CorrelationFunction> {
    let lattice = cfg.lattice()?;
    let params = cfg.noise()?;
    let sim = cfg.sim();
    let traj = simulate(&params, &sim, &lattice, &SpatialField::constant(&lattice, cfg.initial))?;
    let corr = estimate_correlation(&traj, cfg.lag_radius())?;
    let mut buf = Vec::new();
    corr.write_csv(&mut buf)?;
    out.write(cfg, "correlation.csv", &String::from_utf8_lossy(&buf))?;
    let (mean, var) = traj.site_moments();
    let mut stats = String::new();
    let _ = writeln!(stats, "steps = {}", traj.steps());
    let _ = writeln!(stats, "samples = {}", traj.samples());
    let _ = writeln!(stats, "batches = {}", traj.batch_count());
    let _ = writeln!(stats, "site_mean = {mean:.16e}");
    let _ = writeln!(stats, "site_variance = {var:.16e}");
    for w in sim.warnings() {
        let _ = writeln!(stats, "warning = {w}");
    }
    out.write_text(cfg, "simulate_stats.txt", &stats)?;
    out.summary.push_str(&stats);
    Ok(corr)
}

fn run_fit(cfg: &RunConfig, f_em: &CorrelationFunction, out: &mut RunOutput) -> Result<FitResult> {
    let lattice = cfg.lattice()?;
    if *f_em.config() != lattice {
        return Err(Error::ConfigMismatch);
    }
    let quad = cfg.quadrature(&lattice)?;
    let dt = match cfg.kernels {
        KernelChoice::Discrete => Some(cfg.dt),
        KernelChoice::Continuum => None,
    };
    let k = first_order_kernels(&lattice, &quad, dt)?;
    let fit = if cfg.tadpole {
        fit_first_order_with_tadpole(f_em, &k.p1, &k.p2, &k.tadpole, cfg.lambda)?
    } else {
        fit_first_order(f_em, &k.p1, &k.p2, cfg.lambda)?
    };
    let report = fit.report(&cfg.thresholds()?);
    out.write_text(cfg, "fit_report.txt", &report)?;
    out.summary.push_str(&report);
    Ok(fit)
}
