//! Command-line front end: one subcommand per operation, JSON or CSV out.
//!
//! Parameters come from flags, from a JSON `--config` file whose keys are
//! the flag names in snake_case, or from defaults, in that order of
//! precedence. Every report echoes the resolved parameters and the seed.
//! `--threads` only sizes the worker pool and never changes the output.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exponent::{self, c_of_p, p_of_c};
use crate::harmonic::{
    audit_supermartingale, canonical_gamma, canonical_region, estimate_kappa, estimate_w_decomp,
    estimate_w_direct, search_correction_constants, verify_harmonicity, AuditConfig, AuditReport,
    DecompConfig, DirectConfig, HarmonicityConfig, KappaConfig, WEstimate,
};
use crate::mc::{
    estimate_local_prob, estimate_survival, fit_tail_exponent, geometric_grid, SeedSpec, SurvivalEstimate,
};
use crate::report::{self, num, Envelope, Table};
use crate::special_fn::{eval_psi, eval_v, eval_v_clipped, QuadratureConfig, SpaceTimePoint};
use crate::walk::{enumerate_survival, Boundary, IncrementDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "sqrtwalk", version, about = "Random walks killed at square-root boundaries")]
pub struct Cli {
    /// Master seed for all randomness (default 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file with parameters; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Embed wall time in the report (output is then not reproducible)
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// psi_p(x) = e^{x^2/4} D_p(x)
    Psi(PsiArgs),
    /// V_p(x, t) = t^{p/2} psi_p(x / sqrt t)
    V(VArgs),
    /// p(c) or c(p)
    Exponent(ExponentArgs),
    /// Monte Carlo survival curve P(T > n)
    Simulate(SimulateArgs),
    /// Survival curve plus log-log tail slope
    TailFit(TailFitArgs),
    /// Local probabilities P(a + S(n) in bin, T > n)
    Localprob(LocalProbArgs),
    /// Exact survival for finite increment laws
    Enumerate(EnumerateArgs),
    /// W(a, b) as the limit of E[V(a + S(n), b + n); T > n]
    WDirect(WDirectArgs),
    /// W(a, b) from the drift decomposition
    WDecomp(WDecompArgs),
    /// n-step harmonicity check of W
    HarmonicCheck(HarmonicArgs),
    /// Supermartingale drift audit of the corrected clipped function
    Audit(AuditArgs),
    /// Grid search for correction constants (C, R)
    SearchConstants(SearchArgs),
    /// Tail constant kappa(c)
    Kappa(KappaArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Psi(_) => "psi",
            Command::V(_) => "v",
            Command::Exponent(_) => "exponent",
            Command::Simulate(_) => "simulate",
            Command::TailFit(_) => "tail-fit",
            Command::Localprob(_) => "localprob",
            Command::Enumerate(_) => "enumerate",
            Command::WDirect(_) => "w-direct",
            Command::WDecomp(_) => "w-decomp",
            Command::HarmonicCheck(_) => "harmonic-check",
            Command::Audit(_) => "audit",
            Command::SearchConstants(_) => "search-constants",
            Command::Kappa(_) => "kappa",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DistArgs {
    /// Increment law: gaussian, rademacher, uniform, sym_pareto or finite
    #[arg(long, default_value = "gaussian")]
    pub dist: String,
    /// Tail index of sym_pareto (> 2)
    #[arg(long)]
    pub beta: Option<f64>,
    /// Atoms of a finite law as JSON: [{"value": v, "prob": q}, ...]
    #[arg(long)]
    pub atoms: Option<String>,
}

impl DistArgs {
    pub fn build(&self) -> Result<IncrementDistribution> {
        let d = match self.dist.as_str() {
            "gaussian" => IncrementDistribution::Gaussian,
            "rademacher" => IncrementDistribution::Rademacher,
            "uniform" => IncrementDistribution::Uniform,
            "sym_pareto" | "sym-pareto" => {
                let beta = self
                    .beta
                    .ok_or_else(|| Error::Invalid("sym_pareto needs --beta".into()))?;
                IncrementDistribution::sym_pareto(beta)?
            }
            "finite" | "finite_discrete" => {
                let atoms = self
                    .atoms
                    .as_deref()
                    .ok_or_else(|| Error::Invalid("finite law needs --atoms".into()))?;
                IncrementDistribution::from_atoms_json(atoms)?
            }
            other => return Err(Error::Invalid(format!("unknown distribution {other:?}"))),
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoundaryArgs {
    /// Boundary slope c
    #[arg(long)]
    pub c: Option<f64>,
    /// Start position a (must exceed c sqrt b)
    #[arg(long)]
    pub a: Option<f64>,
    /// Time shift b >= 0
    #[arg(long)]
    pub b: Option<f64>,
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Invalid(format!("missing parameter {name} (flag --{name} or config key)")))
}

impl BoundaryArgs {
    pub fn build(&self) -> Result<Boundary> {
        Boundary::new(need(self.c, "c")?, need(self.a, "a")?, need(self.b, "b")?)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct PsiArgs {
    #[arg(long)]
    pub p: Option<f64>,
    /// One or more points, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct VArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Zero below x = c(p) sqrt t
    #[arg(long)]
    pub clipped: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct ExponentArgs {
    /// Solve p(c)
    #[arg(long)]
    pub c: Option<f64>,
    /// Solve c(p)
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = exponent::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridArgs {
    /// Explicit checkpoints; overrides the geometric grid
    #[arg(long, value_delimiter = ',')]
    pub horizons: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub n_lo: u64,
    #[arg(long, default_value_t = 1024)]
    pub n_hi: u64,
    #[arg(long, default_value_t = 4)]
    pub per_octave: u32,
}

impl GridArgs {
    fn build(&self) -> Vec<u64> {
        if self.horizons.is_empty() {
            geometric_grid(self.n_lo, self.n_hi, self.per_octave.max(1))
        } else {
            self.horizons.clone()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct TailFitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimulateArgs,
    /// Smallest n entering the fit
    #[arg(long, default_value_t = 0)]
    pub n_min: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct LocalProbArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
    #[arg(long)]
    pub n: Option<u64>,
    /// Bins as lo:width, comma separated; width may be inf
    #[arg(long, value_delimiter = ',')]
    pub bins: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct EnumerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct WPointArgs {
    #[arg(long)]
    pub c: Option<f64>,
    /// One or more start positions; all share the same random paths
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Vec<f64>,
    #[arg(long)]
    pub b: Option<f64>,
}

impl WPointArgs {
    fn boundaries(&self) -> Result<Vec<Boundary>> {
        if self.a.is_empty() {
            return Err(Error::Invalid("missing parameter a (flag --a or config key)".into()));
        }
        let (c, b) = (need(self.c, "c")?, need(self.b, "b")?);
        self.a.iter().map(|&a| Boundary::new(c, a, b)).collect()
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct WDirectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub point: WPointArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 16)]
    pub n_start: u64,
    #[arg(long, default_value_t = 1 << 14)]
    pub n_cap: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub plateau_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct WDecompArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub point: WPointArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Path cap; default 100 (1 + a^2), at most 65536
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct HarmonicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value_t = 1)]
    pub steps: u64,
    #[arg(long, default_value_t = 256)]
    pub horizon: u64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.1)]
    pub spacing: f64,
    /// Scale the left side (sensitivity control)
    #[arg(long, default_value_t = 1.0)]
    pub lhs_scale: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct AuditArgs {
    #[arg(long)]
    pub c: Option<f64>,
    /// Auxiliary exponent; default 0.9 p(c)
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub big_c: Option<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    /// Region margin; default c - c(p1)
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    pub t_max: u64,
    #[arg(long, default_value_t = 4096.0)]
    pub d_max: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SearchArgs {
    #[arg(long)]
    pub c: Option<f64>,
    /// Auxiliary exponents; default 0.9 p(c), plus min(0.9, p(c)/2) if p(c) < 1
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p1: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Region margin; default c - c(p1)
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct KappaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 64)]
    pub n_lo: u64,
    #[arg(long, default_value_t = 1 << 14)]
    pub n_hi: u64,
    #[arg(long, default_value_t = 2)]
    pub per_octave: u32,
    /// Paths for the W(a, b) estimate
    #[arg(long, default_value_t = 20_000)]
    pub w_trials: u64,
    /// Horizon for the W(a, b) estimate
    #[arg(long, default_value_t = 1 << 14)]
    pub w_n_max: u64,
}

/// Overlays config-file values on every parameter not given on the
/// command line.
fn merge<T: Serialize + DeserializeOwned>(parsed: &T, m: &ArgMatches, file: &Map<String, Value>) -> Result<T> {
    let mut v = serde_json::to_value(parsed)?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| Error::Invalid("parameters must form an object".into()))?;
    for (k, val) in file {
        if k == "seed" {
            continue;
        }
        if !obj.contains_key(k) {
            return Err(Error::Invalid(format!("unknown config key {k:?}")));
        }
        let from_flag = m
            .try_get_raw(k)
            .ok()
            .and_then(|_| m.value_source(k))
            .is_some_and(|s| s == ValueSource::CommandLine);
        if !from_flag {
            obj.insert(k.clone(), val.clone());
        }
    }
    serde_json::from_value(v).map_err(|e| Error::Invalid(format!("config: {e}")))
}

struct Output {
    seed: Option<u64>,
    /// Defaults that depend on other parameters, echoed into the config.
    resolved: Vec<(&'static str, Value)>,
    result: Value,
    table: Table,
}

fn w_table(ws: &[WEstimate]) -> Table {
    let mut t = Table::new(&["a", "b", "value", "stderr", "method"]);
    for w in ws {
        t.push([num(w.a), num(w.b), num(w.value), num(w.stderr), w.method.as_str().to_string()]);
        for msg in &w.warnings {
            t.notes.push(format!("warning a={}: {msg}", w.a));
        }
    }
    t
}

fn survival_table(curve: &[SurvivalEstimate]) -> Table {
    let mut t = Table::new(&["n", "survivors", "trials", "p_hat", "stderr"]);
    for e in curve {
        t.push([num(e.n), num(e.survivors), num(e.trials), num(e.p_hat), num(e.stderr)]);
    }
    t
}

fn audit_row(t: &mut Table, r: &AuditReport) {
    t.push([
        num(r.config.p1),
        num(r.config.big_c),
        num(r.config.big_r),
        num(r.config.gamma),
        num(r.max_drift),
        num(r.worst.x),
        num(r.worst.t),
        num(r.worst.tolerance),
        r.passed.to_string(),
    ]);
}

const AUDIT_HEADER: [&str; 9] = ["p1", "C", "R", "gamma", "max_drift", "x", "t", "tolerance", "passed"];

fn parse_bin(s: &str) -> Result<(f64, f64)> {
    let (lo, w) = s
        .split_once(':')
        .ok_or_else(|| Error::Invalid(format!("bin {s:?} is not lo:width")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| Error::Invalid(format!("bad number {x:?} in bin {s:?}")))
    };
    Ok((parse(lo)?, parse(w)?))
}

fn default_p1s(c: f64) -> Result<Vec<f64>> {
    let p = p_of_c(c, exponent::DEFAULT_TOL)?.value;
    let mut v = vec![0.9 * p];
    if p < 1.0 {
        v.push((0.5 * p).min(0.9));
    }
    Ok(v)
}

fn execute(cmd: &Command, seed: u64) -> Result<Output> {
    let ss = SeedSpec::new(seed);
    let qc = QuadratureConfig::default();
    Ok(match cmd {
        Command::Psi(a) => {
            let p = need(a.p, "p")?;
            if a.x.is_empty() {
                return Err(Error::Invalid("missing parameter x".into()));
            }
            let mut t = Table::new(&["p", "x", "value", "est_error"]);
            let mut res = Vec::new();
            for &x in &a.x {
                let v = eval_psi(p, x, &qc)?;
                t.push([num(p), num(x), num(v.value), num(v.est_error)]);
                res.push(json!({"p": p, "x": x, "value": v.value, "est_error": v.est_error}));
            }
            Output { seed: None, resolved: vec![], result: Value::Array(res), table: t }
        }
        Command::V(a) => {
            let (p, tt) = (need(a.p, "p")?, need(a.t, "t")?);
            if a.x.is_empty() {
                return Err(Error::Invalid("missing parameter x".into()));
            }
            let mut t = Table::new(&["p", "x", "t", "value"]);
            let mut res = Vec::new();
            for &x in &a.x {
                let pt = SpaceTimePoint::new(x, tt)?;
                let v = if a.clipped { eval_v_clipped(p, pt, &qc)? } else { eval_v(p, pt, &qc)? };
                t.push([num(p), num(x), num(tt), num(v)]);
                res.push(json!({"p": p, "x": x, "t": tt, "value": v}));
            }
            Output { seed: None, resolved: vec![], result: Value::Array(res), table: t }
        }
        Command::Exponent(a) => {
            let (kind, arg, r) = match (a.c, a.p) {
                (Some(c), None) => ("p_of_c", c, p_of_c(c, a.tol)?),
                (None, Some(p)) => ("c_of_p", p, c_of_p(p, a.tol)?),
                _ => return Err(Error::Invalid("give exactly one of --c and --p".into())),
            };
            let mut t = Table::new(&["solve", "input", "value", "residual", "bracket_lo", "bracket_hi", "iterations"]);
            t.push([
                kind.to_string(),
                num(arg),
                num(r.value),
                num(r.residual),
                num(r.bracket_lo),
                num(r.bracket_hi),
                num(r.iterations),
            ]);
            let mut result = serde_json::to_value(r)?;
            result["solve"] = json!(kind);
            Output { seed: None, resolved: vec![], result, table: t }
        }
        Command::Simulate(a) => {
            let curve = estimate_survival(&a.boundary.build()?, &a.dist.build()?, &a.grid.build(), a.trials, ss)?;
            Output { seed: Some(seed), resolved: vec![], result: serde_json::to_value(&curve)?, table: survival_table(&curve) }
        }
        Command::TailFit(a) => {
            let s = &a.sim;
            let curve = estimate_survival(&s.boundary.build()?, &s.dist.build()?, &s.grid.build(), s.trials, ss)?;
            let fit = fit_tail_exponent(&curve, a.n_min)?;
            let mut t = survival_table(&curve);
            t.notes.push(format!(
                "fit: slope={} slope_stderr={} intercept={} n_range={}..{} points={}",
                fit.slope, fit.slope_stderr, fit.intercept, fit.n_range.0, fit.n_range.1, fit.points
            ));
            Output {
                seed: Some(seed),
                resolved: vec![],
                result: json!({"fit": fit, "curve": curve}),
                table: t,
            }
        }
        Command::Localprob(a) => {
            let bins = a.bins.iter().map(|s| parse_bin(s)).collect::<Result<Vec<_>>>()?;
            if bins.is_empty() {
                return Err(Error::Invalid("missing parameter bins".into()));
            }
            let est = estimate_local_prob(&a.boundary.build()?, &a.dist.build()?, need(a.n, "n")?, &bins, a.trials, ss)?;
            let mut t = Table::new(&["n", "bin_lo", "bin_width", "p_hat", "stderr"]);
            for e in &est {
                t.push([num(e.n), num(e.bin_lo), num(e.bin_width), num(e.p_hat), num(e.stderr)]);
            }
            Output { seed: Some(seed), resolved: vec![], result: serde_json::to_value(&est)?, table: t }
        }
        Command::Enumerate(a) => {
            let probs = enumerate_survival(&a.boundary.build()?, &a.dist.build()?, need(a.horizon, "horizon")?)?;
            let mut t = Table::new(&["n", "p"]);
            let mut res = Vec::new();
            for (i, &p) in probs.iter().enumerate() {
                t.push([num(i + 1), num(p)]);
                res.push(json!({"n": i + 1, "p": p}));
            }
            Output { seed: None, resolved: vec![], result: Value::Array(res), table: t }
        }
        Command::WDirect(a) => {
            let dist = a.dist.build()?;
            let cfg = DirectConfig {
                trials: a.trials,
                n_start: a.n_start,
                n_cap: a.n_cap,
                plateau_tol: a.plateau_tol,
            };
            let ws = a
                .point
                .boundaries()?
                .iter()
                .map(|bd| estimate_w_direct(bd, &dist, &cfg, ss))
                .collect::<Result<Vec<_>>>()?;
            Output { seed: Some(seed), resolved: vec![], result: serde_json::to_value(&ws)?, table: w_table(&ws) }
        }
        Command::WDecomp(a) => {
            let dist = a.dist.build()?;
            let cfg = DecompConfig {
                trials: a.trials,
                n_max: a.n_max,
            };
            let ws = a
                .point
                .boundaries()?
                .iter()
                .map(|bd| estimate_w_decomp(bd, &dist, &cfg, ss))
                .collect::<Result<Vec<_>>>()?;
            Output { seed: Some(seed), resolved: vec![], result: serde_json::to_value(&ws)?, table: w_table(&ws) }
        }
        Command::HarmonicCheck(a) => {
            let cfg = HarmonicityConfig {
                steps: a.steps,
                horizon: a.horizon,
                trials: a.trials,
                spacing: a.spacing,
                lhs_scale: a.lhs_scale,
            };
            let r = verify_harmonicity(&a.boundary.build()?, &a.dist.build()?, &cfg, ss)?;
            let mut t = Table::new(&[
                "a", "b", "steps", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "discrepancy", "combined_stderr", "passed",
            ]);
            t.push([
                num(r.a),
                num(r.b),
                num(r.steps),
                num(r.lhs),
                num(r.lhs_stderr),
                num(r.rhs),
                num(r.rhs_stderr),
                num(r.discrepancy),
                num(r.combined_stderr),
                r.passed.to_string(),
            ]);
            Output { seed: Some(seed), resolved: vec![], result: serde_json::to_value(&r)?, table: t }
        }
        Command::Audit(a) => {
            let c = need(a.c, "c")?;
            let p1 = match a.p1 {
                Some(p1) => p1,
                None => default_p1s(c)?[0],
            };
            let cfg = AuditConfig {
                c,
                p1,
                delta: a.delta,
                big_c: need(a.big_c, "C")?,
                big_r: need(a.big_r, "R")?,
                gamma: match a.gamma {
                    Some(g) => g,
                    None => canonical_gamma(c, p1)?,
                },
                t_max: a.t_max,
                d_max: a.d_max,
                tolerance: a.tolerance,
            };
            let r = audit_supermartingale(&cfg, &a.dist.build()?, &canonical_region(&cfg)?)?;
            let mut t = Table::new(&AUDIT_HEADER);
            audit_row(&mut t, &r);
            Output {
                seed: None,
                resolved: vec![("p1", json!(cfg.p1)), ("gamma", json!(cfg.gamma))],
                result: serde_json::to_value(&r)?,
                table: t,
            }
        }
        Command::SearchConstants(a) => {
            let c = need(a.c, "c")?;
            let dist = a.dist.build()?;
            let p1s = if a.p1.is_empty() { default_p1s(c)? } else { a.p1.clone() };
            let mut t = Table::new(&AUDIT_HEADER);
            let mut res = Vec::new();
            let resolved = vec![("p1", json!(p1s))];
            for p1 in p1s {
                let gamma = match a.gamma {
                    Some(g) => g,
                    None => canonical_gamma(c, p1)?,
                };
                let r = search_correction_constants(c, p1, a.delta, gamma, &dist)?;
                audit_row(&mut t, &r);
                res.push(r);
            }
            Output { seed: None, resolved, result: serde_json::to_value(&res)?, table: t }
        }
        Command::Kappa(a) => {
            let bd = a.boundary.build()?;
            let cfg = KappaConfig {
                n_grid: geometric_grid(a.n_lo, a.n_hi, a.per_octave.max(1)),
                trials: a.trials,
                w: DecompConfig {
                    trials: a.w_trials,
                    n_max: Some(a.w_n_max),
                },
            };
            let k = estimate_kappa(&bd, &a.dist.build()?, &cfg, ss)?;
            let mut t = Table::new(&["c", "a", "b", "value", "stderr", "converged", "w", "w_stderr"]);
            t.push([
                num(k.c),
                num(bd.a),
                num(bd.b),
                num(k.value),
                num(k.stderr),
                k.converged.to_string(),
                num(k.w.value),
                num(k.w.stderr),
            ]);
            for p in &k.points {
                t.notes.push(format!("n={} survivors={} kappa={} stderr={}", p.n, p.survivors, p.kappa, p.stderr));
            }
            Output { seed: Some(seed), resolved: vec![], result: serde_json::to_value(&k)?, table: t }
        }
    })
}

fn resolve(cmd: &Command, m: &ArgMatches, file: &Map<String, Value>) -> Result<(Command, Value)> {
    macro_rules! go {
        ($variant:ident, $a:expr) => {{
            let merged = merge($a, m, file)?;
            let cfg = serde_json::to_value(&merged)?;
            (Command::$variant(merged), cfg)
        }};
    }
    Ok(match cmd {
        Command::Psi(a) => go!(Psi, a),
        Command::V(a) => go!(V, a),
        Command::Exponent(a) => go!(Exponent, a),
        Command::Simulate(a) => go!(Simulate, a),
        Command::TailFit(a) => go!(TailFit, a),
        Command::Localprob(a) => go!(Localprob, a),
        Command::Enumerate(a) => go!(Enumerate, a),
        Command::WDirect(a) => go!(WDirect, a),
        Command::WDecomp(a) => go!(WDecomp, a),
        Command::HarmonicCheck(a) => go!(HarmonicCheck, a),
        Command::Audit(a) => go!(Audit, a),
        Command::SearchConstants(a) => go!(SearchConstants, a),
        Command::Kappa(a) => go!(Kappa, a),
    })
}

/// Report text and output path, or the failing command with its error.
pub type RunResult = std::result::Result<(String, Option<PathBuf>), (String, Error)>;

/// Parses, runs and renders one invocation. Returns the report text and
/// the output path, if any.
///
/// Usage errors come back as `clap::Error`; everything after parsing as
/// the command name paired with the library error.
pub fn run_to_string<I, T>(args: I) -> std::result::Result<RunResult, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let m = Cli::command().try_get_matches_from(args)?;
    let cli = Cli::from_arg_matches(&m)?;
    Ok(run_parsed(cli, &m))
}

fn run_parsed(cli: Cli, m: &ArgMatches) -> RunResult {
    let name = cli.command.name();
    let fail = |e: Error| (name.to_string(), e);
    let (_, sub) = m.subcommand().expect("subcommand is required");

    let file: Map<String, Value> = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| fail(e.into()))?;
            match serde_json::from_str(&text).map_err(|e| fail(e.into()))? {
                Value::Object(o) => o,
                _ => return Err(fail(Error::Invalid("config file must hold a JSON object".into()))),
            }
        }
        None => Map::new(),
    };
    let seed = match (cli.seed, file.get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v
            .as_u64()
            .ok_or_else(|| fail(Error::Invalid("config seed must be a non-negative integer".into())))?,
        (None, None) => 0,
    };
    let (cmd, mut config) = resolve(&cli.command, sub, &file).map_err(fail)?;

    let start = Instant::now();
    let out = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| fail(Error::Invalid(e.to_string())))?
            .install(|| execute(&cmd, seed)),
        None => execute(&cmd, seed),
    }
    .map_err(fail)?;
    for (k, v) in out.resolved {
        config[k] = v;
    }
    let env = Envelope {
        tool: report::TOOL,
        version: report::VERSION,
        command: name.to_string(),
        config,
        seed: out.seed,
        wall_time_s: cli.timing.then(|| start.elapsed().as_secs_f64()),
        result: out.result,
    };
    let text = match cli.format {
        Format::Json => report::to_json(&env),
        Format::Csv => report::to_csv(&env, &out.table),
    }
    .map_err(fail)?;
    Ok((text, cli.out))
}

/// Entry point for the binary; returns the process exit code: 0 on
/// success, 1 for a failed run (JSON error on stderr), 2 for bad usage.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run_to_string(args) {
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
        Ok(Ok((text, None))) => {
            print!("{text}");
            0
        }
        Ok(Ok((text, Some(path)))) => match std::fs::write(&path, text) {
            Ok(()) => 0,
            Err(e) => {
                eprint!("{}", report::error_json("", &e.into()));
                1
            }
        },
        Ok(Err((cmd, e))) => {
            eprint!("{}", report::error_json(&cmd, &e));
            1
        }
    }
}
