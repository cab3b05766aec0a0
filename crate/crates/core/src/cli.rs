//! Command-line front end. Every command produces a [`Report`] whose
//! verdicts follow from its payload and tolerances alone.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::checks::{inequality_battery, transform_suite, BatteryConfig, SuiteConfig};
use crate::constants::{a_min, best_constant_k, best_constant_radial, branch_threshold, lower_branch, upper_branch};
use crate::error::Error;
use crate::radial::{make_grid, Frame, MIN_NODES};
use crate::special_fn::{sobolev_constant, x1, Dimension, XChainParams};
use crate::variational::{concentration_sweep, halving, minimize_tau, BubbleParams, SweepKind, SweepRecord};

pub const SCHEMA: u32 = 1;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "hardy-sobolev", version, about = "Sharp Hardy-Sobolev constants and their numerical checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of stdout. Not echoed, so reports
    /// written to different paths stay identical.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Add the wall time to the report (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Table of S_n, a_k, β_{n,k} and C_{n,k}(a) over a parameter lattice.
    Constants(ConstantsArgs),
    /// Randomized battery of the inequality against the sharp constant.
    Check(CheckArgs),
    /// Truncated radial minimization in the half-line frame.
    Minimize(MinimizeArgs),
    /// Concentrating bubble sweep with extrapolation.
    Sweep(SweepArgs),
    /// Coordinate-change, Kelvin and scaling identities on random profiles.
    TransformTest(TransformArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub n: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a: Vec<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_constants: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1000)]
    pub profiles: usize,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Accepted relative shortfall of a quotient below the constant.
    #[arg(long, default_value_t = 1e-3)]
    pub tol_check: f64,
    /// Directory receiving a sampled CSV of every violating profile.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MinimizeArgs {
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Truncation points; several values also test monotonicity of the minima.
    #[arg(long = "T", value_delimiter = ',', default_value = "1000")]
    pub truncation: Vec<f64>,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    /// Accepted relative excess of the largest-T minimum over the radial constant.
    #[arg(long, default_value_t = 2e-2)]
    pub tol_minimize: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepChoice {
    Sobolev,
    Weighted,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SweepChoice::Sobolev)]
    pub kind: SweepChoice,
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub a: f64,
    /// Distance of the bubble centre from the origin.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Cutoff radius.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Strictly decreasing concentration scales.
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// 1e-2 for the Sobolev sweep, 3e-2 for the weighted one.
    #[arg(long)]
    pub tol_sweep: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 50)]
    pub profiles: usize,
    #[arg(long, default_value_t = 8192)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol_transform: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_scaling: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_kelvin: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol_involution: f64,
}

/// How a verdict compares its value to its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub rule: Rule,
    pub bound: f64,
    pub passed: bool,
}

impl Verdict {
    pub fn new(name: impl Into<String>, value: f64, rule: Rule, bound: f64) -> Self {
        let passed = value.is_finite()
            && match rule {
                Rule::AtMost => value <= bound,
                Rule::AtLeast => value >= bound,
            };
        Self { name: name.into(), value, rule, bound, passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Rows emitted with `--format csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write<W: Write>(&self, w: W) -> crate::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(msg) => CliError::Usage(msg),
            e @ Error::ChainUndefined { .. } => CliError::Usage(e.to_string()),
            e => CliError::Numeric(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn dimension(n: u32) -> CliResult<Dimension> {
    Dimension::new(n).map_err(|_| CliError::Usage(format!("n must be at least 3, got {n}")))
}

/// Reject `a ≤ a_k` before any computation.
fn offset(k: usize, a: f64) -> CliResult<f64> {
    let a_k = a_min(k)?;
    if !(a > a_k) || !a.is_finite() {
        return usage(format!("a = {a} must exceed a_{k} ≈ {a_k:.4}"));
    }
    Ok(a)
}

fn json<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Numeric(e.into()))
}

fn f(x: f64) -> String {
    format!("{x}")
}

/// Result of one command before serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub table: Table,
}

fn outcome(
    cli: &Cli,
    results: Value,
    tolerances: BTreeMap<String, f64>,
    verdicts: Vec<Verdict>,
    table: Table,
) -> CliResult<Outcome> {
    let command = match &cli.command {
        Command::Constants(_) => "constants",
        Command::Check(_) => "check",
        Command::Minimize(_) => "minimize",
        Command::Sweep(_) => "sweep",
        Command::TransformTest(_) => "transform-test",
    };
    let passed = verdicts.iter().all(|v| v.passed);
    let report = Report {
        schema: SCHEMA,
        command: command.to_string(),
        config: json(cli)?,
        results,
        tolerances,
        verdicts,
        passed,
        wall_time_s: None,
    };
    Ok(Outcome { report, table })
}

#[derive(Debug, Serialize)]
struct ConstantsRow {
    n: u32,
    k: usize,
    sobolev: f64,
    a_k: f64,
    threshold: f64,
    /// `Σ ln D_i(threshold, 1) + ln(n-2)`, zero at the threshold.
    threshold_residual: f64,
    /// `D_{k+1}(a_k, 1)`, zero at `a_k`.
    a_k_residual: f64,
    /// `|upper - lower(threshold)| / S_n`.
    continuity_gap: f64,
    entries: Vec<ConstantEntry>,
}

#[derive(Debug, Serialize)]
struct ConstantEntry {
    a: f64,
    constant: f64,
    branch: crate::constants::Branch,
}

/// `D_1, ..., D_levels` at `s = 1`: `D_1 = a`, `D_{i+1} = a + ln D_i`.
/// Stops early once a denominator leaves `(0, ∞)`.
fn denominators(a: f64, levels: usize) -> Vec<f64> {
    let mut d = vec![a];
    while d.len() < levels {
        let last = d[d.len() - 1];
        if !(last > 0.0) {
            break;
        }
        d.push(a + last.ln());
    }
    d
}

fn cmd_constants(cli: &Cli, args: &ConstantsArgs) -> CliResult<Outcome> {
    let tol = args.tol_constants;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut table = Table::new(&["n", "k", "sobolev", "a_k", "threshold", "a", "constant", "branch"]);
    for &n in &args.n {
        let dim = dimension(n)?;
        for &k in &args.k {
            let a_k = a_min(k)?;
            for &a in &args.a {
                offset(k, a)?;
            }
            let threshold = branch_threshold(dim, k)?;
            let d = denominators(threshold, k + 1);
            let threshold_residual = d.iter().map(|x| x.ln()).sum::<f64>() + (n as f64 - 2.0).ln();
            let a_k_residual = if k == 0 { a_k } else { *denominators(a_k, k + 1).last().unwrap_or(&f64::NAN) };
            let s_n = sobolev_constant(dim);
            let continuity_gap = (upper_branch(dim) - lower_branch(dim, k, threshold)?).abs() / s_n;
            let tag = format!("n{n}_k{k}");
            verdicts.push(Verdict::new(format!("{tag}_threshold_residual"), threshold_residual.abs(), Rule::AtMost, tol));
            verdicts.push(Verdict::new(format!("{tag}_a_k_residual"), a_k_residual.abs(), Rule::AtMost, tol));
            verdicts.push(Verdict::new(format!("{tag}_continuity"), continuity_gap, Rule::AtMost, tol));
            let mut entries = Vec::new();
            for &a in &args.a {
                let c = best_constant_k(dim, k, a)?;
                let branch = json(&c.branch)?.as_str().unwrap_or_default().to_string();
                table.push(vec![f(n as f64), k.to_string(), f(s_n), f(a_k), f(threshold), f(a), f(c.value), branch]);
                entries.push(ConstantEntry { a, constant: c.value, branch: c.branch });
            }
            if args.a.is_empty() {
                table.push(vec![f(n as f64), k.to_string(), f(s_n), f(a_k), f(threshold), String::new(), String::new(), String::new()]);
            }
            rows.push(ConstantsRow {
                n,
                k,
                sobolev: s_n,
                a_k,
                threshold,
                threshold_residual,
                a_k_residual,
                continuity_gap,
                entries,
            });
        }
    }
    let tolerances = BTreeMap::from([("constants".to_string(), tol)]);
    outcome(cli, json(&rows)?, tolerances, verdicts, table)
}

fn cmd_check(cli: &Cli, args: &CheckArgs) -> CliResult<Outcome> {
    dimension(args.n)?;
    offset(args.k, args.a)?;
    if args.grid < MIN_NODES {
        return usage(format!("grid must have at least {MIN_NODES} nodes, got {}", args.grid));
    }
    if args.profiles == 0 {
        return usage("profiles must be positive");
    }
    let cfg = BatteryConfig {
        n: args.n,
        k: args.k,
        a: args.a,
        profiles: args.profiles,
        nodes: args.grid,
        seed: args.seed,
        slack: args.tol_check,
    };
    let report = inequality_battery(&cfg)?;
    if let (Some(dir), false) = (&args.export, report.violations.is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Numeric(e.into()))?;
        let grid = Arc::new(make_grid(Frame::unit_ball(), args.grid, 1.05)?);
        for v in &report.violations {
            let file = File::create(dir.join(format!("violation_{}.csv", v.index))).map_err(|e| CliError::Numeric(e.into()))?;
            v.profile.sample(Arc::clone(&grid))?.write_csv(file)?;
        }
    }
    let verdicts = vec![
        Verdict::new("min_ratio", report.min_ratio, Rule::AtLeast, 1.0 - args.tol_check),
        Verdict::new("violations", report.violations.len() as f64, Rule::AtMost, 0.0),
        Verdict::new("negative_lhs", report.negative_lhs as f64, Rule::AtMost, 0.0),
    ];
    let mut table =
        Table::new(&["n", "k", "a", "profiles", "seed", "constant", "min_ratio", "worst_index", "violations", "negative_lhs"]);
    table.push(vec![
        args.n.to_string(),
        args.k.to_string(),
        f(args.a),
        args.profiles.to_string(),
        args.seed.to_string(),
        f(report.constant),
        f(report.min_ratio),
        report.worst_index.to_string(),
        report.violations.len().to_string(),
        report.negative_lhs.to_string(),
    ]);
    let tolerances = BTreeMap::from([("check".to_string(), args.tol_check)]);
    outcome(cli, json(&report)?, tolerances, verdicts, table)
}

#[derive(Debug, Serialize)]
struct MinimizeRun {
    truncation_t: f64,
    summary: Option<crate::variational::MinimizeSummary>,
    failure: Option<String>,
}

fn cmd_minimize(cli: &Cli, args: &MinimizeArgs) -> CliResult<Outcome> {
    let dim = dimension(args.n)?;
    offset(args.k, args.a)?;
    if args.grid < MIN_NODES {
        return usage(format!("grid must have at least {MIN_NODES} nodes, got {}", args.grid));
    }
    if args.truncation.is_empty() {
        return usage("at least one truncation point T is required");
    }
    if args.truncation.windows(2).any(|w| !(w[0] < w[1])) {
        return usage("truncation points must be strictly increasing");
    }
    let params = XChainParams::new(dim, args.k, args.a)?;
    let target = best_constant_radial(dim);
    let mut runs = Vec::new();
    let mut verdicts = Vec::new();
    let mut table = Table::new(&["truncation_t", "quotient", "ratio", "iterations", "converged"]);
    for &t in &args.truncation {
        match minimize_tau(dim, args.k, args.a, t, args.grid, args.iters) {
            Ok(r) => {
                table.push(vec![f(t), f(r.quotient), f(r.quotient / target), r.iterations.to_string(), r.converged.to_string()]);
                runs.push(MinimizeRun { truncation_t: t, summary: Some(r.summary(&params)), failure: None });
            }
            Err(Error::Divergence(msg)) => {
                verdicts.push(Verdict::new(format!("solver_T{t}"), 1.0, Rule::AtMost, 0.0));
                table.push(vec![f(t), f(f64::NAN), f(f64::NAN), String::new(), "false".into()]);
                runs.push(MinimizeRun { truncation_t: t, summary: None, failure: Some(msg) });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let quotients: Vec<f64> =
        runs.iter().map(|r| r.summary.as_ref().map_or(f64::NAN, |s| s.quotient)).collect();
    let last = quotients[quotients.len() - 1];
    verdicts.push(Verdict::new("ratio_lower", last / target, Rule::AtLeast, 1.0));
    verdicts.push(Verdict::new("ratio_upper", last / target, Rule::AtMost, 1.0 + args.tol_minimize));
    if quotients.len() > 1 {
        let rise = quotients.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        verdicts.push(Verdict::new("nonincreasing_in_T", rise, Rule::AtMost, 0.0));
    }
    let results = serde_json::json!({ "radial_constant": target, "runs": json(&runs)? });
    let tolerances = BTreeMap::from([("minimize".to_string(), args.tol_minimize)]);
    outcome(cli, results, tolerances, verdicts, table)
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> CliResult<Outcome> {
    let dim = dimension(args.n)?;
    let weighted = args.kind == SweepChoice::Weighted;
    let (x0, delta, eps, tol) = if weighted {
        (args.x0.unwrap_or(0.95), args.delta.unwrap_or(0.04), halving(1e-5, 8), args.tol_sweep.unwrap_or(3e-2))
    } else {
        (args.x0.unwrap_or(0.5), args.delta.unwrap_or(0.2), halving(1e-2, 11), args.tol_sweep.unwrap_or(1e-2))
    };
    let eps = args.eps_list.clone().unwrap_or(eps);
    if eps.len() < 4 {
        return usage(format!("the epsilon list needs at least 4 entries, got {}", eps.len()));
    }
    if eps.windows(2).any(|w| !(w[0] > w[1])) || eps.iter().any(|e| !(*e > 0.0)) {
        return usage("epsilons must be positive and strictly decreasing");
    }
    if !(args.a > 0.0) {
        return usage(format!("a must be positive, got {}", args.a));
    }
    if weighted && !(x0 > delta) {
        return usage(format!("the weighted sweep needs x0 > delta, got x0 = {x0}, delta = {delta}"));
    }
    let template = BubbleParams::new(dim, args.a, x0, delta, eps[0])?;
    let kind = if weighted { SweepKind::Weighted } else { SweepKind::Sobolev };
    let record: SweepRecord = concentration_sweep(&template, kind, &eps)?;
    let s_n = sobolev_constant(dim);
    let limit = record.extrapolated_limit;
    let mut verdicts = Vec::new();
    let results = if weighted {
        let e = dim.branch_exponent();
        let target = x1(args.a, x0)?.powf(-e) * s_n;
        let lower = x1(args.a, x0 + delta)?.powf(-e) * s_n;
        let upper = x1(args.a, x0 - delta)?.powf(-e) * s_n;
        verdicts.push(Verdict::new("relative_error", (limit - target).abs() / target, Rule::AtMost, tol));
        verdicts.push(Verdict::new("sandwich_lower", limit, Rule::AtLeast, lower));
        verdicts.push(Verdict::new("sandwich_upper", limit, Rule::AtMost, upper));
        serde_json::json!({ "target": target, "sandwich": [lower, upper], "record": json(&record)? })
    } else {
        verdicts.push(Verdict::new("relative_error", (limit - s_n).abs() / s_n, Rule::AtMost, tol));
        serde_json::json!({ "target": s_n, "record": json(&record)? })
    };
    let mut table = Table::new(&["epsilon", "quotient"]);
    for e in &record.entries {
        table.push(vec![f(e.epsilon), f(e.quotient)]);
    }
    let tolerances = BTreeMap::from([("sweep".to_string(), tol)]);
    outcome(cli, results, tolerances, verdicts, table)
}

fn cmd_transform_test(cli: &Cli, args: &TransformArgs) -> CliResult<Outcome> {
    dimension(args.n)?;
    offset(0, args.a)?;
    if !(args.rho > 0.0 && args.rho <= 1.0) {
        return usage(format!("rho must lie in (0, 1], got {}", args.rho));
    }
    if args.grid < MIN_NODES {
        return usage(format!("grid must have at least {MIN_NODES} nodes, got {}", args.grid));
    }
    let cfg = SuiteConfig { n: args.n, a: args.a, rho: args.rho, profiles: args.profiles, nodes: args.grid, seed: args.seed };
    let report = transform_suite(&cfg)?;
    let d = report.discrepancies;
    let mut verdicts = vec![
        Verdict::new("tau_vs_r", d.tau_vs_r, Rule::AtMost, args.tol_transform),
        Verdict::new("t_vs_r", d.t_vs_r, Rule::AtMost, args.tol_transform),
        Verdict::new("tau_vs_t", d.tau_vs_t, Rule::AtMost, args.tol_transform),
    ];
    if let Some(k1) = d.k1_vs_r {
        verdicts.push(Verdict::new("k1_vs_r", k1, Rule::AtMost, args.tol_transform));
    }
    verdicts.extend([
        Verdict::new("kelvin_energy", d.kelvin_energy, Rule::AtMost, args.tol_kelvin),
        Verdict::new("kelvin_involution", d.kelvin_involution, Rule::AtMost, args.tol_involution),
        Verdict::new("scaling", d.scaling, Rule::AtMost, args.tol_scaling),
        Verdict::new("scaling_unit", d.scaling_unit, Rule::AtMost, 0.0),
    ]);
    let mut table = Table::new(&["name", "value", "bound", "passed"]);
    for v in &verdicts {
        table.push(vec![v.name.clone(), f(v.value), f(v.bound), v.passed.to_string()]);
    }
    let tolerances = BTreeMap::from([
        ("transform".to_string(), args.tol_transform),
        ("kelvin".to_string(), args.tol_kelvin),
        ("involution".to_string(), args.tol_involution),
        ("scaling".to_string(), args.tol_scaling),
    ]);
    outcome(cli, json(&report)?, tolerances, verdicts, table)
}

/// Run a parsed command.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let start = Instant::now();
    let mut out = match &cli.command {
        Command::Constants(a) => cmd_constants(cli, a),
        Command::Check(a) => cmd_check(cli, a),
        Command::Minimize(a) => cmd_minimize(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::TransformTest(a) => cmd_transform_test(cli, a),
    }?;
    if cli.timing {
        out.report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(out)
}

fn emit<W: Write>(cli: &Cli, out: &Outcome, mut w: W) -> crate::Result<()> {
    match cli.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &out.report)?;
            writeln!(w)?;
        }
        Format::Csv => out.table.write(&mut w)?,
    }
    Ok(())
}

/// Parse `args`, run, write the report and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return e.exit_code().clamp(0, 255) as u8;
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).map_err(Error::from).and_then(|file| emit(&cli, &outcome, file)),
        None => emit(&cli, &outcome, &mut *stdout),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_NUMERIC;
    }
    if outcome.report.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
