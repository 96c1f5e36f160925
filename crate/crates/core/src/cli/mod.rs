//! Command-line front end: `bound`, `plan`, `sweep`, `validate`, `check-a1`.
//!
//! Exit codes: 0 ok, 1 usage or configuration error, 2 infeasible `s`,
//! 3 tail divergence, 4 simulation failure (including failed validation
//! checks), 5 violated regularity assumptions on the density.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{hitting_tail_bound, tv_bound, tv_bound_unreflected};
use crate::error::{Error, Result};
use crate::pgf::{components, pgf_bm_exit, pgf_drift_passage};
use crate::planner::{optimize_s, plan, sweep, PlanRequest, SPolicy, SweepAxis};
use crate::report::{num, sweep_csv, to_json, version_string};
use crate::simulator::{simulate_anticoupled_pair, simulate_bm_exit_pgf, simulate_drift_passage_pgf, simulate_hitting, SimConfig};
use crate::target::{check_a1, DensitySpec, TargetDensity};

pub use config::{ModeArg, RunConfig, SArg, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "langevin-bounds", version, about = "Certified convergence bounds for symmetric Langevin diffusions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the hitting-time or total-variation bound at one time.
    Bound(CommonArgs),
    /// Minimal time to reach a target accuracy, optionally optimizing s.
    Plan {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Tabulate plans over a grid of one parameter (CSV).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Simulate the diffusion and its coupling and check the bounds hold.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Check the density's symmetry, sign and drift-floor conditions.
    #[command(name = "check-a1")]
    CheckA1 {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        grid_max: Option<f64>,
        #[arg(long)]
        grid_n: Option<usize>,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exponent of the exp(-|x|^beta) target.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Two-column CSV of (x, log density) for a custom target.
    #[arg(long, requires = "custom_b")]
    pub custom_samples: Option<String>,
    /// Declared drift floor of the custom target.
    #[arg(long)]
    pub custom_b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// A number, or "auto" to optimize.
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// hitting, tv or tv-unreflected.
    #[arg(long)]
    pub mode: Option<String>,
    /// Also write results as CSV to this path.
    #[arg(long)]
    pub csv: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    /// y, beta, epsilon or t.
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated grid values.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct SimArgs {
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disable Brownian-bridge crossing detection.
    #[arg(long)]
    pub no_bridge: bool,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Paths for each of the two pgf checks.
    #[arg(long)]
    pub pgf_paths: Option<usize>,
    /// Directory for CSV outputs and the run manifest.
    #[arg(long)]
    pub out_dir: Option<String>,
}

fn resolve_common(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(beta) = args.beta {
        cfg.density = DensitySpec::ExpPower { beta };
    }
    if let (Some(samples), Some(b)) = (&args.custom_samples, args.custom_b) {
        cfg.density = DensitySpec::Custom {
            b,
            samples: samples.clone(),
        };
    }
    if let Some(y) = args.y {
        cfg.y = y;
    }
    if let Some(s) = &args.s {
        cfg.s = s.parse()?;
    }
    if let Some(t) = args.t {
        cfg.t = t;
    }
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    if let Some(m) = &args.mode {
        cfg.mode = m.parse()?;
    }
    if let Some(c) = &args.csv {
        cfg.output.csv = Some(c.clone());
    }
    Ok(cfg)
}

fn apply_sweep(cfg: &mut RunConfig, args: &SweepArgs) -> Result<()> {
    if args.axis.is_none() && args.grid.is_none() {
        return Ok(());
    }
    let axis: SweepAxis = match (&args.axis, &cfg.sweep) {
        (Some(a), _) => a.parse()?,
        (None, Some(s)) => s.axis,
        (None, None) => return Err(Error::Config("--grid needs --axis".into())),
    };
    let grid = match (&args.grid, &cfg.sweep) {
        (Some(g), _) => g
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad grid value '{v}'"))))
            .collect::<Result<Vec<f64>>>()?,
        (None, Some(s)) => s.grid.clone(),
        (None, None) => return Err(Error::Config("--axis needs --grid".into())),
    };
    cfg.sweep = Some(SweepSpec { axis, grid });
    Ok(())
}

fn apply_sim(cfg: &mut RunConfig, args: &SimArgs) {
    let sim = &mut cfg.sim;
    if let Some(v) = args.dt {
        sim.dt = v;
    }
    if let Some(v) = args.horizon {
        sim.horizon = v;
    }
    if let Some(v) = args.n_paths {
        sim.n_paths = v;
    }
    if let Some(v) = args.seed {
        sim.seed = v;
    }
    if args.no_bridge {
        sim.bridge_correction = false;
    }
    if let Some(v) = args.threads {
        sim.threads = v;
    }
    if let Some(v) = args.pgf_paths {
        cfg.pgf_paths = v;
    }
    if let Some(v) = &args.out_dir {
        cfg.output.dir = Some(v.clone());
    }
}

/// Builds the density and refuses to continue if the regularity conditions fail.
fn gated_density(cfg: &RunConfig) -> Result<TargetDensity> {
    let d = cfg.density.build().map_err(|e| match e {
        Error::InvalidParameter(m) => Error::A1Violation(m),
        other => other,
    })?;
    let report = check_a1(&d, cfg.a1_grid.max, cfg.a1_grid.n)?;
    if let Some(f) = report.failures().next() {
        return Err(Error::A1Violation(format!(
            "{:?} fails at x = {:?} (margin {})",
            f.condition, f.worst_x, f.worst_margin
        )));
    }
    Ok(d)
}

fn plan_request(cfg: &RunConfig, d: TargetDensity) -> PlanRequest {
    PlanRequest {
        density: d,
        y: cfg.y,
        epsilon: cfg.epsilon,
        mode: cfg.mode.bound_mode(),
        s_policy: cfg.s.policy(),
    }
}

fn resolve_s(cfg: &RunConfig, d: &TargetDensity) -> Result<f64> {
    match cfg.s {
        SArg::Fixed(s) => Ok(s),
        SArg::Auto => Ok(optimize_s(&PlanRequest {
            s_policy: SPolicy::Optimize,
            ..plan_request(cfg, d.clone())
        })?
        .s_star),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[derive(Serialize)]
#[serde(untagged)]
enum BoundReport {
    Hitting(crate::bounds::HittingBoundResult),
    Tv(crate::bounds::TvBoundResult),
}

pub fn cmd_bound(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    cfg.validate()?;
    let d = gated_density(cfg)?;
    let s = resolve_s(cfg, &d)?;
    let (report, csv) = match cfg.mode {
        ModeArg::Hitting => {
            let r = hitting_tail_bound(&d, cfg.y, s, cfg.t)?;
            let csv = format!(
                "y_input,y_eff,s,b,t,bound,raw,capped\n{},{},{},{},{},{},{},{}\n",
                num(r.y_input), num(r.y_eff), num(r.s), num(r.b), num(r.t), num(r.bound), num(r.raw), r.capped
            );
            (BoundReport::Hitting(r), csv)
        }
        ModeArg::Tv | ModeArg::TvUnreflected => {
            let r = if cfg.mode == ModeArg::Tv {
                tv_bound(&d, cfg.y, s, cfg.t)?
            } else {
                tv_bound_unreflected(&d, cfg.y, s, cfg.t)?
            };
            let process = if cfg.mode == ModeArg::Tv { "reflected" } else { "unreflected" };
            let csv = format!(
                "y,s,b,t,process,head_term,tail_term,quad_abs_err,total,raw_total,capped\n{},{},{},{},{},{},{},{},{},{},{}\n",
                num(r.y), num(r.s), num(r.b), num(r.t), process, num(r.head_term), num(r.tail_term),
                num(r.quad_abs_err), num(r.total), num(r.raw_total), r.capped
            );
            (BoundReport::Tv(r), csv)
        }
    };
    writeln!(out, "{}", to_json(&report)?)?;
    if let Some(p) = &cfg.output.csv {
        write_file(Path::new(p), &csv)?;
    }
    Ok(())
}

pub fn cmd_plan(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    cfg.validate()?;
    let d = gated_density(cfg)?;
    let req = plan_request(cfg, d);
    let result = plan(&req)?;
    writeln!(out, "{}", to_json(&result)?)?;
    if let (Some(sw), Some(p)) = (&cfg.sweep, &cfg.output.csv) {
        let rows = sweep(&req, sw.axis, &sw.grid)?;
        write_file(Path::new(p), &sweep_csv(&rows))?;
    }
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    cfg.validate()?;
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs an axis and a grid".into()))?;
    let d = gated_density(cfg)?;
    let rows = sweep(&plan_request(cfg, d), sw.axis, &sw.grid)?;
    let csv = sweep_csv(&rows);
    match &cfg.output.csv {
        Some(p) => write_file(Path::new(p), &csv)?,
        None => write!(out, "{csv}")?,
    }
    Ok(())
}

pub fn cmd_check_a1(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    cfg.validate()?;
    let d = cfg.density.build().map_err(|e| match e {
        Error::InvalidParameter(m) => Error::A1Violation(m),
        other => other,
    })?;
    let report = check_a1(&d, cfg.a1_grid.max, cfg.a1_grid.n)?;
    writeln!(out, "{}", to_json(&report)?)?;
    if let Some(f) = report.failures().next() {
        return Err(Error::A1Violation(format!("{:?} fails at x = {:?}", f.condition, f.worst_x)));
    }
    Ok(())
}

/// One line of the validation table.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub t: Option<f64>,
    pub empirical: f64,
    pub std_err: f64,
    pub reference: f64,
    pub passed: bool,
}

fn checks_csv(checks: &[Check]) -> String {
    let mut s = String::from("check,t,empirical,std_err,reference,status\n");
    for c in checks {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.name,
            c.t.map(num).unwrap_or_default(),
            num(c.empirical),
            num(c.std_err),
            num(c.reference),
            if c.passed { "pass" } else { "FAIL" }
        ));
    }
    s
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    version: String,
    seed: u64,
    s: f64,
    config: &'a RunConfig,
    flagged_paths: FlaggedCounts,
    outputs: Vec<String>,
    all_passed: bool,
}

#[derive(Serialize)]
struct FlaggedCounts {
    hitting: usize,
    coupling: usize,
}

/// Runs the simulation suites and compares them against the analytic bounds.
/// Returns the checks; the caller decides the exit status.
pub fn run_validation(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<Check>> {
    cfg.validate()?;
    let d = gated_density(cfg)?;
    if !(cfg.y >= 1.0) {
        return Err(Error::Config(format!("validate needs y >= 1, got {}", cfg.y)));
    }
    let tv_cfg = RunConfig {
        mode: ModeArg::Tv,
        ..cfg.clone()
    };
    let s = resolve_s(&tv_cfg, &d)?;
    let sim = &cfg.sim;
    let mut checks = Vec::new();

    let hitting = simulate_hitting(&d, cfg.y, sim)?;
    for (i, &t) in hitting.times.iter().enumerate() {
        let bound = hitting_tail_bound(&d, cfg.y, s, t)?.bound;
        let (p, se) = (hitting.survival[i], hitting.std_err[i]);
        checks.push(Check {
            name: "hitting_survival".into(),
            t: Some(t),
            empirical: p,
            std_err: se,
            reference: bound,
            passed: p - 3.0 * se <= bound,
        });
    }

    let coupling = simulate_anticoupled_pair(&d, cfg.y, sim)?;
    let ct = &coupling.coupling_times;
    for (i, &t) in ct.times.iter().enumerate() {
        let bound = tv_bound(&d, cfg.y, s, t)?.total;
        let (p, se) = (ct.survival[i], ct.std_err[i]);
        checks.push(Check {
            name: "coupling_survival".into(),
            t: Some(t),
            empirical: p,
            std_err: se,
            reference: bound,
            passed: p - 3.0 * se <= bound,
        });
    }
    let rate = coupling.ordering_violations as f64 / (coupling.steps_checked.max(1)) as f64;
    checks.push(Check {
        name: "ordering_violation_rate".into(),
        t: None,
        empirical: rate,
        std_err: 0.0,
        reference: 1e-4,
        passed: rate < 1e-4,
    });

    let comp = components(s, d.b())?;
    let pgf_sim = SimConfig {
        n_paths: cfg.pgf_paths,
        ..sim.clone()
    };
    let exit = simulate_bm_exit_pgf(s, 0.0, &pgf_sim)?;
    let exit_ref = pgf_bm_exit(0.0, &comp)?;
    checks.push(Check {
        name: "bm_exit_pgf".into(),
        t: None,
        empirical: exit.estimate,
        std_err: exit.std_err,
        reference: exit_ref,
        passed: (exit.estimate - exit_ref).abs() <= 3.0 * exit.std_err,
    });
    let passage = simulate_drift_passage_pgf(s, 1.0, d.b(), &pgf_sim)?;
    let passage_ref = pgf_drift_passage(1.0, &comp)?;
    checks.push(Check {
        name: "drift_passage_pgf".into(),
        t: None,
        empirical: passage.estimate,
        std_err: passage.std_err,
        reference: passage_ref,
        passed: (passage.estimate - passage_ref).abs() <= 3.0 * passage.std_err,
    });

    let all_passed = checks.iter().all(|c| c.passed);
    let dir = PathBuf::from(cfg.output.dir.clone().unwrap_or_else(|| "validate_out".into()));
    let files = [
        ("hitting_survival.csv", hitting.to_csv()),
        ("coupling_survival.csv", ct.to_csv()),
        ("checks.csv", checks_csv(&checks)),
    ];
    let mut outputs = Vec::new();
    for (name, contents) in &files {
        let p = dir.join(name);
        write_file(&p, contents)?;
        outputs.push(p.display().to_string());
    }
    let manifest = Manifest {
        command: "validate",
        version: version_string(),
        seed: sim.seed,
        s,
        config: cfg,
        flagged_paths: FlaggedCounts {
            hitting: hitting.n_flagged,
            coupling: ct.n_flagged,
        },
        outputs,
        all_passed,
    };
    write_file(&dir.join("manifest.json"), &to_json(&manifest)?)?;

    writeln!(out, "{:<24} {:>6} {:>14} {:>12} {:>14}  status", "check", "t", "empirical", "std_err", "reference")?;
    for c in &checks {
        writeln!(
            out,
            "{:<24} {:>6} {:>14.6e} {:>12.3e} {:>14.6e}  {}",
            c.name,
            c.t.map(|t| format!("{t}")).unwrap_or_else(|| "-".into()),
            c.empirical,
            c.std_err,
            c.reference,
            if c.passed { "pass" } else { "FAIL" }
        )?;
    }
    writeln!(out, "{}", if all_passed { "all checks passed" } else { "some checks FAILED" })?;
    Ok(checks)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Bound(common) => cmd_bound(&resolve_common(&common)?, out).map(|_| 0),
        Command::Plan { common, sweep } => {
            let mut cfg = resolve_common(&common)?;
            apply_sweep(&mut cfg, &sweep)?;
            cmd_plan(&cfg, out).map(|_| 0)
        }
        Command::Sweep { common, sweep } => {
            let mut cfg = resolve_common(&common)?;
            apply_sweep(&mut cfg, &sweep)?;
            cmd_sweep(&cfg, out).map(|_| 0)
        }
        Command::Validate { common, sim } => {
            let mut cfg = resolve_common(&common)?;
            apply_sim(&mut cfg, &sim);
            let checks = run_validation(&cfg, out)?;
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 4 })
        }
        Command::CheckA1 { common, grid_max, grid_n } => {
            let mut cfg = resolve_common(&common)?;
            if let Some(m) = grid_max {
                cfg.a1_grid.max = m;
            }
            if let Some(n) = grid_n {
                cfg.a1_grid.n = n;
            }
            cmd_check_a1(&cfg, out).map(|_| 0)
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
