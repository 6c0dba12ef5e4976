//! The `ctc` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctc_core::ensemble::EnsembleSpec;
use ctc_core::liouvillian::{DominantRule, LiouvillianBlock, ModelParams, Space, SpectrumOptions};
use ctc_core::meanfield::{fixed_points, integrate, phase_portrait, sample_grid, SingleCtc};
use ctc_core::ode::{SolverOptions, Tolerances};
use ctc_core::spin::{SpinSector, TwiceSpin};
use ctc_core::sync::{
    analyze_network, dominant_frequencies, pearson_matrix, AnalysisOptions, AnalysisWindow,
    LyapunovResult, Regime, SyncReport, SyncThresholds,
};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::figures::{run_figure, FigureOptions, PRESETS};
use crate::io::{self, fmt};
use crate::plan::SweepPlan;
use crate::sweep::{run_network, run_plan, run_spectrum, write_network_files, RunOptions};

/// Exit code of `classify` for a regime: 10 plus its position in
/// [`Regime::ALL`].
pub fn regime_exit_code(r: Regime) -> i32 {
    10 + Regime::ALL.iter().position(|&x| x == r).unwrap_or(0) as i32
}

#[derive(Debug, Parser)]
#[command(
    name = "ctc",
    version,
    about = "Time-crystal spectra, mean-field networks and synchronization analysis"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Validate the configuration and print it without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relative tolerance of the ODE integrator.
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    /// Absolute tolerance of the ODE integrator.
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Liouvillian spectrum over the spin sectors of N spins.
    Spectrum(SpectrumArgs),
    /// Exact evolution of |J,J> in one spin sector.
    Evolve(EvolveArgs),
    /// Single-spin mean-field trajectory and fixed points.
    Meanfield(MeanfieldArgs),
    /// Coupled network: trajectory, Pearson matrix, Lyapunov exponent, regime.
    Network(NetworkArgs),
    /// Run a sweep plan.
    Sweep(SweepArgs),
    /// Phase labels over (Omega/kappa, m).
    PhaseDiagram(PhaseArgs),
    /// Classify a stored trajectory.
    Classify(ClassifyArgs),
    /// Reproduce one figure preset.
    Figure(FigureArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    Oscillatory,
    LargestReal,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long = "N")]
    pub particles: Option<u32>,
    /// All sectors (default).
    #[arg(long, conflicts_with = "symmetric_only")]
    pub full: bool,
    /// Only the symmetric sector.
    #[arg(long)]
    pub symmetric_only: bool,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long = "N")]
    pub particles: Option<u32>,
    /// Sector by `m = J / (N/2)`.
    #[arg(long, conflicts_with = "twice_j")]
    pub m: Option<f64>,
    /// Sector by `2J`.
    #[arg(long = "twice-J")]
    pub twice_j: Option<u32>,
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct MeanfieldArgs {
    /// Initial state `(0, 0, m)`.
    #[arg(long, conflicts_with = "state")]
    pub m: Option<f64>,
    /// Initial state `x,y,z`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub state: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    /// Also write the phase portrait `(P, Q)` next to the trajectory.
    #[arg(long)]
    pub portrait: bool,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Ensemble TOML file.
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    /// Trajectory format inside the output directory.
    #[arg(long, value_parser = ["csv", "bin", "none"], default_value = "bin")]
    pub trajectory: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Plan TOML file.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Recompute finished points.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = 100)]
    pub m_points: usize,
    #[arg(long, default_value_t = 0.1)]
    pub ratio_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub ratio_max: f64,
    #[arg(long, default_value_t = 96)]
    pub ratio_points: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Trajectory file (`.csv` or `.bin`).
    pub trajectory: PathBuf,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    /// TOML file with classifier thresholds.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Known maximal Lyapunov exponent.
    #[arg(long, conflicts_with = "network")]
    pub lyapunov: Option<f64>,
    /// Ensemble TOML that produced the trajectory; the exponent is recomputed
    /// from it.
    #[arg(long)]
    pub network: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    pub preset: String,
    /// Smaller particle ranges and grids.
    #[arg(long)]
    pub reduced: bool,
    /// Also compute the coupling-detuning maps (fig4).
    #[arg(long)]
    pub maps: bool,
}

/// Settings file; every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub omega: Option<f64>,
    pub kappa: Option<f64>,
    pub seed: Option<u64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(rename = "N")]
    pub particles: Option<u32>,
    pub space: Option<Space>,
    pub rule: Option<DominantRule>,
    pub ensemble: Option<PathBuf>,
    pub plan: Option<PathBuf>,
    pub analysis: Option<AnalysisOptions>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Evolve(_) => "evolve",
            Command::Meanfield(_) => "meanfield",
            Command::Network(_) => "network",
            Command::Sweep(_) => "sweep",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::Classify(_) => "classify",
            Command::Figure(_) => "figure",
        }
    }
}

/// Settings after merging flags over the config file.
#[derive(Clone, Debug, Serialize)]
struct Resolved {
    command: &'static str,
    params: ModelParams,
    seed: Option<u64>,
    solver: SolverOptions,
    analysis: AnalysisOptions,
    out: Option<PathBuf>,
}

fn resolve(g: &GlobalArgs, cfg: &RunConfig, command: &Command) -> Result<Resolved> {
    if let Some(s) = &cfg.subcommand {
        if s != command.name() {
            return Err(LabError::Validation(format!(
                "config is for '{s}' but '{}' was invoked",
                command.name()
            )));
        }
    }
    let omega = g.omega.or(cfg.omega).unwrap_or(0.9);
    let kappa = g.kappa.or(cfg.kappa).unwrap_or(1.0);
    let params = ModelParams::new(omega, kappa)?;
    let mut analysis = cfg.analysis.unwrap_or_default();
    let base = analysis.lyapunov.solver.tol;
    let tol = Tolerances {
        rtol: g.rtol.or(cfg.rtol).unwrap_or(base.rtol),
        atol: g.atol.or(cfg.atol).unwrap_or(base.atol),
    };
    if !(tol.rtol > 0.0 && tol.atol > 0.0 && tol.rtol.is_finite() && tol.atol.is_finite()) {
        return Err(LabError::Validation("tolerances must be positive".into()));
    }
    analysis.lyapunov.solver.tol = tol;
    let solver = SolverOptions {
        tol,
        ..Default::default()
    };
    Ok(Resolved {
        command: command.name(),
        params,
        seed: g.seed.or(cfg.seed),
        solver,
        analysis,
        out: g.out.clone().or_else(|| cfg.out.clone()),
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(line: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(LabError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| LabError::Numerical(e.to_string()))?;
    emit(&s)
}

fn required<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| LabError::Validation(format!("missing {what}")))
}

pub fn execute(cli: Cli) -> Result<i32> {
    let cfg: RunConfig = match &cli.global.config {
        Some(p) => io::read_toml(p)?,
        None => RunConfig::default(),
    };
    let r = resolve(&cli.global, &cfg, &cli.command)?;
    let dry = cli.global.dry_run;
    match cli.command {
        Command::Spectrum(a) => cmd_spectrum(&a, &cfg, &r, dry),
        Command::Evolve(a) => cmd_evolve(&a, &cfg, &r, dry),
        Command::Meanfield(a) => cmd_meanfield(&a, &r, dry),
        Command::Network(a) => cmd_network(&a, &cfg, &r, dry),
        Command::Sweep(a) => cmd_sweep(&a, &cfg, &r, &cli.global, dry),
        Command::PhaseDiagram(a) => cmd_phase(&a, &r, dry),
        Command::Classify(a) => cmd_classify(&a, &cfg, &r, dry),
        Command::Figure(a) => cmd_figure(&a, &r, dry),
    }
}

#[derive(Serialize)]
struct DryRun<'a, T: Serialize> {
    resolved: &'a Resolved,
    command: T,
}

fn dry_run<T: Serialize>(r: &Resolved, command: T) -> Result<i32> {
    print_json(&DryRun {
        resolved: r,
        command,
    })?;
    Ok(0)
}

fn cmd_spectrum(a: &SpectrumArgs, cfg: &RunConfig, r: &Resolved, dry: bool) -> Result<i32> {
    let n = required(a.particles.or(cfg.particles), "--N")?;
    if n == 0 {
        return Err(LabError::Validation("--N must be positive".into()));
    }
    let space = if a.symmetric_only {
        Space::SymmetricOnly
    } else if a.full {
        Space::Full
    } else {
        cfg.space.unwrap_or_default()
    };
    let rule = match a.rule {
        Some(RuleArg::Oscillatory) => DominantRule::Oscillatory,
        Some(RuleArg::LargestReal) => DominantRule::LargestReal,
        None => cfg.rule.unwrap_or_default(),
    };
    let opts = SpectrumOptions {
        rule,
        ..Default::default()
    };
    for s in ctc_core::liouvillian::space_sectors(n, space)? {
        let d = s.dim() * s.dim();
        if d > opts.caps.max_eigen_dim {
            return Err(LabError::Validation(format!(
                "sector 2J={} needs a {d}-dimensional eigensolve (cap {})",
                s.twice_j().get(),
                opts.caps.max_eigen_dim
            )));
        }
    }
    if dry {
        return dry_run(
            r,
            serde_json::json!({ "N": n, "space": space, "rule": rule }),
        );
    }
    let spec = run_spectrum(n, r.params, space, &opts)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        particles: u32,
        space: Space,
        rule: DominantRule,
        lambda1: Option<[f64; 2]>,
        gap: Option<f64>,
        dominant_twice_j: Option<u32>,
        dominant_m: Option<f64>,
        sectors: &'a [ctc_core::liouvillian::SectorRow],
    }
    let summary = Summary {
        particles: n,
        space,
        rule,
        lambda1: spec.lambda1.map(|z| [z.re, z.im]),
        gap: spec.gap(),
        dominant_twice_j: spec.dominant_sector.map(|t| t.get()),
        dominant_m: spec.dominant_m,
        sectors: &spec.table,
    };
    if let Some(out) = &r.out {
        io::write_spectrum_csv(&out.join("spectrum.csv"), &spec)?;
        io::write_json(&out.join("spectrum.json"), &summary)?;
    }
    print_json(&summary)?;
    Ok(0)
}

fn cmd_evolve(a: &EvolveArgs, cfg: &RunConfig, r: &Resolved, dry: bool) -> Result<i32> {
    let n = required(a.particles.or(cfg.particles), "--N")?;
    let twice_j = match (a.twice_j, a.m) {
        (Some(t), _) => t,
        (None, Some(m)) => {
            let t = m * n as f64;
            if !(t >= 0.0) || (t - t.round()).abs() > 1e-9 {
                return Err(LabError::Validation(format!(
                    "m = {m} does not give an integer 2J for N = {n}"
                )));
            }
            t.round() as u32
        }
        (None, None) => n,
    };
    let sector = SpinSector::new(n, TwiceSpin::new(twice_j))?;
    let grid = sample_grid(0.0, a.t_end, a.dt)?;
    let out = required(r.out.clone(), "--out")?;
    if dry {
        return dry_run(
            r,
            serde_json::json!({ "N": n, "twice_J": twice_j, "samples": grid.len() }),
        );
    }
    let block = LiouvillianBlock::build(sector, r.params)?;
    let tr = block.evolve_exact(&block.highest_weight_state(), &grid, r.solver)?;
    let rows: Vec<Vec<String>> = tr
        .times
        .iter()
        .zip(&tr.m)
        .map(|(t, m)| vec![fmt(*t), fmt(m[0]), fmt(m[1]), fmt(m[2])])
        .collect();
    io::write_table(&out, &["t", "mx", "my", "mz"], &rows)?;
    print_json(&serde_json::json!({
        "N": n,
        "twice_J": twice_j,
        "samples": rows.len(),
        "max_trace_drift": tr.max_trace_drift,
        "max_hermiticity_error": tr.max_hermiticity_error,
    }))?;
    Ok(0)
}

fn cmd_meanfield(a: &MeanfieldArgs, r: &Resolved, dry: bool) -> Result<i32> {
    let y0 = match (&a.state, a.m) {
        (Some(s), _) => [s[0], s[1], s[2]],
        (None, Some(m)) => [0.0, 0.0, m],
        (None, None) => return Err(LabError::Validation("missing --m or --state".into())),
    };
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Validation("initial state must be finite".into()));
    }
    let norm = y0.iter().map(|v| v * v).sum::<f64>().sqrt();
    sample_grid(0.0, a.t_end, a.dt)?;
    if dry {
        return dry_run(
            r,
            serde_json::json!({ "state": y0, "t_end": a.t_end, "dt": a.dt }),
        );
    }
    let report = fixed_points(norm, &r.params)?;
    if let Some(out) = &r.out {
        let rec = integrate(SingleCtc(r.params), &y0, 0.0, a.t_end, a.dt, r.solver)?;
        io::write_trajectory(out, &rec)?;
        if a.portrait {
            let pp = phase_portrait(&rec, 0);
            let rows: Vec<Vec<String>> = (0..rec.len())
                .map(|k| vec![fmt(rec.times[k]), fmt(pp.p[k]), fmt(pp.q[k])])
                .collect();
            io::write_table(&out.with_extension("portrait.csv"), &["t", "P", "Q"], &rows)?;
        }
    }
    print_json(&report)?;
    Ok(0)
}

fn load_ensemble(path: &Path, r: &Resolved, g_omega: bool) -> Result<EnsembleSpec> {
    let mut spec: EnsembleSpec = io::read_toml(path)?;
    if let Some(s) = r.seed {
        spec.seed = s;
    }
    if g_omega {
        spec.omega = r.params.omega;
        spec.kappa = r.params.kappa;
    }
    ctc_core::ensemble::build_ensemble(&spec)?;
    Ok(spec)
}

fn cmd_network(a: &NetworkArgs, cfg: &RunConfig, r: &Resolved, dry: bool) -> Result<i32> {
    let path = required(
        a.ensemble.clone().or_else(|| cfg.ensemble.clone()),
        "--ensemble",
    )?;
    let overridden =
        cfg.omega.is_some() || cfg.kappa.is_some() || r.params != ModelParams::new(0.9, 1.0)?;
    let spec = load_ensemble(&path, r, overridden)?;
    let out = required(r.out.clone(), "--out")?;
    if dry {
        return dry_run(r, &spec);
    }
    let o = run_network(&spec, &r.analysis)?;
    write_network_files(&out, &o, false)?;
    if a.trajectory != "none" {
        io::write_trajectory(&out.join(format!("trajectory.{}", a.trajectory)), &o.record)?;
    }
    io::write_json(&out.join("ensemble.json"), &spec)?;
    io::write_json(&out.join("report.json"), &o.report)?;
    print_json(&serde_json::json!({
        "regime": o.report.regime,
        "mean_pearson": o.report.mean_pearson,
        "lyapunov": o.report.lyapunov,
        "clusters": o.report.clusters.iter().map(Vec::len).collect::<Vec<_>>(),
    }))?;
    Ok(0)
}

fn cmd_sweep(
    a: &SweepArgs,
    cfg: &RunConfig,
    r: &Resolved,
    g: &GlobalArgs,
    dry: bool,
) -> Result<i32> {
    let path = required(a.plan.clone().or_else(|| cfg.plan.clone()), "--plan")?;
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    let mut plan =
        SweepPlan::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
    if let Some(s) = r.seed {
        plan.seed = s;
    }
    if g.omega.is_some() || cfg.omega.is_some() {
        plan.model.omega = r.params.omega;
    }
    if g.kappa.is_some() || cfg.kappa.is_some() {
        plan.model.kappa = r.params.kappa;
    }
    if g.rtol.is_some() || g.atol.is_some() || cfg.rtol.is_some() || cfg.atol.is_some() {
        plan.analysis.lyapunov.solver.tol = r.solver.tol;
    }
    plan.validate()?;
    let out = required(r.out.clone(), "--out")?;
    if dry {
        return dry_run(
            r,
            serde_json::json!({ "plan": &plan, "points": plan.points().len() }),
        );
    }
    let s = run_plan(
        &plan,
        &out,
        RunOptions {
            force: a.force,
            workers: None,
        },
    )?;
    print_json(&s)?;
    Ok(if s.failed.is_empty() { 0 } else { 3 })
}

fn cmd_phase(a: &PhaseArgs, r: &Resolved, dry: bool) -> Result<i32> {
    if a.m_points == 0 || a.ratio_points == 0 || !(a.ratio_min > 0.0 && a.ratio_max >= a.ratio_min)
    {
        return Err(LabError::Validation(
            "phase grid needs points > 0 and 0 < ratio-min <= ratio-max".into(),
        ));
    }
    let out = required(r.out.clone(), "--out")?;
    if dry {
        return dry_run(
            r,
            serde_json::json!({ "cells": a.m_points * a.ratio_points }),
        );
    }
    let m: Vec<f64> = (1..=a.m_points)
        .map(|k| k as f64 / a.m_points as f64)
        .collect();
    let ratio: Vec<f64> = if a.ratio_points == 1 {
        vec![a.ratio_min]
    } else {
        (0..a.ratio_points)
            .map(|k| {
                a.ratio_min + (a.ratio_max - a.ratio_min) * k as f64 / (a.ratio_points - 1) as f64
            })
            .collect()
    };
    let pd = ctc_core::meanfield::phase_diagram(&m, &ratio);
    let rows: Vec<Vec<String>> = ratio
        .iter()
        .zip(&pd.labels)
        .flat_map(|(&rr, row)| {
            m.iter().zip(row).map(move |(&mm, p)| {
                vec![
                    fmt(rr),
                    fmt(mm),
                    serde_json::to_value(p)
                        .unwrap()
                        .as_str()
                        .unwrap_or("")
                        .to_string(),
                ]
            })
        })
        .collect();
    io::write_table(&out, &["ratio", "m", "phase"], &rows)?;
    print_json(&serde_json::json!({ "cells": rows.len() }))?;
    Ok(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovSource {
    Given,
    Recomputed,
    /// No model available: `-1` when every series is dead, else `0`.
    DataProxy,
}

#[derive(Serialize)]
struct ClassifyOutput {
    lyapunov_source: LyapunovSource,
    report: SyncReport,
}

fn cmd_classify(a: &ClassifyArgs, cfg: &RunConfig, r: &Resolved, dry: bool) -> Result<i32> {
    let rec = io::read_trajectory(&a.trajectory)?;
    if rec.len() < 4 {
        return Err(LabError::format(&a.trajectory, "needs at least 4 samples"));
    }
    let first = rec.times[0];
    let last = *rec.times.last().unwrap();
    let t0 = a.t0.unwrap_or(first + 0.2 * (last - first));
    let t1 = a.t1.unwrap_or(last);
    if t0 < first - 1e-9 || t1 > last + 1e-9 {
        return Err(LabError::Validation(format!(
            "window [{t0}, {t1}] exceeds the data range [{first}, {last}]"
        )));
    }
    let window = AnalysisWindow::new(t0, t1)?;
    let th: SyncThresholds = match &a.thresholds {
        Some(p) => io::read_toml(p)?,
        None => r.analysis.thresholds,
    };
    let network = a.network.clone().or_else(|| cfg.ensemble.clone());
    if dry {
        return dry_run(
            r,
            serde_json::json!({ "samples": rec.len(), "window": [t0, t1], "thresholds": th }),
        );
    }
    let series = rec.mz_all();
    let pearson = pearson_matrix(&series, &rec.times, window, th.dead_variance)?;
    let freqs = dominant_frequencies(&series, &rec.times, window, th.dead_variance)?;
    let (lambda, spread, source) = match (a.lyapunov, network) {
        (Some(l), _) => (l, 0.0, LyapunovSource::Given),
        (None, Some(path)) => {
            let spec = load_ensemble(&path, r, false)?;
            let e = ctc_core::ensemble::build_ensemble(&spec)?;
            let mut opts = r.analysis;
            opts.lyapunov.transient = t0;
            opts.lyapunov.horizon = t1;
            let (rep, _) = analyze_network(&e.config, &e.initial_state, &opts)?;
            (
                rep.lyapunov,
                rep.lyapunov_plateau_spread,
                LyapunovSource::Recomputed,
            )
        }
        (None, None) => {
            let l = if pearson.dead.iter().all(|&d| d) {
                -1.0
            } else {
                0.0
            };
            (l, 0.0, LyapunovSource::DataProxy)
        }
    };
    let lyap = LyapunovResult {
        lambda,
        window,
        intervals: 0,
        running: Vec::new(),
        plateau_spread: spread,
    };
    let report = SyncReport::build(&pearson, &freqs, &lyap, &th, None)?;
    let code = regime_exit_code(report.regime);
    let output = ClassifyOutput {
        lyapunov_source: source,
        report,
    };
    match &r.out {
        Some(p) => io::write_json(p, &output)?,
        None => print_json(&output)?,
    }
    eprintln!("regime: {}", output.report.regime);
    Ok(code)
}

fn cmd_figure(a: &FigureArgs, r: &Resolved, dry: bool) -> Result<i32> {
    if !PRESETS.contains(&a.preset.as_str()) {
        return Err(LabError::Validation(format!(
            "unknown preset '{}'; available: {}",
            a.preset,
            PRESETS.join(", ")
        )));
    }
    let out = r.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let opts = FigureOptions {
        seed: r.seed.unwrap_or(1),
        analysis: r.analysis,
        reduced: a.reduced,
        maps: a.maps,
        workers: None,
    };
    if dry {
        return dry_run(
            r,
            serde_json::json!({ "preset": a.preset, "out": out, "seed": opts.seed }),
        );
    }
    let m = run_figure(&a.preset, &out, &opts)?;
    for c in &m.checks {
        emit(&format!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ))?;
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let mut codes: Vec<i32> = Regime::ALL.iter().map(|&r| regime_exit_code(r)).collect();
        codes.dedup();
        assert_eq!(codes.len(), 7);
        assert!(codes.iter().all(|&c| c >= 10));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("omega = 0.9\nomgea = 1.0\n").is_err());
        let c: RunConfig = toml::from_str("N = 6\nspace = \"symmetric-only\"\n").unwrap();
        assert_eq!(c.particles, Some(6));
        assert_eq!(c.space, Some(Space::SymmetricOnly));
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from(["ctc", "spectrum", "--N", "4", "--omega", "1.1"]).unwrap();
        let cfg = RunConfig {
            omega: Some(0.5),
            kappa: Some(2.0),
            ..Default::default()
        };
        let r = resolve(&cli.global, &cfg, &cli.command).unwrap();
        assert_eq!(r.params.omega, 1.1);
        assert_eq!(r.params.kappa, 2.0);
        let wrong = RunConfig {
            subcommand: Some("sweep".into()),
            ..Default::default()
        };
        assert!(resolve(&cli.global, &wrong, &cli.command).is_err());
    }
}
