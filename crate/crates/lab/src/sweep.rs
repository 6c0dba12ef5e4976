//! Parallel, resumable execution of sweep plans.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use ctc_core::ensemble::{build_ensemble, Ensemble, EnsembleSpec};
use ctc_core::liouvillian::{
    space_sectors, LiouvillianBlock, ModelParams, SectorRow, Space, SpaceSpectrum, SpectrumOptions,
};
use ctc_core::meanfield::TrajectoryRecord;
use ctc_core::stats::linear_fit;
use ctc_core::sync::{analyze_network, AnalysisOptions, SyncReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::io::{self, fmt};
use crate::plan::{Model, Point, SweepPlan};

pub const VERSION: &str = concat!("ctc-lab ", env!("CARGO_PKG_VERSION"));

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "CTC_WORKERS";

/// Everything needed to reproduce one persisted result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub plan: String,
    pub point: String,
    pub seed: u64,
    pub model: Model,
    pub analysis: AnalysisOptions,
}

impl Provenance {
    pub fn new(plan: &SweepPlan, point: &str) -> Self {
        Provenance {
            version: VERSION.to_string(),
            plan: plan.name.clone(),
            point: point.to_string(),
            seed: plan.seed,
            model: plan.model,
            analysis: plan.analysis,
        }
    }
}

/// A realized network and its diagnostics.
#[derive(Clone, Debug)]
pub struct NetworkOutcome {
    pub ensemble: Ensemble,
    pub report: SyncReport,
    pub record: TrajectoryRecord,
}

pub fn run_network(spec: &EnsembleSpec, opts: &AnalysisOptions) -> Result<NetworkOutcome> {
    let ensemble = build_ensemble(spec)?;
    let (report, record) = analyze_network(&ensemble.config, &ensemble.initial_state, opts)?;
    Ok(NetworkOutcome {
        ensemble,
        report,
        record,
    })
}

/// Dominant-mode summary of one particle number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub particles: u32,
    pub space: Space,
    /// `[re, im]`.
    pub lambda1: Option<[f64; 2]>,
    pub dominant_twice_j: Option<u32>,
    pub dominant_m: Option<f64>,
    /// Dominant eigenvalue of the symmetric block alone.
    pub symmetric_lambda1: Option<[f64; 2]>,
    pub table: Vec<SectorRow>,
}

impl ScalingResult {
    pub fn from_spectrum(s: &SpaceSpectrum) -> Self {
        ScalingResult {
            particles: s.particles,
            space: s.space,
            lambda1: s.lambda1.map(|z| [z.re, z.im]),
            dominant_twice_j: s.dominant_sector.map(|t| t.get()),
            dominant_m: s.dominant_m,
            symmetric_lambda1: s
                .sectors
                .iter()
                .find(|r| r.twice_j.map(|t| t.get()) == Some(s.particles))
                .and_then(|r| r.lambda1)
                .map(|z| [z.re, z.im]),
            table: s.table.clone(),
        }
    }
}

/// Spectra of every sector of `particles`, computed in parallel.
pub fn run_spectrum(
    particles: u32,
    params: ModelParams,
    space: Space,
    opts: &SpectrumOptions,
) -> Result<SpaceSpectrum> {
    params.validate()?;
    let sectors = space_sectors(particles, space)?;
    let results = sectors
        .into_par_iter()
        .map(|s| LiouvillianBlock::build_with_caps(s, params, opts.caps)?.spectrum_with(opts))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(SpaceSpectrum::from_sectors(
        particles, params, space, results, opts,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PointResult {
    Network {
        frequencies: Vec<f64>,
        norms: Vec<f64>,
        partition: Vec<usize>,
        report: SyncReport,
    },
    Scaling(ScalingResult),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub provenance: Provenance,
    pub point: Point,
    pub result: PointResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub provenance: Provenance,
    pub point: Point,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub status: Status,
    pub dir: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Recompute points that already have a report.
    pub force: bool,
    /// Worker count; falls back to the environment, then to the core count.
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub computed: Vec<String>,
    pub skipped: Vec<String>,
    pub failed: Vec<String>,
    pub outputs: Vec<String>,
}

pub fn worker_count(explicit: Option<usize>) -> Result<usize> {
    if let Some(w) = explicit {
        return if w == 0 {
            Err(LabError::Validation("worker count must be positive".into()))
        } else {
            Ok(w)
        };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(LabError::Validation(format!(
                "{WORKERS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn point_dir(out: &Path, id: &str) -> PathBuf {
    out.join("points").join(id)
}

pub fn report_path(out: &Path, id: &str) -> PathBuf {
    point_dir(out, id).join("report.json")
}

/// Runs every point of `plan` under `out`, then writes the aggregate tables.
pub fn run_plan(plan: &SweepPlan, out: &Path, opts: RunOptions) -> Result<RunSummary> {
    plan.validate()?;
    io::ensure_dir(out)?;
    let plan_path = out.join("plan.toml");
    if plan_path.exists() && !opts.force {
        let text = std::fs::read_to_string(&plan_path).map_err(|e| LabError::io(&plan_path, e))?;
        let old =
            SweepPlan::from_toml(&text).map_err(|e| e.context(plan_path.display().to_string()))?;
        if &old != plan {
            return Err(LabError::Validation(format!(
                "{} holds a different plan; use another output directory or force",
                out.display()
            )));
        }
    }
    std::fs::write(&plan_path, plan.to_toml()?).map_err(|e| LabError::io(&plan_path, e))?;

    let index_path = out.join("index.jsonl");
    let index = Mutex::new(
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&index_path)
            .map_err(|e| LabError::io(&index_path, e))?,
    );
    let append = |entry: &IndexEntry| -> Result<()> {
        let mut line =
            serde_json::to_string(entry).map_err(|e| LabError::format(&index_path, e))?;
        line.push('\n');
        let mut f = index.lock().expect("index lock");
        f.write_all(line.as_bytes())
            .map_err(|e| LabError::io(&index_path, e))
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(opts.workers)?)
        .build()
        .map_err(|e| LabError::Validation(e.to_string()))?;
    let points = plan.points();
    let outcomes: Vec<Result<Outcome>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let dir = point_dir(out, p.id());
                if report_path(out, p.id()).exists() && !opts.force {
                    return Ok(Outcome::Skipped);
                }
                let status = match run_point(plan, p, &dir) {
                    Ok(()) => {
                        let _ = std::fs::remove_file(dir.join("error.json"));
                        Status::Ok
                    }
                    Err(e @ (LabError::Io { .. } | LabError::Format { .. })) => return Err(e),
                    Err(e) => {
                        let err = PointError {
                            provenance: Provenance::new(plan, p.id()),
                            point: p.clone(),
                            error: e.to_string(),
                            exit_code: e.exit_code(),
                        };
                        io::write_json(&dir.join("error.json"), &err)?;
                        Status::Failed
                    }
                };
                append(&IndexEntry {
                    id: p.id().to_string(),
                    status,
                    dir: format!("points/{}", p.id()),
                })?;
                Ok(if status == Status::Ok {
                    Outcome::Computed
                } else {
                    Outcome::Failed
                })
            })
            .collect()
    });
    let mut summary = RunSummary::default();
    for (p, o) in points.iter().zip(outcomes) {
        let id = p.id().to_string();
        match o? {
            Outcome::Computed => summary.computed.push(id),
            Outcome::Skipped => summary.skipped.push(id),
            Outcome::Failed => summary.failed.push(id),
        }
    }
    summary.outputs = aggregate(plan, out)?;
    Ok(summary)
}

enum Outcome {
    Computed,
    Skipped,
    Failed,
}

fn run_point(plan: &SweepPlan, p: &Point, dir: &Path) -> Result<()> {
    let result = match p {
        Point::Grid { spec, .. } | Point::Seeding { spec, .. } => {
            let o = run_network(spec, &plan.analysis)?;
            write_network_files(dir, &o, plan.store_trajectories)?;
            PointResult::Network {
                frequencies: o.ensemble.frequencies,
                norms: o.ensemble.norms,
                partition: o.ensemble.partition,
                report: o.report,
            }
        }
        Point::Scaling { particles, .. } => {
            let s = plan
                .scaling
                .as_ref()
                .expect("scaling point without scaling section");
            let opts = SpectrumOptions {
                rule: s.rule,
                ..Default::default()
            };
            let spec = run_spectrum(*particles, plan.model.params()?, s.space, &opts)?;
            io::write_spectrum_csv(&dir.join("spectrum.csv"), &spec)?;
            PointResult::Scaling(ScalingResult::from_spectrum(&spec))
        }
    };
    let report = PointReport {
        provenance: Provenance::new(plan, p.id()),
        point: p.clone(),
        result,
    };
    io::write_json(&dir.join("report.json"), &report)
}

/// Per-spin summary, Pearson matrix and optionally the full trajectory.
pub fn write_network_files(dir: &Path, o: &NetworkOutcome, trajectory: bool) -> Result<()> {
    let r = &o.report;
    let rows: Vec<Vec<String>> = (0..o.ensemble.n())
        .map(|a| {
            vec![
                a.to_string(),
                o.ensemble.partition[a].to_string(),
                fmt(o.ensemble.frequencies[a]),
                fmt(o.ensemble.norms[a]),
                fmt(r.peak_frequencies[a]),
                (r.dead[a] as u8).to_string(),
            ]
        })
        .collect();
    io::write_table(
        &dir.join("summary.csv"),
        &[
            "spin",
            "group",
            "target_angular_frequency",
            "norm",
            "peak_frequency",
            "dead",
        ],
        &rows,
    )?;
    io::write_matrix_csv(&dir.join("pearson.csv"), &r.pearson, r.n)?;
    if trajectory {
        io::write_trajectory(&dir.join("trajectory.bin"), &o.record)?;
    }
    Ok(())
}

fn load(out: &Path, id: &str) -> Option<PointReport> {
    let p = report_path(out, id);
    if p.exists() {
        io::read_json(&p).ok()
    } else {
        None
    }
}

fn network(r: &PointReport) -> Option<&SyncReport> {
    match &r.result {
        PointResult::Network { report, .. } => Some(report),
        PointResult::Scaling(_) => None,
    }
}

/// Writes the plan-level tables and returns their paths relative to `out`.
pub fn aggregate(plan: &SweepPlan, out: &Path) -> Result<Vec<String>> {
    let points = plan.points();
    let reports: Vec<Option<PointReport>> = points.iter().map(|p| load(out, p.id())).collect();
    let mut written = Vec::new();
    if let Some(g) = &plan.grid {
        let (gs, ds) = (g.gamma.values(), g.delta.values());
        let cell = |f: &dyn Fn(&SyncReport) -> f64| -> Vec<Option<f64>> {
            reports
                .iter()
                .map(|r| r.as_ref().and_then(network).map(f))
                .collect()
        };
        io::write_heatmap_csv(
            &out.join("mean_pearson.csv"),
            "gamma\\delta",
            &gs,
            &ds,
            &cell(&|r| r.mean_pearson),
        )?;
        io::write_heatmap_csv(
            &out.join("lyapunov.csv"),
            "gamma\\delta",
            &gs,
            &ds,
            &cell(&|r| r.lyapunov),
        )?;
        let rows: Vec<Vec<String>> = points
            .iter()
            .zip(&reports)
            .filter_map(|(p, r)| match p {
                Point::Grid {
                    gamma, delta, id, ..
                } => {
                    let s = r.as_ref().and_then(network);
                    Some(vec![
                        id.clone(),
                        fmt(*gamma),
                        fmt(*delta),
                        s.map_or("failed".into(), |s| s.regime.to_string()),
                        s.map_or("NaN".into(), |s| fmt(s.mean_pearson)),
                        s.map_or("NaN".into(), |s| fmt(s.lyapunov)),
                    ])
                }
                _ => None,
            })
            .collect();
        io::write_table(
            &out.join("regimes.csv"),
            &["id", "gamma", "delta", "regime", "mean_pearson", "lyapunov"],
            &rows,
        )?;
        written.extend(["mean_pearson.csv", "lyapunov.csv", "regimes.csv"].map(String::from));
    }
    if plan.scaling.is_some() {
        let results: Vec<ScalingResult> = reports
            .iter()
            .flatten()
            .filter_map(|r| match &r.result {
                PointResult::Scaling(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        let rows: Vec<Vec<String>> = results
            .iter()
            .map(|s| {
                let opt = |v: Option<f64>| v.map_or("NaN".into(), fmt);
                vec![
                    s.particles.to_string(),
                    fmt(1.0 / s.particles as f64),
                    opt(s.lambda1.map(|z| z[0])),
                    opt(s.lambda1.map(|z| z[1])),
                    s.dominant_twice_j.map_or("NaN".into(), |t| t.to_string()),
                    opt(s.symmetric_lambda1.map(|z| -z[0])),
                ]
            })
            .collect();
        io::write_table(
            &out.join("scaling.csv"),
            &[
                "N",
                "inv_N",
                "re_lambda1",
                "im_lambda1",
                "dominant_twice_J",
                "symmetric_gap",
            ],
            &rows,
        )?;
        io::write_json(&out.join("scaling_fit.json"), &scaling_fits(&results))?;
        written.extend(["scaling.csv", "scaling_fit.json"].map(String::from));
    }
    if let Some(s) = &plan.seeding {
        let summary = seeding_summary(&s.gamma.values(), &reports, s.melt_fraction, &plan.analysis);
        let rows: Vec<Vec<String>> = summary
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![
                    fmt(r.gamma),
                    r.regime.clone(),
                    fmt(r.mean_pearson),
                    fmt(r.lyapunov),
                ];
                for g in &r.groups {
                    v.push(g.within_mean.map_or("NaN".into(), fmt));
                    v.push(fmt(g.dead_fraction));
                }
                v
            })
            .collect();
        let groups = summary.rows.first().map_or(0, |r| r.groups.len());
        let mut header: Vec<String> = ["gamma", "regime", "mean_pearson", "lyapunov"]
            .map(String::from)
            .to_vec();
        for g in 0..groups {
            header.push(format!("within_{g}"));
            header.push(format!("dead_fraction_{g}"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        io::write_table(&out.join("seeding.csv"), &header, &rows)?;
        io::write_json(&out.join("seeding.json"), &summary)?;
        written.extend(["seeding.csv", "seeding.json"].map(String::from));
    }
    Ok(written)
}

/// Least-squares line through `(1/N, Re lambda1)`, split by parity of `N`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalingFits {
    pub even: Option<Fit>,
    pub odd: Option<Fit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub particles: Vec<u32>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn scaling_fits(results: &[ScalingResult]) -> ScalingFits {
    let fit = |parity: u32| {
        let pts: Vec<(u32, f64)> = results
            .iter()
            .filter(|s| s.particles % 2 == parity)
            .filter_map(|s| s.lambda1.map(|z| (s.particles, z[0])))
            .collect();
        let x: Vec<f64> = pts.iter().map(|p| 1.0 / p.0 as f64).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        linear_fit(&x, &y).map(|f| Fit {
            particles: pts.iter().map(|p| p.0).collect(),
            slope: f.slope,
            intercept: f.intercept,
            r2: f.r2,
        })
    };
    ScalingFits {
        even: fit(0),
        odd: fit(1),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedingGroup {
    pub within_mean: Option<f64>,
    pub dead_fraction: f64,
    pub melted: bool,
    pub synchronized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedingRow {
    pub gamma: f64,
    pub regime: String,
    pub mean_pearson: f64,
    pub lyapunov: f64,
    pub groups: Vec<SeedingGroup>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedingSummary {
    pub rows: Vec<SeedingRow>,
    /// First coupling at which the first group is melted.
    pub melting_gamma: Option<f64>,
    /// First coupling classified as complete synchronization.
    pub complete_sync_gamma: Option<f64>,
}

pub fn seeding_summary(
    gammas: &[f64],
    reports: &[Option<PointReport>],
    melt_fraction: f64,
    analysis: &AnalysisOptions,
) -> SeedingSummary {
    let rows: Vec<SeedingRow> = gammas
        .iter()
        .zip(reports)
        .filter_map(|(&gamma, r)| {
            let s = network(r.as_ref()?)?;
            let groups = s
                .groups
                .iter()
                .flatten()
                .map(|g| {
                    let dead_fraction = g.dead as f64 / g.members.len().max(1) as f64;
                    SeedingGroup {
                        within_mean: g.within_mean,
                        dead_fraction,
                        melted: dead_fraction >= melt_fraction,
                        synchronized: g
                            .within_mean
                            .is_some_and(|c| c >= analysis.thresholds.complete),
                    }
                })
                .collect();
            Some(SeedingRow {
                gamma,
                regime: s.regime.to_string(),
                mean_pearson: s.mean_pearson,
                lyapunov: s.lyapunov,
                groups,
            })
        })
        .collect();
    let melting_gamma = rows
        .iter()
        .find(|r| r.groups.first().is_some_and(|g| g.melted))
        .map(|r| r.gamma);
    let complete_sync_gamma = rows
        .iter()
        .find(|r| r.regime == "complete-sync")
        .map(|r| r.gamma);
    SeedingSummary {
        rows,
        melting_gamma,
        complete_sync_gamma,
    }
}
