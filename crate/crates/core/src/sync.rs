//! Synchronization diagnostics for networks: Pearson correlations of `m_z`
//! series, dominant frequencies, the largest Lyapunov exponent and a
//! rule-based regime classifier.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::fft;
use crate::meanfield::{sample_grid, Network, NetworkConfig, TrajectoryRecord};
use crate::ode::{Integrator, OdeError, OdeSystem, SolverOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SyncError {
    #[error("analysis window [{t0}, {t1}] is invalid or exceeds the data")]
    InvalidWindow { t0: f64, t1: f64 },
    #[error("window holds {0} samples; at least 4 are required")]
    TooFewSamples(usize),
    #[error("sampling grid is not uniform")]
    NonUniformGrid,
    #[error("series {index} has length {got}, expected {expected}")]
    LengthMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("diagnostics were computed on different windows")]
    WindowMismatch,
    #[error("invalid Lyapunov options: {0}")]
    InvalidOptions(&'static str),
    #[error("companion trajectory left the physical region at t = {t}")]
    Escaped { t: f64 },
    #[error("separation underflow at t = {t}")]
    RenormUnderflow { t: f64 },
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisWindow {
    pub t0: f64,
    pub t1: f64,
}

impl AnalysisWindow {
    pub fn new(t0: f64, t1: f64) -> Result<Self, SyncError> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(SyncError::InvalidWindow { t0, t1 });
        }
        Ok(AnalysisWindow { t0, t1 })
    }

    pub fn span(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Index range of `times` inside the window. The grid must be uniform.
    pub fn select(&self, times: &[f64]) -> Result<core::ops::Range<usize>, SyncError> {
        let bad = SyncError::InvalidWindow {
            t0: self.t0,
            t1: self.t1,
        };
        if times.len() < 2 {
            return Err(SyncError::TooFewSamples(times.len()));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(SyncError::NonUniformGrid);
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
                return Err(SyncError::NonUniformGrid);
            }
        }
        let tol = 1e-9 * dt.max(1e-300) + 1e-9 * dt * times[times.len() - 1].abs().max(1.0);
        let first = times[0];
        let last = times[times.len() - 1];
        if self.t0 < first - tol || self.t1 > last + tol {
            return Err(bad);
        }
        let lo = times.partition_point(|&t| t < self.t0 - tol);
        let hi = times.partition_point(|&t| t <= self.t1 + tol);
        if hi <= lo || hi - lo < 4 {
            return Err(SyncError::TooFewSamples(hi.saturating_sub(lo)));
        }
        Ok(lo..hi)
    }

    fn same_as(&self, other: &AnalysisWindow) -> bool {
        self.t0 == other.t0 && self.t1 == other.t1
    }
}

/// Thresholds of the diagnostics and the classifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyncThresholds {
    /// Zero band for the Lyapunov exponent.
    pub lyapunov_eps: f64,
    /// `C̄` at or above which the network is completely synchronized.
    pub complete: f64,
    /// `C̄` at or below which the network is unsynchronized.
    pub unsynchronized: f64,
    /// Edge threshold on `|C|` for cluster detection.
    pub edge: f64,
    /// Fraction of spins that clusters must cover for cluster sync.
    pub cluster_cover: f64,
    /// Smallest component counted as a synchronized cluster.
    pub min_cluster: usize,
    /// Variance below which a series is dead.
    pub dead_variance: f64,
}

impl Default for SyncThresholds {
    fn default() -> Self {
        SyncThresholds {
            lyapunov_eps: 1e-2,
            complete: 0.95,
            unsynchronized: 0.05,
            edge: 0.9,
            cluster_cover: 0.9,
            min_cluster: 2,
            dead_variance: 1e-12,
        }
    }
}

/// Pearson matrix of a set of series over a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PearsonResult {
    pub n: usize,
    pub window: AnalysisWindow,
    /// Row-major `n x n`.
    pub matrix: Vec<f64>,
    /// Series whose variance fell below the floor.
    pub dead: Vec<bool>,
    /// Off-diagonal pairs `(a, b)`, `a < b`, where the coefficient is
    /// undefined; they are stored as 0.
    pub degenerate: Vec<[usize; 2]>,
}

impl PearsonResult {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.matrix[a * self.n + b]
    }

    pub fn mean(&self) -> f64 {
        mean_pearson(&self.matrix, self.n)
    }
}

fn check_lengths(series: &[Vec<f64>], len: usize) -> Result<(), SyncError> {
    for (i, s) in series.iter().enumerate() {
        if s.len() != len {
            return Err(SyncError::LengthMismatch {
                index: i,
                expected: len,
                got: s.len(),
            });
        }
    }
    Ok(())
}

/// Pearson correlation matrix of `series` (one per spin, sampled on `times`).
pub fn pearson_matrix(
    series: &[Vec<f64>],
    times: &[f64],
    window: AnalysisWindow,
    dead_variance: f64,
) -> Result<PearsonResult, SyncError> {
    check_lengths(series, times.len())?;
    let range = window.select(times)?;
    let n = series.len();
    let len = range.len() as f64;
    let centered: Vec<Vec<f64>> = series
        .iter()
        .map(|s| {
            let w = &s[range.clone()];
            let mean = w.iter().sum::<f64>() / len;
            w.iter().map(|v| v - mean).collect()
        })
        .collect();
    let var: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / len)
        .collect();
    let dead: Vec<bool> = var.iter().map(|&v| v < dead_variance).collect();
    let mut matrix = vec![0.0; n * n];
    let mut degenerate = Vec::new();
    for a in 0..n {
        matrix[a * n + a] = 1.0;
        for b in a + 1..n {
            let c = if dead[a] || dead[b] {
                degenerate.push([a, b]);
                0.0
            } else {
                let cov = centered[a]
                    .iter()
                    .zip(&centered[b])
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    / len;
                (cov / (var[a] * var[b]).sqrt()).clamp(-1.0, 1.0)
            };
            matrix[a * n + b] = c;
            matrix[b * n + a] = c;
        }
    }
    Ok(PearsonResult {
        n,
        window,
        matrix,
        dead,
        degenerate,
    })
}

/// Mean of the strictly upper-triangular entries of a row-major `n x n`
/// matrix; 0 when `n < 2`.
pub fn mean_pearson(matrix: &[f64], n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            s += matrix[a * n + b];
        }
    }
    s / (n * (n - 1) / 2) as f64
}

/// Mean off-diagonal coefficient among the members of `group`.
pub fn within_group_mean(p: &PearsonResult, group: &[usize]) -> Option<f64> {
    let k = group.len();
    if k < 2 {
        return None;
    }
    let mut s = 0.0;
    for (i, &a) in group.iter().enumerate() {
        for &b in &group[i + 1..] {
            s += p.get(a, b);
        }
    }
    Some(s / (k * (k - 1) / 2) as f64)
}

/// Dominant frequency and normalized magnitude spectrum of each series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub window: AnalysisWindow,
    /// Spacing of the frequency bins (cycles per unit time).
    pub bin_width: f64,
    /// Peak frequency per series (cycles per unit time), 0 for dead ones.
    pub peaks: Vec<f64>,
    /// Magnitude per bin `k = 0 ..= len/2`, scaled to unit maximum.
    pub spectra: Vec<Vec<f64>>,
}

impl FrequencyReport {
    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * self.bin_width
    }

    /// Peak bin index of each series.
    pub fn peak_bins(&self) -> Vec<usize> {
        self.peaks
            .iter()
            .map(|f| (f / self.bin_width).round() as usize)
            .collect()
    }
}

pub fn dominant_frequencies(
    series: &[Vec<f64>],
    times: &[f64],
    window: AnalysisWindow,
    dead_variance: f64,
) -> Result<FrequencyReport, SyncError> {
    check_lengths(series, times.len())?;
    let range = window.select(times)?;
    let len = range.len();
    let dt = times[1] - times[0];
    let bin_width = 1.0 / (len as f64 * dt);
    let hann = fft::hann(len);
    let mut peaks = Vec::with_capacity(series.len());
    let mut spectra = Vec::with_capacity(series.len());
    for s in series {
        let w = &s[range.clone()];
        let mean = w.iter().sum::<f64>() / len as f64;
        let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len as f64;
        if var < dead_variance {
            peaks.push(0.0);
            spectra.push(vec![0.0; len / 2 + 1]);
            continue;
        }
        let x: Vec<f64> = w.iter().zip(&hann).map(|(v, h)| (v - mean) * h).collect();
        let mut mag = fft::real_magnitude(&x);
        let k = (1..mag.len())
            .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
            .unwrap_or(0);
        let top = mag.iter().copied().fold(0.0, f64::max);
        if top > 0.0 {
            mag.iter_mut().for_each(|v| *v /= top);
        }
        peaks.push(k as f64 * bin_width);
        spectra.push(mag);
    }
    Ok(FrequencyReport {
        window,
        bin_width,
        peaks,
        spectra,
    })
}

/// How separations are measured in the Lyapunov estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// Plain Euclidean separation.
    #[default]
    None,
    /// The state is a list of Bloch vectors whose norms are conserved:
    /// separations are projected onto the product of their tangent
    /// planes, and a companion leaving the unit ball is an error.
    PerSpinSphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovOptions {
    pub d0: f64,
    pub renorm_interval: f64,
    /// Time discarded before accumulating.
    pub transient: f64,
    /// Final time.
    pub horizon: f64,
    pub constraint: Constraint,
    pub solver: SolverOptions,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions {
            d0: 1e-8,
            renorm_interval: 1.0,
            transient: 200.0,
            horizon: 1000.0,
            constraint: Constraint::None,
            solver: SolverOptions::default(),
        }
    }
}

impl LyapunovOptions {
    pub fn window(&self) -> AnalysisWindow {
        AnalysisWindow {
            t0: self.transient,
            t1: self.horizon,
        }
    }

    fn validate(&self) -> Result<(), SyncError> {
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return Err(SyncError::InvalidOptions("d0 must be positive"));
        }
        if !(self.renorm_interval > 0.0 && self.renorm_interval.is_finite()) {
            return Err(SyncError::InvalidOptions(
                "renormalization interval must be positive",
            ));
        }
        if !(self.transient >= 0.0 && self.horizon > self.transient && self.horizon.is_finite()) {
            return Err(SyncError::InvalidOptions("need 0 <= transient < horizon"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub lambda: f64,
    pub window: AnalysisWindow,
    /// Renormalization intervals that entered the estimate.
    pub intervals: usize,
    /// `(t, running estimate)` after each accumulated interval.
    pub running: Vec<[f64; 2]>,
    /// Spread (max - min) of the running estimate over its final quarter.
    pub plateau_spread: f64,
}

struct Pair<S> {
    sys: S,
    n: usize,
}

impl<S: OdeSystem> OdeSystem for Pair<S> {
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn rhs(&self, t: f64, y: &[f64], d: &mut [f64]) {
        let (y0, y1) = y.split_at(self.n);
        let (d0, d1) = d.split_at_mut(self.n);
        self.sys.rhs(t, y0, d0);
        self.sys.rhs(t, y1, d1);
    }
}

fn project_tangent(delta: &mut [f64], x: &[f64]) {
    for (d, m) in delta.chunks_exact_mut(3).zip(x.chunks_exact(3)) {
        let q = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
        if q > 0.0 {
            let s = (d[0] * m[0] + d[1] * m[1] + d[2] * m[2]) / q;
            d[0] -= s * m[0];
            d[1] -= s * m[1];
            d[2] -= s * m[2];
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest Lyapunov exponent by two-trajectory renormalization.
pub fn max_lyapunov<S: OdeSystem>(
    sys: S,
    y0: &[f64],
    opts: &LyapunovOptions,
) -> Result<LyapunovResult, SyncError> {
    max_lyapunov_sampled(sys, y0, opts, &[]).map(|(r, _)| r)
}

/// As [`max_lyapunov`], also returning the reference trajectory at the
/// (sorted) `samples`, row-major.
pub fn max_lyapunov_sampled<S: OdeSystem>(
    sys: S,
    y0: &[f64],
    opts: &LyapunovOptions,
    samples: &[f64],
) -> Result<(LyapunovResult, Vec<f64>), SyncError> {
    opts.validate()?;
    let n = sys.dim();
    if y0.len() != n {
        return Err(OdeError::DimensionMismatch {
            expected: n,
            got: y0.len(),
        }
        .into());
    }
    if opts.constraint == Constraint::PerSpinSphere && !n.is_multiple_of(3) {
        return Err(SyncError::InvalidOptions(
            "per-spin constraint needs 3n components",
        ));
    }
    let project = opts.constraint == Constraint::PerSpinSphere;

    let mut delta: Vec<f64> = (0..n)
        .map(|i| ((i * 7919 + 13) % 97) as f64 / 97.0 - 0.5)
        .collect();
    if project {
        project_tangent(&mut delta, y0);
    }
    let d = norm(&delta);
    if !(d > 0.0) {
        return Err(SyncError::RenormUnderflow { t: 0.0 });
    }
    let mut joint = Vec::with_capacity(2 * n);
    joint.extend_from_slice(y0);
    joint.extend(y0.iter().zip(&delta).map(|(y, e)| y + opts.d0 * e / d));

    let mut it = Integrator::new(Pair { sys, n }, 0.0, &joint, opts.solver)?;
    let mut raw = Vec::new();
    let mut out = Vec::with_capacity(samples.len() * n);

    let total = ((opts.horizon / opts.renorm_interval) - 1e-9).ceil() as usize;
    let mut sum = 0.0;
    let mut elapsed = 0.0;
    let mut running = Vec::new();
    let mut intervals = 0usize;
    let mut t_prev = 0.0;
    for k in 1..=total {
        let t = (k as f64 * opts.renorm_interval).min(opts.horizon);
        raw.clear();
        it.advance(t, samples, &mut raw)?;
        for row in raw.chunks_exact(2 * n) {
            out.extend_from_slice(&row[..n]);
        }
        let state = it.state();
        let (r, c) = state.split_at(n);
        if c.iter().any(|v| !v.is_finite()) {
            return Err(SyncError::Escaped { t });
        }
        if project
            && c.chunks_exact(3)
                .any(|m| (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt() > 1.0 + 1e-6)
        {
            return Err(SyncError::Escaped { t });
        }
        delta.clear();
        delta.extend(c.iter().zip(r).map(|(c, r)| c - r));
        if project {
            project_tangent(&mut delta, r);
        }
        let d = norm(&delta);
        if !(d > 1e-300) || !d.is_finite() {
            return Err(SyncError::RenormUnderflow { t });
        }
        if t_prev >= opts.transient - 1e-12 {
            sum += (d / opts.d0).ln();
            elapsed += t - t_prev;
            intervals += 1;
            running.push([t, sum / elapsed]);
        }
        joint.clear();
        joint.extend_from_slice(r);
        joint.extend(r.iter().zip(&delta).map(|(r, e)| r + opts.d0 * e / d));
        it.reset_state(&joint)?;
        t_prev = t;
    }
    if intervals == 0 {
        return Err(SyncError::InvalidOptions("no interval after the transient"));
    }
    let lambda = sum / elapsed;
    let tail = &running[running.len() - (running.len() / 4).max(1)..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[1]), hi.max(p[1]))
        });
    Ok((
        LyapunovResult {
            lambda,
            window: opts.window(),
            intervals,
            running,
            plateau_spread: hi - lo,
        },
        out,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "unsynchronized")]
    Unsynchronized,
    #[serde(rename = "chimera")]
    Chimera,
    #[serde(rename = "cluster-sync")]
    ClusterSync,
    #[serde(rename = "chimera+partial-oscillation-death")]
    ChimeraPartialDeath,
    #[serde(rename = "oscillation-death")]
    OscillationDeath,
    #[serde(rename = "chaotic")]
    Chaotic,
    #[serde(rename = "complete-sync")]
    CompleteSync,
}

impl Regime {
    pub const ALL: [Regime; 7] = [
        Regime::Unsynchronized,
        Regime::Chimera,
        Regime::ClusterSync,
        Regime::ChimeraPartialDeath,
        Regime::OscillationDeath,
        Regime::Chaotic,
        Regime::CompleteSync,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Unsynchronized => "unsynchronized",
            Regime::Chimera => "chimera",
            Regime::ClusterSync => "cluster-sync",
            Regime::ChimeraPartialDeath => "chimera+partial-oscillation-death",
            Regime::OscillationDeath => "oscillation-death",
            Regime::Chaotic => "chaotic",
            Regime::CompleteSync => "complete-sync",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Regime::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| alloc::format!("unknown regime '{s}'"))
    }
}

/// Connected components of the graph with edges `|C_ab| >= edge`, each
/// sorted, largest first (ties by smallest member).
pub fn correlation_clusters(p: &PearsonResult, edge: f64) -> Vec<Vec<usize>> {
    let n = p.n;
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(a) = queue.pop_front() {
            for b in 0..n {
                if !seen[b] && b != a && p.get(a, b).abs() >= edge {
                    seen[b] = true;
                    comp.push(b);
                    queue.push_back(b);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

/// Outcome of the classifier with the intermediate quantities it used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub regime: Regime,
    /// Components of size at least `min_cluster`.
    pub clusters: Vec<Vec<usize>>,
    /// Spins outside every such cluster.
    pub unclustered: Vec<usize>,
}

/// Rule-based regime label. All three diagnostics must share one window.
pub fn classify_regime(
    pearson: &PearsonResult,
    freqs: &FrequencyReport,
    lyapunov: &LyapunovResult,
    th: &SyncThresholds,
) -> Result<Classification, SyncError> {
    if !pearson.window.same_as(&freqs.window) || !pearson.window.same_as(&lyapunov.window) {
        return Err(SyncError::WindowMismatch);
    }
    if freqs.peaks.len() != pearson.n {
        return Err(SyncError::LengthMismatch {
            index: 0,
            expected: pearson.n,
            got: freqs.peaks.len(),
        });
    }
    Ok(classify(pearson, lyapunov.lambda, th))
}

/// The classifier rule on a Pearson matrix and an exponent.
pub fn classify(pearson: &PearsonResult, lambda: f64, th: &SyncThresholds) -> Classification {
    let comps = correlation_clusters(pearson, th.edge);
    let clusters: Vec<Vec<usize>> = comps
        .iter()
        .filter(|c| c.len() >= th.min_cluster)
        .cloned()
        .collect();
    let mut unclustered: Vec<usize> = comps
        .iter()
        .filter(|c| c.len() < th.min_cluster)
        .flatten()
        .copied()
        .collect();
    unclustered.sort_unstable();
    let n = pearson.n;
    let mean = pearson.mean();
    let regime = if lambda > th.lyapunov_eps {
        Regime::Chaotic
    } else if lambda < -th.lyapunov_eps {
        if pearson.dead.iter().all(|&d| d) {
            Regime::OscillationDeath
        } else {
            Regime::ChimeraPartialDeath
        }
    } else if mean >= th.complete {
        Regime::CompleteSync
    } else if mean <= th.unsynchronized {
        Regime::Unsynchronized
    } else {
        let covered: usize = clusters.iter().map(|c| c.len()).sum();
        if clusters.len() >= 2 && covered as f64 >= th.cluster_cover * n as f64 {
            Regime::ClusterSync
        } else {
            Regime::Chimera
        }
    };
    Classification {
        regime,
        clusters,
        unclustered,
    }
}

/// Per-group summary used when a partition is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: usize,
    pub members: Vec<usize>,
    pub within_mean: Option<f64>,
    pub dead: usize,
}

pub fn group_summaries(p: &PearsonResult, partition: &[usize]) -> Vec<GroupSummary> {
    let groups = partition.iter().copied().max().map_or(0, |g| g + 1);
    (0..groups)
        .map(|g| {
            let members: Vec<usize> = (0..partition.len())
                .filter(|&a| partition[a] == g)
                .collect();
            GroupSummary {
                group: g,
                within_mean: within_group_mean(p, &members),
                dead: members.iter().filter(|&&a| p.dead[a]).count(),
                members,
            }
        })
        .collect()
}

/// Everything computed for one network run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    pub n: usize,
    pub window: AnalysisWindow,
    pub thresholds: SyncThresholds,
    /// Row-major `n x n`.
    pub pearson: Vec<f64>,
    pub mean_pearson: f64,
    pub dead: Vec<bool>,
    pub degenerate: Vec<[usize; 2]>,
    pub peak_frequencies: Vec<f64>,
    pub bin_width: f64,
    pub lyapunov: f64,
    pub lyapunov_plateau_spread: f64,
    pub regime: Regime,
    pub clusters: Vec<Vec<usize>>,
    pub unclustered: Vec<usize>,
    pub groups: Option<Vec<GroupSummary>>,
}

impl SyncReport {
    pub fn build(
        pearson: &PearsonResult,
        freqs: &FrequencyReport,
        lyapunov: &LyapunovResult,
        th: &SyncThresholds,
        partition: Option<&[usize]>,
    ) -> Result<Self, SyncError> {
        let c = classify_regime(pearson, freqs, lyapunov, th)?;
        Ok(SyncReport {
            n: pearson.n,
            window: pearson.window,
            thresholds: *th,
            pearson: pearson.matrix.clone(),
            mean_pearson: pearson.mean(),
            dead: pearson.dead.clone(),
            degenerate: pearson.degenerate.clone(),
            peak_frequencies: freqs.peaks.clone(),
            bin_width: freqs.bin_width,
            lyapunov: lyapunov.lambda,
            lyapunov_plateau_spread: lyapunov.plateau_spread,
            regime: c.regime,
            clusters: c.clusters,
            unclustered: c.unclustered,
            groups: partition.map(|p| group_summaries(pearson, p)),
        })
    }

    pub fn pearson_result(&self) -> PearsonResult {
        PearsonResult {
            n: self.n,
            window: self.window,
            matrix: self.pearson.clone(),
            dead: self.dead.clone(),
            degenerate: self.degenerate.clone(),
        }
    }
}

/// Settings for [`analyze_network`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    /// Sampling step of the stored trajectory.
    pub dt: f64,
    pub lyapunov: LyapunovOptions,
    pub thresholds: SyncThresholds,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            dt: 0.25,
            lyapunov: LyapunovOptions {
                constraint: Constraint::PerSpinSphere,
                ..Default::default()
            },
            thresholds: SyncThresholds::default(),
        }
    }
}

/// Integrates a network from `y0` over `[0, horizon]` together with its
/// Lyapunov companion and computes every diagnostic on the window
/// `[transient, horizon]`.
pub fn analyze_network(
    cfg: &NetworkConfig,
    y0: &[f64],
    opts: &AnalysisOptions,
) -> Result<(SyncReport, TrajectoryRecord), SyncError> {
    let lo = &opts.lyapunov;
    let grid = sample_grid(0.0, lo.horizon, opts.dt)
        .map_err(|_| SyncError::InvalidOptions("bad sampling step"))?;
    let (lyap, states) = max_lyapunov_sampled(Network(cfg), y0, lo, &grid)?;
    let rec = TrajectoryRecord::from_samples(cfg.n(), grid, states);
    let window = lo.window();
    let series = rec.mz_all();
    let th = &opts.thresholds;
    let p = pearson_matrix(&series, &rec.times, window, th.dead_variance)?;
    let f = dominant_frequencies(&series, &rec.times, window, th.dead_variance)?;
    let report = SyncReport::build(&p, &f, &lyap, th, cfg.partition())?;
    Ok((report, rec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::ModelParams;
    use crate::meanfield::SingleCtc;
    use core::f64::consts::PI;

    fn grid(dt: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn trivial_pearson_cases() {
        let t = grid(0.1, 5000);
        let x: Vec<f64> = t.iter().map(|t| t.sin()).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let w = AnalysisWindow::new(0.0, 499.9).unwrap();
        let p = pearson_matrix(&[x.clone(), x.clone(), neg], &t, w, 1e-12).unwrap();
        assert!((p.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((p.get(0, 2) + 1.0).abs() < 1e-12);
        assert_eq!(p.get(1, 1), 1.0);
    }

    #[test]
    fn incommensurate_sinusoids_decorrelate() {
        let phi = (5.0f64).sqrt();
        let t = grid(0.05, 40000);
        let a: Vec<f64> = t.iter().map(|t| t.sin()).collect();
        let b: Vec<f64> = t.iter().map(|t| (phi * t).sin()).collect();
        let w = AnalysisWindow::new(0.0, t[t.len() - 1]).unwrap();
        let p = pearson_matrix(&[a, b], &t, w, 1e-12).unwrap();
        assert!(p.get(0, 1).abs() < 0.05);
    }

    #[test]
    fn dead_series_flagged() {
        let t = grid(0.1, 100);
        let a: Vec<f64> = t.iter().map(|t| t.sin()).collect();
        let b = vec![0.3; 100];
        let w = AnalysisWindow::new(1.0, 9.0).unwrap();
        let p = pearson_matrix(&[a, b], &t, w, 1e-12).unwrap();
        assert_eq!(p.dead, vec![false, true]);
        assert_eq!(p.degenerate, vec![[0, 1]]);
        assert_eq!(p.get(1, 1), 1.0);
        assert_eq!(p.get(0, 1), 0.0);
    }

    #[test]
    fn window_errors() {
        let t = grid(0.1, 100);
        let a = vec![0.0; 100];
        assert!(AnalysisWindow::new(5.0, 1.0).is_err());
        let w = AnalysisWindow::new(1.0, 20.0).unwrap();
        assert!(matches!(
            pearson_matrix(core::slice::from_ref(&a), &t, w, 1e-12),
            Err(SyncError::InvalidWindow { .. })
        ));
        let mut bad = t.clone();
        bad[50] += 0.05;
        let w = AnalysisWindow::new(1.0, 9.0).unwrap();
        assert_eq!(
            pearson_matrix(&[a], &bad, w, 1e-12),
            Err(SyncError::NonUniformGrid)
        );
    }

    #[test]
    fn mean_pearson_trivial() {
        let n = 6;
        let mut id = vec![0.0; n * n];
        (0..n).for_each(|i| id[i * n + i] = 1.0);
        assert_eq!(mean_pearson(&id, n), 0.0);
        assert_eq!(mean_pearson(&vec![1.0; n * n], n), 1.0);
    }

    #[test]
    fn frequency_of_a_single_spin() {
        let p = ModelParams::new(0.9, 1.0).unwrap();
        let dt = 0.25;
        let rec = crate::meanfield::integrate(
            SingleCtc(p),
            &[0.0, 0.0, 0.1],
            0.0,
            1000.0,
            dt,
            SolverOptions::default(),
        )
        .unwrap();
        let w = AnalysisWindow::new(200.0, 1000.0).unwrap();
        let f = dominant_frequencies(&rec.mz_all(), &rec.times, w, 1e-12).unwrap();
        let want = 0.80f64.sqrt() / (2.0 * PI);
        assert!(
            (f.peaks[0] - want).abs() <= f.bin_width,
            "{} vs {want}",
            f.peaks[0]
        );
        assert_eq!(f.spectra[0].iter().copied().fold(0.0, f64::max), 1.0);
    }

    #[test]
    fn dead_series_has_zero_peak() {
        let t = grid(0.5, 400);
        let w = AnalysisWindow::new(0.0, 199.5).unwrap();
        let f = dominant_frequencies(&[vec![0.95; 400]], &t, w, 1e-12).unwrap();
        assert_eq!(f.peaks[0], 0.0);
        assert!(f.spectra[0].iter().all(|&v| v == 0.0));
    }

    struct Decay(f64);
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
            d[0] = -self.0 * y[0];
            d[1] = -self.0 * y[1];
        }
    }

    #[test]
    fn lyapunov_of_linear_decay() {
        let opts = LyapunovOptions {
            transient: 10.0,
            horizon: 60.0,
            ..Default::default()
        };
        let r = max_lyapunov(Decay(0.3), &[1.0, -0.5], &opts).unwrap();
        assert!((r.lambda + 0.3).abs() < 0.3 * 0.02, "{}", r.lambda);
        assert_eq!(r.intervals, 50);
        assert!(r.plateau_spread < 1e-3);
    }

    #[test]
    fn lyapunov_of_a_single_oscillating_spin() {
        let p = ModelParams::new(0.9, 1.0).unwrap();
        let opts = LyapunovOptions {
            constraint: Constraint::PerSpinSphere,
            ..Default::default()
        };
        for m in [0.1, 0.5, 0.8] {
            let r = max_lyapunov(SingleCtc(p), &[0.0, 0.0, m], &opts).unwrap();
            assert!(r.lambda.abs() <= 5e-3, "m={m} lambda={}", r.lambda);
        }
    }

    #[test]
    fn lyapunov_option_validation() {
        let bad = LyapunovOptions {
            transient: 10.0,
            horizon: 5.0,
            ..Default::default()
        };
        assert!(matches!(
            max_lyapunov(Decay(1.0), &[1.0, 1.0], &bad),
            Err(SyncError::InvalidOptions(_))
        ));
    }

    fn block_matrix(n: usize) -> PearsonResult {
        let h = n / 2;
        let mut m = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                if (a < h) == (b < h) {
                    m[a * n + b] = 1.0;
                }
            }
        }
        PearsonResult {
            n,
            window: AnalysisWindow { t0: 0.0, t1: 1.0 },
            matrix: m,
            dead: vec![false; n],
            degenerate: vec![],
        }
    }

    #[test]
    fn classifier_rules() {
        let th = SyncThresholds::default();
        let p = block_matrix(10);
        let c = classify(&p, 0.0, &th);
        assert_eq!(c.regime, Regime::ClusterSync);
        assert_eq!(c.clusters.len(), 2);
        assert_eq!(classify(&p, 0.5, &th).regime, Regime::Chaotic);
        assert_eq!(classify(&p, -0.5, &th).regime, Regime::ChimeraPartialDeath);
        let mut dead = p.clone();
        dead.dead = vec![true; 10];
        assert_eq!(classify(&dead, -0.5, &th).regime, Regime::OscillationDeath);

        // one block of 6 with 4 loners: chimera
        let n = 10;
        let mut m = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                if a == b || (a < 6 && b < 6) {
                    m[a * n + b] = 1.0;
                }
            }
        }
        let q = PearsonResult {
            matrix: m,
            ..p.clone()
        };
        let c = classify(&q, 0.0, &th);
        assert_eq!(c.regime, Regime::Chimera);
        assert_eq!(c.unclustered, vec![6, 7, 8, 9]);
    }

    #[test]
    fn classifier_checks_windows() {
        let p = block_matrix(4);
        let f = FrequencyReport {
            window: p.window,
            bin_width: 1.0,
            peaks: vec![0.0; 4],
            spectra: vec![],
        };
        let l = LyapunovResult {
            lambda: 0.0,
            window: AnalysisWindow { t0: 0.0, t1: 2.0 },
            intervals: 1,
            running: vec![],
            plateau_spread: 0.0,
        };
        assert_eq!(
            classify_regime(&p, &f, &l, &SyncThresholds::default()),
            Err(SyncError::WindowMismatch)
        );
    }

    #[test]
    fn regime_names_round_trip() {
        for r in Regime::ALL {
            assert_eq!(r.as_str().parse::<Regime>().unwrap(), r);
        }
    }
}
