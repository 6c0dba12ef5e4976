//! Mean-field dynamics of single and coupled collective spins.
//!
//! The state of a network is a flat slice `[mx_0, my_0, mz_0, mx_1, ...]`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::liouvillian::ModelParams;
use crate::ode::{self, OdeError, OdeSystem, SolverOptions};

pub type Bloch = [f64; 3];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeanFieldError {
    #[error("invalid network: {0}")]
    InvalidConfig(&'static str),
    #[error("state has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("m = {m} sits on the boundary m = Omega/kappa = {ratio}; fixed points coincide")]
    DegenerateBoundary { m: f64, ratio: f64 },
    #[error("norm m = {0} outside (0, 1]")]
    InvalidNorm(f64),
    #[error("invalid time span or sampling step")]
    InvalidSpan,
}

/// Single-spin mean-field vector field.
pub fn rhs_single(m: &Bloch, p: &ModelParams) -> Bloch {
    let [x, y, z] = *m;
    [
        p.kappa * x * z,
        -p.omega * z + p.kappa * y * z,
        p.omega * y - p.kappa * (x * x + y * y),
    ]
}

/// One uncoupled spin as an ODE system.
#[derive(Clone, Copy, Debug)]
pub struct SingleCtc(pub ModelParams);

impl OdeSystem for SingleCtc {
    fn dim(&self) -> usize {
        3
    }
    fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
        let r = rhs_single(&[y[0], y[1], y[2]], &self.0);
        d.copy_from_slice(&r);
    }
}

/// Parameters and couplings of `n` spins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    params: Vec<ModelParams>,
    /// Row-major `n x n`, symmetric with zero diagonal.
    coupling: Vec<f64>,
    partition: Option<Vec<usize>>,
}

impl NetworkConfig {
    pub fn new(
        params: Vec<ModelParams>,
        coupling: Vec<f64>,
        partition: Option<Vec<usize>>,
    ) -> Result<Self, MeanFieldError> {
        let n = params.len();
        if n == 0 {
            return Err(MeanFieldError::InvalidConfig(
                "network needs at least one spin",
            ));
        }
        for p in &params {
            p.validate()
                .map_err(|_| MeanFieldError::InvalidConfig("invalid spin parameters"))?;
        }
        if coupling.len() != n * n {
            return Err(MeanFieldError::InvalidConfig(
                "coupling matrix must be n x n",
            ));
        }
        for a in 0..n {
            if coupling[a * n + a] != 0.0 {
                return Err(MeanFieldError::InvalidConfig(
                    "coupling diagonal must be zero",
                ));
            }
            for b in 0..n {
                let g = coupling[a * n + b];
                if !g.is_finite() {
                    return Err(MeanFieldError::InvalidConfig(
                        "coupling entries must be finite",
                    ));
                }
                if g != coupling[b * n + a] {
                    return Err(MeanFieldError::InvalidConfig(
                        "coupling matrix must be symmetric",
                    ));
                }
            }
        }
        if let Some(p) = &partition {
            if p.len() != n {
                return Err(MeanFieldError::InvalidConfig(
                    "partition must label every spin once",
                ));
            }
        }
        Ok(NetworkConfig {
            params,
            coupling,
            partition,
        })
    }

    /// Identical spins, all pairs coupled with strength `gamma`.
    pub fn all_to_all(
        n: usize,
        params: ModelParams,
        gamma: f64,
        partition: Option<Vec<usize>>,
    ) -> Result<Self, MeanFieldError> {
        let coupling = (0..n * n)
            .map(|k| if k / n == k % n { 0.0 } else { gamma })
            .collect();
        Self::new(vec![params; n], coupling, partition)
    }

    /// Identical spins coupled with `gamma` only inside each partition group.
    pub fn intra_group(
        params: ModelParams,
        partition: Vec<usize>,
        gamma: f64,
    ) -> Result<Self, MeanFieldError> {
        let n = partition.len();
        let coupling = (0..n * n)
            .map(|k| {
                let (a, b) = (k / n, k % n);
                if a != b && partition[a] == partition[b] {
                    gamma
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(vec![params; n], coupling, Some(partition))
    }

    pub fn n(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[ModelParams] {
        &self.params
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.coupling[a * self.n() + b]
    }

    pub fn coupling_matrix(&self) -> &[f64] {
        &self.coupling
    }

    pub fn partition(&self) -> Option<&[usize]> {
        self.partition.as_deref()
    }
}

/// Coupled mean-field vector field with per-pair couplings.
pub fn rhs_network(
    state: &[f64],
    cfg: &NetworkConfig,
    out: &mut [f64],
) -> Result<(), MeanFieldError> {
    let n = cfg.n();
    if state.len() != 3 * n {
        return Err(MeanFieldError::DimensionMismatch {
            expected: 3 * n,
            got: state.len(),
        });
    }
    if out.len() != 3 * n {
        return Err(MeanFieldError::DimensionMismatch {
            expected: 3 * n,
            got: out.len(),
        });
    }
    rhs_network_unchecked(state, cfg, out);
    Ok(())
}

fn rhs_network_unchecked(state: &[f64], cfg: &NetworkConfig, out: &mut [f64]) {
    let n = cfg.n();
    let inv_n = 1.0 / n as f64;
    for a in 0..n {
        let m = [state[3 * a], state[3 * a + 1], state[3 * a + 2]];
        let base = rhs_single(&m, &cfg.params[a]);
        let row = &cfg.coupling[a * n..(a + 1) * n];
        // sums of Gamma_ab m_b over b != a
        let mut sx = 0.0;
        let mut sy = 0.0;
        for b in 0..n {
            let g = row[b];
            if g != 0.0 {
                sx += g * state[3 * b];
                sy += g * state[3 * b + 1];
            }
        }
        let (x, y, z) = (m[0], m[1], m[2]);
        out[3 * a] = base[0] + inv_n * z * sy;
        out[3 * a + 1] = base[1] - inv_n * z * sx;
        out[3 * a + 2] = base[2] + inv_n * (y * sx - x * sy);
    }
}

/// A network as an ODE system.
#[derive(Clone, Copy, Debug)]
pub struct Network<'a>(pub &'a NetworkConfig);

impl OdeSystem for Network<'_> {
    fn dim(&self) -> usize {
        3 * self.0.n()
    }
    fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
        rhs_network_unchecked(y, self.0, d)
    }
}

/// Dense samples of a mean-field run with conservation diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// Number of spins.
    pub n: usize,
    pub times: Vec<f64>,
    /// Row-major `times.len() x 3n`.
    pub states: Vec<f64>,
    /// Per spin, `max_t |m(t)^2 - m(0)^2|`.
    pub norm_drift: Vec<f64>,
    /// Per spin, `max_t |m(t)|`.
    pub max_norm: Vec<f64>,
    /// Spins whose norm exceeded `1 + 1e-6`.
    pub unphysical: Vec<usize>,
}

impl TrajectoryRecord {
    pub fn from_samples(n: usize, times: Vec<f64>, states: Vec<f64>) -> Self {
        let width = 3 * n;
        let mut norm_drift = vec![0.0f64; n];
        let mut max_norm = vec![0.0f64; n];
        if !times.is_empty() {
            let n0: Vec<f64> = (0..n).map(|a| norm2(&states[3 * a..3 * a + 3])).collect();
            for k in 0..times.len() {
                let row = &states[k * width..(k + 1) * width];
                for a in 0..n {
                    let q = norm2(&row[3 * a..3 * a + 3]);
                    norm_drift[a] = norm_drift[a].max((q - n0[a]).abs());
                    max_norm[a] = max_norm[a].max(q.sqrt());
                }
            }
        }
        let unphysical = (0..n).filter(|&a| max_norm[a] > 1.0 + 1e-6).collect();
        TrajectoryRecord {
            n,
            times,
            states,
            norm_drift,
            max_norm,
            unphysical,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * 3 * self.n..(k + 1) * 3 * self.n]
    }

    /// Component `c` (0 = x, 1 = y, 2 = z) of spin `a` over time.
    pub fn component(&self, a: usize, c: usize) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.states[k * 3 * self.n + 3 * a + c])
            .collect()
    }

    pub fn mz(&self, a: usize) -> Vec<f64> {
        self.component(a, 2)
    }

    /// All `m_z` series.
    pub fn mz_all(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|a| self.mz(a)).collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().copied().fold(0.0, f64::max)
    }

    /// Uniform sampling step, if the grid has at least two points.
    pub fn dt(&self) -> Option<f64> {
        (self.times.len() >= 2).then(|| self.times[1] - self.times[0])
    }
}

fn norm2(v: &[f64]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Uniform grid `t0, t0 + dt, ...` up to and including `t1` (within rounding).
pub fn sample_grid(t0: f64, t1: f64, dt: f64) -> Result<Vec<f64>, MeanFieldError> {
    if !(t0.is_finite() && t1.is_finite() && dt.is_finite()) || t1 < t0 || dt <= 0.0 {
        return Err(MeanFieldError::InvalidSpan);
    }
    let steps = ((t1 - t0) / dt + 1e-9).floor() as usize;
    Ok(ode::uniform_grid(t0, dt, steps + 1))
}

/// Integrates `sys` (a single spin or a network) on a uniform grid.
pub fn integrate<S: OdeSystem>(
    sys: S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
    opts: SolverOptions,
) -> Result<TrajectoryRecord, MeanFieldError> {
    let dim = sys.dim();
    if !dim.is_multiple_of(3) || y0.len() != dim {
        return Err(MeanFieldError::DimensionMismatch {
            expected: dim,
            got: y0.len(),
        });
    }
    let grid = sample_grid(t0, t1, dt)?;
    let sol = ode::solve(sys, y0, &grid, opts)?;
    Ok(TrajectoryRecord::from_samples(
        dim / 3,
        sol.times,
        sol.states,
    ))
}

/// `(0, 0, m)` for every norm in `ms`, flattened.
pub fn polar_initial_state(ms: &[f64]) -> Vec<f64> {
    ms.iter().flat_map(|&m| [0.0, 0.0, m]).collect()
}

/// Norm `m` whose uncoupled oscillation has angular frequency `omega_target`.
pub fn norm_for_frequency(omega_target: f64, p: &ModelParams) -> Option<f64> {
    let r = p.ratio();
    let w = omega_target / p.kappa;
    (omega_target > 0.0 && w < r).then(|| (r * r - w * w).sqrt())
}

/// Angular frequency `kappa sqrt((Omega/kappa)^2 - m^2)` of the uncoupled
/// oscillation, if `m < Omega/kappa`.
pub fn predicted_frequency(m: f64, p: &ModelParams) -> Option<f64> {
    let r = p.ratio();
    (m < r).then(|| p.kappa * (r * r - m * m).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointKind {
    Center,
    Saddle,
}

/// Fixed points of the single-spin flow at fixed norm `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub m: f64,
    pub params: ModelParams,
    /// `M1` for the `+` and `-` branch of `m_x`.
    pub m1: [[Complex64; 3]; 2],
    /// `M2` for the `+` and `-` branch of `m_z`.
    pub m2: [[Complex64; 3]; 2],
    /// Jacobian spectrum at `M1`: `{0, +k, -k}` with `k = kappa sqrt(m^2 - (Omega/kappa)^2)`.
    pub lambda1: [Complex64; 3],
    /// Jacobian spectrum at `M2` for each branch: `{0, s k, s k}`.
    pub lambda2: [[Complex64; 3]; 2],
    pub m1_physical: bool,
    pub m2_physical: bool,
    pub kind: FixedPointKind,
    pub omega_pred: Option<f64>,
}

impl FixedPointReport {
    /// Real coordinates of the physical fixed points.
    pub fn physical_points(&self) -> Vec<Bloch> {
        let pts = if self.m1_physical { &self.m1 } else { &self.m2 };
        pts.iter().map(|p| [p[0].re, p[1].re, p[2].re]).collect()
    }
}

/// Closed-form fixed points, Jacobian spectra and classification.
pub fn fixed_points(m: f64, p: &ModelParams) -> Result<FixedPointReport, MeanFieldError> {
    if !(m > 0.0 && m <= 1.0) {
        return Err(MeanFieldError::InvalidNorm(m));
    }
    p.validate()
        .map_err(|_| MeanFieldError::InvalidConfig("invalid spin parameters"))?;
    let r = p.ratio();
    if (m - r).abs() <= 1e-12 * r.max(1.0) {
        return Err(MeanFieldError::DegenerateBoundary { m, ratio: r });
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let s1 = c(1.0 - (m / r) * (m / r)).sqrt() * m;
    let y1 = c(m * m / r);
    let s2 = c(m * m - r * r).sqrt();
    let k = s2 * p.kappa;
    let zero = c(0.0);
    let m1_physical = m < r;
    Ok(FixedPointReport {
        m,
        params: *p,
        m1: [[s1, y1, zero], [-s1, y1, zero]],
        m2: [[zero, c(r), s2], [zero, c(r), -s2]],
        lambda1: [zero, k, -k],
        lambda2: [[zero, k, k], [zero, -k, -k]],
        m1_physical,
        m2_physical: !m1_physical,
        kind: if m1_physical {
            FixedPointKind::Center
        } else {
            FixedPointKind::Saddle
        },
        omega_pred: predicted_frequency(m, p),
    })
}

/// Central-difference Jacobian with step `1e-6 max(1, |x_i|)` per coordinate.
pub fn numerical_jacobian<F>(f: F, x: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        f(&xp, &mut fp);
        xp[j] = x[j] - h;
        f(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Jacobian of the single-spin field by central differences.
pub fn single_jacobian(m: &Bloch, p: &ModelParams) -> DMatrix<f64> {
    numerical_jacobian(
        |x, out| out.copy_from_slice(&rhs_single(&[x[0], x[1], x[2]], p)),
        m,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    TimeCrystal,
    Melted,
    Boundary,
}

/// Phase labels indexed `[i_ratio][i_m]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub m: Vec<f64>,
    pub ratio: Vec<f64>,
    pub labels: Vec<Vec<Phase>>,
}

/// Labels each `(Omega/kappa, m)` cell from the fixed-point analysis.
pub fn phase_diagram(m_grid: &[f64], ratio_grid: &[f64]) -> PhaseDiagram {
    let labels = ratio_grid
        .iter()
        .map(|&r| {
            m_grid
                .iter()
                .map(
                    |&m| match ModelParams::new(r, 1.0).map(|p| fixed_points(m, &p)) {
                        Ok(Ok(f)) if f.kind == FixedPointKind::Center => Phase::TimeCrystal,
                        Ok(Ok(_)) => Phase::Melted,
                        _ => Phase::Boundary,
                    },
                )
                .collect()
        })
        .collect();
    PhaseDiagram {
        m: m_grid.to_vec(),
        ratio: ratio_grid.to_vec(),
        labels,
    }
}

/// Peak-to-peak `m_z` over the second half of `[0, horizon]`, starting from
/// `(0, 0, m)`.
pub fn late_amplitude(
    m: f64,
    p: &ModelParams,
    horizon: f64,
    opts: SolverOptions,
) -> Result<f64, MeanFieldError> {
    let dt = 0.05;
    let rec = integrate(SingleCtc(*p), &[0.0, 0.0, m], 0.0, horizon, dt, opts)?;
    let start = rec
        .times
        .iter()
        .position(|&t| t >= horizon / 2.0)
        .unwrap_or(0);
    let mz = rec.mz(0);
    let tail = &mz[start..];
    let hi = tail.iter().copied().fold(f64::MIN, f64::max);
    let lo = tail.iter().copied().fold(f64::MAX, f64::min);
    Ok(hi - lo)
}

/// Integration check of one cell: oscillating iff the late amplitude exceeds
/// `1e-3`.
pub fn cross_check_cell(m: f64, ratio: f64, horizon: f64) -> Result<bool, MeanFieldError> {
    let p = ModelParams::new(ratio, 1.0)
        .map_err(|_| MeanFieldError::InvalidConfig("invalid spin parameters"))?;
    Ok(late_amplitude(m, &p, horizon, SolverOptions::default())? > 1e-3)
}

/// Phase-space coordinates `(P, Q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Sample indices where `m_x = m_y = 0` and `P` is undefined (`NaN`).
    pub undefined: Vec<usize>,
}

/// `P = atan(m_y / m_x)` on the principal branch with `+-pi/2` at `m_x = 0`.
pub fn portrait_angle(mx: f64, my: f64) -> Option<f64> {
    use core::f64::consts::FRAC_PI_2;
    if mx == 0.0 {
        if my == 0.0 {
            None
        } else {
            Some(if my > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 })
        }
    } else {
        Some((my / mx).atan())
    }
}

/// Maps one spin of a trajectory to `(P, Q) = (atan(m_y/m_x), m_z)`.
pub fn phase_portrait(rec: &TrajectoryRecord, spin: usize) -> PhasePortrait {
    let mut p = Vec::with_capacity(rec.len());
    let mut q = Vec::with_capacity(rec.len());
    let mut undefined = Vec::new();
    for k in 0..rec.len() {
        let s = &rec.state(k)[3 * spin..3 * spin + 3];
        match portrait_angle(s[0], s[1]) {
            Some(a) => p.push(a),
            None => {
                p.push(f64::NAN);
                undefined.push(k);
            }
        }
        q.push(s[2]);
    }
    PhasePortrait { p, q, undefined }
}
