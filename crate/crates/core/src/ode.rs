//! Adaptive Dormand-Prince 8(5,3) integration with continuous (dense) output.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Right-hand side of an autonomous or time-dependent ODE `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

impl<S: OdeSystem + ?Sized> OdeSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (**self).rhs(t, y, dydt)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("output grid must be non-empty, finite and non-decreasing")]
    InvalidGrid,
    #[error("state has length {got}, system expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: Tolerances,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: Tolerances::default(),
            initial_step: None,
            max_step: f64::MAX,
            min_step: 1e-13,
            max_steps: 50_000_000,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        SolverOptions {
            tol: Tolerances { rtol, atol },
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand-Prince 8(5,3) tableau with 7th order dense output (Hairer & Wanner, DOP853).
// A[i] holds the coefficients of stage i (zero-based); stage 12 is f(t + h, y1).
const A: [&[f64]; 16] = [
    &[],
    &[0.05260015195876773],
    &[0.0197250569845379, 0.0591751709536137],
    &[0.02958758547680685, 0.0, 0.08876275643042054],
    &[
        0.2413651341592667,
        0.0,
        -0.8845494793282861,
        0.924834003261792,
    ],
    &[
        0.037037037037037035,
        0.0,
        0.0,
        0.17082860872947386,
        0.12546768756682242,
    ],
    &[
        0.037109375,
        0.0,
        0.0,
        0.17025221101954405,
        0.06021653898045596,
        -0.017578125,
    ],
    &[
        0.03709200011850479,
        0.0,
        0.0,
        0.17038392571223998,
        0.10726203044637328,
        -0.015319437748624402,
        0.008273789163814023,
    ],
    &[
        0.6241109587160757,
        0.0,
        0.0,
        -3.3608926294469414,
        -0.868219346841726,
        27.59209969944671,
        20.154067550477894,
        -43.48988418106996,
    ],
    &[
        0.47766253643826434,
        0.0,
        0.0,
        -2.4881146199716677,
        -0.590290826836843,
        21.230051448181193,
        15.279233632882423,
        -33.28821096898486,
        -0.020331201708508627,
    ],
    &[
        -0.9371424300859873,
        0.0,
        0.0,
        5.186372428844064,
        1.0914373489967295,
        -8.149787010746927,
        -18.52006565999696,
        22.739487099350505,
        2.4936055526796523,
        -3.0467644718982196,
    ],
    &[
        2.273310147516538,
        0.0,
        0.0,
        -10.53449546673725,
        -2.0008720582248625,
        -17.9589318631188,
        27.94888452941996,
        -2.8589982771350235,
        -8.87285693353063,
        12.360567175794303,
        0.6433927460157636,
    ],
    &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    &[
        0.056167502283047954,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.25350021021662483,
        -0.2462390374708025,
        -0.12419142326381637,
        0.15329179827876568,
        0.00820105229563469,
        0.007567897660545699,
        -0.008298,
    ],
    &[
        0.03183464816350214,
        0.0,
        0.0,
        0.0,
        0.0,
        0.028300909672366776,
        0.053541988307438566,
        -0.05492374857139099,
        0.0,
        0.0,
        -0.00010834732869724932,
        0.0003825710908356584,
        -0.00034046500868740456,
        0.1413124436746325,
    ],
    &[
        -0.42889630158379194,
        0.0,
        0.0,
        0.0,
        0.0,
        -4.697621415361164,
        7.683421196062599,
        4.06898981839711,
        0.3567271874552811,
        0.0,
        0.0,
        0.0,
        -0.0013990241651590145,
        2.9475147891527724,
        -9.15095847217987,
    ],
];
const B: [f64; 12] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];
const BHH: [f64; 3] = [0.2440944881889764, 0.7338466882816118, 0.022058823529411766];
const C: [f64; 16] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
    1.0,
    0.1,
    0.2,
    0.7777777777777778,
];
const E: [f64; 16] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
    0.0,
    0.0,
    0.0,
    0.0,
];
const D: [[f64; 16]; 4] = [
    [
        -8.428938276109013,
        0.0,
        0.0,
        0.0,
        0.0,
        0.5667149535193777,
        -3.0689499459498917,
        2.38466765651207,
        2.117034582445028,
        -0.871391583777973,
        2.2404374302607883,
        0.6315787787694688,
        -0.08899033645133331,
        18.148505520854727,
        -9.194632392478356,
        -4.436036387594894,
    ],
    [
        10.427508642579134,
        0.0,
        0.0,
        0.0,
        0.0,
        242.28349177525817,
        165.20045171727028,
        -374.5467547226902,
        -22.113666853125306,
        7.733432668472264,
        -30.674084731089398,
        -9.332130526430229,
        15.697238121770845,
        -31.139403219565178,
        -9.35292435884448,
        35.81684148639408,
    ],
    [
        19.985053242002433,
        0.0,
        0.0,
        0.0,
        0.0,
        -387.0373087493518,
        -189.17813819516758,
        527.8081592054236,
        -11.57390253995963,
        6.8812326946963,
        -1.0006050966910838,
        0.7777137798053443,
        -2.778205752353508,
        -60.19669523126412,
        84.32040550667716,
        11.99229113618279,
    ],
    [
        -25.69393346270375,
        0.0,
        0.0,
        0.0,
        0.0,
        -154.18974869023643,
        -231.5293791760455,
        357.6391179106141,
        93.40532418362432,
        -37.45832313645163,
        104.0996495089623,
        29.8402934266605,
        -43.53345659001114,
        96.32455395918828,
        -39.17726167561544,
        -149.72683625798564,
    ],
];

const STAGES: usize = 16;

/// Stateful integrator that can be advanced piecewise, which the Lyapunov
/// estimator relies on to renormalize between intervals.
pub struct Integrator<S: OdeSystem> {
    sys: S,
    opts: SolverOptions,
    t: f64,
    y: Vec<f64>,
    f0: Vec<f64>,
    h: f64,
    stats: SolverStats,
    k: [Vec<f64>; STAGES],
    y1: Vec<f64>,
    ytmp: Vec<f64>,
    cont: [Vec<f64>; 8],
}

impl<S: OdeSystem> Integrator<S> {
    pub fn new(sys: S, t0: f64, y0: &[f64], opts: SolverOptions) -> Result<Self, OdeError> {
        let n = sys.dim();
        if y0.len() != n {
            return Err(OdeError::DimensionMismatch {
                expected: n,
                got: y0.len(),
            });
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFinite { t: t0 });
        }
        let mut f0 = vec![0.0; n];
        sys.rhs(t0, y0, &mut f0);
        let mut it = Integrator {
            sys,
            opts,
            t: t0,
            y: y0.to_vec(),
            f0,
            h: 0.0,
            stats: SolverStats {
                evaluations: 1,
                ..Default::default()
            },
            k: core::array::from_fn(|_| vec![0.0; n]),
            y1: vec![0.0; n],
            ytmp: vec![0.0; n],
            cont: core::array::from_fn(|_| vec![0.0; n]),
        };
        it.h = match opts.initial_step {
            Some(h) => h,
            None => it.initial_step(),
        };
        Ok(it)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.y
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn system(&self) -> &S {
        &self.sys
    }

    /// Replaces the current state (e.g. after renormalizing a companion
    /// trajectory); the step size is kept.
    pub fn reset_state(&mut self, y: &[f64]) -> Result<(), OdeError> {
        if y.len() != self.y.len() {
            return Err(OdeError::DimensionMismatch {
                expected: self.y.len(),
                got: y.len(),
            });
        }
        self.y.copy_from_slice(y);
        self.sys.rhs(self.t, &self.y, &mut self.f0);
        self.stats.evaluations += 1;
        Ok(())
    }

    fn initial_step(&mut self) -> f64 {
        // Hairer's starting step heuristic.
        let tol = self.opts.tol;
        let n = self.y.len();
        let sc = |i: usize, y: &[f64]| tol.atol + tol.rtol * y[i].abs();
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..n {
            let s = sc(i, &self.y);
            d0 += (self.y[i] / s).powi(2);
            d1 += (self.f0[i] / s).powi(2);
        }
        d0 = (d0 / n as f64).sqrt();
        d1 = (d1 / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(self.opts.max_step);
        for i in 0..n {
            self.ytmp[i] = self.y[i] + h0 * self.f0[i];
        }
        self.sys.rhs(self.t + h0, &self.ytmp, &mut self.k[1]);
        self.stats.evaluations += 1;
        let mut d2 = 0.0;
        for i in 0..n {
            d2 += ((self.k[1][i] - self.f0[i]) / sc(i, &self.y)).powi(2);
        }
        d2 = (d2 / n as f64).sqrt() / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(self.opts.max_step)
    }

    /// Integrates to exactly `t_end`, writing dense-output samples for every
    /// time in `samples` that lies in `(t_current, t_end]` (and at the start
    /// time itself when `t_current == samples[0]`). Samples must be sorted.
    pub fn advance(
        &mut self,
        t_end: f64,
        samples: &[f64],
        out: &mut Vec<f64>,
    ) -> Result<(), OdeError> {
        let n = self.y.len();
        let mut next = 0usize;
        while next < samples.len() && samples[next] < self.t {
            next += 1;
        }
        while next < samples.len() && samples[next] == self.t {
            out.extend_from_slice(&self.y);
            next += 1;
        }
        if t_end <= self.t {
            return Ok(());
        }
        let mut last_rejected = false;
        while self.t < t_end {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(OdeError::TooManySteps {
                    t: self.t,
                    max_steps: self.opts.max_steps,
                });
            }
            let remaining = t_end - self.t;
            let mut h = self.h.min(self.opts.max_step);
            let mut landing = false;
            if h >= remaining || self.t + 1.01 * h >= t_end {
                h = remaining;
                landing = true;
            }
            let floor = self.opts.min_step.max(16.0 * f64::EPSILON * self.t.abs());
            if h < floor && !landing {
                return Err(OdeError::StepSizeUnderflow { t: self.t, h });
            }
            let err = self.try_step(h);
            if !err.is_finite() {
                self.stats.rejected += 1;
                self.h = h * 0.2;
                last_rejected = true;
                if self.h < floor {
                    return Err(OdeError::NonFinite { t: self.t });
                }
                continue;
            }
            // h_new = h / fac with fac clamped to [1/6, 1/0.333]
            let fac = (err.powf(1.0 / 8.0) / 0.9).clamp(1.0 / 6.0, 1.0 / 0.333);
            if err <= 1.0 {
                self.stats.accepted += 1;
                let t_new = if landing { t_end } else { self.t + h };
                self.sys.rhs(t_new, &self.y1, &mut self.k[12]);
                self.stats.evaluations += 1;
                if next < samples.len() && samples[next] <= t_new {
                    self.dense_coefficients(h);
                }
                while next < samples.len() && samples[next] <= t_new {
                    let s = samples[next];
                    if s == t_new {
                        out.extend_from_slice(&self.y1);
                    } else {
                        let th = (s - self.t) / h;
                        let th1 = 1.0 - th;
                        let c = &self.cont;
                        for i in 0..n {
                            let par = c[4][i] + th * (c[5][i] + th1 * (c[6][i] + th * c[7][i]));
                            out.push(
                                c[0][i]
                                    + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * par))),
                            );
                        }
                    }
                    next += 1;
                }
                self.t = t_new;
                core::mem::swap(&mut self.y, &mut self.y1);
                core::mem::swap(&mut self.f0, &mut self.k[12]);
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = h_new.min(h);
                }
                if !landing || h_new < h {
                    self.h = h_new;
                }
                last_rejected = false;
            } else {
                self.stats.rejected += 1;
                self.h = h / fac.clamp(1.0, 1.0 / 0.333);
                last_rejected = true;
            }
        }
        Ok(())
    }

    fn stage(&mut self, s: usize, h: f64) {
        let n = self.y.len();
        let (done, rest) = self.k.split_at_mut(s);
        for i in 0..n {
            let mut acc = 0.0;
            for (j, &a) in A[s].iter().enumerate() {
                if a != 0.0 {
                    acc += a * done[j][i];
                }
            }
            self.ytmp[i] = self.y[i] + h * acc;
        }
        self.sys.rhs(self.t + C[s] * h, &self.ytmp, &mut rest[0]);
    }

    /// Computes one trial step of size `h` into `y1`/`k`, returning the scaled
    /// error norm.
    fn try_step(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        self.k[0].copy_from_slice(&self.f0);
        for s in 1..12 {
            self.stage(s, h);
        }
        self.stats.evaluations += 11;
        let tol = self.opts.tol;
        let k = &self.k;
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..n {
            let mut inc = 0.0;
            let mut e5 = 0.0;
            for j in 0..12 {
                inc += B[j] * k[j][i];
                e5 += E[j] * k[j][i];
            }
            self.y1[i] = self.y[i] + h * inc;
            let sc = tol.atol + tol.rtol * self.y[i].abs().max(self.y1[i].abs());
            let e3 = inc - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
            err += (e5 / sc) * (e5 / sc);
            err2 += (e3 / sc) * (e3 / sc);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err * (1.0 / (n as f64 * deno)).sqrt()
    }

    /// Fills `cont` for the accepted step of size `h`; needs `k[12] = f(t + h, y1)`.
    fn dense_coefficients(&mut self, h: f64) {
        let n = self.y.len();
        for s in 13..STAGES {
            self.stage(s, h);
        }
        self.stats.evaluations += 3;
        let k = &self.k;
        for i in 0..n {
            let y0 = self.y[i];
            let ydiff = self.y1[i] - y0;
            let bspl = h * k[0][i] - ydiff;
            self.cont[0][i] = y0;
            self.cont[1][i] = ydiff;
            self.cont[2][i] = bspl;
            self.cont[3][i] = ydiff - h * k[12][i] - bspl;
            for (r, d) in D.iter().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += d[j] * kj[i];
                }
                self.cont[4 + r][i] = h * acc;
            }
        }
    }
}

/// Dense samples of a solution on a caller-supplied grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Row-major `times.len() x dim`.
    pub states: Vec<f64>,
    pub stats: SolverStats,
}

impl Solution {
    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates from `grid[0]` to the last grid time, sampling on `grid`.
pub fn solve<S: OdeSystem>(
    sys: S,
    y0: &[f64],
    grid: &[f64],
    opts: SolverOptions,
) -> Result<Solution, OdeError> {
    validate_grid(grid)?;
    let dim = sys.dim();
    let t0 = grid[0];
    let t1 = *grid.last().unwrap();
    let mut it = Integrator::new(sys, t0, y0, opts)?;
    let mut states = Vec::with_capacity(grid.len() * dim);
    it.advance(t1, grid, &mut states)?;
    if t1 == t0 && states.len() < grid.len() * dim {
        for _ in states.len() / dim..grid.len() {
            states.extend_from_slice(y0);
        }
    }
    Ok(Solution {
        dim,
        times: grid.to_vec(),
        states,
        stats: it.stats(),
    })
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<(), OdeError> {
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) {
        return Err(OdeError::InvalidGrid);
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(OdeError::InvalidGrid);
    }
    Ok(())
}

/// `n` evenly spaced points `t0, t0 + dt, ...`.
pub fn uniform_grid(t0: f64, dt: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t0 + dt * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
            d[0] = y[1];
            d[1] = -y[0];
        }
    }

    struct Decay(f64);
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
            d[0] = -self.0 * y[0];
        }
    }

    struct BlowUp;
    impl OdeSystem for BlowUp {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
            d[0] = y[0] * y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output_is_accurate() {
        let grid = uniform_grid(0.0, 0.037, 2000);
        let sol = solve(Oscillator, &[1.0, 0.0], &grid, SolverOptions::default()).unwrap();
        let mut worst = 0.0f64;
        for (k, &t) in grid.iter().enumerate() {
            let s = sol.state(k);
            worst = worst
                .max((s[0] - t.cos()).abs())
                .max((s[1] + t.sin()).abs());
        }
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn interpolated_samples_match_step_endpoints_quality() {
        // Loose tolerance forces long steps so most samples are interpolated.
        let grid = uniform_grid(0.0, 0.01, 1001);
        let sol = solve(
            Oscillator,
            &[1.0, 0.0],
            &grid,
            SolverOptions::with_tolerances(1e-7, 1e-9),
        )
        .unwrap();
        assert!(sol.stats.accepted < 200);
        let worst = grid
            .iter()
            .enumerate()
            .map(|(k, t)| (sol.state(k)[0] - t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "worst {worst}");
    }

    #[test]
    fn global_error_scales_with_eighth_order_work() {
        // log(error) against log(steps) should have slope near -8.
        let mut pts = Vec::new();
        for &tol in &[1e-5, 1e-6, 1e-7, 1e-8, 1e-9] {
            let sol = solve(
                Oscillator,
                &[1.0, 0.0],
                &[0.0, 20.0],
                SolverOptions::with_tolerances(tol, tol),
            )
            .unwrap();
            let s = sol.state(1);
            let err = ((s[0] - 20.0f64.cos()).powi(2) + (s[1] + 20.0f64.sin()).powi(2)).sqrt();
            pts.push(((sol.stats.accepted as f64).ln(), err.ln()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((-10.0..=-6.5).contains(&slope), "slope {slope}");
    }

    #[test]
    fn piecewise_advance_lands_exactly() {
        let mut it = Integrator::new(Decay(0.5), 0.0, &[1.0], SolverOptions::default()).unwrap();
        let mut sink = Vec::new();
        for k in 1..=10 {
            it.advance(k as f64, &[], &mut sink).unwrap();
            assert_eq!(it.time(), k as f64);
        }
        assert!((it.state()[0] - (-5.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn blow_up_reports_underflow_time() {
        let err = solve(BlowUp, &[1.0], &[0.0, 2.0], SolverOptions::default()).unwrap_err();
        match err {
            OdeError::StepSizeUnderflow { t, .. } | OdeError::NonFinite { t } => {
                assert!((t - 1.0).abs() < 1e-6, "t = {t}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_grids_and_dimensions() {
        assert_eq!(
            solve(Decay(1.0), &[1.0], &[1.0, 0.5], SolverOptions::default()),
            Err(OdeError::InvalidGrid)
        );
        assert!(matches!(
            solve(
                Decay(1.0),
                &[1.0, 2.0],
                &[0.0, 1.0],
                SolverOptions::default()
            ),
            Err(OdeError::DimensionMismatch { .. })
        ));
    }
}
