//! Vectorized Lindblad generator of the collectively driven, collectively
//! damped spin model, block by block over total-spin sectors.
//!
//! Density matrices are column-stacked: `vec(A rho B) = (B^T kron A) vec(rho)`,
//! so the entry `rho[(i, j)]` sits at index `i + j * d`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ode::{self, OdeError, OdeSystem, SolverOptions};
use crate::spin::{enumerate_sectors, SpinError, SpinOperators, SpinSector, TwiceSpin};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiouvillianError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(
        "block N={particles}, 2J={twice_j} has superoperator dimension {dim}, above the cap {cap}"
    )]
    CapExceeded {
        particles: u32,
        twice_j: u32,
        dim: usize,
        cap: usize,
    },
    #[error("eigensolver did not converge for block N={particles}, 2J={twice_j}")]
    Eigensolver { particles: u32, twice_j: u32 },
    #[error("initial density matrix rejected: {0}")]
    InvalidState(String),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("trace drifted by {drift:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },
}

/// Drive `Omega` and dissipation `kappa` of one collective spin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub kappa: f64,
}

impl ModelParams {
    pub fn new(omega: f64, kappa: f64) -> Result<Self, LiouvillianError> {
        let p = ModelParams { omega, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), LiouvillianError> {
        if !self.omega.is_finite() || self.omega < 0.0 {
            return Err(LiouvillianError::InvalidParams(
                "omega must be finite and >= 0",
            ));
        }
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(LiouvillianError::InvalidParams(
                "kappa must be finite and > 0",
            ));
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.omega / self.kappa
    }
}

/// Resource limits on superoperator size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest `(2J+1)^2` accepted when building a block.
    pub max_superop_dim: usize,
    /// Largest `(2J+1)^2` handed to the dense eigensolver.
    pub max_eigen_dim: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_superop_dim: 4096,
            max_eigen_dim: 4096,
        }
    }
}

/// Compressed sparse row complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl CsrMatrix {
    fn from_triplets(dim: usize, mut trip: Vec<(usize, usize, Complex64)>) -> Self {
        // stable: duplicates keep the order in which terms were pushed
        trip.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                let x = values.last_mut().unwrap();
                *x += v;
            } else {
                col_idx.push(c);
                values.push(Complex64::new(0.0, 0.0) + v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] = self.values[k];
            }
        }
        m
    }
}

/// The generator restricted to one representative copy of a spin-`J` sector.
#[derive(Clone, Debug)]
pub struct LiouvillianBlock {
    sector: SpinSector,
    params: ModelParams,
    ops: SpinOperators,
    sparse: CsrMatrix,
}

struct Terms {
    h: DMatrix<Complex64>,
    ht: DMatrix<Complex64>,
    sm: DMatrix<Complex64>,
    sm_conj: DMatrix<Complex64>,
    d: DMatrix<Complex64>,
    dt: DMatrix<Complex64>,
    id: DMatrix<Complex64>,
    gamma: Complex64,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

impl Terms {
    fn new(ops: &SpinOperators, params: &ModelParams, particles: u32) -> Self {
        let n = ops.dim();
        let h = &ops.sx * Complex64::new(params.omega, 0.0);
        let d = ops.raising_lowering();
        Terms {
            ht: h.transpose(),
            h,
            sm: ops.sm.clone(),
            sm_conj: ops.sm.map(|z| z.conj()),
            dt: d.transpose(),
            d,
            id: DMatrix::identity(n, n),
            // kappa / S with S = N/2
            gamma: Complex64::new(params.kappa / (particles as f64 / 2.0), 0.0),
        }
    }

    /// `(A, B, scale)` for each `scale * (A kron B)` contribution, in the
    /// accumulation order shared by the dense and sparse builders.
    fn list(&self) -> [(&DMatrix<Complex64>, &DMatrix<Complex64>, Complex64); 5] {
        let half = Complex64::new(-0.5, 0.0) * self.gamma;
        [
            (&self.id, &self.h, -I),
            (&self.ht, &self.id, I),
            (&self.sm_conj, &self.sm, self.gamma),
            (&self.id, &self.d, half),
            (&self.dt, &self.id, half),
        ]
    }
}

impl LiouvillianBlock {
    pub fn build(sector: SpinSector, params: ModelParams) -> Result<Self, LiouvillianError> {
        Self::build_with_caps(sector, params, Caps::default())
    }

    pub fn build_with_caps(
        sector: SpinSector,
        params: ModelParams,
        caps: Caps,
    ) -> Result<Self, LiouvillianError> {
        params.validate()?;
        let d = sector.dim();
        if d * d > caps.max_superop_dim {
            return Err(LiouvillianError::CapExceeded {
                particles: sector.particles(),
                twice_j: sector.twice_j().get(),
                dim: d * d,
                cap: caps.max_superop_dim,
            });
        }
        let ops = SpinOperators::new(sector.twice_j());
        let terms = Terms::new(&ops, &params, sector.particles());
        let mut trip = Vec::new();
        for (a, b, s) in terms.list() {
            push_kron(&mut trip, a, b, s);
        }
        let sparse = CsrMatrix::from_triplets(d * d, trip);
        Ok(LiouvillianBlock {
            sector,
            params,
            ops,
            sparse,
        })
    }

    pub fn sector(&self) -> &SpinSector {
        &self.sector
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn operators(&self) -> &SpinOperators {
        &self.ops
    }

    /// Size `(2J+1)^2` of the superoperator.
    pub fn dim(&self) -> usize {
        self.sparse.dim
    }

    pub fn sparse(&self) -> &CsrMatrix {
        &self.sparse
    }

    /// Dense superoperator assembled from Kronecker products.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let terms = Terms::new(&self.ops, &self.params, self.sector.particles());
        let n = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for (a, b, s) in terms.list() {
            m += a.kronecker(b) * s;
        }
        m
    }

    /// Applies the generator to a column-stacked density matrix.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.sparse.matvec(x, y)
    }

    /// Real matrix of the generator in an orthonormal basis of Hermitian
    /// matrices. It has the same spectrum as the complex superoperator.
    pub fn real_representation(&self) -> DMatrix<f64> {
        let d = self.sector.dim();
        let n = d * d;
        let r2 = core::f64::consts::SQRT_2;
        let inv = 1.0 / r2;
        let mut out = DMatrix::<f64>::zeros(n, n);
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        let mut lg = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..n {
            let (k, l) = (b / d, b % d);
            g.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            match k.cmp(&l) {
                Ordering::Equal => g[k + k * d] = Complex64::new(1.0, 0.0),
                Ordering::Less => {
                    g[k + l * d] = Complex64::new(inv, 0.0);
                    g[l + k * d] = Complex64::new(inv, 0.0);
                }
                Ordering::Greater => {
                    // pair (p, q) = (l, k), p < q: i (E_pq - E_qp) / sqrt 2
                    g[l + k * d] = Complex64::new(0.0, inv);
                    g[k + l * d] = Complex64::new(0.0, -inv);
                }
            }
            self.apply(&g, &mut lg);
            for a in 0..n {
                let (p, q) = (a / d, a % d);
                out[(a, b)] = match p.cmp(&q) {
                    Ordering::Equal => lg[p + p * d].re,
                    Ordering::Less => r2 * lg[p + q * d].re,
                    Ordering::Greater => r2 * lg[q + p * d].im,
                };
            }
        }
        out
    }

    /// Parity of Hermitian basis element `a` under the symmetry
    /// `rho_kl -> (-1)^(k-l) rho_lk`, which commutes with the generator.
    fn basis_parity(a: usize, d: usize) -> bool {
        let (k, l) = (a / d, a % d);
        let odd = (k.abs_diff(l)) % 2 == 1;
        match k.cmp(&l) {
            Ordering::Equal => true,
            Ordering::Less => !odd,
            Ordering::Greater => odd,
        }
    }

    /// The real representation split into its two symmetry blocks, with the
    /// basis indices each block acts on.
    pub fn real_representation_blocks(&self) -> [(DMatrix<f64>, Vec<usize>); 2] {
        let d = self.sector.dim();
        let full = self.real_representation();
        let (even, odd): (Vec<usize>, Vec<usize>) =
            (0..d * d).partition(|&a| Self::basis_parity(a, d));
        let pick = |idx: Vec<usize>| {
            let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])]);
            (m, idx)
        };
        [pick(even), pick(odd)]
    }

    /// Full eigenspectrum with the default options.
    pub fn spectrum(&self) -> Result<SpectralResult, LiouvillianError> {
        self.spectrum_with(&SpectrumOptions::default())
    }

    pub fn spectrum_with(
        &self,
        opts: &SpectrumOptions,
    ) -> Result<SpectralResult, LiouvillianError> {
        let n = self.dim();
        let label = || (self.sector.particles(), self.sector.twice_j().get());
        if n > opts.caps.max_eigen_dim {
            let (particles, twice_j) = label();
            return Err(LiouvillianError::CapExceeded {
                particles,
                twice_j,
                dim: n,
                cap: opts.caps.max_eigen_dim,
            });
        }
        let mut eigenvalues: Vec<Complex64> = Vec::with_capacity(n);
        for (block, _) in self.real_representation_blocks() {
            if block.nrows() == 0 {
                continue;
            }
            let k = block.nrows();
            // deflation at exactly eps stalls on some defective spectra
            let schur = [4.0, 64.0].iter().find_map(|f| {
                nalgebra::linalg::Schur::try_new(block.clone(), f * f64::EPSILON, 200 * k.max(10))
            });
            match schur {
                Some(s) => eigenvalues.extend(s.complex_eigenvalues().iter().copied()),
                None => {
                    let (particles, twice_j) = label();
                    return Err(LiouvillianError::Eigensolver { particles, twice_j });
                }
            }
        }
        if eigenvalues
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            let (particles, twice_j) = label();
            return Err(LiouvillianError::Eigensolver { particles, twice_j });
        }
        Ok(SpectralResult::from_eigenvalues(
            self.sector.particles(),
            Some(self.sector.twice_j()),
            eigenvalues,
            opts,
        ))
    }

    /// Exact evolution of `rho0`, sampled on `grid`.
    pub fn evolve_exact(
        &self,
        rho0: &DMatrix<Complex64>,
        grid: &[f64],
        solver: SolverOptions,
    ) -> Result<ExactTrajectory, LiouvillianError> {
        validate_density_matrix(rho0, self.sector.dim(), 1e-10)?;
        let d = self.sector.dim();
        let n = d * d;
        let mut y0 = vec![0.0; 2 * n];
        for c in 0..d {
            for r in 0..d {
                let z = rho0[(r, c)];
                y0[r + c * d] = z.re;
                y0[n + r + c * d] = z.im;
            }
        }
        let sol = ode::solve(VecRho::new(self), &y0, grid, solver)?;
        let s = self.sector.max_spin();
        let mut states = Vec::with_capacity(grid.len());
        let mut m = Vec::with_capacity(grid.len());
        let mut trace_drift = 0.0f64;
        let mut hermiticity = 0.0f64;
        for (k, &t) in grid.iter().enumerate() {
            let v = sol.state(k);
            let rho = DMatrix::from_fn(d, d, |r, c| Complex64::new(v[r + c * d], v[n + r + c * d]));
            let tr = rho.trace();
            let drift = (tr - Complex64::new(1.0, 0.0)).norm();
            if drift >= 1e-8 {
                return Err(LiouvillianError::TraceDrift { t, drift });
            }
            trace_drift = trace_drift.max(drift);
            hermiticity = hermiticity.max(
                (&rho - rho.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
            );
            let ex = |op: &DMatrix<Complex64>| (op * &rho).trace().re / s;
            m.push([ex(&self.ops.sx), ex(&self.ops.sy), ex(&self.ops.sz)]);
            states.push(rho);
        }
        Ok(ExactTrajectory {
            times: grid.to_vec(),
            states,
            m,
            max_trace_drift: trace_drift,
            max_hermiticity_error: hermiticity,
        })
    }

    /// `|J, J><J, J|`, whose rescaled Bloch vector is `(0, 0, J/S)`.
    pub fn highest_weight_state(&self) -> DMatrix<Complex64> {
        let d = self.sector.dim();
        let mut rho = DMatrix::zeros(d, d);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        rho
    }
}

fn push_kron(
    trip: &mut Vec<(usize, usize, Complex64)>,
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    scale: Complex64,
) {
    let zero = Complex64::new(0.0, 0.0);
    let nz = |m: &DMatrix<Complex64>| {
        let mut v = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != zero {
                    v.push((i, j, m[(i, j)]));
                }
            }
        }
        v
    };
    let (br, bc) = b.shape();
    let bnz = nz(b);
    for (i, j, x) in nz(a) {
        for &(k, l, y) in &bnz {
            trip.push((i * br + k, j * bc + l, (x * y) * scale));
        }
    }
}

/// Checks that `rho` is a `dim x dim` density matrix up to `tol`.
pub fn validate_density_matrix(
    rho: &DMatrix<Complex64>,
    dim: usize,
    tol: f64,
) -> Result<(), LiouvillianError> {
    use alloc::format;
    if rho.shape() != (dim, dim) {
        return Err(LiouvillianError::InvalidState(format!(
            "shape {:?}, expected {dim}x{dim}",
            rho.shape()
        )));
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LiouvillianError::InvalidState("non-finite entries".into()));
    }
    let herm = (rho - rho.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if herm > tol {
        return Err(LiouvillianError::InvalidState(format!(
            "not Hermitian (residual {herm:e})"
        )));
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
        return Err(LiouvillianError::InvalidState(format!(
            "trace {tr} differs from 1"
        )));
    }
    let sym = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let min = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(LiouvillianError::InvalidState(format!(
            "not positive semidefinite (eigenvalue {min:e})"
        )));
    }
    Ok(())
}

struct VecRho<'a> {
    block: &'a LiouvillianBlock,
    buf_in: core::cell::RefCell<(Vec<Complex64>, Vec<Complex64>)>,
}

impl<'a> VecRho<'a> {
    fn new(block: &'a LiouvillianBlock) -> Self {
        let n = block.dim();
        VecRho {
            block,
            buf_in: core::cell::RefCell::new((
                vec![Complex64::new(0.0, 0.0); n],
                vec![Complex64::new(0.0, 0.0); n],
            )),
        }
    }
}

impl OdeSystem for VecRho<'_> {
    fn dim(&self) -> usize {
        2 * self.block.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.block.dim();
        let mut bufs = self.buf_in.borrow_mut();
        let (x, out) = &mut *bufs;
        for k in 0..n {
            x[k] = Complex64::new(y[k], y[n + k]);
        }
        self.block.apply(x, out);
        for k in 0..n {
            dy[k] = out[k].re;
            dy[n + k] = out[k].im;
        }
    }
}

/// Sampled exact evolution of one block.
#[derive(Clone, Debug)]
pub struct ExactTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DMatrix<Complex64>>,
    /// `<S_alpha>/S` for alpha = x, y, z.
    pub m: Vec<[f64; 3]>,
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
}

/// Which non-stationary eigenvalue is reported as `lambda1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominantRule {
    /// Slowest-decaying mode with nonzero imaginary part; falls back to
    /// `LargestReal` when a spectrum has no oscillating mode.
    #[default]
    Oscillatory,
    /// Largest real part among all non-stationary eigenvalues.
    LargestReal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub caps: Caps,
    pub rule: DominantRule,
    /// Eigenvalues with `|lambda|` below this count as stationary.
    pub stationary_tol: f64,
    /// Eigenvalues with `|Im lambda|` below this count as non-oscillating.
    pub oscillation_tol: f64,
    /// Real parts closer than this are treated as tied.
    pub tie_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            caps: Caps::default(),
            rule: DominantRule::Oscillatory,
            stationary_tol: 1e-9,
            oscillation_tol: 1e-7,
            tie_tol: 1e-10,
        }
    }
}

/// Eigenvalues of one block (or of a whole space) and the selected dominant
/// mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub particles: u32,
    /// `None` for results merged over several sectors.
    pub twice_j: Option<TwiceSpin>,
    pub eigenvalues: Vec<Complex64>,
    pub lambda1: Option<Complex64>,
    /// `-Re lambda1`.
    pub gap: Option<f64>,
    /// Slowest non-stationary purely decaying eigenvalue.
    pub slowest_real: Option<Complex64>,
    pub stationary_count: usize,
}

impl SpectralResult {
    pub fn from_eigenvalues(
        particles: u32,
        twice_j: Option<TwiceSpin>,
        mut eigenvalues: Vec<Complex64>,
        opts: &SpectrumOptions,
    ) -> Self {
        eigenvalues.sort_by(|a, b| rank(b, a, 0.0));
        let stationary_count = eigenvalues
            .iter()
            .filter(|z| z.norm() < opts.stationary_tol)
            .count();
        let lambda1 = select_dominant(&eigenvalues, opts);
        let slowest_real = eigenvalues
            .iter()
            .filter(|z| z.norm() >= opts.stationary_tol && z.im.abs() <= opts.oscillation_tol)
            .copied()
            .max_by(|a, b| a.re.total_cmp(&b.re));
        SpectralResult {
            particles,
            twice_j,
            eigenvalues,
            lambda1,
            gap: lambda1.map(|z| -z.re),
            slowest_real,
            stationary_count,
        }
    }

    pub fn m(&self) -> Option<f64> {
        self.twice_j.map(|t| t.get() as f64 / self.particles as f64)
    }
}

/// Orders eigenvalues by real part, then `|Im|`, then positive imaginary part.
fn rank(a: &Complex64, b: &Complex64, tie: f64) -> Ordering {
    if (a.re - b.re).abs() > tie {
        return a.re.total_cmp(&b.re);
    }
    let ia = a.im.abs();
    let ib = b.im.abs();
    if (ia - ib).abs() > tie {
        return ia.total_cmp(&ib);
    }
    a.im.total_cmp(&b.im)
}

/// Applies the dominant-eigenvalue rule to a list of eigenvalues.
pub fn select_dominant(eigenvalues: &[Complex64], opts: &SpectrumOptions) -> Option<Complex64> {
    let pick = |osc_only: bool| {
        eigenvalues
            .iter()
            .filter(|z| z.norm() >= opts.stationary_tol)
            .filter(|z| !osc_only || z.im.abs() > opts.oscillation_tol)
            .copied()
            .reduce(|best, z| {
                if rank(&z, &best, opts.tie_tol) == Ordering::Greater {
                    z
                } else {
                    best
                }
            })
    };
    match opts.rule {
        DominantRule::Oscillatory => pick(true).or_else(|| pick(false)),
        DominantRule::LargestReal => pick(false),
    }
}

/// Spectrum of a single sector built from scratch.
pub fn sector_spectrum(
    particles: u32,
    twice_j: TwiceSpin,
    params: ModelParams,
    opts: &SpectrumOptions,
) -> Result<SpectralResult, LiouvillianError> {
    let sector = SpinSector::new(particles, twice_j)?;
    LiouvillianBlock::build_with_caps(sector, params, opts.caps)?.spectrum_with(opts)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    #[default]
    Full,
    SymmetricOnly,
}

/// Dominant-mode summary of one sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorRow {
    pub twice_j: TwiceSpin,
    pub m: f64,
    /// Decimal string; multiplicities exceed 64 bits for large N.
    pub multiplicity: String,
    pub lambda1: Option<Complex64>,
    pub slowest_real: Option<Complex64>,
}

/// Result of scanning every sector of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpectrum {
    pub particles: u32,
    pub params: ModelParams,
    pub space: Space,
    pub sectors: Vec<SpectralResult>,
    pub table: Vec<SectorRow>,
    pub lambda1: Option<Complex64>,
    pub dominant_sector: Option<TwiceSpin>,
    pub dominant_m: Option<f64>,
}

impl SpaceSpectrum {
    /// Combines per-sector results (ordered by descending `J`).
    pub fn from_sectors(
        particles: u32,
        params: ModelParams,
        space: Space,
        sectors: Vec<SpectralResult>,
        opts: &SpectrumOptions,
    ) -> Self {
        let all: Vec<Complex64> = sectors
            .iter()
            .flat_map(|s| s.eigenvalues.iter().copied())
            .collect();
        let best = select_dominant(&all, opts).and_then(|z| {
            sectors
                .iter()
                .find(|s| s.eigenvalues.contains(&z))
                .and_then(|s| s.twice_j)
                .map(|tj| (z, tj))
        });
        let table = sectors
            .iter()
            .filter_map(|s| {
                let tj = s.twice_j?;
                Some(SectorRow {
                    twice_j: tj,
                    m: tj.get() as f64 / particles as f64,
                    multiplicity: SpinSector::new(particles, tj)
                        .map(|x| x.multiplicity().to_str_radix(10))
                        .unwrap_or_default(),
                    lambda1: s.lambda1,
                    slowest_real: s.slowest_real,
                })
            })
            .collect();
        SpaceSpectrum {
            particles,
            params,
            space,
            table,
            lambda1: best.map(|b| b.0),
            dominant_sector: best.map(|b| b.1),
            dominant_m: best.map(|b| b.1.get() as f64 / particles as f64),
            sectors,
        }
    }

    pub fn gap(&self) -> Option<f64> {
        self.lambda1.map(|z| -z.re)
    }
}

/// Sectors making up the requested space.
pub fn space_sectors(particles: u32, space: Space) -> Result<Vec<SpinSector>, LiouvillianError> {
    Ok(match space {
        Space::Full => enumerate_sectors(particles)?,
        Space::SymmetricOnly => vec![SpinSector::symmetric(particles)?],
    })
}

/// Computes every sector spectrum and the dominant eigenvalue of the space.
pub fn dominant_over_space(
    particles: u32,
    params: ModelParams,
    space: Space,
    opts: &SpectrumOptions,
) -> Result<SpaceSpectrum, LiouvillianError> {
    params.validate()?;
    let sectors = space_sectors(particles, space)?;
    for s in &sectors {
        let d = s.dim() * s.dim();
        if d > opts.caps.max_eigen_dim.min(opts.caps.max_superop_dim) {
            return Err(LiouvillianError::CapExceeded {
                particles,
                twice_j: s.twice_j().get(),
                dim: d,
                cap: opts.caps.max_eigen_dim.min(opts.caps.max_superop_dim),
            });
        }
    }
    let results = sectors
        .into_iter()
        .map(|s| LiouvillianBlock::build_with_caps(s, params, opts.caps)?.spectrum_with(opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpaceSpectrum::from_sectors(
        particles, params, space, results, opts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(particles: u32, twice_j: u32, omega: f64) -> LiouvillianBlock {
        let sector = SpinSector::new(particles, TwiceSpin::new(twice_j)).unwrap();
        LiouvillianBlock::build(sector, ModelParams::new(omega, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn params_validated() {
        assert!(ModelParams::new(-1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn single_spin_pure_decay_spectrum() {
        let spec = block(1, 1, 0.0).spectrum().unwrap();
        let mut re: Vec<f64> = spec.eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        let want = [-2.0, -1.0, -1.0, 0.0];
        for (a, b) in re.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{re:?}");
        }
        assert!(spec.eigenvalues.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn dense_and_sparse_assemblies_are_bit_identical() {
        for (n, t, om) in [(1, 1, 0.7), (4, 2, 0.9), (10, 10, 1.3), (7, 3, 0.2)] {
            let b = block(n, t, om);
            assert_eq!(b.dense(), b.sparse().to_dense());
        }
    }

    #[test]
    fn transpose_parity_symmetry_decouples_real_representation() {
        for (n, t, om) in [(6, 6, 0.9), (9, 5, 1.4), (10, 4, 0.3)] {
            let b = block(n, t, om);
            let d = b.sector().dim();
            let full = b.real_representation();
            let mut cross = 0.0f64;
            for r in 0..d * d {
                for c in 0..d * d {
                    if LiouvillianBlock::basis_parity(r, d) != LiouvillianBlock::basis_parity(c, d)
                    {
                        cross = cross.max(full[(r, c)].abs());
                    }
                }
            }
            assert!(cross < 1e-14, "cross-parity entry {cross:e}");
        }
    }

    #[test]
    fn identity_is_left_null_vector() {
        for (n, t) in [(10, 10), (9, 5), (6, 0), (3, 1)] {
            let b = block(n, t, 0.9);
            let l = b.dense();
            let d = b.sector().dim();
            let mut worst = 0.0f64;
            for c in 0..d * d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += l[(k + k * d, c)];
                }
                worst = worst.max(acc.norm());
            }
            assert!(worst < 1e-10, "residual {worst}");
        }
    }

    #[test]
    fn pure_decay_spectrum_is_real_nonpositive() {
        // With no drive the generator is triangular; its eigenvalues are
        // -gamma/2 (D_ii + D_jj). Repeated rates form Jordan blocks, which a
        // dense solver splits by a fractional power of eps.
        for t in [0u32, 2, 4, 8, 10] {
            let b = block(10, t, 0.0);
            let s = b.spectrum().unwrap();
            let mut got: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
            got.sort_by(f64::total_cmp);
            let dd = b.operators().raising_lowering();
            let d = b.sector().dim();
            let mut want = Vec::new();
            for i in 0..d {
                for j in 0..d {
                    want.push(-0.5 * 0.2 * (dd[(i, i)].re + dd[(j, j)].re));
                }
            }
            want.sort_by(f64::total_cmp);
            let mi = s.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            let mr = s.eigenvalues.iter().map(|z| z.re).fold(f64::MIN, f64::max);
            let dev = got
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(
                mi < 1e-3 && mr < 1e-9 && dev < 1e-3,
                "2J={t} Im {mi:e} Re {mr:e} dev {dev:e}"
            );
        }
    }

    #[test]
    fn blocks_are_dissipative_with_a_stationary_state() {
        for (n, t, om) in [(10, 10, 0.9), (10, 4, 0.9), (12, 6, 1.5), (5, 3, 2.0)] {
            let s = block(n, t, om).spectrum().unwrap();
            assert!(s.stationary_count >= 1);
            assert!(s.eigenvalues.iter().all(|z| z.re <= 1e-9));
            assert!(s.gap.unwrap() >= -1e-9);
        }
    }

    #[test]
    fn scalar_block_has_no_dynamics() {
        let s = block(2, 0, 0.9).spectrum().unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!(s.eigenvalues[0].norm() < 1e-15);
        assert_eq!(s.lambda1, None);
        let space = dominant_over_space(
            2,
            ModelParams::new(0.9, 1.0).unwrap(),
            Space::Full,
            &SpectrumOptions::default(),
        )
        .unwrap();
        assert_eq!(space.sectors.len(), 2);
    }

    #[test]
    fn cap_refuses_large_blocks() {
        let sector = SpinSector::symmetric(70).unwrap();
        let err = LiouvillianBlock::build(sector, ModelParams::new(0.9, 1.0).unwrap()).unwrap_err();
        assert!(matches!(
            err,
            LiouvillianError::CapExceeded { dim: 5041, .. }
        ));
        let opts = SpectrumOptions {
            caps: Caps {
                max_superop_dim: 4096,
                max_eigen_dim: 100,
            },
            ..Default::default()
        };
        assert!(matches!(
            sector_spectrum(
                10,
                TwiceSpin::new(10),
                ModelParams::new(0.9, 1.0).unwrap(),
                &opts
            ),
            Err(LiouvillianError::CapExceeded { twice_j: 10, .. })
        ));
    }

    #[test]
    fn dominant_rule_tie_breaks() {
        let z = |re, im| Complex64::new(re, im);
        let ev = [
            z(0.0, 0.0),
            z(-0.1, 0.0),
            z(-0.2, 0.5),
            z(-0.2, -0.5),
            z(-0.2, 0.1),
        ];
        let osc = SpectrumOptions::default();
        assert_eq!(select_dominant(&ev, &osc), Some(z(-0.2, 0.5)));
        let lit = SpectrumOptions {
            rule: DominantRule::LargestReal,
            ..osc
        };
        assert_eq!(select_dominant(&ev, &lit), Some(z(-0.1, 0.0)));
        let real_only = [z(0.0, 0.0), z(-0.3, 0.0), z(-0.1, 0.0)];
        assert_eq!(select_dominant(&real_only, &osc), Some(z(-0.1, 0.0)));
    }

    #[test]
    fn rejects_unphysical_initial_states() {
        let b = block(4, 2, 0.9);
        let grid = [0.0, 1.0];
        let mut rho = DMatrix::<Complex64>::zeros(3, 3);
        rho[(0, 0)] = Complex64::new(2.0, 0.0);
        rho[(1, 1)] = Complex64::new(-1.0, 0.0);
        let e = b
            .evolve_exact(&rho, &grid, SolverOptions::default())
            .unwrap_err();
        assert!(matches!(e, LiouvillianError::InvalidState(_)));
        let mut rho = b.highest_weight_state();
        rho[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(b
            .evolve_exact(&rho, &grid, SolverOptions::default())
            .is_err());
        let rho = DMatrix::<Complex64>::identity(2, 2);
        assert!(b
            .evolve_exact(&rho, &grid, SolverOptions::default())
            .is_err());
    }

    #[test]
    fn pure_decay_from_highest_weight_lowers_mz_monotonically() {
        let b = block(10, 6, 0.0);
        let grid = ode::uniform_grid(0.0, 0.1, 200);
        let tr = b
            .evolve_exact(&b.highest_weight_state(), &grid, SolverOptions::default())
            .unwrap();
        assert!((tr.m[0][2] - 0.6).abs() < 1e-14);
        for w in tr.m.windows(2) {
            assert!(w[1][2] <= w[0][2] + 1e-12);
        }
        assert!(tr.m.last().unwrap()[2] < -0.5);
        assert!(tr.max_trace_drift < 1e-8);
    }
}
