//! Seeded construction of spin ensembles from target oscillation frequencies.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::liouvillian::ModelParams;
use crate::meanfield::{norm_for_frequency, MeanFieldError, NetworkConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnsembleError {
    #[error("ensemble has no members")]
    Empty,
    #[error("group {0} has no members")]
    EmptyGroup(usize),
    #[error("group {group}: support lies outside (0, Omega)")]
    OutsideSupport { group: usize },
    #[error("group {group}: rejection sampling gave up after {attempts} draws")]
    RejectionExhausted { group: usize, attempts: usize },
    #[error("invalid distribution parameters in group {0}")]
    InvalidDistribution(usize),
    #[error("invalid model parameters")]
    InvalidParams,
    #[error(transparent)]
    Network(#[from] MeanFieldError),
}

/// Distribution of target angular frequencies within a group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrequencyDistribution {
    /// Independent uniform draws on `[low, high]`.
    Uniform { low: f64, high: f64 },
    /// Evenly spaced points from `low` to `high` inclusive.
    Grid { low: f64, high: f64 },
    /// Normal draws; samples outside `(0, Omega)` are redrawn.
    Gaussian { mean: f64, std: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub count: usize,
    pub distribution: FrequencyDistribution,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingSpec {
    #[default]
    None,
    /// Every pair coupled with `gamma`.
    AllToAll { gamma: f64 },
    /// Pairs coupled with `gamma` only within a group.
    IntraGroup { gamma: f64 },
}

impl CouplingSpec {
    pub fn gamma(&self) -> f64 {
        match *self {
            CouplingSpec::None => 0.0,
            CouplingSpec::AllToAll { gamma } | CouplingSpec::IntraGroup { gamma } => gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub groups: Vec<GroupSpec>,
    pub omega: f64,
    pub kappa: f64,
    pub seed: u64,
    #[serde(default)]
    pub coupling: CouplingSpec,
    /// Maximum polar tilt of the initial Bloch vectors (radians); 0 starts
    /// every spin at the pole.
    #[serde(default)]
    pub tilt: f64,
}

/// A realized ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub config: NetworkConfig,
    pub initial_state: Vec<f64>,
    /// Target angular frequency of each spin.
    pub frequencies: Vec<f64>,
    pub norms: Vec<f64>,
    pub partition: Vec<usize>,
}

impl Ensemble {
    pub fn n(&self) -> usize {
        self.norms.len()
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&a| self.partition[a] == group)
            .collect()
    }
}

const MAX_ATTEMPTS: usize = 1_000_000;

fn sample_group(
    g: usize,
    spec: &GroupSpec,
    omega: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, EnsembleError> {
    let inside = |w: f64| w > 0.0 && w < omega;
    match spec.distribution {
        FrequencyDistribution::Uniform { low, high }
        | FrequencyDistribution::Grid { low, high } => {
            if !(low.is_finite() && high.is_finite()) || high < low {
                return Err(EnsembleError::InvalidDistribution(g));
            }
            if high <= 0.0 || low >= omega {
                return Err(EnsembleError::OutsideSupport { group: g });
            }
        }
        FrequencyDistribution::Gaussian { mean, std } => {
            if !(mean.is_finite() && std.is_finite()) || std < 0.0 {
                return Err(EnsembleError::InvalidDistribution(g));
            }
            if std == 0.0 && !inside(mean) {
                return Err(EnsembleError::OutsideSupport { group: g });
            }
        }
    }
    let mut out = Vec::with_capacity(spec.count);
    match spec.distribution {
        FrequencyDistribution::Grid { low, high } => {
            for k in 0..spec.count {
                let w = if spec.count == 1 {
                    0.5 * (low + high)
                } else {
                    low + (high - low) * k as f64 / (spec.count - 1) as f64
                };
                if !inside(w) {
                    return Err(EnsembleError::OutsideSupport { group: g });
                }
                out.push(w);
            }
        }
        FrequencyDistribution::Uniform { low, high } => {
            let mut attempts = 0;
            while out.len() < spec.count {
                attempts += 1;
                if attempts > MAX_ATTEMPTS {
                    return Err(EnsembleError::RejectionExhausted { group: g, attempts });
                }
                let w = if high > low {
                    rng.random_range(low..=high)
                } else {
                    low
                };
                if inside(w) {
                    out.push(w);
                }
            }
        }
        FrequencyDistribution::Gaussian { mean, std } => {
            let normal =
                Normal::new(mean, std).map_err(|_| EnsembleError::InvalidDistribution(g))?;
            let mut attempts = 0;
            while out.len() < spec.count {
                attempts += 1;
                if attempts > MAX_ATTEMPTS {
                    return Err(EnsembleError::RejectionExhausted { group: g, attempts });
                }
                let w = normal.sample(rng);
                if inside(w) {
                    out.push(w);
                }
            }
        }
    }
    Ok(out)
}

/// Samples target frequencies, maps each to the norm with that uncoupled
/// frequency and starts the spin at `(0, 0, m)` (tilted if requested).
pub fn build_ensemble(spec: &EnsembleSpec) -> Result<Ensemble, EnsembleError> {
    let params =
        ModelParams::new(spec.omega, spec.kappa).map_err(|_| EnsembleError::InvalidParams)?;
    if spec.groups.is_empty() || spec.groups.iter().all(|g| g.count == 0) {
        return Err(EnsembleError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut frequencies = Vec::new();
    let mut partition = Vec::new();
    for (g, group) in spec.groups.iter().enumerate() {
        if group.count == 0 {
            return Err(EnsembleError::EmptyGroup(g));
        }
        let ws = sample_group(g, group, spec.omega, &mut rng)?;
        partition.extend(core::iter::repeat_n(g, ws.len()));
        frequencies.extend(ws);
    }
    let norms: Vec<f64> = frequencies
        .iter()
        .map(|&w| norm_for_frequency(w, &params).ok_or(EnsembleError::OutsideSupport { group: 0 }))
        .collect::<Result<_, _>>()?;
    let mut initial_state = Vec::with_capacity(3 * norms.len());
    for &m in &norms {
        if spec.tilt > 0.0 {
            let theta = rng.random_range(0.0..spec.tilt);
            let phi = rng.random_range(0.0..2.0 * PI);
            initial_state.extend([
                m * theta.sin() * phi.cos(),
                m * theta.sin() * phi.sin(),
                m * theta.cos(),
            ]);
        } else {
            initial_state.extend([0.0, 0.0, m]);
        }
    }
    let n = norms.len();
    let config = match spec.coupling {
        CouplingSpec::None => NetworkConfig::all_to_all(n, params, 0.0, Some(partition.clone()))?,
        CouplingSpec::AllToAll { gamma } => {
            NetworkConfig::all_to_all(n, params, gamma, Some(partition.clone()))?
        }
        CouplingSpec::IntraGroup { gamma } => {
            NetworkConfig::intra_group(params, partition.clone(), gamma)?
        }
    };
    Ok(Ensemble {
        config,
        initial_state,
        frequencies,
        norms,
        partition,
    })
}

/// Two Gaussian groups of `n/2` members with means `mean2 - delta` and
/// `mean2`, all-to-all coupled.
pub fn two_gaussian_groups(
    n: usize,
    mean2: f64,
    delta: f64,
    std: f64,
    gamma: f64,
    omega: f64,
    kappa: f64,
    seed: u64,
) -> EnsembleSpec {
    let h = n / 2;
    EnsembleSpec {
        groups: alloc::vec![
            GroupSpec {
                count: h,
                distribution: FrequencyDistribution::Gaussian {
                    mean: mean2 - delta,
                    std
                },
            },
            GroupSpec {
                count: n - h,
                distribution: FrequencyDistribution::Gaussian { mean: mean2, std },
            },
        ],
        omega,
        kappa,
        seed,
        coupling: CouplingSpec::AllToAll { gamma },
        tilt: 0.0,
    }
}
