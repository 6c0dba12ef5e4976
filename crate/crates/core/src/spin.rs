//! Collective spin operators and the total-spin decomposition of `N` spin-1/2
//! particles.
//!
//! Quantum numbers are carried as twice their value ([`TwiceSpin`]) so that
//! half-integer spins never go through floating-point comparisons.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpinError {
    #[error("particle count must be at least 1")]
    NoParticles,
    #[error("spin {0} is not a non-negative multiple of 1/2")]
    InvalidSpin(f64),
    #[error("spin 2J={twice_j} is not reachable with {particles} spin-1/2 particles")]
    SectorOutOfRange { particles: u32, twice_j: u32 },
}

/// A spin quantum number stored as `2J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwiceSpin(u32);

impl TwiceSpin {
    pub const fn new(twice: u32) -> Self {
        TwiceSpin(twice)
    }

    /// Parses a floating-point spin value, accepting only non-negative
    /// multiples of one half.
    pub fn from_spin(j: f64) -> Result<Self, SpinError> {
        if !j.is_finite() || j < 0.0 {
            return Err(SpinError::InvalidSpin(j));
        }
        let twice = 2.0 * j;
        if twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(SpinError::InvalidSpin(j));
        }
        Ok(TwiceSpin(twice as u32))
    }

    pub const fn get(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Dimension `2J + 1` of the irreducible representation.
    pub const fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// `J(J+1)`, the Casimir eigenvalue.
    pub fn casimir(self) -> f64 {
        let t = self.0 as f64;
        t * (t + 2.0) / 4.0
    }
}

impl fmt::Display for TwiceSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// One spin-`J` block of the Clebsch-Gordan decomposition of `N` spins 1/2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinSector {
    particles: u32,
    twice_j: TwiceSpin,
    multiplicity: BigUint,
}

impl SpinSector {
    pub fn new(particles: u32, twice_j: TwiceSpin) -> Result<Self, SpinError> {
        if particles == 0 {
            return Err(SpinError::NoParticles);
        }
        let t = twice_j.get();
        if t > particles || !(particles - t).is_multiple_of(2) {
            return Err(SpinError::SectorOutOfRange {
                particles,
                twice_j: t,
            });
        }
        Ok(SpinSector {
            particles,
            twice_j,
            multiplicity: multiplicity(particles, t),
        })
    }

    /// The totally symmetric (Dicke) sector `J = N/2`.
    pub fn symmetric(particles: u32) -> Result<Self, SpinError> {
        Self::new(particles, TwiceSpin(particles))
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn twice_j(&self) -> TwiceSpin {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j.value()
    }

    pub fn dim(&self) -> usize {
        self.twice_j.dim()
    }

    /// `S = N/2`, the largest reachable spin.
    pub fn max_spin(&self) -> f64 {
        self.particles as f64 / 2.0
    }

    /// Rescaled total spin `m = J/S`.
    pub fn m(&self) -> f64 {
        self.twice_j.get() as f64 / self.particles as f64
    }

    pub fn multiplicity(&self) -> &BigUint {
        &self.multiplicity
    }

    pub fn is_symmetric(&self) -> bool {
        self.twice_j.get() == self.particles
    }
}

fn factorial(n: u32) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// `n_J = N! (2J+1) / ((N/2 + J + 1)! (N/2 - J)!)`, evaluated exactly.
fn multiplicity(particles: u32, twice_j: u32) -> BigUint {
    let upper = (particles + twice_j) / 2 + 1;
    let lower = (particles - twice_j) / 2;
    let num = factorial(particles) * BigUint::from(twice_j + 1);
    let den = factorial(upper) * factorial(lower);
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// Lists every spin sector of `N` spins 1/2, from `J = N/2` down to `0`
/// (even `N`) or `1/2` (odd `N`).
pub fn enumerate_sectors(particles: u32) -> Result<Vec<SpinSector>, SpinError> {
    if particles == 0 {
        return Err(SpinError::NoParticles);
    }
    (0..=particles / 2)
        .map(|k| SpinSector::new(particles, TwiceSpin(particles - 2 * k)))
        .collect()
}

/// Matrices of the collective spin in the `|J, m_J>` basis, ordered
/// `m_J = J, J-1, ..., -J`.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    twice_j: TwiceSpin,
    pub sx: DMatrix<Complex64>,
    pub sy: DMatrix<Complex64>,
    pub sz: DMatrix<Complex64>,
    pub sp: DMatrix<Complex64>,
    pub sm: DMatrix<Complex64>,
}

impl SpinOperators {
    pub fn new(twice_j: TwiceSpin) -> Self {
        let d = twice_j.dim();
        let t = twice_j.get() as i64;
        let mut sp = DMatrix::<Complex64>::zeros(d, d);
        let mut sz = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..d {
            // 2m for basis index k
            let tm = t - 2 * k as i64;
            sz[(k, k)] = Complex64::new(tm as f64 / 2.0, 0.0);
            if k > 0 {
                // <m+1| S+ |m> = sqrt(J(J+1) - m(m+1))
                let arg = (t * (t + 2) - tm * (tm + 2)) as f64 / 4.0;
                sp[(k - 1, k)] = Complex64::new(arg.sqrt(), 0.0);
            }
        }
        let sm = sp.adjoint();
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, 0.5);
        let sx = (&sp + &sm) * half;
        let sy = (&sp - &sm) * (-half_i);
        SpinOperators {
            twice_j,
            sx,
            sy,
            sz,
            sp,
            sm,
        }
    }

    pub fn twice_j(&self) -> TwiceSpin {
        self.twice_j
    }

    pub fn dim(&self) -> usize {
        self.twice_j.dim()
    }

    /// `S+ S-`, which is diagonal in this basis.
    pub fn raising_lowering(&self) -> DMatrix<Complex64> {
        &self.sp * &self.sm
    }
}

/// Builds the spin operators for a total spin given as a float (`J = 3/2` is
/// `1.5`).
pub fn build_operators(j: f64) -> Result<SpinOperators, SpinError> {
    TwiceSpin::from_spin(j).map(SpinOperators::new)
}
