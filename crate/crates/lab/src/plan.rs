//! Sweep plans, read from TOML.

use ctc_core::ensemble::{two_gaussian_groups, CouplingSpec, EnsembleSpec, GroupSpec};
use ctc_core::liouvillian::{DominantRule, ModelParams, Space};
use ctc_core::sync::AnalysisOptions;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Model {
    pub omega: f64,
    pub kappa: f64,
}

impl Default for Model {
    fn default() -> Self {
        Model {
            omega: 0.9,
            kappa: 1.0,
        }
    }
}

impl Model {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.omega, self.kappa).map_err(Into::into)
    }
}

/// Explicit values or an inclusive evenly spaced range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Range { start, stop, count } => match count {
                0 => vec![],
                1 => vec![*start],
                _ => (0..*count)
                    .map(|k| start + (stop - start) * k as f64 / (*count - 1) as f64)
                    .collect(),
            },
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let v = self.values();
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Validation(format!(
                "axis '{name}' must hold finite values"
            )));
        }
        Ok(())
    }
}

/// Coupling-detuning grid over two Gaussian groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub gamma: Axis,
    pub delta: Axis,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_std")]
    pub std: f64,
    /// Mean frequency of the second group; the first sits at `mean2 - delta`.
    #[serde(default = "default_mean2")]
    pub mean2: f64,
}

fn default_n() -> usize {
    100
}
fn default_std() -> f64 {
    0.1
}
fn default_mean2() -> f64 {
    0.8
}

/// Liouvillian spectra over particle numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSpec {
    pub particles: Vec<u32>,
    #[serde(default)]
    pub space: Space,
    #[serde(default)]
    pub rule: DominantRule,
}

/// One fixed ensemble scanned over the coupling strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedingSpec {
    pub gamma: Axis,
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub tilt: f64,
    /// Group counts as melted when at least this fraction of it is dead.
    #[serde(default = "default_melt")]
    pub melt_fraction: f64,
}

fn default_melt() -> f64 {
    0.9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    /// Keep the full binary trajectory of every network point.
    #[serde(default)]
    pub store_trajectories: bool,
    pub grid: Option<GridSpec>,
    pub scaling: Option<ScalingSpec>,
    pub seeding: Option<SeedingSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Point {
    Grid {
        id: String,
        i: usize,
        j: usize,
        gamma: f64,
        delta: f64,
        spec: EnsembleSpec,
    },
    Scaling {
        id: String,
        particles: u32,
    },
    Seeding {
        id: String,
        i: usize,
        gamma: f64,
        spec: EnsembleSpec,
    },
}

impl Point {
    pub fn id(&self) -> &str {
        match self {
            Point::Grid { id, .. } | Point::Scaling { id, .. } | Point::Seeding { id, .. } => id,
        }
    }

    pub fn ensemble(&self) -> Option<&EnsembleSpec> {
        match self {
            Point::Grid { spec, .. } | Point::Seeding { spec, .. } => Some(spec),
            Point::Scaling { .. } => None,
        }
    }
}

impl SweepPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: SweepPlan =
            toml::from_str(text).map_err(|e| LabError::Validation(e.message().to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Validation(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.params()?;
        let kinds = [
            self.grid.is_some(),
            self.scaling.is_some(),
            self.seeding.is_some(),
        ];
        if kinds.iter().filter(|&&k| k).count() != 1 {
            return Err(LabError::Validation(
                "a plan needs exactly one of [grid], [scaling] or [seeding]".into(),
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(LabError::Validation(
                "plan name must be a plain non-empty word".into(),
            ));
        }
        let a = &self.analysis;
        if !(a.dt > 0.0) || a.lyapunov.horizon <= a.lyapunov.transient {
            return Err(LabError::Validation(
                "analysis needs dt > 0 and horizon > transient".into(),
            ));
        }
        if let Some(g) = &self.grid {
            g.gamma.validate("gamma")?;
            g.delta.validate("delta")?;
            if g.n < 2 || !(g.std >= 0.0) {
                return Err(LabError::Validation(
                    "grid needs n >= 2 and std >= 0".into(),
                ));
            }
        }
        if let Some(s) = &self.scaling {
            if s.particles.is_empty() || s.particles.contains(&0) {
                return Err(LabError::Validation(
                    "scaling needs positive particle numbers".into(),
                ));
            }
        }
        if let Some(s) = &self.seeding {
            s.gamma.validate("gamma")?;
            let g = s.gamma.values();
            if g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(LabError::Validation(
                    "seeding gamma list must increase".into(),
                ));
            }
            if s.groups.is_empty() {
                return Err(LabError::Validation(
                    "seeding needs at least one group".into(),
                ));
            }
        }
        Ok(())
    }

    /// Every grid point, in a fixed order with unique ids.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        if let Some(g) = &self.grid {
            for (i, &gamma) in g.gamma.values().iter().enumerate() {
                for (j, &delta) in g.delta.values().iter().enumerate() {
                    let spec = two_gaussian_groups(
                        g.n,
                        g.mean2,
                        delta,
                        g.std,
                        gamma,
                        self.model.omega,
                        self.model.kappa,
                        self.seed,
                    );
                    out.push(Point::Grid {
                        id: format!("g{i:03}-d{j:03}"),
                        i,
                        j,
                        gamma,
                        delta,
                        spec,
                    });
                }
            }
        }
        if let Some(s) = &self.scaling {
            for &n in &s.particles {
                out.push(Point::Scaling {
                    id: format!("N{n:03}"),
                    particles: n,
                });
            }
        }
        if let Some(s) = &self.seeding {
            for (i, &gamma) in s.gamma.values().iter().enumerate() {
                let spec = EnsembleSpec {
                    groups: s.groups.clone(),
                    omega: self.model.omega,
                    kappa: self.model.kappa,
                    seed: self.seed,
                    coupling: CouplingSpec::AllToAll { gamma },
                    tilt: s.tilt,
                };
                out.push(Point::Seeding {
                    id: format!("g{i:03}"),
                    i,
                    gamma,
                    spec,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: &str = r#"
name = "smoke"
seed = 3

[grid]
gamma = [0.2, 0.8]
delta = { start = 0.1, stop = 0.3, count = 2 }
n = 10
"#;

    #[test]
    fn parses_and_round_trips() {
        let p = SweepPlan::from_toml(GRID).unwrap();
        assert_eq!(p.points().len(), 4);
        assert_eq!(p.grid.as_ref().unwrap().delta.values(), vec![0.1, 0.3]);
        let again = SweepPlan::from_toml(&p.to_toml().unwrap()).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn ids_are_unique() {
        let p = SweepPlan::from_toml(GRID).unwrap();
        let mut ids: Vec<String> = p.points().iter().map(|p| p.id().to_string()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 4);
    }

    #[test]
    fn unknown_keys_and_bad_shapes_rejected() {
        assert!(SweepPlan::from_toml(&GRID.replace("n = 10", "nn = 10")).is_err());
        assert!(SweepPlan::from_toml("name = \"x\"\n").is_err());
        let both = format!("{GRID}\n[scaling]\nparticles = [4]\n");
        assert!(SweepPlan::from_toml(&both).is_err());
        let dec = "name = \"s\"\n[seeding]\ngamma = [0.5, 0.4]\ngroups = []\n";
        assert!(SweepPlan::from_toml(dec).is_err());
    }
}
