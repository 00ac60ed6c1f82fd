//! Experiment description read from TOML.
//!
//! ```toml
//! output_dir = "out"
//!
//! [model]
//! mu_max = 0.74
//! k_s = 0.59
//! k_i = 16.4
//! k = 30.0
//! alpha = 11.0
//! s_in = 30.0
//!
//! [regions]
//! kind = "perfect"
//! equidistant = { top = 4.0, n = 4 }
//!
//! [schedule]
//! rates = [0.19, 0.29, 0.40, 0.47]
//!
//! [sim]
//! t_max = 300.0
//!
//! [initial]
//! grid = { s = [1.0, 29.0, 7], x = [0.02, 0.95, 7] }
//! replicates = 3
//! ```
//!
//! Regions are given either as an `equidistant` recipe, as inner
//! `boundaries` (perfect), or as explicit `lower`/`upper` bounds. The
//! schedule is either explicit `rates` or a `synthesize = { d_star, margin }`
//! directive. A missing `sim.mode` falls back to the default for the region
//! kind.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::controller::{synthesize, DilutionSchedule, Synthesis};
use crate::model::{ModelParams, ParamValues, State};
use crate::quantizer::{make_equidistant, QuantizerKind, RegionSet};
use crate::simulator::{grid, SimConfig, SimMode};

#[derive(Debug, ThisError)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl From<crate::Error> for ScenarioError {
    fn from(e: crate::Error) -> Self {
        ScenarioError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Equidistant {
    pub top: f64,
    pub n: usize,
    #[serde(default)]
    pub overlap_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub kind: QuantizerKind,
    pub equidistant: Option<Equidistant>,
    pub boundaries: Option<Vec<f64>>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl RegionSpec {
    pub fn build(&self) -> Result<RegionSet<f64>, ScenarioError> {
        let explicit = self.lower.is_some() || self.upper.is_some();
        let given = [
            self.equidistant.is_some(),
            self.boundaries.is_some(),
            explicit,
        ];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(ScenarioError::Invalid(
                "regions need exactly one of `equidistant`, `boundaries` or `lower`/`upper`".into(),
            ));
        }
        if let Some(e) = &self.equidistant {
            return Ok(make_equidistant(e.top, e.n, self.kind, e.overlap_fraction)?);
        }
        if let Some(b) = &self.boundaries {
            if self.kind != QuantizerKind::Perfect {
                return Err(ScenarioError::Invalid(
                    "`boundaries` describes a perfect region set".into(),
                ));
            }
            return Ok(RegionSet::perfect(b)?);
        }
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => Ok(RegionSet::new(l.clone(), u.clone(), self.kind)?),
            _ => Err(ScenarioError::Invalid(
                "`lower` and `upper` go together".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisDirective {
    pub d_star: f64,
    #[serde(default)]
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub rates: Option<Vec<f64>>,
    pub synthesize: Option<SynthesisDirective>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub s: (f64, f64, usize),
    pub x: (f64, f64, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub points: Vec<(f64, f64)>,
    pub grid: Option<GridSpec>,
    #[serde(default = "one")]
    pub replicates: usize,
}

fn one() -> usize {
    1
}

impl InitialSpec {
    pub fn states(&self) -> Vec<State<f64>> {
        let mut out: Vec<State<f64>> = self.points.iter().map(|&(s, x)| State::new(s, x)).collect();
        if let Some(g) = &self.grid {
            out.extend(grid(g.s, g.x));
        }
        out
    }
}

/// Scenario as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub output_dir: Option<PathBuf>,
    pub model: ParamValues<f64>,
    pub regions: RegionSpec,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub sim: Option<toml::Table>,
    pub initial: Option<InitialSpec>,
}

/// Validated scenario with every component built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: ModelParams<f64>,
    pub regions: RegionSet<f64>,
    /// `None` when a synthesis directive found no schedule.
    pub schedule: Option<DilutionSchedule<f64>>,
    pub synthesis: Option<Synthesis<f64>>,
    pub sim: SimConfig<f64>,
    pub initial: Vec<State<f64>>,
    pub replicates: usize,
    pub output_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Scenario::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Scenario::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let params = ModelParams::new(file.model)?;
        let regions = file.regions.build()?;
        let (schedule, synthesis) = match (&file.schedule.rates, &file.schedule.synthesize) {
            (Some(r), None) => {
                let s = DilutionSchedule::new(r.clone())?;
                if s.len() != regions.n() {
                    return Err(ScenarioError::Invalid(format!(
                        "{} rates for {} regions",
                        s.len(),
                        regions.n()
                    )));
                }
                (Some(s), None)
            }
            (None, Some(d)) => {
                let syn = synthesize(&params, &regions, d.d_star, d.margin)?;
                (syn.schedule(), Some(syn))
            }
            _ => {
                return Err(ScenarioError::Invalid(
                    "schedule needs exactly one of `rates` or `synthesize`".into(),
                ))
            }
        };

        let mut sim = SimConfig::for_regions(&regions);
        if let Some(table) = file.sim {
            let explicit_mode = table.contains_key("mode");
            let parsed: SimConfig<f64> = toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
            sim = SimConfig {
                mode: if explicit_mode { parsed.mode } else { sim.mode },
                ..parsed
            };
        }
        sim.validate()?;

        let (initial, replicates) = match &file.initial {
            Some(spec) => {
                if spec.replicates == 0 {
                    return Err(ScenarioError::Invalid(
                        "replicates must be at least 1".into(),
                    ));
                }
                let states = spec.states();
                if let Some(bad) = states.iter().find(|s| !(s.s > 0.0 && s.x > 0.0)) {
                    return Err(ScenarioError::Invalid(format!(
                        "initial state ({}, {}) is not in the open positive orthant",
                        bad.s, bad.x
                    )));
                }
                (states, spec.replicates)
            }
            None => (Vec::new(), 1),
        };

        Ok(Scenario {
            params,
            regions,
            schedule,
            synthesis,
            sim,
            initial,
            replicates,
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.sim.mode = mode;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
mu_max = 0.74
k_s = 0.59
k_i = 16.4
k = 30.0
alpha = 11.0
s_in = 30.0

[regions]
kind = "uncertain"
equidistant = { top = 4.0, n = 4, overlap_fraction = 0.1 }

[schedule]
rates = [0.19, 0.29, 0.40, 0.47]

[initial]
points = [[25.0, 0.05]]
grid = { s = [1.0, 29.0, 2], x = [0.02, 0.95, 2] }
"#;

    #[test]
    fn parses_and_defaults_mode() {
        let sc = Scenario::parse(BASE).unwrap();
        assert_eq!(sc.regions.n(), 4);
        assert_eq!(sc.sim.mode, SimMode::DiscreteRandom);
        assert_eq!(sc.initial.len(), 5);
        assert_eq!(sc.replicates, 1);
        let with_sim = format!("{BASE}\n[sim]\nmode = \"perfect_event\"\nt_max = 10.0\n");
        let sc = Scenario::parse(&with_sim).unwrap();
        assert_eq!(sc.sim.mode, SimMode::PerfectEvent);
        assert_eq!(sc.sim.t_max, 10.0);
        assert_eq!(sc.sim.dt_control, 0.05);
    }

    #[test]
    fn rejects_inconsistent() {
        let short = BASE.replace("[0.19, 0.29, 0.40, 0.47]", "[0.19, 0.29]");
        assert!(matches!(
            Scenario::parse(&short),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(matches!(
            Scenario::parse("[model]\nmu_max = "),
            Err(ScenarioError::Parse(_))
        ));
        let typo = BASE.replace("[schedule]", "[schedule]\nratez = 1");
        assert!(matches!(
            Scenario::parse(&typo),
            Err(ScenarioError::Parse(_))
        ));
    }

    #[test]
    fn synthesis_directive() {
        let syn = BASE.replace(
            "rates = [0.19, 0.29, 0.40, 0.47]",
            "synthesize = { d_star = 0.47, margin = 0.005 }",
        );
        let sc = Scenario::parse(&syn).unwrap();
        assert!(sc.schedule.is_some());
        assert!(sc.synthesis.unwrap().is_feasible());
    }
}
