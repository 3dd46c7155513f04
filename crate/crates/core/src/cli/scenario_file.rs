//! JSON scenario files.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "hbar": 1.0,
//!   "time": {"start": 0.0, "end": 1.0, "steps": 2000},
//!   "model": {"kind": "pair", "h": <schedule>, "theta": <schedule>},
//!   "initial_state": [[1, 0], [0, 0]],
//!   "tolerances": {"norm_drift": 1e-8}
//! }
//! ```
//!
//! `model.kind` is `"builtin"` (with `"name"`), `"pair"` (keys `"h"`,
//! `"theta"`) or `"direct"` (keys `"H"`, `"theta"`). A schedule is either a
//! constant matrix literal (row-major nest of `[re, im]` pairs) or
//! `{"times": [...], "snapshots": [<matrix>, ...]}`. For builtins every other
//! field is an optional override.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Model, OperatorSchedule, Registry, Scenario, TimeGrid, Tolerances};
use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix, MatrixLiteral, VectorLiteral};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSpec>,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<VectorLiteral>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Builtin {
        name: String,
    },
    Pair {
        h: ScheduleSpec,
        theta: ScheduleSpec,
    },
    Direct {
        #[serde(rename = "H")]
        hamiltonian: ScheduleSpec,
        theta: ScheduleSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Constant(MatrixLiteral),
    Sampled {
        times: Vec<f64>,
        snapshots: Vec<MatrixLiteral>,
    },
}

impl ScheduleSpec {
    fn build(&self, what: &str) -> Result<OperatorSchedule> {
        let schedule = match self {
            ScheduleSpec::Constant(lit) => {
                ComplexMatrix::from_literal(lit).map(OperatorSchedule::constant)
            }
            ScheduleSpec::Sampled { times, snapshots } => {
                OperatorSchedule::sampled_from_literals(times, snapshots)
            }
        };
        schedule.map_err(|e| Error::Validation(format!("{what}: {e}")))
    }

    fn from_schedule(s: &OperatorSchedule, what: &str) -> Result<ScheduleSpec> {
        if let Some(m) = s.as_constant() {
            return Ok(ScheduleSpec::Constant(m.to_literal()));
        }
        if let Some((times, snaps)) = s.samples() {
            return Ok(ScheduleSpec::Sampled {
                times: times.to_vec(),
                snapshots: snaps.iter().map(ComplexMatrix::to_literal).collect(),
            });
        }
        Err(Error::Validation(format!(
            "{what}: closed-form schedules can only be written as a builtin reference"
        )))
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile> {
    serde_json::from_str(text).map_err(parse_error)
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str, registry: &Registry) -> Result<Scenario> {
    parse_scenario_file(text)?.into_scenario(registry)
}

impl ScenarioFile {
    pub fn into_scenario(self, registry: &Registry) -> Result<Scenario> {
        let grid = self
            .time
            .map(|t| TimeGrid::new(t.start, t.end, t.steps))
            .transpose()?;
        let state = self
            .initial_state
            .as_ref()
            .map(matcore::vector_from_literal)
            .transpose()?;
        match &self.model {
            ModelSpec::Builtin { name } => {
                let Some(entry) = registry.lookup(name) else {
                    return Err(Error::Validation(format!(
                        "unknown builtin '{name}'; available: {}",
                        registry.names().join(", ")
                    )));
                };
                if let Some(dim) = self.dimension {
                    if dim != entry.dim {
                        return Err(Error::Validation(format!(
                            "builtin '{name}' has dimension {}, file says {dim}",
                            entry.dim
                        )));
                    }
                }
                let base = entry.scenario()?;
                let scenario = Scenario::new(
                    grid.unwrap_or(*base.grid()),
                    self.hbar.unwrap_or(base.hbar()),
                    base.model().clone(),
                    state.unwrap_or_else(|| base.initial_components().clone()),
                    self.tolerances.unwrap_or(*base.tolerances()),
                )?;
                Ok(scenario.named(entry.name))
            }
            ModelSpec::Pair { .. } | ModelSpec::Direct { .. } => {
                let dim = self
                    .dimension
                    .ok_or_else(|| Error::Validation("missing field 'dimension'".into()))?;
                let grid = grid.ok_or_else(|| Error::Validation("missing field 'time'".into()))?;
                let state: DVector<_> = state
                    .ok_or_else(|| Error::Validation("missing field 'initial_state'".into()))?;
                if state.len() != dim {
                    return Err(Error::Validation(format!(
                        "initial_state has {} components, dimension is {dim}",
                        state.len()
                    )));
                }
                let model = match &self.model {
                    ModelSpec::Pair { h, theta } => Model::Pair {
                        h: h.build("h")?,
                        theta: theta.build("theta")?,
                    },
                    ModelSpec::Direct { hamiltonian, theta } => Model::Direct {
                        hamiltonian: hamiltonian.build("H")?,
                        theta: theta.build("theta")?,
                    },
                    ModelSpec::Builtin { .. } => unreachable!(),
                };
                Scenario::new(
                    grid,
                    self.hbar.unwrap_or(1.0),
                    model,
                    state,
                    self.tolerances.unwrap_or_default(),
                )
            }
        }
    }

    /// Fully explicit file for `scenario`.
    pub fn from_scenario(scenario: &Scenario) -> Result<ScenarioFile> {
        let model = match scenario.builtin_name() {
            Some(name) => ModelSpec::Builtin {
                name: name.to_string(),
            },
            None => match scenario.model() {
                Model::Pair { h, theta } => ModelSpec::Pair {
                    h: ScheduleSpec::from_schedule(h, "h")?,
                    theta: ScheduleSpec::from_schedule(theta, "theta")?,
                },
                Model::Direct { hamiltonian, theta } => ModelSpec::Direct {
                    hamiltonian: ScheduleSpec::from_schedule(hamiltonian, "H")?,
                    theta: ScheduleSpec::from_schedule(theta, "theta")?,
                },
            },
        };
        let grid = scenario.grid();
        Ok(ScenarioFile {
            dimension: Some(scenario.dim()),
            hbar: Some(scenario.hbar()),
            time: Some(TimeSpec {
                start: grid.start(),
                end: grid.end(),
                steps: grid.steps(),
            }),
            model,
            initial_state: Some(matcore::vector_to_literal(scenario.initial_components())),
            tolerances: Some(*scenario.tolerances()),
        })
    }
}

pub fn serialize_scenario(scenario: &Scenario) -> Result<String> {
    let file = ScenarioFile::from_scenario(scenario)?;
    Ok(serde_json::to_string_pretty(&file).expect("scenario files serialize"))
}
