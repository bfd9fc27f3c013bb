//! JSON shapes seen by users. Point numbers here are 1-based.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use impsearch::model::{canonicalize, RawSchedule, FEASIBILITY_TOL};
use impsearch::{Instance, Schedule, SolveResult, Violation, Visit};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitOut {
    pub point: usize,
    pub searches: u32,
}

pub fn visits_out(schedule: &Schedule) -> Vec<VisitOut> {
    schedule
        .visits
        .iter()
        .map(|v| VisitOut {
            point: v.point + 1,
            searches: v.searches,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ResultOut {
    pub solver: String,
    pub probability: f64,
    pub travel_time: f64,
    pub search_time: f64,
    pub total_weight: f64,
    pub budget: f64,
    pub slack: f64,
    pub feasible: bool,
    pub timed_out: bool,
    pub schedule: Vec<VisitOut>,
    pub params: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl ResultOut {
    pub fn new(instance: &Instance, r: &SolveResult, timed_out: bool, runtime_ms: Option<f64>) -> Self {
        ResultOut {
            solver: r.solver_name.clone(),
            probability: r.probability,
            travel_time: r.travel_time,
            search_time: r.search_time,
            total_weight: r.total_weight,
            budget: instance.budget,
            slack: r.slack,
            feasible: r.violations(instance, FEASIBILITY_TOL).is_empty(),
            timed_out,
            schedule: visits_out(&r.schedule),
            params: r.params.clone(),
            runtime_ms,
        }
    }
}

/// A schedule file: either canonical visits under `schedule` (the output
/// of `solve` qualifies) or a raw walk under `steps`.
#[derive(Debug, Deserialize)]
struct ScheduleFile {
    #[serde(default)]
    schedule: Option<Vec<VisitOut>>,
    #[serde(default)]
    steps: Option<Vec<usize>>,
}

pub struct LoadedSchedule {
    pub schedule: Schedule,
    /// Weight of the raw walk, when the file held one.
    pub raw_weight: Option<f64>,
}

fn zero_based(point: usize) -> Result<usize, CliError> {
    point
        .checked_sub(1)
        .ok_or_else(|| CliError::usage("point numbers start at 1"))
}

pub fn load_schedule(path: &Path, instance: &Instance) -> Result<LoadedSchedule, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let file: ScheduleFile =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    match (file.schedule, file.steps) {
        (Some(visits), None) => {
            let visits = visits
                .iter()
                .map(|v| Ok(Visit::new(zero_based(v.point)?, v.searches)))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(LoadedSchedule {
                schedule: Schedule::new(visits),
                raw_weight: None,
            })
        }
        (None, Some(steps)) => {
            let raw = RawSchedule::new(steps.into_iter().map(zero_based).collect::<Result<_, _>>()?);
            let raw_weight = impsearch::model::raw_schedule_weight(instance, &raw)?;
            Ok(LoadedSchedule {
                schedule: canonicalize(instance, &raw)?,
                raw_weight: Some(raw_weight),
            })
        }
        _ => Err(CliError::usage(format!(
            "{}: expected exactly one of \"schedule\" or \"steps\"",
            path.display()
        ))),
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationOut {
    IndexOutOfRange { point: usize },
    Revisit { point: usize },
    ZeroSearches { point: usize },
    OverBudget { weight: f64, budget: f64, tolerance: f64 },
}

impl From<&Violation> for ViolationOut {
    fn from(v: &Violation) -> Self {
        match *v {
            Violation::IndexOutOfRange { point } => ViolationOut::IndexOutOfRange { point: point + 1 },
            Violation::Revisit { point } => ViolationOut::Revisit { point: point + 1 },
            Violation::ZeroSearches { point } => ViolationOut::ZeroSearches { point: point + 1 },
            Violation::OverBudget {
                weight,
                budget,
                tolerance,
            } => ViolationOut::OverBudget {
                weight,
                budget,
                tolerance,
            },
        }
    }
}

pub fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::failure(e.to_string()))?;
    println!("{text}");
    Ok(())
}
