//! Problem instances, schedules and their accounting.
//!
//! Points are indexed from zero throughout the library. A canonical
//! [`Schedule`] visits each point at most once and searches it a positive
//! number of times during that visit; a [`RawSchedule`] is the step-by-step
//! form where staying at a point is a search and moving is travel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default slack used when comparing a schedule weight against the budget.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Priors must sum to one within this tolerance.
pub const PRIOR_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A search problem: candidate points, the prior over the target location,
/// sensor error rates, integer search costs and a time budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub points: Vec<Point>,
    pub priors: Vec<f64>,
    pub false_negative: Vec<f64>,
    pub false_positive: Vec<f64>,
    pub search_costs: Vec<u32>,
    pub budget: f64,
}

impl Instance {
    /// Builds an instance with no false positives.
    pub fn new(
        points: Vec<Point>,
        priors: Vec<f64>,
        false_negative: Vec<f64>,
        search_costs: Vec<u32>,
        budget: f64,
    ) -> Result<Self> {
        let n = points.len();
        Self::with_false_positives(points, priors, false_negative, vec![0.0; n], search_costs, budget)
    }

    pub fn with_false_positives(
        points: Vec<Point>,
        priors: Vec<f64>,
        false_negative: Vec<f64>,
        false_positive: Vec<f64>,
        search_costs: Vec<u32>,
        budget: f64,
    ) -> Result<Self> {
        let instance = Instance {
            points,
            priors,
            false_negative,
            false_positive,
            search_costs,
            budget,
        };
        instance.check()?;
        Ok(instance)
    }

    /// Checks every invariant, reporting the first offending field.
    pub fn check(&self) -> Result<()> {
        let n = self.points.len();
        if n == 0 {
            return Err(Error::invalid("points", "at least one point is required"));
        }
        for (name, len) in [
            ("priors", self.priors.len()),
            ("false_negative", self.false_negative.len()),
            ("false_positive", self.false_positive.len()),
            ("search_costs", self.search_costs.len()),
        ] {
            if len != n {
                return Err(Error::invalid(name, format!("expected {n} entries, found {len}")));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::invalid(format!("points[{i}]"), "coordinates must be finite"));
            }
        }
        for (i, &p) in self.priors.iter().enumerate() {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("priors[{i}]"), format!("{p} is not a probability")));
            }
        }
        let total: f64 = self.priors.iter().sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::invalid("priors", format!("sum to {total}, expected 1")));
        }
        for (name, rates) in [("false_negative", &self.false_negative), ("false_positive", &self.false_positive)] {
            for (i, &r) in rates.iter().enumerate() {
                if !(0.0..1.0).contains(&r) {
                    return Err(Error::invalid(format!("{name}[{i}]"), format!("{r} is outside [0, 1)")));
                }
            }
        }
        for (i, &c) in self.search_costs.iter().enumerate() {
            if c == 0 {
                return Err(Error::invalid(format!("search_costs[{i}]"), "must be a positive integer"));
            }
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(Error::invalid("budget", format!("{} is not a nonnegative real", self.budget)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i].distance(&self.points[j])
    }

    pub fn has_false_positives(&self) -> bool {
        self.false_positive.iter().any(|&a| a > 0.0)
    }

    pub fn with_budget(&self, budget: f64) -> Self {
        Instance { budget, ..self.clone() }
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.len() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visit {
    pub point: usize,
    pub searches: u32,
}

impl Visit {
    pub fn new(point: usize, searches: u32) -> Self {
        Visit { point, searches }
    }
}

/// Canonical no-revisit plan: travel to each visited point in order and
/// search it `searches` times.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub visits: Vec<Visit>,
}

impl Schedule {
    pub fn new(visits: Vec<Visit>) -> Self {
        Schedule { visits }
    }

    pub fn empty() -> Self {
        Schedule::default()
    }

    /// Builds a schedule from an ordering and per-point counts, dropping
    /// points that are never searched.
    pub fn from_counts(order: &[usize], counts: &[u32]) -> Self {
        let visits = order
            .iter()
            .filter(|&&i| counts[i] > 0)
            .map(|&i| Visit::new(i, counts[i]))
            .collect();
        Schedule { visits }
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn total_searches(&self) -> u64 {
        self.visits.iter().map(|v| v.searches as u64).sum()
    }

    /// Search count per point for an instance of `n` points.
    pub fn counts(&self, n: usize) -> Result<Vec<u32>> {
        let mut counts = vec![0u32; n];
        for v in &self.visits {
            if v.point >= n {
                return Err(Error::IndexOutOfRange { index: v.point, n });
            }
            counts[v.point] += v.searches;
        }
        Ok(counts)
    }

    /// Expands into the step form, starting at the first visited point.
    pub fn to_raw(&self) -> RawSchedule {
        let mut steps = Vec::new();
        for v in &self.visits {
            steps.push(v.point);
            steps.extend(std::iter::repeat_n(v.point, v.searches as usize));
        }
        RawSchedule { steps }
    }
}

/// Step-by-step schedule. `steps[0]` is the starting point; each later step
/// either stays put (a search) or moves to another point.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSchedule {
    pub steps: Vec<usize>,
}

impl RawSchedule {
    pub fn new(steps: Vec<usize>) -> Self {
        RawSchedule { steps }
    }

    /// Indices into `steps` of every search step.
    pub fn search_steps(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.steps.len()).filter(|&t| self.steps[t] == self.steps[t - 1])
    }
}

/// Probability that the searcher reports the target at its true location at
/// least once: the sum over points of `(1 - beta_i^s_i) * p_i`.
pub fn detection_probability(instance: &Instance, schedule: &Schedule) -> Result<f64> {
    let counts = schedule.counts(instance.len())?;
    Ok(probability_from_counts(instance, &counts))
}

pub(crate) fn probability_from_counts(instance: &Instance, counts: &[u32]) -> f64 {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .map(|(i, &s)| (1.0 - instance.false_negative[i].powi(s as i32)) * instance.priors[i])
        .sum()
}

/// Euclidean length of the path through the visits in order.
pub fn travel_time(instance: &Instance, schedule: &Schedule) -> Result<f64> {
    for v in &schedule.visits {
        instance.check_index(v.point)?;
    }
    Ok(path_length(&instance.points, schedule.visits.iter().map(|v| v.point)))
}

pub fn search_time(instance: &Instance, schedule: &Schedule) -> Result<f64> {
    let mut total = 0.0;
    for v in &schedule.visits {
        instance.check_index(v.point)?;
        total += v.searches as f64 * instance.search_costs[v.point] as f64;
    }
    Ok(total)
}

/// Total time of a canonical schedule: search costs plus travel.
pub fn schedule_weight(instance: &Instance, schedule: &Schedule) -> Result<f64> {
    Ok(search_time(instance, schedule)? + travel_time(instance, schedule)?)
}

/// Total time of a raw schedule, summing the weight of every step.
pub fn raw_schedule_weight(instance: &Instance, raw: &RawSchedule) -> Result<f64> {
    for &i in &raw.steps {
        instance.check_index(i)?;
    }
    Ok(raw
        .steps
        .windows(2)
        .map(|w| {
            if w[0] == w[1] {
                instance.search_costs[w[1]] as f64
            } else {
                instance.distance(w[0], w[1])
            }
        })
        .sum())
}

/// Number of searches a raw schedule performs at each point.
pub fn raw_counts(instance: &Instance, raw: &RawSchedule) -> Result<Vec<u32>> {
    for &i in &raw.steps {
        instance.check_index(i)?;
    }
    let mut counts = vec![0u32; instance.len()];
    for t in raw.search_steps() {
        counts[raw.steps[t]] += 1;
    }
    Ok(counts)
}

/// Merges every search of a point into a single visit, placed where the
/// point first appears in the raw schedule. Points that are passed through
/// but never searched are dropped.
///
/// The result has the same detection probability and, in a metric space, no
/// greater weight.
pub fn canonicalize(instance: &Instance, raw: &RawSchedule) -> Result<Schedule> {
    let counts = raw_counts(instance, raw)?;
    let mut seen = vec![false; instance.len()];
    let mut order = Vec::new();
    for &i in &raw.steps {
        if !seen[i] {
            seen[i] = true;
            order.push(i);
        }
    }
    Ok(Schedule::from_counts(&order, &counts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    IndexOutOfRange { point: usize },
    Revisit { point: usize },
    ZeroSearches { point: usize },
    OverBudget { weight: f64, budget: f64, tolerance: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::IndexOutOfRange { point } => write!(f, "point index {point} out of range"),
            Violation::Revisit { point } => write!(f, "point {point} is visited more than once"),
            Violation::ZeroSearches { point } => write!(f, "point {point} is visited with zero searches"),
            Violation::OverBudget { weight, budget, tolerance } => {
                write!(f, "weight {weight} exceeds budget {budget} (tolerance {tolerance})")
            }
        }
    }
}

/// Lists every way `schedule` fails to be a feasible canonical schedule.
pub fn validate(instance: &Instance, schedule: &Schedule, tolerance: f64) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen = vec![false; instance.len()];
    for v in &schedule.visits {
        if v.point >= instance.len() {
            violations.push(Violation::IndexOutOfRange { point: v.point });
            continue;
        }
        if seen[v.point] {
            violations.push(Violation::Revisit { point: v.point });
        }
        seen[v.point] = true;
        if v.searches == 0 {
            violations.push(Violation::ZeroSearches { point: v.point });
        }
    }
    if let Ok(weight) = schedule_weight(instance, schedule) {
        if weight > instance.budget + tolerance {
            violations.push(Violation::OverBudget {
                weight,
                budget: instance.budget,
                tolerance,
            });
        }
    }
    violations
}

/// Largest pairwise distance; zero for a single point.
pub fn diameter(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max(p.distance(q));
        }
    }
    best
}

pub fn path_length(points: &[Point], order: impl IntoIterator<Item = usize>) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<usize> = None;
    for i in order {
        if let Some(p) = prev {
            total += points[p].distance(&points[i]);
        }
        prev = Some(i);
    }
    total
}

/// Outcome of a solver run with its weight decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub schedule: Schedule,
    pub probability: f64,
    pub travel_time: f64,
    pub search_time: f64,
    pub total_weight: f64,
    /// Budget overrun the solver is allowed by contract.
    pub slack: f64,
    pub solver_name: String,
    pub params: BTreeMap<String, String>,
}

impl SolveResult {
    pub fn new(instance: &Instance, schedule: Schedule, solver_name: &str, slack: f64) -> Result<Self> {
        let probability = detection_probability(instance, &schedule)?;
        let travel_time = travel_time(instance, &schedule)?;
        let search_time = search_time(instance, &schedule)?;
        Ok(SolveResult {
            schedule,
            probability,
            travel_time,
            search_time,
            total_weight: travel_time + search_time,
            slack,
            solver_name: solver_name.to_string(),
            params: BTreeMap::new(),
        })
    }

    pub fn empty(solver_name: &str) -> Self {
        SolveResult {
            schedule: Schedule::empty(),
            probability: 0.0,
            travel_time: 0.0,
            search_time: 0.0,
            total_weight: 0.0,
            slack: 0.0,
            solver_name: solver_name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Validates against the instance, allowing the declared slack on top of
    /// `tolerance`.
    pub fn violations(&self, instance: &Instance, tolerance: f64) -> Vec<Violation> {
        validate(instance, &self.schedule, self.slack + tolerance)
    }
}
