use serde::{Deserialize, Serialize};

use super::tsp::{two_opt_paths, PathTable, TspMode, EXACT_MAX_POINTS};
use crate::dp::floor_tol;
use crate::error::{Error, Result};
use crate::model::{path_length, Instance, Schedule, SolveResult};

const UNIFORM_TOL: f64 = 1e-12;

/// Shared sensor and cost parameters of a uniform instance, plus the budget
/// slack factor of the dual approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformParams {
    pub beta: f64,
    pub cost: u32,
    pub epsilon: f64,
}

impl UniformParams {
    pub fn new(beta: f64, cost: u32, epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!("beta must lie in [0, 1), got {beta}")));
        }
        if cost == 0 {
            return Err(Error::InvalidArgument("cost must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(UniformParams { beta, cost, epsilon })
    }

    /// Reads `beta` and `cost` off an instance, rejecting it unless priors,
    /// false-negative rates and costs are all uniform.
    pub fn from_instance(instance: &Instance, epsilon: f64) -> Result<Self> {
        check_uniform(instance)?;
        UniformParams::new(instance.false_negative[0], instance.search_costs[0], epsilon)
    }
}

fn check_uniform(instance: &Instance) -> Result<()> {
    let all_equal = |v: &[f64]| v.iter().all(|x| (x - v[0]).abs() <= UNIFORM_TOL);
    if instance.is_empty() {
        return Err(Error::NotUniform("instance has no points".into()));
    }
    if !all_equal(&instance.priors) {
        return Err(Error::NotUniform("priors differ".into()));
    }
    if !all_equal(&instance.false_negative) {
        return Err(Error::NotUniform("false-negative rates differ".into()));
    }
    if instance.search_costs.iter().any(|&c| c != instance.search_costs[0]) {
        return Err(Error::NotUniform("search costs differ".into()));
    }
    Ok(())
}

/// Splits `total` searches over `k` points as evenly as possible, giving the
/// extra ones to the lowest indices.
pub fn allocate_equal(total: u64, k: usize) -> Vec<u64> {
    assert!(k >= 1, "allocate_equal needs at least one point");
    let base = total / k as u64;
    let extra = (total % k as u64) as usize;
    (0..k).map(|i| base + u64::from(i < extra)).collect()
}

pub fn solve_uniform(instance: &Instance, params: UniformParams) -> Result<SolveResult> {
    solve_uniform_with(instance, params, TspMode::Auto)
}

/// Dual approximation for uniform instances: with budget `(1 + epsilon) T`,
/// tries every number of visited points `k`, walks a short open path over
/// `k` points and splits the remaining time evenly between them.
pub fn solve_uniform_with(instance: &Instance, params: UniformParams, mode: TspMode) -> Result<SolveResult> {
    check_uniform(instance)?;
    if (params.beta - instance.false_negative[0]).abs() > UNIFORM_TOL || params.cost != instance.search_costs[0] {
        return Err(Error::InvalidArgument(
            "uniform parameters disagree with the instance".into(),
        ));
    }
    let n = instance.len();
    let budget = (1.0 + params.epsilon) * instance.budget;
    let paths = match mode.resolve(n) {
        TspMode::Exact => {
            if n > EXACT_MAX_POINTS {
                return Err(Error::LimitExceeded(format!(
                    "exact k-path oracle supports at most {EXACT_MAX_POINTS} points, got {n}"
                )));
            }
            exact_k_paths(instance, budget)
        }
        _ => heuristic_k_paths(instance),
    };

    let mut best: Option<(f64, usize, Schedule, f64)> = None;
    for (k, path) in paths.into_iter().enumerate().map(|(i, p)| (i + 1, p)) {
        let Some((path, len)) = path else {
            continue;
        };
        let residual = budget - len;
        if residual < 0.0 {
            continue;
        }
        let total = floor_tol(residual / params.cost as f64) as u64;
        let counts: Vec<u32> = allocate_equal(total, k)
            .into_iter()
            .map(|c| u32::try_from(c).unwrap_or(u32::MAX))
            .collect();
        let mut counts_all = vec![0u32; n];
        for (&p, &c) in path.iter().zip(&counts) {
            counts_all[p] = c;
        }
        let schedule = Schedule::from_counts(&path, &counts_all);
        let probability = crate::model::probability_from_counts(instance, &counts_all);
        if best.as_ref().is_none_or(|b| probability > b.0) {
            best = Some((probability, k, schedule, len));
        }
    }
    let slack = params.epsilon * instance.budget;
    match best {
        Some((_, k, schedule, len)) => Ok(SolveResult::new(instance, schedule, "uniform", slack)?
            .with_param("k", k)
            .with_param("path_length", len)
            .with_param("epsilon", params.epsilon)),
        None => {
            let mut r = SolveResult::empty("uniform");
            r.slack = slack;
            Ok(r.with_param("epsilon", params.epsilon))
        }
    }
}

/// Shortest open path over exactly `k` points, for each `k`; subsets whose
/// path exceeds `bound` are skipped.
fn exact_k_paths(instance: &Instance, bound: f64) -> Vec<Option<(Vec<usize>, f64)>> {
    let n = instance.len();
    let table = PathTable::new(&instance.points, bound);
    let mut best: Vec<Option<(u32, f64)>> = vec![None; n];
    for mask in 1u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        if let Some((len, _)) = table.best(mask) {
            if best[k - 1].is_none_or(|(_, b)| len < b) {
                best[k - 1] = Some((mask, len));
            }
        }
    }
    best.into_iter()
        .map(|b| b.map(|(mask, len)| (table.path(mask).expect("mask was solved"), len)))
        .collect()
}

/// Shortest window of `k` consecutive points along any of the 2-opt paths.
fn heuristic_k_paths(instance: &Instance) -> Vec<Option<(Vec<usize>, f64)>> {
    let n = instance.len();
    let pts = &instance.points;
    let mut best: Vec<Option<(Vec<usize>, f64)>> = vec![None; n];
    for path in two_opt_paths(pts) {
        for k in 1..=n {
            for start in 0..=n - k {
                let window = &path[start..start + k];
                let len = path_length(pts, window.iter().copied());
                if best[k - 1].as_ref().is_none_or(|(_, b)| len < *b) {
                    best[k - 1] = Some((window.to_vec(), len));
                }
            }
        }
    }
    best
}
