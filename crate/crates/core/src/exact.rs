//! Exhaustive solver for small instances, and the knapsack construction used
//! to generate hard 1D inputs.
//!
//! An optimal schedule never revisits a point, so it is a shortest open path
//! over the set of searched points plus an allocation of the leftover time.
//! [`solve_exact`] enumerates every subset, takes its shortest path from a
//! Held-Karp table and solves the allocation as an integer knapsack.

use serde::{Deserialize, Serialize};

use crate::deadline::Deadline;
use crate::dp::{floor_tol, Instance1D};
use crate::error::{Error, Result};
use crate::heuristics::tsp::PathTable;
use crate::model::{Instance, Schedule, SolveResult, FEASIBILITY_TOL};

/// Held-Karp tables are indexed by `u32` masks and hold `2^n * n` entries.
const HARD_MAX_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactLimits {
    pub max_points: usize,
    /// Largest number of integer budget values the allocation DP may index.
    pub max_scaled_budget: u64,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_points: 10,
            max_scaled_budget: 100_000,
        }
    }
}

pub fn solve_exact(instance: &Instance, limits: ExactLimits) -> Result<SolveResult> {
    solve_exact_until(instance, limits, &Deadline::none())
}

/// Subsets are scanned by size, then lexicographically; a later subset only
/// replaces the incumbent if it is strictly better.
pub fn solve_exact_until(instance: &Instance, limits: ExactLimits, deadline: &Deadline) -> Result<SolveResult> {
    let n = instance.len();
    if instance.has_false_positives() {
        return Err(Error::InvalidArgument("exact solver assumes no false positives".into()));
    }
    if n > limits.max_points.min(HARD_MAX_POINTS) {
        return Err(Error::LimitExceeded(format!(
            "exact solver handles at most {} points, got {n}",
            limits.max_points.min(HARD_MAX_POINTS)
        )));
    }
    let budget = instance.budget;
    let max_units = floor_tol(budget.max(0.0));
    if max_units + 1.0 > limits.max_scaled_budget as f64 {
        return Err(Error::LimitExceeded(format!(
            "budget {budget} needs {} allocation cells, limit is {}",
            max_units + 1.0,
            limits.max_scaled_budget
        )));
    }
    if n == 0 {
        return Ok(SolveResult::empty("exact"));
    }

    let table = PathTable::new(&instance.points, budget + FEASIBILITY_TOL);
    let mut best_probability = 0.0;
    let mut best = Schedule::empty();
    let mut evaluated = 0u64;
    for mask in subsets_in_order(n) {
        if deadline.expired() {
            return Err(Error::TimedOut { best: None });
        }
        let Some((len, _)) = table.best(mask) else {
            continue;
        };
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let units = floor_tol(budget - len).max(0.0) as u64;
        // with too little time for one search each, a smaller subset does as well
        if units < members.iter().map(|&i| u64::from(instance.search_costs[i])).sum::<u64>() {
            continue;
        }
        evaluated += 1;
        let (probability, counts) = allocate(instance, &members, units);
        if probability > best_probability {
            best_probability = probability;
            let path = table.path(mask).expect("subset has a path");
            let mut counts_all = vec![0u32; n];
            for (&m, &c) in members.iter().zip(&counts) {
                counts_all[m] = c;
            }
            best = Schedule::from_counts(&path, &counts_all);
        }
    }
    Ok(SolveResult::new(instance, best, "exact", 0.0)?.with_param("subsets", evaluated))
}

/// Nonempty subsets of `0..n` as bitmasks, ordered by size and then by their
/// sorted index lists.
fn subsets_in_order(n: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (1u32..(1u32 << n)).collect();
    masks.sort_by_key(|&m| {
        let idx: Vec<u32> = (0..n as u32).filter(|&i| m & (1 << i) != 0).collect();
        (m.count_ones(), idx)
    });
    masks
}

/// Best split of `units` integer time among `members`, maximizing
/// `sum (1 - beta^s) p`. Returns the probability and the per-member counts.
fn allocate(instance: &Instance, members: &[usize], units: u64) -> (f64, Vec<u32>) {
    let width = units as usize + 1;
    let mut value = vec![0.0f64; width];
    let mut choice = vec![0u32; members.len() * width];
    for (row, &i) in members.iter().enumerate() {
        let c = instance.search_costs[i] as usize;
        let (beta, prior) = (instance.false_negative[i], instance.priors[i]);
        let prev = value.clone();
        for t in 0..width {
            let mut best = prev[t];
            let mut arg = 0u32;
            let mut miss = 1.0;
            let mut j = 1usize;
            while j * c <= t {
                miss *= beta;
                let cand = prev[t - j * c] + (1.0 - miss) * prior;
                if cand > best {
                    best = cand;
                    arg = j as u32;
                }
                j += 1;
            }
            value[t] = best;
            choice[row * width + t] = arg;
        }
    }
    let mut counts = vec![0u32; members.len()];
    let mut t = units as usize;
    for row in (0..members.len()).rev() {
        let j = choice[row * width + t];
        counts[row] = j;
        t -= j as usize * instance.search_costs[members[row]] as usize;
    }
    (value[units as usize], counts)
}

/// A 0/1 knapsack instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackItems {
    pub profits: Vec<u64>,
    pub weights: Vec<u64>,
    pub capacity: u64,
}

impl KnapsackItems {
    pub fn new(profits: Vec<u64>, weights: Vec<u64>, capacity: u64) -> Result<Self> {
        if profits.is_empty() || profits.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "profits and weights must be nonempty and of equal length".into(),
            ));
        }
        if profits.contains(&0) || weights.contains(&0) {
            return Err(Error::InvalidArgument("profits and weights must be positive".into()));
        }
        if weights.iter().any(|&w| w > u64::from(u32::MAX)) {
            return Err(Error::InvalidArgument("weight does not fit a search cost".into()));
        }
        Ok(KnapsackItems {
            profits,
            weights,
            capacity,
        })
    }

    pub fn len(&self) -> usize {
        self.profits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profits.is_empty()
    }
}

/// Item `i` (1-based) becomes the point `i / 2n` with search cost `w_i` and
/// prior `p_i / sum p`; searches are perfect and the budget is `B + 1/2`.
/// All points fit within half a unit, so travel never buys an extra search.
pub fn knapsack_to_instance(items: &KnapsackItems) -> Result<Instance1D> {
    let n = items.len();
    let total: u64 = items.profits.iter().sum();
    Instance1D::new(
        (1..=n).map(|i| i as f64 / (2 * n) as f64).collect(),
        items.profits.iter().map(|&p| p as f64 / total as f64).collect(),
        vec![0.0; n],
        items.weights.iter().map(|&w| w as u32).collect(),
        items.capacity as f64 + 0.5,
    )
}

/// Maximum total profit of items fitting the capacity, and the first
/// maximizing item set in bitmask order.
pub fn brute_force_knapsack(items: &KnapsackItems) -> (u64, Vec<usize>) {
    let n = items.len();
    assert!(n < 32, "brute force over {n} items is too large");
    let mut best = (0u64, 0u32);
    for mask in 0u32..(1u32 << n) {
        let (mut p, mut w) = (0u64, 0u64);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                p += items.profits[i];
                w += items.weights[i];
            }
        }
        if w <= items.capacity && p > best.0 {
            best = (p, mask);
        }
    }
    (best.0, (0..n).filter(|&i| best.1 & (1 << i) != 0).collect())
}

/// Solves the constructed instance exactly and checks that the searched
/// points form an optimal knapsack packing.
pub fn verify_reduction(items: &KnapsackItems) -> Result<bool> {
    let line = knapsack_to_instance(items)?;
    let instance = line.to_instance()?;
    let limits = ExactLimits {
        max_points: items.len(),
        ..ExactLimits::default()
    };
    let result = solve_exact(&instance, limits)?;
    let visited: Vec<usize> = result.schedule.visits.iter().map(|v| v.point).collect();
    let profit: u64 = visited.iter().map(|&i| items.profits[i]).sum();
    let weight: u64 = visited.iter().map(|&i| items.weights[i]).sum();
    let (optimum, _) = brute_force_knapsack(items);
    let total: u64 = items.profits.iter().sum();
    Ok(profit == optimum
        && weight <= items.capacity
        && (result.probability - optimum as f64 / total as f64).abs() <= 1e-9)
}
