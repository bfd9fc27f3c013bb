//! Pseudopolynomial dynamic programs.
//!
//! [`solve_1d`] handles points on a line: an optimal schedule sweeps from its
//! leftmost to its rightmost searched point, so after fixing the two ends the
//! problem is an unbounded-knapsack style allocation of the remaining integer
//! search budget.
//!
//! [`solve_ordered`] handles planar points that must be searched in a given
//! order (skipping is allowed). Time is discretized into `C` ticks per unit
//! and each hop's search-plus-travel cost is rounded up to whole ticks.

use crate::deadline::Deadline;
use crate::error::{Error, Result};
use crate::model::{diameter, Instance, Point, Schedule, SolveResult, Visit};

/// Slack applied before rounding budgets, so values such as `2.9999999999`
/// that stem from floating-point travel sums round as intended.
const ROUND_TOL: f64 = 1e-9;

/// Dense ordered-DP tables larger than this many cells switch to the
/// frontier representation.
const DENSE_CELL_LIMIT: u64 = 20_000_000;

pub(crate) fn floor_tol(x: f64) -> f64 {
    (x + ROUND_TOL).floor()
}

pub(crate) fn ceil_tol(x: f64) -> f64 {
    (x - ROUND_TOL).ceil()
}

fn gain(beta: f64, prior: f64, searches: u32) -> f64 {
    (1.0 - beta.powi(searches as i32)) * prior
}

/// Points on a line, given by strictly increasing coordinates. No false
/// positives.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance1D {
    pub positions: Vec<f64>,
    pub priors: Vec<f64>,
    pub false_negative: Vec<f64>,
    pub search_costs: Vec<u32>,
    pub budget: f64,
}

impl Instance1D {
    pub fn new(
        positions: Vec<f64>,
        priors: Vec<f64>,
        false_negative: Vec<f64>,
        search_costs: Vec<u32>,
        budget: f64,
    ) -> Result<Self> {
        let inst = Instance1D {
            positions,
            priors,
            false_negative,
            search_costs,
            budget,
        };
        inst.to_instance()?;
        if let Some(w) = inst.positions.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                format!("positions[{}]", w + 1),
                "positions must be strictly increasing",
            ));
        }
        Ok(inst)
    }

    /// Embeds the line as the x-axis of the plane.
    pub fn to_instance(&self) -> Result<Instance> {
        Instance::new(
            self.positions.iter().map(|&x| Point::new(x, 0.0)).collect(),
            self.priors.clone(),
            self.false_negative.clone(),
            self.search_costs.clone(),
            self.budget,
        )
    }

    /// Projects a collinear planar instance onto its line. Also returns, for
    /// each 1D index, the index of the original point.
    pub fn from_instance(instance: &Instance) -> Result<(Instance1D, Vec<usize>)> {
        if instance.has_false_positives() {
            return Err(Error::InvalidArgument("1D solver assumes no false positives".into()));
        }
        let n = instance.len();
        let pts = &instance.points;
        // direction from the first point to the farthest one
        let far = (0..n)
            .max_by(|&a, &b| pts[0].distance(&pts[a]).total_cmp(&pts[0].distance(&pts[b])))
            .unwrap_or(0);
        let span = pts[0].distance(&pts[far]);
        let (ux, uy) = if span > 0.0 {
            ((pts[far].x - pts[0].x) / span, (pts[far].y - pts[0].y) / span)
        } else {
            (1.0, 0.0)
        };
        let scale = span.max(1.0);
        let mut projected = Vec::with_capacity(n);
        for (i, p) in pts.iter().enumerate() {
            let (dx, dy) = (p.x - pts[0].x, p.y - pts[0].y);
            let offset = dx * uy - dy * ux;
            if offset.abs() > 1e-9 * scale {
                return Err(Error::NotCollinear(format!("point {i} lies {offset} off the line")));
            }
            projected.push((dx * ux + dy * uy, i));
        }
        projected.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let order: Vec<usize> = projected.iter().map(|&(_, i)| i).collect();
        let positions: Vec<f64> = projected.iter().map(|&(x, _)| x).collect();
        let inst = Instance1D::new(
            positions,
            order.iter().map(|&i| instance.priors[i]).collect(),
            order.iter().map(|&i| instance.false_negative[i]).collect(),
            order.iter().map(|&i| instance.search_costs[i]).collect(),
            instance.budget,
        )
        .map_err(|e| match e {
            Error::InvalidInstance { message, .. } => Error::NotCollinear(format!("duplicate points: {message}")),
            other => other,
        })?;
        Ok((inst, order))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Mirror image: coordinates negated and order reversed.
    pub fn mirrored(&self) -> Instance1D {
        let rev = |v: &Vec<f64>| v.iter().rev().copied().collect::<Vec<_>>();
        Instance1D {
            positions: self.positions.iter().rev().map(|x| -x).collect(),
            priors: rev(&self.priors),
            false_negative: rev(&self.false_negative),
            search_costs: self.search_costs.iter().rev().copied().collect(),
            budget: self.budget,
        }
    }
}

/// Ticks per unit of time for the ordered DP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscretizationConfig {
    ticks_per_unit: u64,
}

impl DiscretizationConfig {
    pub fn new(ticks_per_unit: u64) -> Result<Self> {
        if ticks_per_unit == 0 {
            return Err(Error::InvalidArgument("discretization C must be at least 1".into()));
        }
        Ok(DiscretizationConfig { ticks_per_unit })
    }

    pub fn ticks_per_unit(&self) -> u64 {
        self.ticks_per_unit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DpTableMeta {
    /// Scaled budget the table is indexed up to.
    pub tau: u64,
    pub cells_filled: u64,
    /// Rough bytes held by the tables at their peak.
    pub peak_memory_estimate: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSolution {
    pub probability: f64,
    /// Searches for each point `l..=r`.
    pub allocation: Vec<u32>,
    pub meta: DpTableMeta,
}

/// Best allocation for a sweep that may search only points `l..=r`
/// (inclusive, zero-based), after paying the travel between `l` and `r`.
///
/// Returns `Ok(None)` when the budget does not cover that travel.
pub fn solve_segment_1d(instance: &Instance1D, l: usize, r: usize) -> Result<Option<SegmentSolution>> {
    let n = instance.len();
    if l > r || r >= n {
        return Err(Error::InvalidArgument(format!("segment ({l}, {r}) invalid for {n} points")));
    }
    let search_budget = floor_tol(instance.budget - (instance.positions[r] - instance.positions[l]));
    if search_budget < 0.0 {
        return Ok(None);
    }
    let tau = search_budget as usize;
    let width = r - l + 1;

    let mut prev = vec![0.0f64; tau + 1];
    let mut cur = vec![0.0f64; tau + 1];
    let mut choice = vec![0u32; width * (tau + 1)];
    for i in l..=r {
        let cost = instance.search_costs[i] as usize;
        let (beta, prior) = (instance.false_negative[i], instance.priors[i]);
        let gains: Vec<f64> = (0..=tau / cost).map(|j| gain(beta, prior, j as u32)).collect();
        let row = &mut choice[(i - l) * (tau + 1)..(i - l + 1) * (tau + 1)];
        for t in 0..=tau {
            let mut best = prev[t];
            let mut best_j = 0;
            for (j, g) in gains.iter().enumerate().take(t / cost + 1).skip(1) {
                let cand = prev[t - j * cost] + g;
                if cand > best {
                    best = cand;
                    best_j = j;
                }
            }
            cur[t] = best;
            row[t] = best_j as u32;
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let mut allocation = vec![0u32; width];
    let mut t = tau;
    for i in (l..=r).rev() {
        let j = choice[(i - l) * (tau + 1) + t];
        allocation[i - l] = j;
        t -= j as usize * instance.search_costs[i] as usize;
    }
    let cells = (width * (tau + 1)) as u64;
    Ok(Some(SegmentSolution {
        probability: prev[tau],
        allocation,
        meta: DpTableMeta {
            tau: tau as u64,
            cells_filled: cells,
            peak_memory_estimate: 2 * (tau as u64 + 1) * 8 + cells * 4,
        },
    }))
}

/// Exact solver for points on a line. Indices in the result refer to
/// `instance.to_instance()`.
pub fn solve_1d(instance: &Instance1D) -> Result<SolveResult> {
    solve_1d_until(instance, &Deadline::none())
}

pub fn solve_1d_until(instance: &Instance1D, deadline: &Deadline) -> Result<SolveResult> {
    let planar = instance.to_instance()?;
    let n = instance.len();
    let mut best: Option<(f64, usize, Vec<u32>)> = None;
    let mut cells = 0u64;
    for l in 0..n {
        for r in l..n {
            if deadline.expired() {
                return Err(Error::TimedOut { best: None });
            }
            let Some(seg) = solve_segment_1d(instance, l, r)? else {
                continue;
            };
            cells += seg.meta.cells_filled;
            if best.as_ref().is_none_or(|(p, _, _)| seg.probability > *p) {
                best = Some((seg.probability, l, seg.allocation));
            }
        }
    }
    let schedule = match best {
        Some((_, l, allocation)) => Schedule::new(
            allocation
                .iter()
                .enumerate()
                .filter(|(_, &s)| s > 0)
                .map(|(k, &s)| Visit::new(l + k, s))
                .collect(),
        ),
        None => Schedule::empty(),
    };
    Ok(SolveResult::new(&planar, schedule, "dp1d", 0.0)?.with_param("cells", cells))
}

/// `C = ceil(n * diameter / epsilon)`: rounding every hop up to this grid
/// adds at most `epsilon` to any schedule's total time.
pub fn choose_discretization(instance: &Instance, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let delta = diameter(&instance.points);
    if delta == 0.0 {
        return Ok(1);
    }
    let c = (instance.len() as f64 * delta / epsilon).ceil();
    if c > 1e15 {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} needs an unreasonable C = {c}")));
    }
    Ok(c.max(1.0) as u64)
}

/// Optimal schedule among those that search points in the order given by
/// `ordering` (a permutation of all point indices).
pub fn solve_ordered(instance: &Instance, ordering: &[usize], config: DiscretizationConfig) -> Result<SolveResult> {
    solve_ordered_until(instance, ordering, config, &Deadline::none())
}

pub fn solve_ordered_until(
    instance: &Instance,
    ordering: &[usize],
    config: DiscretizationConfig,
    deadline: &Deadline,
) -> Result<SolveResult> {
    let problem = OrderedProblem::new(instance, ordering, config)?;
    let cells = instance.len() as u64 * (problem.tau + 1);
    let (visits, meta) = if cells <= DENSE_CELL_LIMIT {
        problem.solve_dense(deadline)?
    } else {
        problem.solve_frontier(deadline)?
    };
    let schedule = Schedule::new(visits);
    let slack = problem.slack(config);
    Ok(SolveResult::new(instance, schedule, "ordered", slack)?
        .with_param("C", config.ticks_per_unit())
        .with_param("tau", meta.tau)
        .with_param("cells", meta.cells_filled))
}

/// Same DP, always on the dense `n x tau` table.
pub fn solve_ordered_dense(
    instance: &Instance,
    ordering: &[usize],
    config: DiscretizationConfig,
) -> Result<(SolveResult, DpTableMeta)> {
    let problem = OrderedProblem::new(instance, ordering, config)?;
    let (visits, meta) = problem.solve_dense(&Deadline::none())?;
    let slack = problem.slack(config);
    Ok((SolveResult::new(instance, Schedule::new(visits), "ordered", slack)?, meta))
}

/// Same DP, on Pareto frontiers of (ticks, probability) per point. Memory
/// does not grow with `C`.
pub fn solve_ordered_frontier(
    instance: &Instance,
    ordering: &[usize],
    config: DiscretizationConfig,
) -> Result<(SolveResult, DpTableMeta)> {
    let problem = OrderedProblem::new(instance, ordering, config)?;
    let (visits, meta) = problem.solve_frontier(&Deadline::none())?;
    let slack = problem.slack(config);
    Ok((SolveResult::new(instance, Schedule::new(visits), "ordered", slack)?, meta))
}

struct OrderedProblem<'a> {
    instance: &'a Instance,
    ordering: &'a [usize],
    tau: u64,
    /// `hops[i][j - 1][k]`: ticks to search ordered point `i` (1-based, as
    /// in the table rows) `j` times after last searching row `k`, where row
    /// 0 is the free start.
    hops: Vec<Vec<Vec<u64>>>,
}

impl<'a> OrderedProblem<'a> {
    fn new(instance: &'a Instance, ordering: &'a [usize], config: DiscretizationConfig) -> Result<Self> {
        let n = instance.len();
        if instance.has_false_positives() {
            return Err(Error::InvalidArgument("ordered DP assumes no false positives".into()));
        }
        let mut seen = vec![false; n];
        if ordering.len() != n {
            return Err(Error::InvalidArgument(format!(
                "ordering has {} entries, expected a permutation of {n}",
                ordering.len()
            )));
        }
        for &i in ordering {
            instance.check_index(i)?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("ordering repeats point {i}")));
            }
        }
        let c = config.ticks_per_unit() as f64;
        let tau = ceil_tol(instance.budget * c).max(0.0) as u64;
        let mut hops = vec![Vec::new()];
        for i in 1..=n {
            let point = ordering[i - 1];
            let cost = instance.search_costs[point] as f64;
            let mut per_j = Vec::new();
            for j in 1u64.. {
                let row: Vec<u64> = (0..i)
                    .map(|k| {
                        let d = if k == 0 { 0.0 } else { instance.distance(point, ordering[k - 1]) };
                        ceil_tol((j as f64 * cost + d) * c) as u64
                    })
                    .collect();
                // travel only adds to the cost, so the k = 0 hop is the cheapest
                if row[0] > tau {
                    break;
                }
                per_j.push(row);
            }
            hops.push(per_j);
        }
        Ok(OrderedProblem {
            instance,
            ordering,
            tau,
            hops,
        })
    }

    /// Budget overrun the rounding can introduce: the scaled budget may
    /// round up, and hop costs are rounded with a tiny tolerance.
    fn slack(&self, config: DiscretizationConfig) -> f64 {
        let c = config.ticks_per_unit() as f64;
        (self.tau as f64 / c - self.instance.budget).max(0.0) + self.instance.len() as f64 * ROUND_TOL / c
    }

    fn gain(&self, row: usize, searches: usize) -> f64 {
        let point = self.ordering[row - 1];
        gain(
            self.instance.false_negative[point],
            self.instance.priors[point],
            searches as u32,
        )
    }

    fn solve_dense(&self, deadline: &Deadline) -> Result<(Vec<Visit>, DpTableMeta)> {
        let n = self.instance.len();
        let width = self.tau as usize + 1;
        let mut value = vec![f64::NEG_INFINITY; (n + 1) * width];
        let mut choice = vec![(0u32, 0u32); (n + 1) * width];
        value[..width].fill(0.0);

        for i in 1..=n {
            if deadline.expired() {
                return Err(Error::TimedOut { best: None });
            }
            let gains: Vec<f64> = (1..=self.hops[i].len()).map(|j| self.gain(i, j)).collect();
            for t in 0..width {
                let mut best = f64::NEG_INFINITY;
                let mut arg = (0u32, 0u32);
                for (jm1, row) in self.hops[i].iter().enumerate() {
                    if row[0] as usize > t {
                        break;
                    }
                    for (k, &h) in row.iter().enumerate() {
                        let h = h as usize;
                        if h > t {
                            continue;
                        }
                        let prev = value[k * width + t - h];
                        if prev == f64::NEG_INFINITY {
                            continue;
                        }
                        let cand = prev + gains[jm1];
                        if cand > best {
                            best = cand;
                            arg = (jm1 as u32 + 1, k as u32);
                        }
                    }
                }
                value[i * width + t] = best;
                choice[i * width + t] = arg;
            }
        }

        let tau = self.tau as usize;
        let mut best = (0.0, 0usize);
        for i in 1..=n {
            if value[i * width + tau] > best.0 {
                best = (value[i * width + tau], i);
            }
        }
        let mut visits = Vec::new();
        let (mut i, mut t) = (best.1, tau);
        while i != 0 {
            let (j, k) = choice[i * width + t];
            visits.push(Visit::new(self.ordering[i - 1], j));
            t -= self.hops[i][j as usize - 1][k as usize] as usize;
            i = k as usize;
        }
        visits.reverse();
        let cells = ((n + 1) * width) as u64;
        Ok((
            visits,
            DpTableMeta {
                tau: self.tau,
                cells_filled: cells,
                peak_memory_estimate: cells * 16,
            },
        ))
    }

    fn solve_frontier(&self, deadline: &Deadline) -> Result<(Vec<Visit>, DpTableMeta)> {
        #[derive(Clone, Copy)]
        struct State {
            ticks: u64,
            value: f64,
            searches: u32,
            prev_row: u32,
            prev_state: u32,
        }
        let n = self.instance.len();
        let origin = State {
            ticks: 0,
            value: 0.0,
            searches: 0,
            prev_row: 0,
            prev_state: 0,
        };
        let mut frontiers: Vec<Vec<State>> = vec![vec![origin]];
        let mut states = 1u64;
        let mut peak = 0usize;
        for i in 1..=n {
            if deadline.expired() {
                return Err(Error::TimedOut { best: None });
            }
            let gains: Vec<f64> = (1..=self.hops[i].len()).map(|j| self.gain(i, j)).collect();
            let mut candidates = Vec::new();
            for (jm1, row) in self.hops[i].iter().enumerate() {
                for (k, &h) in row.iter().enumerate() {
                    for (s, st) in frontiers[k].iter().enumerate() {
                        let ticks = st.ticks + h;
                        if ticks > self.tau {
                            break;
                        }
                        candidates.push(State {
                            ticks,
                            value: st.value + gains[jm1],
                            searches: jm1 as u32 + 1,
                            prev_row: k as u32,
                            prev_state: s as u32,
                        });
                    }
                }
            }
            peak = peak.max(candidates.len());
            candidates.sort_by(|a, b| {
                a.ticks
                    .cmp(&b.ticks)
                    .then(b.value.total_cmp(&a.value))
                    .then(a.searches.cmp(&b.searches))
                    .then(a.prev_row.cmp(&b.prev_row))
            });
            let mut frontier: Vec<State> = Vec::new();
            for c in candidates {
                if frontier.last().is_none_or(|last| c.value > last.value) {
                    frontier.push(c);
                }
            }
            states += frontier.len() as u64;
            frontiers.push(frontier);
        }

        // each frontier only holds states within budget, best value last
        let mut best: (f64, usize) = (0.0, 0);
        for (i, f) in frontiers.iter().enumerate().skip(1) {
            if let Some(last) = f.last() {
                if last.value > best.0 {
                    best = (last.value, i);
                }
            }
        }
        let mut visits = Vec::new();
        let mut i = best.1;
        let mut s = frontiers[i].len().saturating_sub(1);
        while i != 0 {
            let st = frontiers[i][s];
            visits.push(Visit::new(self.ordering[i - 1], st.searches));
            i = st.prev_row as usize;
            s = st.prev_state as usize;
        }
        visits.reverse();
        Ok((
            visits,
            DpTableMeta {
                tau: self.tau,
                cells_filled: states,
                peak_memory_estimate: (states as usize + peak) as u64 * std::mem::size_of::<State>() as u64,
            },
        ))
    }
}
