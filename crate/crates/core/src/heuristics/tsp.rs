//! Open-path travelling salesman tools: Held-Karp over point subsets for
//! small inputs, and nearest-neighbour construction with 2-opt otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{path_length, Point};

/// Largest instance the exact path solver accepts.
pub const EXACT_MAX_POINTS: usize = 12;

const IMPROVEMENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TspMode {
    Exact,
    Heuristic,
    /// Exact up to [`EXACT_MAX_POINTS`] points, heuristic beyond.
    #[default]
    Auto,
}

impl TspMode {
    pub fn resolve(self, n: usize) -> TspMode {
        match self {
            TspMode::Auto if n <= EXACT_MAX_POINTS => TspMode::Exact,
            TspMode::Auto => TspMode::Heuristic,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourOrdering {
    pub order: Vec<usize>,
    pub path_length: f64,
}

/// Short open path through all points.
pub fn tsp_order(points: &[Point], mode: TspMode) -> Result<TourOrdering> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no points to order".into()));
    }
    let order = match mode.resolve(n) {
        TspMode::Exact => {
            if n > EXACT_MAX_POINTS {
                return Err(Error::LimitExceeded(format!(
                    "exact path ordering supports at most {EXACT_MAX_POINTS} points, got {n}"
                )));
            }
            let table = PathTable::new(points, f64::INFINITY);
            table.path((1u32 << n) - 1).expect("the full set always has a path")
        }
        _ => best_heuristic_path(points),
    };
    Ok(TourOrdering {
        path_length: path_length(points, order.iter().copied()),
        order,
    })
}

/// Minimum open-path length over every subset of points, with free
/// endpoints (Held-Karp). States whose partial path is longer than `bound`
/// are dropped; since extending a path never shortens it, every subset whose
/// shortest path fits within `bound` is still solved exactly.
#[derive(Debug, Clone)]
pub struct PathTable {
    n: usize,
    /// `len[mask * n + end]`
    len: Vec<f64>,
    parent: Vec<u8>,
}

impl PathTable {
    pub fn new(points: &[Point], bound: f64) -> Self {
        let n = points.len();
        assert!(n <= 20, "Held-Karp table over {n} points is too large");
        let full = 1usize << n;
        let mut len = vec![f64::INFINITY; full * n];
        let mut parent = vec![u8::MAX; full * n];
        for e in 0..n {
            len[(1 << e) * n + e] = 0.0;
        }
        for mask in 1..full {
            for e in 0..n {
                if mask & (1 << e) == 0 || mask == 1 << e {
                    continue;
                }
                let rest = mask ^ (1 << e);
                let mut best = f64::INFINITY;
                let mut arg = u8::MAX;
                for p in 0..n {
                    if rest & (1 << p) == 0 {
                        continue;
                    }
                    let cand = len[rest * n + p] + points[p].distance(&points[e]);
                    if cand < best {
                        best = cand;
                        arg = p as u8;
                    }
                }
                if best <= bound {
                    len[mask * n + e] = best;
                    parent[mask * n + e] = arg;
                }
            }
        }
        PathTable { n, len, parent }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Shortest path length over `mask` and the endpoint achieving it
    /// (smallest index on ties). `None` if the subset was pruned or empty.
    pub fn best(&self, mask: u32) -> Option<(f64, usize)> {
        let mask = mask as usize;
        let mut best: Option<(f64, usize)> = None;
        for e in 0..self.n {
            let l = self.len[mask * self.n + e];
            if mask & (1 << e) != 0 && l.is_finite() && best.is_none_or(|(b, _)| l < b) {
                best = Some((l, e));
            }
        }
        best
    }

    /// Shortest open path over `mask`, oriented so that it starts at the
    /// smaller of its two endpoints.
    pub fn path(&self, mask: u32) -> Option<Vec<usize>> {
        let (_, mut end) = self.best(mask)?;
        let mut mask = mask as usize;
        let mut path = vec![end];
        while mask != 1 << end {
            let p = self.parent[mask * self.n + end] as usize;
            mask ^= 1 << end;
            end = p;
            path.push(end);
        }
        path.reverse();
        if path.first() > path.last() {
            path.reverse();
        }
        Some(path)
    }
}

/// Nearest-neighbour path grown from `start`, nearest ties to the smaller index.
pub fn nearest_neighbor_path(points: &[Point], start: usize) -> Vec<usize> {
    let n = points.len();
    let mut used = vec![false; n];
    let mut path = Vec::with_capacity(n);
    let mut cur = start;
    used[cur] = true;
    path.push(cur);
    for _ in 1..n {
        let next = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                points[cur]
                    .distance(&points[a])
                    .total_cmp(&points[cur].distance(&points[b]))
                    .then(a.cmp(&b))
            })
            .expect("unvisited point remains");
        used[next] = true;
        path.push(next);
        cur = next;
    }
    path
}

/// Applies improving 2-opt moves until none is left. Moves include
/// reversing a prefix or suffix, since the path has free endpoints.
pub fn two_opt(points: &[Point], path: &mut [usize]) {
    let n = path.len();
    if n < 3 {
        return;
    }
    loop {
        let mut improved = false;
        // segment path[i..=j] is reversed
        for i in 0..n - 1 {
            for j in i + 1..n {
                let dist = |a: usize, b: usize| points[path[a]].distance(&points[path[b]]);
                let mut delta = 0.0;
                if i > 0 {
                    delta += dist(i - 1, j) - dist(i - 1, i);
                }
                if j + 1 < n {
                    delta += dist(i, j + 1) - dist(j, j + 1);
                }
                if delta < -IMPROVEMENT_EPS {
                    path[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Nearest neighbour from every start, each improved by 2-opt; shortest wins,
/// ties to the earlier start.
pub fn two_opt_paths(points: &[Point]) -> Vec<Vec<usize>> {
    (0..points.len())
        .map(|s| {
            let mut p = nearest_neighbor_path(points, s);
            two_opt(points, &mut p);
            p
        })
        .collect()
}

fn best_heuristic_path(points: &[Point]) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for p in two_opt_paths(points) {
        let l = path_length(points, p.iter().copied());
        if best.as_ref().is_none_or(|(b, _)| l < *b - IMPROVEMENT_EPS) {
            best = Some((l, p));
        }
    }
    let mut path = best.expect("at least one point").1;
    if path.first() > path.last() {
        path.reverse();
    }
    path
}
