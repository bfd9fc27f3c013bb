//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use impsearch::rng::{stream, StreamRng};
use impsearch::{Instance, Point};
use rand::seq::index::sample;
use rand::Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn rng(seed: u64, index: u64) -> StreamRng {
    stream(seed, index)
}

/// Random probability vector with every entry positive.
pub fn priors(n: usize, rng: &mut StreamRng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// `n` distinct cells of the `side x side` integer grid.
pub fn grid_points(n: usize, side: u32, rng: &mut StreamRng) -> Vec<Point> {
    let cells = ((side + 1) * (side + 1)) as usize;
    sample(rng, cells, n)
        .into_iter()
        .map(|c| Point::new((c as u32 % (side + 1)) as f64, (c as u32 / (side + 1)) as f64))
        .collect()
}

/// `n` distinct integer points on a horizontal, vertical or diagonal line
/// through the `side x side` grid.
pub fn collinear_points(n: usize, side: u32, rng: &mut StreamRng) -> Vec<Point> {
    let along: Vec<usize> = sample(rng, side as usize + 1, n).into_vec();
    let offset = rng.random_range(0..=side) as f64;
    let kind = rng.random_range(0..3);
    along
        .into_iter()
        .map(|t| {
            let t = t as f64;
            match kind {
                0 => Point::new(t, offset),
                1 => Point::new(offset, t),
                _ => Point::new(t, t),
            }
        })
        .collect()
}

pub struct Shape {
    pub max_n: usize,
    pub collinear: bool,
    pub uniform: bool,
    pub max_budget: u32,
}

/// Instance on the 10x10 grid with costs in {1, 2, 3} and budget at most
/// `max_budget`. Uniform shapes share one prior, rate and cost. Budgets are
/// integers on even indices and carry a fraction otherwise.
pub fn instance(shape: &Shape, seed: u64, index: u64) -> Instance {
    let mut r = rng(seed, index);
    let n = r.random_range(1..=shape.max_n);
    let points = if shape.collinear {
        collinear_points(n, 10, &mut r)
    } else {
        grid_points(n, 10, &mut r)
    };
    let (beta, costs) = if shape.uniform {
        let b = r.random_range(0.05..0.95);
        let c = r.random_range(1..=3u32);
        (vec![b; n], vec![c; n])
    } else {
        (
            (0..n).map(|_| r.random_range(0.05..0.95)).collect(),
            (0..n).map(|_| r.random_range(1..=3u32)).collect(),
        )
    };
    let mut budget = r.random_range(1..=shape.max_budget) as f64;
    if index % 2 == 1 && budget >= 1.0 {
        budget -= r.random_range(0.0..1.0);
    }
    let p = if shape.uniform { vec![1.0 / n as f64; n] } else { priors(n, &mut r) };
    Instance::new(points, p, beta, costs, budget).expect("generated instance is valid")
}
