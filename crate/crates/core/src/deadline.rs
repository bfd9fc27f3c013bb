use std::time::{Duration, Instant};

/// Cooperative time limit. Solvers poll it between DP rows or subsets.
#[derive(Debug, Clone, Copy, Default)]
pub struct Deadline {
    at: Option<Instant>,
}

impl Deadline {
    pub fn none() -> Self {
        Deadline { at: None }
    }

    pub fn after(limit: Duration) -> Self {
        Deadline {
            at: Some(Instant::now() + limit),
        }
    }

    pub fn after_secs(secs: f64) -> Self {
        Deadline::after(Duration::from_secs_f64(secs.max(0.0)))
    }

    pub fn expired(&self) -> bool {
        self.at.is_some_and(|at| Instant::now() >= at)
    }
}
