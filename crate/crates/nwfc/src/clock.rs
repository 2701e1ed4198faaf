//! Wall-clock monitor for the solver.

use std::time::{Duration, Instant};

use nwfc_core::Monitor;

/// Reports elapsed time since creation and asks the solver to stop once an
/// optional limit has passed.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    start: Instant,
    limit: Option<Duration>,
}

impl Deadline {
    pub fn new(limit: Option<Duration>) -> Self {
        Self { start: Instant::now(), limit }
    }

    pub fn unlimited() -> Self {
        Self::new(None)
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn expired(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() >= l)
    }
}

impl Monitor for Deadline {
    fn now_ns(&self) -> u64 {
        u64::try_from(self.start.elapsed().as_nanos()).unwrap_or(u64::MAX)
    }

    fn should_stop(&self) -> bool {
        self.expired()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_limit_stops_immediately() {
        assert!(Deadline::new(Some(Duration::ZERO)).should_stop());
        assert!(!Deadline::unlimited().should_stop());
        assert!(!Deadline::new(Some(Duration::from_secs(3600))).should_stop());
    }

    #[test]
    fn zero_limit_turns_solve_into_budget_exceeded() {
        use nwfc_core::solver::{solve_with, Rules, SolveJob};
        use nwfc_core::{BoundarySpec, SolveOutcome, WeightField};
        let ts = nwfc_core::tileset::carcassonne();
        let rules = Rules::new(&ts);
        let job = SolveJob {
            width: 30,
            height: 30,
            boundary: &BoundarySpec::none(),
            weights: &WeightField::neutral(),
            origin: (0, 0),
            seed: 1,
            budget: u64::MAX,
        };
        let out = solve_with(&rules, &job, &Deadline::new(Some(Duration::ZERO))).unwrap();
        assert!(matches!(out, SolveOutcome::BudgetExceeded(_)));
    }
}
