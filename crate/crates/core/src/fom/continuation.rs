use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom::newton::{newton_solve, NewtonConfig};
use crate::fom::FomProblem;

/// Uniform pseudo-time stepping from `t_start` to `t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSchedule {
    pub t_start: f64,
    pub t_end: f64,
    pub step: f64,
}

impl ContinuationSchedule {
    pub fn new(t_start: f64, t_end: f64, step: f64) -> Result<Self> {
        let s = Self { t_start, t_end, step };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.t_end > self.t_start) {
            return Err(Error::Config("schedule needs step > 0 and t_end > t_start".into()));
        }
        let n = (self.t_end - self.t_start) / self.step;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::Config(format!("(t_end - t_start) / step = {n} is not a whole number")));
        }
        Ok(())
    }

    pub fn num_steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.step).round() as usize
    }

    /// End time of each step; the initial time is excluded.
    pub fn times(&self) -> Vec<f64> {
        (1..=self.num_steps())
            .map(|i| self.t_start + i as f64 * self.step)
            .collect()
    }
}

/// Converged states of a continuation run, one per step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub newton_iterations: Vec<usize>,
}

/// Solves every step, warm-starting each from the previous converged state.
pub fn run_continuation<P: FomProblem + ?Sized>(
    problem: &P,
    schedule: &ContinuationSchedule,
    newton: &NewtonConfig,
) -> Result<Trajectory> {
    schedule.validate()?;
    let mut w = problem.initial_state();
    let times = schedule.times();
    let mut states = Vec::with_capacity(times.len());
    let mut newton_iterations = Vec::with_capacity(times.len());
    for &t in &times {
        let out = newton_solve(problem, t, &w, newton).map_err(|e| Error::ContinuationFailed {
            t,
            source: Box::new(e),
        })?;
        log::debug!("t = {t}: {} Newton iterations, |r| = {:e}", out.iterations, out.residual_norm);
        w = out.state;
        states.push(w.clone());
        newton_iterations.push(out.iterations);
    }
    Ok(Trajectory {
        times,
        states,
        newton_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_counts_steps() {
        let s = ContinuationSchedule::new(0.0, 720.0, 1.0).unwrap();
        assert_eq!(s.num_steps(), 720);
        let s = ContinuationSchedule::new(0.0, 1.0, 0.05).unwrap();
        assert_eq!(s.num_steps(), 20);
        assert!((s.times()[19] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fractional_step_count_rejected() {
        assert!(ContinuationSchedule::new(0.0, 1.0, 0.3).is_err());
        assert!(ContinuationSchedule::new(0.0, 1.0, 0.0).is_err());
    }
}
