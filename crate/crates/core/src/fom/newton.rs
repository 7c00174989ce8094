use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom::FomProblem;
use crate::linalg::{norm2, solve_direct};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    FullStep,
    Backtracking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub line_search: LineSearch,
    pub shrink: f64,
    pub min_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-10,
            max_iter: 25,
            line_search: LineSearch::Backtracking,
            shrink: 0.5,
            min_step: 1e-4,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config("Newton tolerances must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config("backtracking shrink must lie in (0, 1)".into()));
        }
        if !(self.min_step > 0.0 && self.min_step <= 1.0) {
            return Err(Error::Config("minimum step must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub state: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Newton's method on the extended system at pseudo-time `t`.
///
/// Prescribed values are written into the iterate before every residual
/// evaluation, so the returned state matches `g(t)` bitwise.
pub fn newton_solve<P: FomProblem + ?Sized>(
    problem: &P,
    t: f64,
    guess: &[f64],
    config: &NewtonConfig,
) -> Result<NewtonOutcome> {
    config.validate()?;
    let layout = problem.layout();
    if guess.len() != layout.total_dofs() {
        return Err(Error::dims(layout.total_dofs(), guess.len()));
    }
    let g = problem.dirichlet_values(t);
    let mut w = guess.to_vec();
    layout.impose_dbc(&mut w, &g);
    let mut r = problem.residual(&w, t)?;
    let mut rnorm = norm2(&r);
    let target = config.abs_tol.max(config.rel_tol * rnorm);
    let mut iterations = 0;
    loop {
        if rnorm <= target {
            return Ok(NewtonOutcome {
                state: w,
                iterations,
                residual_norm: rnorm,
            });
        }
        if iterations == config.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual: rnorm,
            });
        }
        let jac = problem.jacobian(&w, t)?;
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = solve_direct(&jac, &neg_r)?;
        iterations += 1;

        let mut alpha = 1.0;
        loop {
            let mut trial: Vec<f64> = w.iter().zip(&delta).map(|(wi, di)| wi + alpha * di).collect();
            layout.impose_dbc(&mut trial, &g);
            let accepted = match (problem.residual(&trial, t), config.line_search) {
                (Ok(rt), LineSearch::FullStep) => Some(rt),
                (Err(e), LineSearch::FullStep) => return Err(e),
                (Ok(rt), LineSearch::Backtracking) if norm2(&rt) < rnorm => Some(rt),
                (Ok(_), LineSearch::Backtracking) | (Err(Error::ElementInversion { .. }), LineSearch::Backtracking) => {
                    None
                }
                (Err(e), LineSearch::Backtracking) => return Err(e),
            };
            if let Some(rt) = accepted {
                w = trial;
                r = rt;
                rnorm = norm2(&r);
                break;
            }
            alpha *= config.shrink;
            if alpha < config.min_step {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: rnorm,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom::DofLayout;
    use crate::linalg::SparseMatrix;

    struct Cubic {
        layout: DofLayout,
    }

    impl FomProblem for Cubic {
        fn layout(&self) -> &DofLayout {
            &self.layout
        }
        fn initial_state(&self) -> Vec<f64> {
            vec![3.0]
        }
        fn dirichlet_values(&self, _t: f64) -> Vec<f64> {
            Vec::new()
        }
        fn residual(&self, w: &[f64], _t: f64) -> Result<Vec<f64>> {
            Ok(vec![w[0].powi(3) - 8.0])
        }
        fn jacobian_full(&self, w: &[f64], _t: f64) -> Result<SparseMatrix> {
            Ok(SparseMatrix::from_triplets(1, 1, &[(0, 0, 3.0 * w[0] * w[0])]))
        }
    }

    #[test]
    fn max_iter_reports_residual() {
        let p = Cubic {
            layout: DofLayout::unconstrained(1),
        };
        let cfg = NewtonConfig {
            max_iter: 1,
            ..Default::default()
        };
        match newton_solve(&p, 0.0, &[3.0], &cfg) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 1);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = NewtonConfig {
            shrink: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
