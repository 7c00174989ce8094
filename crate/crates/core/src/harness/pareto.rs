use serde::{Deserialize, Serialize};

use crate::precond::PreconditionerKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub kind: PreconditionerKind,
    pub m: usize,
    pub eps: f64,
    pub wall_seconds: f64,
}

impl ParetoPoint {
    /// No worse in both coordinates and strictly better in one.
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.eps <= other.eps
            && self.wall_seconds <= other.wall_seconds
            && (self.eps < other.eps || self.wall_seconds < other.wall_seconds)
    }
}

/// Non-dominated points in (error, wall time), sorted by wall time.
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut front: Vec<ParetoPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| q.dominates(p)))
        .cloned()
        .collect();
    front.sort_by(|a, b| {
        a.wall_seconds
            .total_cmp(&b.wall_seconds)
            .then(a.eps.total_cmp(&b.eps))
            .then(a.kind.cmp(&b.kind))
            .then(a.m.cmp(&b.m))
    });
    front
}
