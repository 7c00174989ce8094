use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom::{ContinuationSchedule, DofLayout, FomProblem, Trajectory};
use crate::linalg::io::{read_matrix, write_matrix};
use crate::linalg::DenseMatrix;

/// Sidecar of a snapshot matrix file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMetadata {
    pub layout: DofLayout,
    pub layout_hash: String,
    pub parameters: BTreeMap<String, f64>,
    pub schedule: ContinuationSchedule,
    pub times: Vec<f64>,
    pub initial_state: Vec<f64>,
}

/// Writes `<stem>.txt` (states as columns) and `<stem>.json`.
pub fn write_snapshots<P: FomProblem + ?Sized>(
    dir: &Path,
    stem: &str,
    problem: &P,
    schedule: &ContinuationSchedule,
    trajectory: &Trajectory,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let n = problem.layout().total_dofs();
    let data: Vec<f64> = trajectory.states.iter().flatten().copied().collect();
    write_matrix(&dir.join(format!("{stem}.txt")), &DenseMatrix::from_col_major(n, trajectory.states.len(), data)?)?;
    let meta = SnapshotMetadata {
        layout: problem.layout().clone(),
        layout_hash: problem.layout().hash(),
        parameters: problem.parameters(),
        schedule: schedule.clone(),
        times: trajectory.times.clone(),
        initial_state: problem.initial_state(),
    };
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Reads states (one per column) and their sidecar.
pub fn read_snapshots(dir: &Path, stem: &str) -> Result<(Vec<Vec<f64>>, SnapshotMetadata)> {
    let meta: SnapshotMetadata = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    let m = read_matrix(&dir.join(format!("{stem}.txt")))?;
    if m.rows() != meta.layout.total_dofs() || meta.layout.hash() != meta.layout_hash {
        return Err(Error::Parse(format!("snapshot file {stem} disagrees with its metadata")));
    }
    Ok((m.columns().map(|c| c.to_vec()).collect(), meta))
}
