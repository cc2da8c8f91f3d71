use super::config::ExperimentConfig;
use super::runner::{simulate_window, Execution};
use crate::tracking::{argmax_track_with_truth, true_cell, TrackReport};
use crate::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub frame: u64,
    #[serde(flatten)]
    pub report: TrackReport,
    pub theta_x_true: f64,
    pub theta_y_true: f64,
    /// Whether the reported intervals contain the true AoA; unset for
    /// boundary frames.
    pub correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRun {
    pub version: String,
    pub config: ExperimentConfig,
    pub frames: u64,
    pub boundary_frames: u64,
    /// Fraction of non-boundary frames whose reported cell was correct.
    pub correct_rate: f64,
    pub records: Vec<TrackRecord>,
}

/// Blind argmax tracking over `n_frames` simulated windows.
pub fn run_track(cfg: &ExperimentConfig, exec: Execution) -> Result<TrackRun> {
    let point = ExperimentConfig { sweep: None, ..cfg.clone() };
    point.validate()?;
    let derived = point.derive()?;
    let chunks = exec.map_chunks(point.n_frames as u64, |range| -> Result<Vec<TrackRecord>> {
        range
            .map(|index| {
                let (ch, frame) = simulate_window(&point, &derived, index)?;
                let report = argmax_track_with_truth(&frame, &point.array, ch.theta_x, ch.theta_y)?;
                let correct = true_cell(ch.theta_x, ch.theta_y, &point.array)
                    .map(|(i, j)| (report.cell_i, report.cell_j) == (i + 1, j + 1));
                Ok(TrackRecord {
                    frame: index,
                    report,
                    theta_x_true: ch.theta_x,
                    theta_y_true: ch.theta_y,
                    correct,
                })
            })
            .collect()
    });
    let mut records = Vec::with_capacity(point.n_frames);
    for c in chunks {
        records.extend(c?);
    }
    let judged: Vec<bool> = records.iter().filter_map(|r| r.correct).collect();
    let correct_rate = if judged.is_empty() {
        0.0
    } else {
        judged.iter().filter(|&&c| c).count() as f64 / judged.len() as f64
    };
    Ok(TrackRun {
        version: super::version(),
        config: point.clone(),
        frames: records.len() as u64,
        boundary_frames: records.iter().filter(|r| r.report.boundary).count() as u64,
        correct_rate,
        records,
    })
}
