//! Beam-spot localisation on the array.
//!
//! [`ideal_track`] estimates the angle of arrival when `h1` and the bits are
//! known. [`argmax_track`] is blind: it picks the cell with the largest mean
//! output and reports the angular interval that cell covers.

use crate::channel::{array_response, ArrayGeometry};
use crate::mathcore::{nelder_mead, NelderMeadOptions};
use crate::signal::{FrameObservation, NoiseModel};
use crate::{CellGrid, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackMethod {
    IdealMl,
    ArgMax,
}

/// Estimated cell (1-based indices) and the angular intervals it maps to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackReport {
    pub cell_i: usize,
    pub cell_j: usize,
    pub theta_x_lo: f64,
    pub theta_x_hi: f64,
    pub theta_y_lo: f64,
    pub theta_y_hi: f64,
    pub method: TrackMethod,
    /// Set when the true spot centre lies in dead space or off the array, so
    /// the reported cell carries no guarantee.
    pub boundary: bool,
}

impl TrackReport {
    fn for_cell(i: usize, j: usize, geo: &ArrayGeometry, method: TrackMethod) -> Self {
        let (theta_x_lo, theta_x_hi) = geo.cell_angle_interval(i);
        let (theta_y_lo, theta_y_hi) = geo.cell_angle_interval(j);
        TrackReport {
            cell_i: i + 1,
            cell_j: j + 1,
            theta_x_lo,
            theta_x_hi,
            theta_y_lo,
            theta_y_hi,
            method,
            boundary: false,
        }
    }

    /// Whether the interval pair contains `(θ_x, θ_y)`.
    pub fn contains(&self, theta_x: f64, theta_y: f64) -> bool {
        theta_x > self.theta_x_lo && theta_x < self.theta_x_hi && theta_y > self.theta_y_lo && theta_y < self.theta_y_hi
    }
}

/// Zero-based cell whose active area contains the spot centre for AoA
/// `(θ_x, θ_y)`, or `None` in dead space or off the array.
pub fn true_cell(theta_x: f64, theta_y: f64, geo: &ArrayGeometry) -> Option<(usize, usize)> {
    let i = geo.cell_containing(geo.focal_length * theta_x)?;
    let j = geo.cell_containing(geo.focal_length * theta_y)?;
    Some((i, j))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealTrack {
    pub theta_x: f64,
    pub theta_y: f64,
    pub objective: f64,
    pub converged: bool,
}

/// Tracking objective for a candidate AoA. `r_mean` holds the per-cell mean
/// of the "1" slots and `m` their count.
pub fn ideal_track_objective(
    theta_x: f64,
    theta_y: f64,
    r_mean: &CellGrid,
    m: usize,
    h1: f64,
    geo: &ArrayGeometry,
    nm: &NoiseModel,
) -> f64 {
    let a = nm.amplitude();
    let mf = m as f64;
    let h2 = array_response(theta_x, theta_y, geo);
    h2.as_slice()
        .iter()
        .zip(r_mean.as_slice())
        .map(|(&g, &r)| {
            let h = h1 * g;
            let v = nm.sigma_s2 * h + nm.sigma0_2;
            (v / mf).ln() / mf + (r - a * h).powi(2) / v
        })
        .sum()
}

/// Mean of each cell over the slots where `s[k] = 1`.
fn ones_mean(frame: &FrameObservation, s: &[u8]) -> Result<(CellGrid, usize)> {
    if s.len() != frame.len() {
        return Err(Error::Dimension(format!("{} bits for a window of {}", s.len(), frame.len())));
    }
    let mut acc = vec![0.0; frame.cells()];
    let mut m = 0;
    for (k, _) in s.iter().enumerate().filter(|(_, &b)| b == 1) {
        m += 1;
        for (a, &r) in acc.iter_mut().zip(frame.slot(k)) {
            *a += r;
        }
    }
    if m == 0 {
        return Err(Error::AllZeroSequence);
    }
    acc.iter_mut().for_each(|a| *a /= m as f64);
    Ok((CellGrid::from_vec(frame.na(), acc), m))
}

/// AoA estimate with `h1` and the transmitted bits known.
///
/// The objective is minimised by Nelder-Mead from the nine points of a 3×3
/// grid over the FoV box; the search is confined to the box by clipping.
pub fn ideal_track(
    frame: &FrameObservation,
    s: &[u8],
    h1: f64,
    geo: &ArrayGeometry,
    nm: &NoiseModel,
) -> Result<IdealTrack> {
    if frame.na() != geo.na {
        return Err(Error::Dimension(format!("frame na {} vs geometry na {}", frame.na(), geo.na)));
    }
    let (r_mean, m) = ones_mean(frame, s)?;
    let half = geo.half_fov_box();
    let clip = |u: f64| u.clamp(-1.0, 1.0) * half;
    let opts = NelderMeadOptions {
        f_tol: 1e-12,
        x_tol: 1e-10,
        max_iter: 4_000,
    };
    let mut best: Option<IdealTrack> = None;
    for sx in [-2.0 / 3.0, 0.0, 2.0 / 3.0] {
        for sy in [-2.0 / 3.0, 0.0, 2.0 / 3.0] {
            let res = nelder_mead(
                |u| ideal_track_objective(clip(u[0]), clip(u[1]), &r_mean, m, h1, geo, nm),
                &[sx, sy],
                &[0.2, 0.2],
                &opts,
            );
            let cand = IdealTrack {
                theta_x: clip(res.x[0]),
                theta_y: clip(res.x[1]),
                objective: res.fx,
                converged: res.converged,
            };
            if best.is_none_or(|b| cand.objective < b.objective) {
                best = Some(cand);
            }
        }
    }
    let best = best.expect("nine starts");
    if !best.objective.is_finite() {
        return Err(Error::Numerical("tracking objective is not finite".into()));
    }
    Ok(best)
}

/// Per-cell mean over all slots of the window.
pub fn mean_slot_outputs(frame: &FrameObservation) -> CellGrid {
    let mut acc = vec![0.0; frame.cells()];
    for k in 0..frame.len() {
        for (a, &r) in acc.iter_mut().zip(frame.slot(k)) {
            *a += r;
        }
    }
    let l = frame.len() as f64;
    CellGrid::from_vec(frame.na(), acc.into_iter().map(|a| a / l).collect())
}

/// Cell with the largest mean output; ties go to the smallest `(i, j)`.
/// `boundary` is left unset since the frame alone cannot tell.
pub fn argmax_track(frame: &FrameObservation, geo: &ArrayGeometry) -> Result<TrackReport> {
    if frame.na() != geo.na {
        return Err(Error::Dimension(format!("frame na {} vs geometry na {}", frame.na(), geo.na)));
    }
    let (i, j) = mean_slot_outputs(frame).argmax();
    Ok(TrackReport::for_cell(i, j, geo, TrackMethod::ArgMax))
}

/// [`argmax_track`] with the `boundary` flag filled in from the true AoA.
pub fn argmax_track_with_truth(
    frame: &FrameObservation,
    geo: &ArrayGeometry,
    theta_x: f64,
    theta_y: f64,
) -> Result<TrackReport> {
    let mut report = argmax_track(frame, geo)?;
    report.boundary = true_cell(theta_x, theta_y, geo).is_none();
    Ok(report)
}
