//! Link-level simulation of ground-to-CubeSat free-space optical links that
//! terminate on an `Na × Na` avalanche-photodiode array.
//!
//! The crate is organised bottom-up:
//!
//! - [`mathcore`]: Gaussian tail function, adaptive quadrature, turbulence
//!   profile and Gamma-Gamma fading.
//! - [`channel`]: geometric/pointing loss, Beer-Lambert attenuation,
//!   angle-of-arrival jitter and the per-cell array response.
//! - [`signal`]: APD responsivity, noise budget and photo-current frames.
//! - [`detectors`]: CSI-aided detection (ideal ML, EGC, MRC) and their analytic
//!   error rates.
//! - [`glrt`]: blind joint channel estimation and sequence detection.
//! - [`tracking`]: beam-spot localisation on the array.
//! - [`sim`]: experiment configuration, Monte Carlo harness, sweeps and the
//!   analytic validation suite.
//!
//! Frame-level Monte Carlo runs on rayon when the `parallel` feature is
//! enabled (the default) and falls back to a sequential loop otherwise. Both
//! paths draw every frame from its own counter-addressed random stream, so
//! results do not depend on the number of workers.

pub mod channel;
pub mod detectors;
mod error;
pub mod glrt;
pub mod mathcore;
pub mod oracle;
pub mod signal;
pub mod sim;
pub mod tracking;

pub use error::{Error, Result};

/// A square `na × na` grid of per-cell values stored row-major, indexed by
/// `(i, j)` with `i` along x and `j` along y (both zero-based).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CellGrid {
    na: usize,
    data: Vec<f64>,
}

impl CellGrid {
    pub fn zeros(na: usize) -> Self {
        CellGrid {
            na,
            data: vec![0.0; na * na],
        }
    }

    pub fn from_vec(na: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), na * na, "grid data must hold na*na entries");
        CellGrid { na, data }
    }

    pub fn from_fn(na: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(na * na);
        for i in 0..na {
            for j in 0..na {
                data.push(f(i, j));
            }
        }
        CellGrid { na, data }
    }

    #[inline]
    pub fn na(&self) -> usize {
        self.na
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.na + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.na + j] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> CellGrid {
        CellGrid {
            na: self.na,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Index of the largest entry; ties go to the lexicographically smallest `(i, j)`.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (idx, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = idx;
            }
        }
        (best / self.na, best % self.na)
    }
}
