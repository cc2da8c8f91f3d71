//! CSI-aided detection: symbol-by-symbol ideal ML, equal-gain combining and
//! maximal-ratio combining, plus the analytic error rates of ML and EGC.
//!
//! Amplitudes below are `a = μ P_t`, the mean current per unit channel
//! coefficient on a "1".

use crate::channel::{sample_channel, ArrayGeometry, ChannelState, Fading, LinkGeometry};
use crate::mathcore::q_function;
use crate::signal::{FrameObservation, NoiseModel};
use crate::{CellGrid, Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    IdealMl,
    Egc,
    Mrc,
    GlrtExhaustive,
    GlrtReduced,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::IdealMl,
        Scheme::Egc,
        Scheme::Mrc,
        Scheme::GlrtExhaustive,
        Scheme::GlrtReduced,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::IdealMl => "ideal_ml",
            Scheme::Egc => "egc",
            Scheme::Mrc => "mrc",
            Scheme::GlrtExhaustive => "glrt_exhaustive",
            Scheme::GlrtReduced => "glrt_reduced",
        }
    }

    pub fn is_glrt(&self) -> bool {
        matches!(self, Scheme::GlrtExhaustive | Scheme::GlrtReduced)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config("schemes", format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub bits_hat: Vec<u8>,
    pub scheme: Scheme,
    /// Per-cell channel estimate, when the scheme produces one.
    pub aux: Option<CellGrid>,
}

impl DetectionResult {
    pub fn bit_errors(&self, truth: &[u8]) -> usize {
        self.bits_hat.iter().zip(truth).filter(|(a, b)| a != b).count()
    }
}

fn check_dims(frame: &FrameObservation, ch: &ChannelState) -> Result<()> {
    if frame.na() != ch.na() {
        return Err(Error::Dimension(format!(
            "frame has a {0}x{0} array, channel {1}x{1}",
            frame.na(),
            ch.na()
        )));
    }
    Ok(())
}

/// Precomputed per-cell coefficients of the ML rule: with `D = σ0²σ_s²h + σ0⁴`,
/// the left side is `Σ (c1 r + c0 − c2 r²)` and the right side `Σ ln(σ0²/(σ_s²h+σ0²))`.
struct MlRule {
    c0: Vec<f64>,
    c1: Vec<f64>,
    c2: Vec<f64>,
    rhs: f64,
}

impl MlRule {
    fn new(ch: &ChannelState, nm: &NoiseModel) -> Self {
        let a = nm.amplitude();
        let s0 = nm.sigma0_2;
        let n = ch.h.as_slice().len();
        let (mut c0, mut c1, mut c2) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        let mut rhs = 0.0;
        for &h in ch.h.as_slice() {
            let d = s0 * nm.sigma_s2 * h + s0 * s0;
            c1.push(-2.0 * s0 * a * h / d);
            c0.push(s0 * a * a * h * h / d);
            c2.push(nm.sigma_s2 * h / d);
            rhs -= (nm.sigma_s2 * h / s0).ln_1p();
        }
        MlRule { c0, c1, c2, rhs }
    }

    fn lhs(&self, slot: &[f64]) -> f64 {
        slot.iter()
            .enumerate()
            .map(|(c, &r)| self.c1[c] * r + self.c0[c] - self.c2[c] * r * r)
            .sum()
    }

    /// Decides 1 only when the left sum falls strictly below the right.
    fn decide(&self, slot: &[f64]) -> u8 {
        (self.lhs(slot) < self.rhs) as u8
    }
}

/// Symbol-by-symbol ML decision with full knowledge of every `h_ij`.
pub fn ml_ideal_detect(frame: &FrameObservation, ch: &ChannelState, nm: &NoiseModel) -> Result<DetectionResult> {
    check_dims(frame, ch)?;
    let rule = MlRule::new(ch, nm);
    let bits_hat = (0..frame.len()).map(|k| rule.decide(frame.slot(k))).collect();
    Ok(DetectionResult {
        bits_hat,
        scheme: Scheme::IdealMl,
        aux: None,
    })
}

/// Approximate ML error rate for a known channel.
///
/// The Q-function arguments divide by the standard deviation of the summed
/// noise (the square root of `N_a²σ_0² + σ_s² h_t` for a "1", `N_a σ_0` for a
/// "0"). The approximation treats the array as if every cell carried the same
/// weight, so it tightens as the spot spreads evenly over the cells.
pub fn ml_conditional_ber(ch: &ChannelState, nm: &NoiseModel) -> f64 {
    let h_t = ch.h_total();
    if !(h_t > 0.0) {
        return 0.5;
    }
    let a = nm.amplitude();
    let s0 = nm.sigma0_2;
    let ss = nm.sigma_s2;
    let na2 = (ch.na() * ch.na()) as f64;
    // ln1p(x)/x → 1 as x → 0
    let ratio = |x: f64| if x > 1e-12 { x.ln_1p() / x } else { 1.0 - x / 2.0 };
    let (mut num_one, mut num_zero) = (0.0, 0.0);
    for &h in ch.h.as_slice() {
        let x = ss * h / s0;
        num_one += a * h / 2.0 - ss / (2.0 * a) * ratio(x);
        num_zero += a * h / 2.0 + ss / (2.0 * a) * (1.0 + x) * ratio(x);
    }
    let p_one = q_function(num_one / (na2 * s0 + ss * h_t).sqrt());
    let p_zero = q_function(num_zero / (na2 * s0).sqrt());
    0.5 * p_zero + 0.5 * p_one
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedBer {
    pub mean: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Monte Carlo average of [`ml_conditional_ber`] over channel draws.
pub fn ml_average_ber<R: Rng + ?Sized>(
    rng: &mut R,
    link: &LinkGeometry,
    geo: &ArrayGeometry,
    fading: &Fading,
    nm: &NoiseModel,
    n_draws: usize,
) -> Result<AveragedBer> {
    if n_draws == 0 {
        return Err(Error::config("n_draws", "must be >= 1"));
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n_draws {
        let p = ml_conditional_ber(&sample_channel(rng, link, geo, fading), nm);
        s1 += p;
        s2 += p * p;
    }
    let n = n_draws as f64;
    let mean = s1 / n;
    let var = if n_draws > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(AveragedBer {
        mean,
        std_error: (var / n).sqrt(),
        draws: n_draws,
    })
}

/// Per-slot totals `r[k] = Σ_ij r_ij[k]`.
pub fn egc_combine(frame: &FrameObservation) -> Vec<f64> {
    (0..frame.len()).map(|k| frame.slot(k).iter().sum()).collect()
}

/// Threshold on the combined current that minimises the conditional EGC error
/// rate. With `v0 = N_a²σ_0²` and `v1 = v0 + σ_s²h_t`, the stationarity
/// condition is a quadratic in the threshold whose positive root is
///
/// ```text
/// T = sqrt(v0) (a²h_t² + v1 ln(v1/v0)) / (a h_t sqrt(v0) + sqrt(v1) sqrt(a²h_t² + σ_s²h_t ln(v1/v0)))
/// ```
///
/// written without the `1/(σ_s² h_t)` cancellation so the `σ_s → 0` limit
/// `a h_t / 2` is reached smoothly.
pub fn egc_threshold(h_t: f64, nm: &NoiseModel, na: usize) -> Result<f64> {
    if !(h_t > 0.0) {
        return Err(Error::DegenerateChannel(format!("EGC threshold needs h_t > 0, got {h_t}")));
    }
    let a = nm.amplitude();
    let v0 = (na * na) as f64 * nm.sigma0_2;
    let shot = nm.sigma_s2 * h_t;
    let v1 = v0 + shot;
    let log_ratio = (shot / v0).ln_1p();
    let ah = a * h_t;
    let numerator = v0.sqrt() * (ah * ah + v1 * log_ratio);
    let denominator = ah * v0.sqrt() + v1.sqrt() * (ah * ah + shot * log_ratio).sqrt();
    Ok(numerator / denominator)
}

/// Conditional EGC error rate at an arbitrary threshold.
pub fn egc_conditional_ber_at(h_t: f64, threshold: f64, nm: &NoiseModel, na: usize) -> f64 {
    let a = nm.amplitude();
    let v0 = (na * na) as f64 * nm.sigma0_2;
    let v1 = v0 + nm.sigma_s2 * h_t;
    0.5 * q_function((a * h_t - threshold) / v1.sqrt()) + 0.5 * q_function(threshold / v0.sqrt())
}

/// Conditional EGC error rate at the optimal threshold; 0.5 for `h_t = 0`.
pub fn egc_conditional_ber(h_t: f64, nm: &NoiseModel, na: usize) -> f64 {
    match egc_threshold(h_t, nm, na) {
        Ok(t) => egc_conditional_ber_at(h_t, t, nm, na),
        Err(_) => egc_conditional_ber_at(0.0, 0.0, nm, na),
    }
}

pub fn egc_detect(frame: &FrameObservation, h_t: f64, nm: &NoiseModel) -> Result<DetectionResult> {
    let threshold = egc_threshold(h_t, nm, frame.na())?;
    Ok(egc_detect_with_threshold(frame, threshold))
}

/// Bit 1 iff the combined current strictly exceeds `threshold`.
pub fn egc_detect_with_threshold(frame: &FrameObservation, threshold: f64) -> DetectionResult {
    let bits_hat = egc_combine(frame).into_iter().map(|r| (r > threshold) as u8).collect();
    DetectionResult {
        bits_hat,
        scheme: Scheme::Egc,
        aux: None,
    }
}

/// Linear combining with weights `a h_ij / (σ_s² h_ij + σ_0²)` and a threshold
/// midway between the conditional means of the combined statistic.
pub fn mrc_detect(frame: &FrameObservation, ch: &ChannelState, nm: &NoiseModel) -> Result<DetectionResult> {
    check_dims(frame, ch)?;
    let a = nm.amplitude();
    let weights: Vec<f64> = ch
        .h
        .as_slice()
        .iter()
        .map(|&h| a * h / (nm.sigma_s2 * h + nm.sigma0_2))
        .collect();
    let mean_one: f64 = weights.iter().zip(ch.h.as_slice()).map(|(w, h)| w * a * h).sum();
    let threshold = mean_one / 2.0;
    let bits_hat = (0..frame.len())
        .map(|k| {
            let y: f64 = frame.slot(k).iter().zip(&weights).map(|(r, w)| r * w).sum();
            (y > threshold) as u8
        })
        .collect();
    Ok(DetectionResult {
        bits_hat,
        scheme: Scheme::Mrc,
        aux: None,
    })
}
