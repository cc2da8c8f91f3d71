//! Blind detection: joint GLRT estimation of the per-cell channel and the
//! transmitted window, by exhaustive or reduced candidate search.

use crate::detectors::{egc_combine, DetectionResult, Scheme};
use crate::signal::{FrameObservation, NoiseModel};
use crate::{CellGrid, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlrtMode {
    Exhaustive,
    Reduced,
}

/// Per-slot statistic whose order statistics define the reduced-search candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotRanking {
    /// Unweighted sum over every cell.
    EgcTotal,
    /// Cells weighted by their mean current over the window, then re-ranked
    /// with combining weights built from the first pass's channel estimates.
    /// The candidate with the lower metric of the two passes wins.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlrtConfig {
    pub window_len: usize,
    pub mode: GlrtMode,
    /// Longest window the exhaustive search accepts.
    pub exhaustive_cap: usize,
    pub ranking: SlotRanking,
    /// Refine the reduced-search winner by single-slot flips.
    pub local_search: bool,
}

impl Default for GlrtConfig {
    fn default() -> Self {
        GlrtConfig {
            window_len: 16,
            mode: GlrtMode::Reduced,
            exhaustive_cap: 20,
            ranking: SlotRanking::Weighted,
            local_search: true,
        }
    }
}

impl GlrtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_len < 1 {
            return Err(Error::config("glrt.window_len", "must be >= 1"));
        }
        if self.exhaustive_cap > 30 {
            return Err(Error::config("glrt.exhaustive_cap", "must be <= 30"));
        }
        if self.mode == GlrtMode::Exhaustive && self.window_len > self.exhaustive_cap {
            return Err(Error::WindowTooLong {
                len: self.window_len,
                cap: self.exhaustive_cap,
            });
        }
        Ok(())
    }
}

/// Outcome of a GLRT search.
#[derive(Debug, Clone, PartialEq)]
pub struct GlrtDecision {
    pub result: DetectionResult,
    /// Metric of the chosen sequence.
    pub metric: f64,
    /// Cells whose channel estimate was clamped at zero.
    pub clamped_cells: usize,
}

/// Channel estimate from the sufficient statistics of the "1" slots of one
/// cell: `m` slots, `s1 = Σ r`, `s2 = Σ r²`. Returns the estimate and whether
/// it was clamped at zero.
///
/// The stationary point of the negative log-likelihood is
/// `h = −b + sqrt(b² + c)`; it is evaluated here in the rationalised form
/// `c σ_s² / (b σ_s² + sqrt((b σ_s²)² + c σ_s⁴))`, which stays finite as
/// `σ_s → 0` and reduces to `s1 / (m a)` there.
pub fn estimate_from_sums(m: usize, s1: f64, s2: f64, nm: &NoiseModel) -> (f64, bool) {
    let a = nm.amplitude();
    let (ss, s0) = (nm.sigma_s2, nm.sigma0_2);
    let mf = m as f64;
    let c_ss = (2.0 * a * s0 * s1 + ss * s2 - mf * s0 * ss) / (mf * a * a);
    let b_ss = s0 + ss * ss / (2.0 * a * a);
    let radicand = b_ss * b_ss + c_ss * ss;
    if !(c_ss > 0.0) || !(radicand >= 0.0) {
        return (0.0, true);
    }
    (c_ss / (b_ss + radicand.sqrt()), false)
}

/// Estimate `ĥ` for one cell given its currents `r` over the window and a
/// candidate sequence `s`.
pub fn estimate_channel_given_s(r: &[f64], s: &[u8], nm: &NoiseModel) -> Result<f64> {
    if r.len() != s.len() {
        return Err(Error::Dimension(format!("{} currents for {} bits", r.len(), s.len())));
    }
    let (mut m, mut s1, mut s2) = (0usize, 0.0, 0.0);
    for (&x, &b) in r.iter().zip(s) {
        if b == 1 {
            m += 1;
            s1 += x;
            s2 += x * x;
        }
    }
    if m == 0 {
        return Err(Error::AllZeroSequence);
    }
    Ok(estimate_from_sums(m, s1, s2, nm).0)
}

/// Per-cell sufficient statistics of the whole frame, reused across candidates.
struct FrameStats {
    cells: usize,
    len: usize,
    /// `Σ_k r_ij[k]` over all slots, per cell.
    total: Vec<f64>,
    /// `Σ_k r_ij[k]²` over all slots, per cell.
    total_sq: Vec<f64>,
}

impl FrameStats {
    fn new(frame: &FrameObservation) -> Self {
        let cells = frame.cells();
        let mut total = vec![0.0; cells];
        let mut total_sq = vec![0.0; cells];
        for k in 0..frame.len() {
            for (c, &r) in frame.slot(k).iter().enumerate() {
                total[c] += r;
                total_sq[c] += r * r;
            }
        }
        FrameStats {
            cells,
            len: frame.len(),
            total,
            total_sq,
        }
    }
}

/// Metric of one cell's contribution (−2 log-likelihood without the 2π term),
/// with the channel estimate substituted.
#[inline]
fn cell_metric(m: usize, len: usize, s1: f64, s2: f64, total_sq: f64, nm: &NoiseModel) -> (f64, f64, bool) {
    let a = nm.amplitude();
    let s0 = nm.sigma0_2;
    let (h, clamped) = estimate_from_sums(m, s1, s2, nm);
    let v = nm.sigma_s2 * h + s0;
    let mf = m as f64;
    let zeros = (len - m) as f64 * s0.ln() + (total_sq - s2) / s0;
    let ones = mf * v.ln() + (s2 - 2.0 * a * h * s1 + mf * a * a * h * h) / v;
    (zeros + ones, h, clamped)
}

/// GLRT metric of candidate `s`: the negative doubled log-likelihood of the
/// frame, minimised over every `h_ij ≥ 0`, without the `L N_a² ln 2π` constant.
/// Smaller is better.
pub fn glrt_metric(frame: &FrameObservation, s: &[u8], nm: &NoiseModel) -> Result<f64> {
    Ok(metric_with_estimates(frame, s, nm)?.0)
}

fn metric_with_estimates(frame: &FrameObservation, s: &[u8], nm: &NoiseModel) -> Result<(f64, CellGrid, usize)> {
    if s.len() != frame.len() {
        return Err(Error::Dimension(format!("candidate of length {} for a window of {}", s.len(), frame.len())));
    }
    let m = s.iter().filter(|&&b| b == 1).count();
    if m == 0 {
        return Err(Error::AllZeroSequence);
    }
    let stats = FrameStats::new(frame);
    let mut s1 = vec![0.0; stats.cells];
    let mut s2 = vec![0.0; stats.cells];
    for (k, _) in s.iter().enumerate().filter(|(_, &b)| b == 1) {
        for (c, &r) in frame.slot(k).iter().enumerate() {
            s1[c] += r;
            s2[c] += r * r;
        }
    }
    let mut total = 0.0;
    let mut h = Vec::with_capacity(stats.cells);
    let mut clamped = 0;
    for c in 0..stats.cells {
        let (v, hc, cl) = cell_metric(m, stats.len, s1[c], s2[c], stats.total_sq[c], nm);
        total += v;
        h.push(hc);
        clamped += cl as usize;
    }
    Ok((total, CellGrid::from_vec(frame.na(), h), clamped))
}

fn decision(frame: &FrameObservation, bits: Vec<u8>, nm: &NoiseModel, scheme: Scheme) -> Result<GlrtDecision> {
    let (metric, h, clamped_cells) = metric_with_estimates(frame, &bits, nm)?;
    Ok(GlrtDecision {
        result: DetectionResult {
            bits_hat: bits,
            scheme,
            aux: Some(h),
        },
        metric,
        clamped_cells,
    })
}

/// Minimises the metric over all `2^L − 1` nonzero sequences.
///
/// Candidates are visited in Gray-code order so each step toggles one slot and
/// the per-cell sums update in `O(N_a²)`. Among equal metrics the first visited
/// candidate is kept.
pub fn glrt_detect_exhaustive(frame: &FrameObservation, nm: &NoiseModel, cfg: &GlrtConfig) -> Result<GlrtDecision> {
    let len = frame.len();
    if len > cfg.exhaustive_cap {
        return Err(Error::WindowTooLong {
            len,
            cap: cfg.exhaustive_cap,
        });
    }
    let stats = FrameStats::new(frame);
    let cells = stats.cells;
    let mut s1 = vec![0.0; cells];
    let mut s2 = vec![0.0; cells];
    let mut m = 0usize;
    let mut code = 0u32;
    let mut best = (f64::INFINITY, 0u32);
    for step in 1u32..(1u32 << len) {
        let k = step.trailing_zeros() as usize;
        code ^= 1 << k;
        let sign = if code & (1 << k) != 0 { 1.0 } else { -1.0 };
        if sign > 0.0 {
            m += 1;
        } else {
            m -= 1;
        }
        for (c, &r) in frame.slot(k).iter().enumerate() {
            s1[c] += sign * r;
            s2[c] += sign * r * r;
        }
        if m == 0 {
            continue;
        }
        let mut total = 0.0;
        for c in 0..cells {
            total += cell_metric(m, len, s1[c], s2[c], stats.total_sq[c], nm).0;
        }
        if total < best.0 {
            best = (total, code);
        }
    }
    let bits = (0..len).map(|k| ((best.1 >> k) & 1) as u8).collect();
    decision(frame, bits, nm, Scheme::GlrtExhaustive)
}

/// Restricts the search to the `L` candidates that mark the `m` slots with the
/// largest combined current as "1", for `m = 1..L`.
///
/// Slots are ranked by their EGC total; ties in the ranking keep the earlier
/// slot first. Per-cell sums grow by one slot per candidate, so the whole
/// search is `O(L N_a²)` after sorting.
/// Upper bound on re-ranking rounds of [`SlotRanking::Weighted`].
const REFINE_PASSES: usize = 4;

pub fn glrt_detect_reduced(frame: &FrameObservation, nm: &NoiseModel, cfg: &GlrtConfig) -> Result<GlrtDecision> {
    let stats = FrameStats::new(frame);
    let bits = match cfg.ranking {
        SlotRanking::EgcTotal => scan(frame, &stats, &egc_combine(frame), nm).1,
        SlotRanking::Weighted => {
            let len = frame.len() as f64;
            let mean: Vec<f64> = stats.total.iter().map(|t| (t / len).max(0.0)).collect();
            let mut best = scan(frame, &stats, &weighted_slots(frame, &mean), nm);
            let egc = scan(frame, &stats, &egc_combine(frame), nm);
            if egc.0 < best.0 {
                best = egc;
            }
            let a = nm.amplitude();
            for _ in 0..REFINE_PASSES {
                let (_, h, _) = metric_with_estimates(frame, &best.1, nm)?;
                let mrc: Vec<f64> = h.as_slice().iter().map(|&h| a * h / (nm.sigma_s2 * h + nm.sigma0_2)).collect();
                let next = scan(frame, &stats, &weighted_slots(frame, &mrc), nm);
                if !(next.0 < best.0) {
                    break;
                }
                best = next;
            }
            best.1
        }
    };
    let bits = if cfg.local_search { polish(frame, &stats, bits, nm) } else { bits };
    decision(frame, bits, nm, Scheme::GlrtReduced)
}

fn weighted_slots(frame: &FrameObservation, weights: &[f64]) -> Vec<f64> {
    (0..frame.len())
        .map(|k| frame.slot(k).iter().zip(weights).map(|(r, w)| r * w).sum())
        .collect()
}

/// First-improvement descent over single-slot flips, starting from `bits`.
/// Each flip is scored in `O(N_a²)` from running per-cell sums; stops when a
/// full sweep over the window finds no lower metric.
fn polish(frame: &FrameObservation, stats: &FrameStats, mut bits: Vec<u8>, nm: &NoiseModel) -> Vec<u8> {
    let len = frame.len();
    let cells = stats.cells;
    let mut s1 = vec![0.0; cells];
    let mut s2 = vec![0.0; cells];
    let mut m = 0usize;
    for k in (0..len).filter(|&k| bits[k] == 1) {
        m += 1;
        for (c, &r) in frame.slot(k).iter().enumerate() {
            s1[c] += r;
            s2[c] += r * r;
        }
    }
    let total = |m: usize, s1: &[f64], s2: &[f64]| -> f64 {
        (0..cells).map(|c| cell_metric(m, len, s1[c], s2[c], stats.total_sq[c], nm).0).sum()
    };
    let mut current = total(m, &s1, &s2);
    let (mut t1, mut t2) = (s1.clone(), s2.clone());
    for _ in 0..len {
        let mut improved = false;
        for k in 0..len {
            let sign = if bits[k] == 1 { -1.0 } else { 1.0 };
            let m_new = if bits[k] == 1 { m - 1 } else { m + 1 };
            if m_new == 0 {
                continue;
            }
            for (c, &r) in frame.slot(k).iter().enumerate() {
                t1[c] = s1[c] + sign * r;
                t2[c] = s2[c] + sign * r * r;
            }
            let v = total(m_new, &t1, &t2);
            if v < current {
                current = v;
                m = m_new;
                bits[k] ^= 1;
                s1.copy_from_slice(&t1);
                s2.copy_from_slice(&t2);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    bits
}

/// Best metric over the candidates that mark the `m` largest `ranking`
/// entries as "1", for `m = 1..=L`.
fn scan(frame: &FrameObservation, stats: &FrameStats, ranking: &[f64], nm: &NoiseModel) -> (f64, Vec<u8>) {
    let len = frame.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&x, &y| ranking[y].total_cmp(&ranking[x]).then(x.cmp(&y)));
    let cells = stats.cells;
    let mut s1 = vec![0.0; cells];
    let mut s2 = vec![0.0; cells];
    let mut best = (f64::INFINITY, 0usize);
    for (idx, &k) in order.iter().enumerate() {
        let m = idx + 1;
        for (c, &r) in frame.slot(k).iter().enumerate() {
            s1[c] += r;
            s2[c] += r * r;
        }
        let mut total = 0.0;
        for c in 0..cells {
            total += cell_metric(m, len, s1[c], s2[c], stats.total_sq[c], nm).0;
        }
        if total < best.0 {
            best = (total, m);
        }
    }
    let mut bits = vec![0u8; len];
    for &k in &order[..best.1.max(1)] {
        bits[k] = 1;
    }
    (best.0, bits)
}

pub fn glrt_detect(frame: &FrameObservation, nm: &NoiseModel, cfg: &GlrtConfig) -> Result<GlrtDecision> {
    match cfg.mode {
        GlrtMode::Exhaustive => glrt_detect_exhaustive(frame, nm, cfg),
        GlrtMode::Reduced => glrt_detect_reduced(frame, nm, cfg),
    }
}
