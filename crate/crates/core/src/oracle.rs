//! Independent reference computations used to check the closed forms.
//!
//! Each routine takes the slow, direct route (numerical search, explicit
//! likelihoods, 2-D quadrature) and shares no code with the closed forms it
//! checks beyond the Q-function and the noise model.

use crate::channel::ArrayGeometry;
use crate::detectors::egc_conditional_ber_at;
use crate::mathcore::{integrate, QuadOptions};
use crate::signal::{FrameObservation, NoiseModel};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iterations: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Grid scan followed by golden-section refinement around the best node.
pub fn grid_then_golden(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, nodes: usize) -> (f64, f64) {
    let nodes = nodes.max(3);
    let step = (hi - lo) / (nodes - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..nodes {
        let v = f(lo + step * k as f64);
        if v < best.1 {
            best = (k, v);
        }
    }
    let left = lo + step * best.0.saturating_sub(1) as f64;
    let right = (lo + step * (best.0 + 1) as f64).min(hi);
    golden_section_min(f, left, right, 200)
}

/// Threshold minimising the conditional EGC error rate, by direct search.
///
/// The interval reaches eight standard deviations past the "1" mean: with
/// strong shot noise at low SNR the minimiser lies above `a h_t`. Near an
/// error rate of one half the rate is flat to machine precision, so there the
/// search maximises `erf(u_1/√2) + erf(u_0/√2)` instead, which carries the
/// same minimiser at full relative precision.
pub fn egc_threshold_by_search(h_t: f64, nm: &NoiseModel, na: usize) -> f64 {
    let n2 = (na * na) as f64;
    let v0 = n2 * nm.sigma0_2;
    let v1 = v0 + nm.sigma_s2 * h_t;
    let mean = nm.amplitude() * h_t;
    let top = mean + 8.0 * v1.sqrt();
    let rate = |t: f64| egc_conditional_ber_at(h_t, t, nm, na);
    let coarse = golden_section_min(rate, 0.0, top, 300);
    if coarse.1 < 0.25 {
        return coarse.0;
    }
    let r2 = std::f64::consts::SQRT_2;
    let flat = |t: f64| -(libm::erf((mean - t) / (v1.sqrt() * r2)) + libm::erf(t / (v0.sqrt() * r2)));
    golden_section_min(flat, 0.0, top, 300).0
}

/// Negative doubled log-likelihood of one cell's "1" slots as a function of
/// `h`, without constants.
pub fn glrt_cell_objective(h: f64, r: &[f64], s: &[u8], nm: &NoiseModel) -> f64 {
    let a = nm.amplitude();
    let v = nm.sigma_s2 * h + nm.sigma0_2;
    r.iter()
        .zip(s)
        .filter(|(_, &b)| b == 1)
        .map(|(&x, _)| v.ln() + (x - a * h).powi(2) / v)
        .sum()
}

/// Channel estimate by a `nodes`-point grid over `[0, h_max]` refined by
/// golden-section search.
///
/// The refinement minimises the objective relative to the best grid node
/// `h_c`, written so that every term is O(h − h_c); the plain objective is
/// dominated by `m ln v` and would hide differences below its rounding.
pub fn glrt_estimate_by_grid(r: &[f64], s: &[u8], nm: &NoiseModel, nodes: usize) -> Result<f64> {
    let ones: Vec<f64> = r.iter().zip(s).filter(|(_, &b)| b == 1).map(|(&x, _)| x).collect();
    if ones.is_empty() {
        return Err(Error::AllZeroSequence);
    }
    let a = nm.amplitude();
    let peak = ones.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let h_max = 2.0 * peak / a + nm.sigma0_2.sqrt() / a;
    let nodes = nodes.max(3);
    let step = h_max / (nodes - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..nodes {
        let v = glrt_cell_objective(step * k as f64, r, s, nm);
        if v < best.1 {
            best = (k, v);
        }
    }
    let hc = step * best.0 as f64;
    let vc = nm.sigma_s2 * hc + nm.sigma0_2;
    let m = ones.len() as f64;
    let relative = |h: f64| {
        let d = h - hc;
        let v = vc + nm.sigma_s2 * d;
        let quad: f64 = ones
            .iter()
            .map(|&x| {
                let e = x - a * hc;
                d * (a * a * d * vc - 2.0 * a * e * vc - nm.sigma_s2 * e * e) / (v * vc)
            })
            .sum();
        m * (nm.sigma_s2 * d / vc).ln_1p() + quad
    };
    let left = step * best.0.saturating_sub(1) as f64;
    let right = (step * (best.0 + 1) as f64).min(h_max);
    Ok(golden_section_min(relative, left, right, 300).0)
}

/// Per-slot ML decisions from the two Gaussian likelihood products directly.
pub fn ml_decide_by_likelihood(frame: &FrameObservation, h: &[f64], nm: &NoiseModel) -> Vec<u8> {
    let a = nm.amplitude();
    let ln_pdf = |x: f64, mean: f64, var: f64| -0.5 * (2.0 * PI * var).ln() - (x - mean).powi(2) / (2.0 * var);
    (0..frame.len())
        .map(|k| {
            let (mut l1, mut l0) = (0.0, 0.0);
            for (&r, &hij) in frame.slot(k).iter().zip(h) {
                l1 += ln_pdf(r, a * hij, nm.variance(hij, 1));
                l0 += ln_pdf(r, 0.0, nm.sigma0_2);
            }
            (l1 > l0) as u8
        })
        .collect()
}

/// Fraction of a circular Gaussian spot centred at `(f_c θ_x, f_c θ_y)` that
/// falls on the active area of zero-based cell `(i, j)`, by nested adaptive
/// quadrature of the 2-D intensity.
pub fn cell_mass_by_quadrature(theta_x: f64, theta_y: f64, geo: &ArrayGeometry, i: usize, j: usize) -> Result<f64> {
    let s = geo.spot_sigma;
    let (cx, cy) = (geo.focal_length * theta_x, geo.focal_length * theta_y);
    let (xl, xh) = geo.cell_bounds(i);
    let (yl, yh) = geo.cell_bounds(j);
    let norm = 1.0 / (2.0 * PI * s * s);
    let inner_opts = QuadOptions::with_rel_tol(1e-11).with_abs_tol(1e-16);
    let outer_opts = QuadOptions::with_rel_tol(1e-10).with_abs_tol(1e-13);
    let mut failure = None;
    let outer = integrate(
        |x: f64| {
            let gx = (-(x - cx).powi(2) / (2.0 * s * s)).exp();
            if gx == 0.0 {
                return 0.0;
            }
            match integrate(|y: f64| (-(y - cy).powi(2) / (2.0 * s * s)).exp(), yl, yh, &inner_opts) {
                Ok(r) => norm * gx * r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        xl,
        xh,
        &outer_opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(outer.value)
}

/// GLRT decision by enumerating every nonzero sequence and maximising the
/// likelihood over each `h_ij` numerically. Quadratically slower than the
/// closed-form search; for short windows only.
pub fn glrt_brute_force(frame: &FrameObservation, nm: &NoiseModel, nodes: usize) -> Result<Vec<u8>> {
    let len = frame.len();
    if len > 16 {
        return Err(Error::WindowTooLong { len, cap: 16 });
    }
    let cells = frame.cells();
    let columns: Vec<Vec<f64>> = (0..cells).map(|c| (0..len).map(|k| frame.current(k, c)).collect()).collect();
    let s0 = nm.sigma0_2;
    let mut best = (f64::INFINITY, Vec::new());
    for code in 1u32..(1 << len) {
        let s: Vec<u8> = (0..len).map(|k| ((code >> k) & 1) as u8).collect();
        let mut total = 0.0;
        for col in &columns {
            let h = glrt_estimate_by_grid(col, &s, nm, nodes)?;
            let zeros: f64 = col
                .iter()
                .zip(&s)
                .filter(|(_, &b)| b == 0)
                .map(|(&x, _)| s0.ln() + x * x / s0)
                .sum();
            total += zeros + glrt_cell_objective(h, col, &s, nm);
        }
        if total < best.0 {
            best = (total, s);
        }
    }
    Ok(best.1)
}
