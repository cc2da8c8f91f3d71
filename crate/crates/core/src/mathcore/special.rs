use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const ASYMPTOTIC_CUTOFF: f64 = 8.0;

/// Gaussian tail probability `Q(x) = P(Z > x)` for a standard normal `Z`.
///
/// Uses `erfc` inside `|x| <= 8` and the asymptotic series of the Mills
/// ratio beyond, truncated at its smallest term.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > ASYMPTOTIC_CUTOFF {
        upper_tail_asymptotic(x)
    } else if x < -ASYMPTOTIC_CUTOFF {
        1.0 - upper_tail_asymptotic(-x)
    } else {
        0.5 * erfc(x * FRAC_1_SQRT_2)
    }
}

fn upper_tail_asymptotic(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    if density == 0.0 {
        return 0.0;
    }
    // Q(x) ~ phi(x)/x * sum_n (-1)^n (2n-1)!! / x^(2n)
    let inv_x2 = 1.0 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..64 {
        let next = -term * (2 * n - 1) as f64 * inv_x2;
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            break;
        }
        term = next;
        sum += term;
    }
    density / x * sum
}

/// Probability that a standard normal variate falls in `(lo, hi)`.
///
/// Evaluated on whichever tail keeps the difference free of cancellation.
pub fn gauss_interval_mass(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mass = if lo >= 0.0 {
        q_function(lo) - q_function(hi)
    } else if hi <= 0.0 {
        q_function(-hi) - q_function(-lo)
    } else {
        1.0 - q_function(-lo) - q_function(hi)
    };
    mass.max(0.0)
}
