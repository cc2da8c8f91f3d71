use crate::detectors::Scheme;
use serde::{Deserialize, Serialize};

const Z95: f64 = 1.959_963_984_540_054;

/// Two-sided 95% Wilson score interval for `k` successes in `n` trials.
///
/// With no successes the upper bound is the one-sided rule of three, `3/n`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    if k == 0 {
        return (0.0, (3.0 / n as f64).min(1.0));
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let hi = if k >= n { 1.0 } else { (centre + half).min(1.0) };
    ((centre - half).max(0.0), hi)
}

/// Bit error rate of one scheme at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub scheme: Scheme,
    pub axis: String,
    pub axis_value: Option<f64>,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub frames: u64,
    /// Time spent inside this scheme's detector, summed over workers.
    pub wall_s: f64,
}

impl BerEstimate {
    pub fn new(scheme: Scheme, axis: &str, axis_value: Option<f64>, bits: u64, errors: u64, frames: u64, wall_s: f64) -> Self {
        let ber = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
        let (ci95_lo, ci95_hi) = wilson_interval(errors, bits);
        BerEstimate {
            scheme,
            axis: axis.to_string(),
            axis_value,
            bits,
            errors,
            ber,
            ci95_lo,
            ci95_hi,
            frames,
            wall_s,
        }
    }

    /// Whether `self` is no worse than `other` within the two intervals.
    pub fn not_worse_than(&self, other: &BerEstimate) -> bool {
        self.ci95_lo <= other.ci95_hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wilson_brackets_the_estimate() {
        for (k, n) in [(1, 10), (5, 10), (9, 10), (10, 10), (300, 1_000_000)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0, "{k}/{n}: {lo} {hi}");
        }
        assert_eq!(wilson_interval(0, 1000), (0.0, 0.003));
    }

    #[test]
    fn wilson_reference_value() {
        // 10 of 100: 0.0552 .. 0.1744
        let (lo, hi) = wilson_interval(10, 100);
        assert!((lo - 0.055_229).abs() < 1e-5 && (hi - 0.174_366).abs() < 1e-5, "{lo} {hi}");
    }

    #[test]
    fn wilson_coverage_is_near_nominal() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let (p, n, reps) = (0.03, 2_000u64, 1_000);
        let mut covered = 0;
        for _ in 0..reps {
            let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
            let (lo, hi) = wilson_interval(k, n);
            covered += (lo <= p && p <= hi) as usize;
        }
        let rate = covered as f64 / reps as f64;
        assert!((0.93..=0.97).contains(&rate), "coverage {rate}");
    }

    #[test]
    fn estimate_fields_are_consistent() {
        let e = BerEstimate::new(Scheme::Egc, "none", None, 1000, 0, 10, 0.0);
        assert_eq!(e.ber, 0.0);
        assert_eq!(e.ci95_hi, 0.003);
        let worse = BerEstimate::new(Scheme::Egc, "none", None, 1000, 50, 10, 0.0);
        assert!(e.not_worse_than(&worse));
        assert!(!worse.not_worse_than(&e));
    }
}
