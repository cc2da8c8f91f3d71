use super::quad::{integrate, QuadOptions};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use libm::lgamma as ln_gamma;

/// Shape parameters of the Gamma-Gamma irradiance distribution
/// (effective numbers of large- and small-scale eddies).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaGammaParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Plane-wave large/small-scale parameters from the Rytov variance:
///
/// ```text
/// alpha = [exp(0.49 s / (1 + 1.11 s^(6/5))^(7/6)) - 1]^-1
/// beta  = [exp(0.51 s / (1 + 0.69 s^(6/5))^(5/6)) - 1]^-1
/// ```
///
/// where `s = sigma_R^2`.
pub fn gg_params_from_rytov(sigma_r2: f64) -> Result<GammaGammaParams> {
    if !(sigma_r2 >= 0.0) || !sigma_r2.is_finite() {
        return Err(Error::Domain(format!("Rytov variance must be finite and >= 0, got {sigma_r2}")));
    }
    if sigma_r2 == 0.0 {
        return Err(Error::DegenerateTurbulence);
    }
    let s125 = sigma_r2.powf(6.0 / 5.0);
    let a = (0.49 * sigma_r2 / (1.0 + 1.11 * s125).powf(7.0 / 6.0)).exp_m1();
    let b = (0.51 * sigma_r2 / (1.0 + 0.69 * s125).powf(5.0 / 6.0)).exp_m1();
    GammaGammaParams::new(1.0 / a, 1.0 / b)
}

impl GammaGammaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be finite and > 0, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be finite and > 0, got {beta}")));
        }
        Ok(GammaGammaParams { alpha, beta })
    }

    /// Normalised irradiance variance `1/α + 1/β + 1/(αβ)`.
    pub fn scintillation_index(&self) -> f64 {
        1.0 / self.alpha + 1.0 / self.beta + 1.0 / (self.alpha * self.beta)
    }

    /// Draws `h_a` as the product of unit-mean Gamma(α) and Gamma(β) variates.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let large = Gamma::new(self.alpha, 1.0 / self.alpha).expect("validated shape");
        let small = Gamma::new(self.beta, 1.0 / self.beta).expect("validated shape");
        large.sample(rng) * small.sample(rng)
    }

    /// Gamma-Gamma density in closed form with the modified Bessel function
    /// of the second kind.
    pub fn pdf(&self, h: f64) -> Result<f64> {
        Ok(self.ln_pdf(h)?.exp())
    }

    pub fn ln_pdf(&self, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!("Gamma-Gamma density needs h_a > 0, got {h}")));
        }
        let (a, b) = (self.alpha, self.beta);
        let x = 2.0 * (a * b * h).sqrt();
        let ln_k = bessel_k_scaled_ln(a - b, x)? - x;
        Ok(std::f64::consts::LN_2 + 0.5 * (a + b) * (a * b).ln() - ln_gamma(a) - ln_gamma(b)
            + (0.5 * (a + b) - 1.0) * h.ln()
            + ln_k)
    }
}

/// `ln(e^x K_ν(x))` for `x > 0`, from `K_ν(x) = ∫₀^∞ exp(-x cosh t) cosh(νt) dt`.
///
/// The integrand is normalised by its peak so neither small `x` nor large
/// `|ν|` overflows.
pub fn bessel_k_scaled_ln(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Bessel K needs x > 0, got {x}")));
    }
    let nu = nu.abs();
    // log of exp(-x (cosh t - 1)) * exp(nu t), the dominant part of the integrand
    let exponent = |t: f64| -x * (t.cosh() - 1.0) + nu * t;
    let t_peak = (nu / x).asinh();
    let peak = exponent(t_peak);
    let mut t_end = t_peak + 1.0;
    while exponent(t_end) > peak - 60.0 {
        t_end += 1.0;
    }
    let integrand = |t: f64| {
        let g = -x * (t.cosh() - 1.0) - peak;
        // cosh(nu t) = (e^{nu t} + e^{-nu t}) / 2
        0.5 * ((g + nu * t).exp() + (g - nu * t).exp())
    };
    let opts = QuadOptions::with_rel_tol(1e-12);
    let mut total = 0.0;
    if t_peak > 0.0 {
        total += integrate(integrand, 0.0, t_peak, &opts)?.value;
    }
    total += integrate(integrand, t_peak, t_end, &opts)?.value;
    Ok(peak + total.ln())
}
