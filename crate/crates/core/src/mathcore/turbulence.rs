use super::quad::{integrate, QuadOptions};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Hufnagel-Valley turbulence profile along a ground-to-satellite slant path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceProfile {
    /// High-altitude wind speed, m/s.
    pub wind_speed: f64,
    /// Nominal ground-level Cn², m^(-2/3).
    pub cn2_ground: f64,
    /// Ground-station altitude H_g, m.
    pub altitude_ground: f64,
    /// Satellite altitude H_s, m.
    pub altitude_sat: f64,
    /// Zenith angle ξ, rad.
    pub zenith_angle: f64,
}

impl Default for TurbulenceProfile {
    fn default() -> Self {
        TurbulenceProfile {
            wind_speed: 21.0,
            cn2_ground: 1e-13,
            altitude_ground: 0.0,
            altitude_sat: 400e3,
            zenith_angle: 30f64.to_radians(),
        }
    }
}

impl TurbulenceProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_ground >= 0.0) {
            return Err(Error::config("altitude_ground", "must be >= 0"));
        }
        if !(self.altitude_sat > self.altitude_ground) {
            return Err(Error::config("altitude_sat", "must exceed altitude_ground"));
        }
        if !(0.0..FRAC_PI_2).contains(&self.zenith_angle) {
            return Err(Error::config("zenith_angle", "must lie in [0, pi/2)"));
        }
        if !(self.wind_speed > 0.0) {
            return Err(Error::config("wind_speed", "must be > 0"));
        }
        if !(self.cn2_ground > 0.0) {
            return Err(Error::config("cn2_ground", "must be > 0"));
        }
        Ok(())
    }

    /// Cn²(h) of the three-term Hufnagel-Valley model.
    pub fn cn2_at(&self, h: f64) -> f64 {
        let wind = 0.00594 * (self.wind_speed / 27.0).powi(2) * (1e-5 * h).powi(10) * (-h / 1000.0).exp();
        let mid = 2.7e-16 * (-h / 1500.0).exp();
        let ground = self.cn2_ground * (-h / 100.0).exp();
        wind + mid + ground
    }

    /// Slant range `(H_s - H_g) / cos ξ`.
    pub fn slant_range(&self) -> f64 {
        (self.altitude_sat - self.altitude_ground) / self.zenith_angle.cos()
    }
}

/// Rytov variance of the slant path for the Hufnagel-Valley profile.
pub fn rytov_variance(profile: &TurbulenceProfile, wavelength: f64) -> Result<f64> {
    profile.validate()?;
    rytov_variance_with(
        |h| profile.cn2_at(h),
        profile.altitude_ground,
        profile.altitude_sat,
        profile.zenith_angle,
        wavelength,
    )
}

/// Rytov variance for an arbitrary Cn²(h) profile between `hg` and `hs`.
///
/// The altitude integral is split at the scale heights of the profile terms
/// and each piece is integrated adaptively to a relative tolerance of 1e-6.
pub fn rytov_variance_with(
    cn2: impl Fn(f64) -> f64,
    hg: f64,
    hs: f64,
    zenith_angle: f64,
    wavelength: f64,
) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::Domain("wavelength must be > 0".into()));
    }
    if !(hs > hg) {
        return Err(Error::Domain("satellite altitude must exceed ground altitude".into()));
    }
    let span = hs - hg;
    let integrand = |h: f64| {
        let x = (h - hg) / span;
        cn2(h) * ((1.0 - x) * x).max(0.0).powf(5.0 / 6.0)
    };
    let opts = QuadOptions::with_rel_tol(1e-6);
    let mut breaks = vec![hg];
    for offset in [1e3, 2e4, 6e4] {
        if hg + offset < hs {
            breaks.push(hg + offset);
        }
    }
    breaks.push(hs);
    let mut integral = 0.0;
    for w in breaks.windows(2) {
        integral += integrate(integrand, w[0], w[1], &opts)?.value;
    }
    let k = 2.0 * PI / wavelength;
    let sec = 1.0 / zenith_angle.cos();
    Ok(2.25 * k.powf(7.0 / 6.0) * span.powf(5.0 / 6.0) * sec.powf(11.0 / 6.0) * integral)
}
