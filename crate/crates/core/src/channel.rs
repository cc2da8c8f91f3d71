//! Channel realisations: lens-plane coefficient `h1 = h_pu · h_l · h_a`,
//! angle-of-arrival jitter, and the per-cell array response `h2[i][j]`.

use crate::mathcore::{gauss_interval_mass, integrate, GammaGammaParams, QuadOptions};
use crate::{CellGrid, Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// How the transmit beam widens with distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamSpec {
    /// Gaussian beam with waist `w0` (m) at the transmitter.
    Waist(f64),
    /// Far-field divergence angle (rad): `w_z = θ_div · Z`.
    Divergence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkGeometry {
    /// H_s − H_g, m.
    pub altitude_diff: f64,
    /// Zenith angle ξ, rad.
    pub zenith_angle: f64,
    /// Optical wavelength λ, m.
    pub wavelength: f64,
    pub beam: BeamSpec,
    /// Receiver aperture radius, m.
    pub rx_aperture_radius: f64,
    /// Beer-Lambert scattering coefficient ζ, 1/m.
    pub scatter_coeff: f64,
    /// Standard deviation of the per-axis pointing error θ_e, rad.
    pub pointing_jitter: f64,
}

impl Default for LinkGeometry {
    /// Table I link: 400 km at 30° zenith, 1550 nm, 30 m beam width at the
    /// receiver, 3 cm aperture radius, no scattering, 1 µrad pointing jitter.
    fn default() -> Self {
        let altitude_diff = 400e3;
        let zenith_angle = 30f64.to_radians();
        let wavelength = 1550e-9;
        let z = altitude_diff / zenith_angle.cos();
        let waist = LinkGeometry::waist_for_width(30.0, z, wavelength).expect("30 m is reachable");
        LinkGeometry {
            altitude_diff,
            zenith_angle,
            wavelength,
            beam: BeamSpec::Waist(waist),
            rx_aperture_radius: 0.03,
            scatter_coeff: 0.0,
            pointing_jitter: 1e-6,
        }
    }
}

impl LinkGeometry {
    /// Waist that yields beam width `w_z` at range `z` for wavelength `lambda`.
    pub fn waist_for_width(w_z: f64, z: f64, lambda: f64) -> Result<f64> {
        let w0_sq = w_z * w_z - lambda * z / PI;
        if !(w0_sq > 0.0) {
            return Err(Error::Domain(format!(
                "no beam waist reaches width {w_z} m at {z} m"
            )));
        }
        Ok(w0_sq.sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_diff > 0.0) {
            return Err(Error::config("link.altitude_diff", "must be > 0"));
        }
        if !(0.0..FRAC_PI_2).contains(&self.zenith_angle) {
            return Err(Error::config("link.zenith_angle", "must lie in [0, pi/2)"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::config("link.wavelength", "must be > 0"));
        }
        match self.beam {
            BeamSpec::Waist(w) if !(w > 0.0) => return Err(Error::config("link.beam.waist", "must be > 0")),
            BeamSpec::Divergence(t) if !(t > 0.0) => {
                return Err(Error::config("link.beam.divergence", "must be > 0"))
            }
            _ => {}
        }
        if !(self.rx_aperture_radius > 0.0) {
            return Err(Error::config("link.rx_aperture_radius", "must be > 0"));
        }
        if !(self.scatter_coeff >= 0.0) {
            return Err(Error::config("link.scatter_coeff", "must be >= 0"));
        }
        if !(self.pointing_jitter >= 0.0) {
            return Err(Error::config("link.pointing_jitter", "must be >= 0"));
        }
        Ok(())
    }

    /// Propagation length `Z = (H_s − H_g) / cos ξ`.
    pub fn range(&self) -> f64 {
        self.altitude_diff / self.zenith_angle.cos()
    }

    pub fn aperture_area(&self) -> f64 {
        PI * self.rx_aperture_radius * self.rx_aperture_radius
    }
}

/// Geometry of the `na × na` APD array in the focal plane.
///
/// Cells sit on a pitch of `active_width`; each cell's responsive area is the
/// pitch minus `dead_space`, centred in the pitch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayGeometry {
    pub na: usize,
    /// Cell width w_a, m.
    pub active_width: f64,
    /// Junction (dead-space) width w_f between neighbouring cells, m.
    pub dead_space: f64,
    /// Lens focal length f_c, m.
    pub focal_length: f64,
    /// Standard deviation σ_I of the focused spot, m.
    pub spot_sigma: f64,
    /// Standard deviation of the AoA along x, rad.
    pub aoa_jitter_x: f64,
    /// Standard deviation of the AoA along y, rad.
    pub aoa_jitter_y: f64,
}

impl Default for ArrayGeometry {
    /// 6×6 array of 250 µm cells with 5 µm dead space behind a 3 cm lens,
    /// 100 µm spot and 2 mrad AoA jitter per axis.
    fn default() -> Self {
        ArrayGeometry {
            na: 6,
            active_width: 250e-6,
            dead_space: 5e-6,
            focal_length: 0.03,
            spot_sigma: 100e-6,
            aoa_jitter_x: 2e-3,
            aoa_jitter_y: 2e-3,
        }
    }
}

impl ArrayGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.na < 1 {
            return Err(Error::config("array.na", "must be >= 1"));
        }
        if !(self.active_width > 0.0) {
            return Err(Error::config("array.active_width", "must be > 0"));
        }
        if !(self.dead_space >= 0.0 && self.dead_space < self.active_width) {
            return Err(Error::config("array.dead_space", "must satisfy 0 <= w_f < w_a"));
        }
        if !(self.focal_length > 0.0) {
            return Err(Error::config("array.focal_length", "must be > 0"));
        }
        if !(self.spot_sigma > 0.0) {
            return Err(Error::config("array.spot_sigma", "must be > 0"));
        }
        if !(self.aoa_jitter_x >= 0.0 && self.aoa_jitter_y >= 0.0) {
            return Err(Error::config("array.aoa_jitter", "must be >= 0"));
        }
        Ok(())
    }

    /// Focal-plane bounds `(lo, hi)` of the responsive part of zero-based cell `i`.
    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        let half = self.na as f64 / 2.0;
        let lo = (i as f64 - half) * self.active_width + self.dead_space / 2.0;
        let hi = (i as f64 + 1.0 - half) * self.active_width - self.dead_space / 2.0;
        (lo, hi)
    }

    /// Angular interval `(lo, hi)` in rad that maps onto cell `i`'s active area.
    pub fn cell_angle_interval(&self, i: usize) -> (f64, f64) {
        let (lo, hi) = self.cell_bounds(i);
        (lo / self.focal_length, hi / self.focal_length)
    }

    /// Half extent of the array, in angle, along one axis.
    pub fn half_fov_box(&self) -> f64 {
        self.na as f64 * self.active_width / (2.0 * self.focal_length)
    }

    /// Zero-based cell whose active area contains focal-plane coordinate `x`,
    /// or `None` for dead space and points outside the array.
    pub fn cell_containing(&self, x: f64) -> Option<usize> {
        let half = self.na as f64 / 2.0;
        let k = (x / self.active_width + half).floor();
        if k < 0.0 || k >= self.na as f64 {
            return None;
        }
        let i = k as usize;
        let (lo, hi) = self.cell_bounds(i);
        (x > lo && x < hi).then_some(i)
    }
}

/// One block-fading realisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub h1: f64,
    pub theta_x: f64,
    pub theta_y: f64,
    /// Fraction of the lens-plane power landing on each cell.
    pub h2: CellGrid,
    /// Per-cell coefficients `h1 · h2[i][j]`.
    pub h: CellGrid,
}

impl ChannelState {
    pub fn new(h1: f64, theta_x: f64, theta_y: f64, h2: CellGrid) -> Self {
        let h = h2.scaled(h1);
        ChannelState {
            h1,
            theta_x,
            theta_y,
            h2,
            h,
        }
    }

    pub fn na(&self) -> usize {
        self.h.na()
    }

    /// `h_t = Σ h_ij`.
    pub fn h_total(&self) -> f64 {
        self.h.sum()
    }
}

/// Turbulence switch for channel sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Fading {
    /// `h_a ≡ 1`.
    Off,
    GammaGamma(GammaGammaParams),
}

pub fn beam_width_at(z: f64, link: &LinkGeometry) -> f64 {
    match link.beam {
        BeamSpec::Waist(w0) => w0 * (1.0 + link.wavelength * z / (PI * w0 * w0)).sqrt(),
        BeamSpec::Divergence(theta) => theta * z,
    }
}

pub fn pointing_displacement(theta_ex: f64, theta_ey: f64, z: f64) -> (f64, f64) {
    (z * theta_ex.sin(), z * theta_ey.sin())
}

/// Collected fraction for an aperture much smaller than the beam.
pub fn pointing_loss_approx(d_dx: f64, d_dy: f64, w_z: f64, aperture_area: f64) -> f64 {
    2.0 * aperture_area / (PI * w_z * w_z) * (-2.0 * (d_dx * d_dx + d_dy * d_dy) / (w_z * w_z)).exp()
}

/// Gaussian beam intensity integrated over a circular aperture. Test oracle
/// for [`pointing_loss_approx`]; the simulation path does not use it.
pub fn pointing_loss_exact(d_dx: f64, d_dy: f64, w_z: f64, aperture_radius: f64) -> Result<f64> {
    if aperture_radius == 0.0 {
        return Ok(0.0);
    }
    let d = (d_dx * d_dx + d_dy * d_dy).sqrt();
    let w2 = w_z * w_z;
    let peak = 2.0 / (PI * w2);
    let inner_opts = QuadOptions::with_rel_tol(1e-9);
    let mut failure = None;
    let radial = |rho: f64| {
        // ∫₀^{2π} exp(-2 (ρ² + d² - 2ρd cos φ) / w²) dφ, by symmetry 2∫₀^π
        let angular = integrate(
            |phi: f64| (-2.0 * (rho * rho + d * d - 2.0 * rho * d * phi.cos()) / w2).exp(),
            0.0,
            PI,
            &inner_opts,
        );
        match angular {
            Ok(r) => 2.0 * r.value * rho,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let outer = integrate(radial, 0.0, aperture_radius, &QuadOptions::with_rel_tol(1e-7))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(peak * outer.value)
}

/// Beer-Lambert attenuation `exp(−Zζ)`.
pub fn atmospheric_loss(z: f64, zeta: f64) -> f64 {
    (-z * zeta).exp()
}

pub fn sample_aoa<R: Rng + ?Sized>(rng: &mut R, geo: &ArrayGeometry) -> (f64, f64) {
    let nx: f64 = StandardNormal.sample(rng);
    let ny: f64 = StandardNormal.sample(rng);
    (geo.aoa_jitter_x * nx, geo.aoa_jitter_y * ny)
}

pub fn aoa_magnitude(theta_x: f64, theta_y: f64) -> f64 {
    theta_x.hypot(theta_y)
}

/// Solid angle of the rectangular receiver FoV, with
/// `θ_FoV = arctan(N_a w_a / f_c)` on both axes.
pub fn fov_solid_angle(geo: &ArrayGeometry) -> f64 {
    let tan_fov = geo.na as f64 * geo.active_width / geo.focal_length;
    solid_angle_from_half_tangents(tan_fov / 2.0, tan_fov / 2.0)
}

fn solid_angle_from_half_tangents(u: f64, v: f64) -> f64 {
    let ratio = (1.0 + u * u + v * v) / ((1.0 + u * u) * (1.0 + v * v));
    4.0 * ratio.sqrt().min(1.0).acos()
}

/// Per-cell share of a Gaussian spot of spread `σ_I` centred at
/// `(f_c θ_x, f_c θ_y)`. Row factors use `θ_x`, column factors `θ_y`.
pub fn array_response(theta_x: f64, theta_y: f64, geo: &ArrayGeometry) -> CellGrid {
    let na = geo.na;
    let axis = |theta: f64| -> Vec<f64> {
        let center = geo.focal_length * theta;
        (0..na)
            .map(|i| {
                let (lo, hi) = geo.cell_bounds(i);
                gauss_interval_mass((lo - center) / geo.spot_sigma, (hi - center) / geo.spot_sigma)
            })
            .collect()
    };
    let fx = axis(theta_x);
    let fy = axis(theta_y);
    CellGrid::from_fn(na, |i, j| fx[i] * fy[j])
}

/// Draws pointing error, turbulence and AoA, then composes `h1` and `H`.
///
/// Draw order per call: θ_ex, θ_ey, h_a (if fading is on), θ_x, θ_y.
pub fn sample_channel<R: Rng + ?Sized>(
    rng: &mut R,
    link: &LinkGeometry,
    geo: &ArrayGeometry,
    fading: &Fading,
) -> ChannelState {
    let z = link.range();
    let ex: f64 = StandardNormal.sample(rng);
    let ey: f64 = StandardNormal.sample(rng);
    let (d_dx, d_dy) = pointing_displacement(link.pointing_jitter * ex, link.pointing_jitter * ey, z);
    let h_pu = pointing_loss_approx(d_dx, d_dy, beam_width_at(z, link), link.aperture_area());
    let h_l = atmospheric_loss(z, link.scatter_coeff);
    let h_a = match fading {
        Fading::Off => 1.0,
        Fading::GammaGamma(p) => p.sample(rng),
    };
    let (theta_x, theta_y) = sample_aoa(rng, geo);
    let h2 = array_response(theta_x, theta_y, geo);
    ChannelState::new(h_pu * h_l * h_a, theta_x, theta_y, h2)
}
