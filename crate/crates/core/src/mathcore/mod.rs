//! Special functions, sampling and numerical quadrature shared by the physics
//! and detection modules.

mod fading;
mod optimize;
mod quad;
mod special;
mod turbulence;

pub use fading::{bessel_k_scaled_ln, gg_params_from_rytov, GammaGammaParams};
pub use optimize::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use quad::{integrate, integrate_to_infinity, QuadOptions, QuadResult};
pub use special::{gauss_interval_mass, q_function};
pub use turbulence::{rytov_variance, rytov_variance_with, TurbulenceProfile};
