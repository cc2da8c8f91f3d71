use crate::channel::{fov_solid_angle, ArrayGeometry, Fading, LinkGeometry};
use crate::detectors::Scheme;
use crate::glrt::{GlrtConfig, GlrtMode};
use crate::mathcore::{gg_params_from_rytov, rytov_variance, TurbulenceProfile};
use crate::signal::{background_power, noise_model, ApdElectronics, NoiseModel};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Gamma-Gamma turbulence along the slant path, driven by the
/// Hufnagel-Valley profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbulenceConfig {
    pub enabled: bool,
    pub wind_speed: f64,
    pub cn2_ground: f64,
    pub altitude_ground: f64,
}

impl Default for TurbulenceConfig {
    fn default() -> Self {
        TurbulenceConfig {
            enabled: true,
            wind_speed: 21.0,
            cn2_ground: 1e-13,
            altitude_ground: 0.0,
        }
    }
}

/// Reference level of transmit-power sweep values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerReference {
    Dbm,
    Dbw,
}

impl PowerReference {
    pub fn to_watts(self, db: f64) -> f64 {
        let w = 10f64.powf(db / 10.0);
        match self {
            PowerReference::Dbm => w * 1e-3,
            PowerReference::Dbw => w,
        }
    }

    pub fn from_watts(self, watts: f64) -> f64 {
        let db = 10.0 * watts.log10();
        match self {
            PowerReference::Dbm => db + 30.0,
            PowerReference::Dbw => db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "tx_power_dB")]
    TxPowerDb,
    #[serde(rename = "window_L")]
    WindowLen,
    #[serde(rename = "na")]
    Na,
    #[serde(rename = "aoa_jitter_mrad")]
    AoaJitterMrad,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [
        SweepAxis::TxPowerDb,
        SweepAxis::WindowLen,
        SweepAxis::Na,
        SweepAxis::AoaJitterMrad,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::TxPowerDb => "tx_power_dB",
            SweepAxis::WindowLen => "window_L",
            SweepAxis::Na => "na",
            SweepAxis::AoaJitterMrad => "aoa_jitter_mrad",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| {
            Error::config(
                "sweep.axis",
                format!("unknown axis '{s}', expected one of tx_power_dB, window_L, na, aoa_jitter_mrad"),
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Everything needed to run one experiment. Defaults reproduce Table I.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_frames: usize,
    /// Worker threads; `None` uses every core, `Some(1)` runs sequentially.
    pub threads: Option<usize>,
    /// Write zero wall times so repeated runs are byte-identical.
    pub deterministic: bool,
    pub power_reference: PowerReference,
    pub schemes: Vec<Scheme>,
    pub link: LinkGeometry,
    pub array: ArrayGeometry,
    pub electronics: ApdElectronics,
    pub turbulence: TurbulenceConfig,
    pub glrt: GlrtConfig,
    pub sweep: Option<SweepSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            n_frames: 10_000,
            threads: None,
            deterministic: false,
            power_reference: PowerReference::Dbm,
            schemes: vec![Scheme::IdealMl, Scheme::Egc, Scheme::Mrc, Scheme::GlrtReduced],
            link: LinkGeometry::default(),
            array: ArrayGeometry::default(),
            electronics: ApdElectronics::default(),
            turbulence: TurbulenceConfig::default(),
            glrt: GlrtConfig::default(),
            sweep: None,
        }
    }
}

/// Quantities derived once per operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    pub noise: NoiseModel,
    pub fading: Fading,
    pub background_power: f64,
    pub rytov_variance: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config {
                field: "config".into(),
                reason: e.message().to_string(),
            })?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames == 0 {
            return Err(Error::config("n_frames", "must be >= 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be >= 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one scheme is required"));
        }
        self.link.validate()?;
        self.array.validate()?;
        self.electronics.validate()?;
        if self.turbulence.enabled {
            self.profile().validate().map_err(|e| match e {
                Error::Config { field, reason } => Error::Config {
                    field: format!("turbulence.{field}"),
                    reason,
                },
                other => other,
            })?;
        }
        let glrt = self.glrt;
        if glrt.window_len < 1 {
            return Err(Error::config("glrt.window_len", "must be >= 1"));
        }
        if self.schemes.contains(&Scheme::GlrtExhaustive) {
            GlrtConfig {
                mode: GlrtMode::Exhaustive,
                ..glrt
            }
            .validate()?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::config("sweep.values", "must not be empty"));
            }
            for &v in &sweep.values {
                self.at(sweep.axis, v)?;
            }
        }
        Ok(())
    }

    fn profile(&self) -> TurbulenceProfile {
        TurbulenceProfile {
            wind_speed: self.turbulence.wind_speed,
            cn2_ground: self.turbulence.cn2_ground,
            altitude_ground: self.turbulence.altitude_ground,
            altitude_sat: self.turbulence.altitude_ground + self.link.altitude_diff,
            zenith_angle: self.link.zenith_angle,
        }
    }

    /// Copy of `self` with the sweep axis set to `value`.
    pub fn at(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let mut c = self.clone();
        c.sweep = None;
        let integer = |field: &str| -> Result<usize> {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(Error::config(field, format!("needs a positive integer, got {value}")));
            }
            Ok(value as usize)
        };
        match axis {
            SweepAxis::TxPowerDb => {
                if !value.is_finite() {
                    return Err(Error::config("sweep.values", "transmit power must be finite"));
                }
                c.electronics.tx_power = self.power_reference.to_watts(value);
            }
            SweepAxis::WindowLen => c.glrt.window_len = integer("sweep.values (window_L)")?,
            SweepAxis::Na => c.array.na = integer("sweep.values (na)")?,
            SweepAxis::AoaJitterMrad => {
                if !(value >= 0.0) {
                    return Err(Error::config("sweep.values (aoa_jitter_mrad)", "must be >= 0"));
                }
                c.array.aoa_jitter_x = value * 1e-3;
                c.array.aoa_jitter_y = value * 1e-3;
            }
        }
        if c.schemes.contains(&Scheme::GlrtExhaustive) && c.glrt.window_len > c.glrt.exhaustive_cap {
            return Err(Error::WindowTooLong {
                len: c.glrt.window_len,
                cap: c.glrt.exhaustive_cap,
            });
        }
        Ok(c)
    }

    /// Operating points of the experiment: the sweep values, or the single
    /// configured point.
    pub fn points(&self) -> Result<Vec<(Option<f64>, ExperimentConfig)>> {
        match &self.sweep {
            None => Ok(vec![(None, self.clone())]),
            Some(s) => s.values.iter().map(|&v| Ok((Some(v), self.at(s.axis, v)?))).collect(),
        }
    }

    /// Background power, noise model and fading distribution of this point.
    pub fn derive(&self) -> Result<Derived> {
        let omega = fov_solid_angle(&self.array);
        // lens area in cm² for the radiance model
        let lens_cm2 = self.link.aperture_area() * 1e4;
        let pb = background_power(&self.electronics, omega, lens_cm2);
        let noise = noise_model(&self.electronics, pb);
        let (fading, rytov) = if self.turbulence.enabled {
            let s2 = rytov_variance(&self.profile(), self.link.wavelength)?;
            (Fading::GammaGamma(gg_params_from_rytov(s2)?), Some(s2))
        } else {
            (Fading::Off, None)
        };
        Ok(Derived {
            noise,
            fading,
            background_power: pb,
            rytov_variance: rytov,
        })
    }
}
