//! APD photo-current model: responsivity, noise budget and frame synthesis.
//!
//! `s[k] ∈ {0, 1}` is dimensionless and the transmit power is folded into
//! the signal: the mean current of a "1" on cell `(i, j)` is `μ P_t h_ij`
//! and its variance is `σ_s² h_ij + σ_0²` with `σ_s² = 2 e G F B μ P_t`.

use crate::channel::ChannelState;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Source of the background power seen by each APD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum Background {
    /// Fixed power in W, independent of the field of view.
    Fixed { power: f64 },
    /// `N_b B_o Ω_FoV A_a`, growing with the array's field of view.
    Radiance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApdElectronics {
    pub gain: f64,
    pub quantum_efficiency: f64,
    pub excess_noise: f64,
    /// Receiver low-pass bandwidth B, Hz.
    pub bandwidth: f64,
    /// Load resistance R_l, Ω.
    pub load_resistance: f64,
    /// Receiver equivalent temperature T_r, K.
    pub temperature: f64,
    /// Optical filter bandwidth B_o, µm.
    pub optical_filter_bw: f64,
    /// Background spectral radiance N_b(λ), W/(cm²·µm·sr).
    pub spectral_radiance: f64,
    pub background: Background,
    pub wavelength: f64,
    /// Transmit optical power P_t, W.
    pub tx_power: f64,
}

impl Default for ApdElectronics {
    /// Table I receiver with `F = 5`, `B = 1/T_b = 1 GHz` and `P_t = 10 mW`.
    fn default() -> Self {
        ApdElectronics {
            gain: 100.0,
            quantum_efficiency: 0.7,
            excess_noise: 5.0,
            bandwidth: 1e9,
            load_resistance: 1e3,
            temperature: 300.0,
            optical_filter_bw: 1e-3,
            spectral_radiance: 1e-4,
            background: Background::Fixed { power: 1e-9 },
            wavelength: 1550e-9,
            tx_power: 10e-3,
        }
    }
}

impl ApdElectronics {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("electronics.gain", self.gain),
            ("electronics.bandwidth", self.bandwidth),
            ("electronics.load_resistance", self.load_resistance),
            ("electronics.temperature", self.temperature),
            ("electronics.wavelength", self.wavelength),
            ("electronics.tx_power", self.tx_power),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.quantum_efficiency > 0.0 && self.quantum_efficiency <= 1.0) {
            return Err(Error::config("electronics.quantum_efficiency", "must lie in (0, 1]"));
        }
        if !(self.excess_noise >= 1.0) {
            return Err(Error::config("electronics.excess_noise", "must be >= 1"));
        }
        if !(self.optical_filter_bw >= 0.0 && self.spectral_radiance >= 0.0) {
            return Err(Error::config("electronics.background", "radiance and filter width must be >= 0"));
        }
        if let Background::Fixed { power } = self.background {
            if !(power >= 0.0) {
                return Err(Error::config("electronics.background.power", "must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Per-cell noise/gain parameters of the photo-current model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Responsivity μ = eGη/(h_p ν), A/W.
    pub mu: f64,
    /// Transmit power P_t, W.
    pub tx_power: f64,
    /// Shot-noise coefficient σ_s² multiplying `h_ij s[k]`, A².
    pub sigma_s2: f64,
    /// Signal-independent variance σ_0² = σ_b² + σ_th², A².
    pub sigma0_2: f64,
}

impl NoiseModel {
    pub fn new(mu: f64, tx_power: f64, sigma_s2: f64, sigma0_2: f64) -> Result<Self> {
        if !(mu > 0.0 && tx_power > 0.0) {
            return Err(Error::Domain("mu and tx_power must be > 0".into()));
        }
        if !(sigma_s2 >= 0.0 && sigma0_2 > 0.0) {
            return Err(Error::Domain("need sigma_s2 >= 0 and sigma0_2 > 0".into()));
        }
        Ok(NoiseModel {
            mu,
            tx_power,
            sigma_s2,
            sigma0_2,
        })
    }

    /// A model with both noise terms zeroed; only valid for synthesising
    /// frames, not for detection.
    pub fn noiseless(mu: f64, tx_power: f64) -> Self {
        NoiseModel {
            mu,
            tx_power,
            sigma_s2: 0.0,
            sigma0_2: 0.0,
        }
    }

    /// Current per unit channel coefficient on a "1": `μ P_t`.
    #[inline]
    pub fn amplitude(&self) -> f64 {
        self.mu * self.tx_power
    }

    /// Variance of a cell with coefficient `h` given bit `s`.
    #[inline]
    pub fn variance(&self, h: f64, bit: u8) -> f64 {
        if bit == 0 {
            self.sigma0_2
        } else {
            self.sigma_s2 * h + self.sigma0_2
        }
    }
}

/// One observation window: `L` bits and the `L × na × na` photo-currents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameObservation {
    na: usize,
    bits: Vec<u8>,
    currents: Vec<f64>,
}

impl FrameObservation {
    pub fn new(na: usize, bits: Vec<u8>, currents: Vec<f64>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Dimension("frame needs at least one bit".into()));
        }
        if currents.len() != bits.len() * na * na {
            return Err(Error::Dimension(format!(
                "{} currents for {} bits on a {na}x{na} array",
                currents.len(),
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Dimension("bits must be 0 or 1".into()));
        }
        Ok(FrameObservation { na, bits, currents })
    }

    #[inline]
    pub fn na(&self) -> usize {
        self.na
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.na * self.na
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Transmitted bits (ground truth carried with the frame).
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Currents of all cells in slot `k`, row-major over `(i, j)`.
    #[inline]
    pub fn slot(&self, k: usize) -> &[f64] {
        let n = self.cells();
        &self.currents[k * n..(k + 1) * n]
    }

    #[inline]
    pub fn current(&self, k: usize, cell: usize) -> f64 {
        self.currents[k * self.cells() + cell]
    }

    pub fn currents(&self) -> &[f64] {
        &self.currents
    }

    /// Scales every current; handy for homogeneity checks.
    pub fn scaled(&self, factor: f64) -> FrameObservation {
        FrameObservation {
            na: self.na,
            bits: self.bits.clone(),
            currents: self.currents.iter().map(|r| r * factor).collect(),
        }
    }
}

pub fn responsivity_mu(e: &ApdElectronics) -> f64 {
    let nu = SPEED_OF_LIGHT / e.wavelength;
    ELECTRON_CHARGE * e.gain * e.quantum_efficiency / (PLANCK * nu)
}

/// Background power of one APD; the radiance model takes `A_a` in cm².
pub fn background_power(e: &ApdElectronics, omega_fov: f64, lens_area_cm2: f64) -> f64 {
    match e.background {
        Background::Fixed { power } => power,
        Background::Radiance => e.spectral_radiance * e.optical_filter_bw * omega_fov * lens_area_cm2,
    }
}

pub fn thermal_variance(e: &ApdElectronics) -> f64 {
    4.0 * BOLTZMANN * e.temperature * e.bandwidth / e.load_resistance
}

pub fn noise_model(e: &ApdElectronics, background: f64) -> NoiseModel {
    let mu = responsivity_mu(e);
    let shot_per_watt = 2.0 * ELECTRON_CHARGE * e.gain * e.excess_noise * e.bandwidth * mu;
    NoiseModel {
        mu,
        tx_power: e.tx_power,
        sigma_s2: shot_per_watt * e.tx_power,
        sigma0_2: shot_per_watt * background + thermal_variance(e),
    }
}

/// Uniform i.i.d. bits.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}

/// Photo-currents `r_ij[k] = μ P_t h_ij s[k] + n_ij[k]`, drawn slot-major.
pub fn simulate_frame<R: Rng + ?Sized>(
    rng: &mut R,
    bits: &[u8],
    ch: &ChannelState,
    nm: &NoiseModel,
) -> Result<FrameObservation> {
    let na = ch.na();
    let h = ch.h.as_slice();
    let a = nm.amplitude();
    let mut currents = Vec::with_capacity(bits.len() * h.len());
    for &bit in bits {
        let s = bit as f64;
        for &hij in h {
            let z: f64 = StandardNormal.sample(rng);
            currents.push(a * hij * s + nm.variance(hij, bit).sqrt() * z);
        }
    }
    FrameObservation::new(na, bits.to_vec(), currents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CellGrid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table_one() -> ApdElectronics {
        ApdElectronics::default()
    }

    #[test]
    fn responsivity_values() {
        let unit = ApdElectronics {
            gain: 1.0,
            quantum_efficiency: 1.0,
            ..table_one()
        };
        let r = responsivity_mu(&unit);
        assert!((r - 1550e-9 * ELECTRON_CHARGE / (PLANCK * SPEED_OF_LIGHT)).abs() < 1e-14);
        assert!((r - 1.250_1).abs() < 1e-3, "{r}");
        let doubled = ApdElectronics { gain: 2.0, ..unit };
        assert!((responsivity_mu(&doubled) - 2.0 * r).abs() < 1e-14);
        assert!((responsivity_mu(&table_one()) - 87.51).abs() < 0.01);
    }

    #[test]
    fn background_power_scaling_and_override() {
        let mut e = table_one();
        assert_eq!(background_power(&e, 0.3, 28.0), 1e-9);
        e.background = Background::Radiance;
        assert_eq!(background_power(&e, 0.0, 28.0), 0.0);
        let p1 = background_power(&e, 1e-3, 28.0);
        assert!((background_power(&e, 2e-3, 28.0) - 2.0 * p1).abs() < 1e-24);
        assert!((p1 - 1e-4 * 1e-3 * 1e-3 * 28.0).abs() < 1e-22);
    }

    #[test]
    fn noise_budget_terms() {
        let e = table_one();
        let th = thermal_variance(&e);
        assert!((th - 1.6568e-14).abs() < 1e-17, "{th}");
        let nm0 = noise_model(&e, 0.0);
        assert_eq!(nm0.sigma0_2, th);
        let plain = ApdElectronics {
            gain: 1.0,
            excess_noise: 1.0,
            ..e
        };
        let nm = noise_model(&plain, 1e-9);
        let mu = responsivity_mu(&plain);
        let shot = 2.0 * ELECTRON_CHARGE * mu * plain.bandwidth * 1e-9;
        assert!((nm.sigma0_2 - thermal_variance(&plain) - shot).abs() < 1e-28);
        assert!(nm.sigma0_2 > 0.0);
    }

    fn flat_channel(na: usize, h: f64) -> ChannelState {
        ChannelState::new(h, 0.0, 0.0, CellGrid::from_vec(na, vec![1.0; na * na]))
    }

    #[test]
    fn noiseless_frame_is_exact_signal() {
        let ch = ChannelState::new(2e-6, 0.0, 0.0, CellGrid::from_vec(2, vec![0.1, 0.2, 0.3, 0.4]));
        let nm = NoiseModel::noiseless(87.5, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bits = vec![1, 0, 1];
        let f = simulate_frame(&mut rng, &bits, &ch, &nm).unwrap();
        for k in 0..3 {
            for c in 0..4 {
                assert_eq!(f.current(k, c), nm.amplitude() * ch.h.as_slice()[c] * bits[k] as f64);
            }
        }
    }

    #[test]
    fn noise_moments_follow_model() {
        let nm = NoiseModel::new(87.5, 0.01, 4e-8, 3e-14).unwrap();
        let ch = flat_channel(1, 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let zeros = vec![0u8; n];
        let f = simulate_frame(&mut rng, &zeros, &ch, &nm).unwrap();
        let var0 = f.currents().iter().map(|r| r * r).sum::<f64>() / n as f64;
        assert!((var0 / nm.sigma0_2 - 1.0).abs() < 0.02);

        let ones = vec![1u8; n];
        let f = simulate_frame(&mut rng, &ones, &ch, &nm).unwrap();
        let mean = nm.amplitude() * 1e-6;
        let var1 = f.currents().iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n as f64;
        let expected = nm.sigma_s2 * 1e-6 + nm.sigma0_2;
        assert!((var1 / expected - 1.0).abs() < 0.02, "{var1} vs {expected}");
        let emp_mean = f.currents().iter().sum::<f64>() / n as f64;
        assert!((emp_mean - mean).abs() < 4.0 * (expected / n as f64).sqrt());
    }

    #[test]
    fn frame_shape_is_checked() {
        assert!(FrameObservation::new(2, vec![1, 0], vec![0.0; 7]).is_err());
        assert!(FrameObservation::new(2, vec![], vec![]).is_err());
        assert!(FrameObservation::new(1, vec![2], vec![0.0]).is_err());
        let f = FrameObservation::new(2, vec![1, 0], vec![0.0; 8]).unwrap();
        assert_eq!((f.len(), f.cells()), (2, 4));
    }

    #[test]
    fn invalid_electronics_rejected() {
        let mut e = table_one();
        e.quantum_efficiency = 1.2;
        assert!(e.validate().is_err());
        let mut e = table_one();
        e.excess_noise = 0.5;
        assert!(e.validate().is_err());
        assert!(table_one().validate().is_ok());
    }
}
