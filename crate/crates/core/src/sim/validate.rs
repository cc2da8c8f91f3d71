use super::config::ExperimentConfig;
use super::runner::{frame_rng, Execution};
use crate::channel::{array_response, sample_channel, ArrayGeometry, ChannelState};
use crate::detectors::{egc_conditional_ber_at, egc_detect_with_threshold, egc_threshold, ml_conditional_ber, ml_ideal_detect};
use crate::glrt::estimate_channel_given_s;
use crate::oracle;
use crate::signal::{random_bits, simulate_frame, NoiseModel};
use crate::tracking::true_cell;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub type ThresholdFn = fn(f64, &NoiseModel, usize) -> Result<f64>;

/// Substitutable closed forms, so a test can inject a faulty one and watch
/// the suite catch it.
#[derive(Clone, Copy)]
pub struct ValidationHooks {
    pub egc_threshold: ThresholdFn,
}

impl Default for ValidationHooks {
    fn default() -> Self {
        ValidationHooks { egc_threshold }
    }
}

/// Sample sizes of the oracle suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationPlan {
    /// Points per axis of the EGC threshold grid.
    pub egc_grid: usize,
    pub glrt_frames: usize,
    pub glrt_grid_nodes: usize,
    pub response_draws: usize,
    pub ml_rule_frames: usize,
    /// Bits per Monte Carlo error-rate check.
    pub mc_bits: u64,
    /// Analytic error rate the Monte Carlo checks are tuned to.
    pub mc_target_ber: f64,
}

impl Default for ValidationPlan {
    fn default() -> Self {
        ValidationPlan {
            egc_grid: 5,
            glrt_frames: 100,
            glrt_grid_nodes: 10_000,
            response_draws: 1_000,
            ml_rule_frames: 10_000,
            mc_bits: 1_000_000,
            mc_target_ber: 1e-3,
        }
    }
}

impl ValidationPlan {
    pub fn quick() -> Self {
        ValidationPlan {
            egc_grid: 3,
            glrt_frames: 20,
            glrt_grid_nodes: 2_000,
            response_draws: 50,
            ml_rule_frames: 500,
            mc_bits: 200_000,
            mc_target_ber: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Informational checks are reported but do not affect the verdict.
    pub informational: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub version: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Timer(Instant);

impl Timer {
    fn start() -> Self {
        Timer(Instant::now())
    }
    fn finish(self, name: &str, measured: f64, tolerance: f64, detail: String, informational: bool) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            passed: measured.is_finite() && measured <= tolerance,
            informational,
            measured,
            tolerance,
            detail,
            seconds: self.0.elapsed().as_secs_f64(),
        }
    }
}

pub fn validate_analytics(cfg: &ExperimentConfig, plan: &ValidationPlan, exec: Execution) -> Result<ValidationReport> {
    validate_analytics_with(cfg, plan, exec, &ValidationHooks::default())
}

pub fn validate_analytics_with(
    cfg: &ExperimentConfig,
    plan: &ValidationPlan,
    exec: Execution,
    hooks: &ValidationHooks,
) -> Result<ValidationReport> {
    let point = ExperimentConfig { sweep: None, ..cfg.clone() };
    point.validate()?;
    let nm = point.derive()?.noise;
    let mut checks = vec![
        egc_threshold_check(&nm, plan, hooks),
        glrt_estimate_check(&point, plan)?,
        array_response_check(&point, plan)?,
        ml_rule_check(&point, plan)?,
    ];
    let single = ArrayGeometry {
        na: 1,
        ..point.array
    };
    // The closed form drops the n² term of the log-likelihood ratio, which is
    // accurate only while shot noise is small next to the thermal floor.
    checks.push(ml_ber_check("ml_ber_vs_mc_thermal_limited", &point, &single, 1e-3, plan, exec, false)?);
    checks.push(ml_ber_check("ml_ber_vs_mc_single_apd", &point, &single, 1.0, plan, exec, true)?);
    checks.push(ml_ber_check("ml_ber_vs_mc_array", &point, &point.array, 1.0, plan, exec, true)?);
    checks.push(egc_ber_check(&point, plan, exec, hooks)?);
    let passed = checks.iter().all(|c| c.passed || c.informational);
    Ok(ValidationReport {
        version: super::version(),
        passed,
        checks,
    })
}

/// Largest relative gap between the closed-form EGC threshold and a direct
/// search over a grid of `(h_t, σ_s², N_a)`.
fn egc_threshold_check(nm: &NoiseModel, plan: &ValidationPlan, hooks: &ValidationHooks) -> CheckResult {
    let timer = Timer::start();
    let n = plan.egc_grid.max(1);
    let pick = |lo: f64, hi: f64, k: usize| if n == 1 { lo } else { lo * (hi / lo).powf(k as f64 / (n - 1) as f64) };
    let a = nm.amplitude();
    let sigma0 = nm.sigma0_2.sqrt();
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for kn in 0..n {
        let na = pick(1.0, 16.0, kn).round() as usize;
        for ks in 0..n {
            let ss = nm.sigma_s2 * pick(1e-2, 1e2, ks);
            let model = NoiseModel { sigma_s2: ss, ..*nm };
            for kh in 0..n {
                // spans single-digit to high SNR on the combined output
                let h_t = pick(1.0, 16.0, kh) * na as f64 * sigma0 / a;
                let dev = match (hooks.egc_threshold)(h_t, &model, na) {
                    Ok(t) => {
                        let reference = oracle::egc_threshold_by_search(h_t, &model, na);
                        ((t - reference) / reference).abs()
                    }
                    Err(_) => f64::INFINITY,
                };
                if !(dev <= worst) {
                    worst = dev;
                    at = format!("na={na} sigma_s2={ss:e} h_t={h_t:e}");
                }
            }
        }
    }
    timer.finish(
        "egc_threshold_vs_argmin",
        worst,
        1e-6,
        format!("{} grid points, worst at {at}", n * n * n),
        false,
    )
}

/// A channel realisation of `cfg` whose spot lands on an active cell.
fn fixed_channel(cfg: &ExperimentConfig, geo: &ArrayGeometry, salt: u64) -> Result<ChannelState> {
    let fading = cfg.derive()?.fading;
    for k in 0..10_000 {
        let mut rng = frame_rng(cfg.seed ^ salt, k);
        let ch = sample_channel(&mut rng, &cfg.link, geo, &fading);
        if true_cell(ch.theta_x, ch.theta_y, geo).is_some() && ch.h_total() > 0.0 {
            return Ok(ch);
        }
    }
    Err(Error::DegenerateChannel("no draw put the spot on the array".into()))
}

fn glrt_estimate_check(cfg: &ExperimentConfig, plan: &ValidationPlan) -> Result<CheckResult> {
    let timer = Timer::start();
    let derived = cfg.derive()?;
    let nm = derived.noise;
    let len = cfg.glrt.window_len;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd4);
    let mut worst: f64 = 0.0;
    for _ in 0..plan.glrt_frames {
        let ch = sample_channel(&mut rng, &cfg.link, &cfg.array, &derived.fading);
        let mut bits = random_bits(&mut rng, len);
        let k = rng.random_range(0..len);
        bits[k] = 1;
        let frame = simulate_frame(&mut rng, &bits, &ch, &nm)?;
        // the brightest cell carries a well-defined estimate
        let (i, j) = ch.h.argmax();
        let cell = i * ch.na() + j;
        let r: Vec<f64> = (0..len).map(|k| frame.current(k, cell)).collect();
        let closed = estimate_channel_given_s(&r, &bits, &nm)?;
        let grid = oracle::glrt_estimate_by_grid(&r, &bits, &nm, plan.glrt_grid_nodes)?;
        let dev = if grid == 0.0 && closed == 0.0 {
            0.0
        } else {
            ((closed - grid) / grid.abs().max(closed.abs())).abs()
        };
        worst = worst.max(dev);
    }
    Ok(timer.finish(
        "glrt_estimate_vs_grid",
        worst,
        1e-6,
        format!("{} frames, {} grid nodes", plan.glrt_frames, plan.glrt_grid_nodes),
        false,
    ))
}

fn array_response_check(cfg: &ExperimentConfig, plan: &ValidationPlan) -> Result<CheckResult> {
    let timer = Timer::start();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x44);
    let mut worst: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for _ in 0..plan.response_draws {
        let geo = ArrayGeometry {
            spot_sigma: 20e-6 * 20f64.powf(rng.random::<f64>()),
            ..cfg.array
        };
        let reach = 1.2 * geo.half_fov_box();
        let tx = rng.random_range(-reach..reach);
        let ty = rng.random_range(-reach..reach);
        let h2 = array_response(tx, ty, &geo);
        for i in 0..geo.na {
            for j in 0..geo.na {
                let q = oracle::cell_mass_by_quadrature(tx, ty, &geo, i, j)?;
                worst = worst.max((h2.get(i, j) - q).abs());
            }
        }
        worst_sum = worst_sum.max(h2.sum());
    }
    let (measured, detail) = if worst_sum > 1.0 + 1e-12 {
        (f64::INFINITY, format!("entries sum to {worst_sum} > 1"))
    } else {
        (worst, format!("{} draws, largest sum {worst_sum}", plan.response_draws))
    };
    Ok(timer.finish("array_response_vs_quadrature", measured, 1e-8, detail, false))
}

fn ml_rule_check(cfg: &ExperimentConfig, plan: &ValidationPlan) -> Result<CheckResult> {
    let timer = Timer::start();
    let derived = cfg.derive()?;
    let nm = derived.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xf2);
    let mut mismatches = 0usize;
    let mut total = 0usize;
    for _ in 0..plan.ml_rule_frames {
        let ch = sample_channel(&mut rng, &cfg.link, &cfg.array, &derived.fading);
        let bits = random_bits(&mut rng, cfg.glrt.window_len);
        let frame = simulate_frame(&mut rng, &bits, &ch, &nm)?;
        let rule = ml_ideal_detect(&frame, &ch, &nm)?.bits_hat;
        let direct = oracle::ml_decide_by_likelihood(&frame, ch.h.as_slice(), &nm);
        mismatches += rule.iter().zip(&direct).filter(|(a, b)| a != b).count();
        total += rule.len();
    }
    Ok(timer.finish(
        "ml_rule_vs_likelihood",
        mismatches as f64,
        0.0,
        format!("{mismatches} of {total} decisions differ"),
        false,
    ))
}

/// Transmit power at which `ber(P_t)` equals `target`, by bisection in log power.
pub fn power_for_ber(nm: &NoiseModel, target: f64, ber: impl Fn(&NoiseModel) -> f64) -> Result<NoiseModel> {
    let at = |log_p: f64| {
        let p = 10f64.powf(log_p);
        // shot-noise coefficient scales with P_t
        NoiseModel {
            tx_power: p,
            sigma_s2: nm.sigma_s2 * p / nm.tx_power,
            ..*nm
        }
    };
    let (mut lo, mut hi) = (-9.0, 6.0);
    if ber(&at(hi)) > target || ber(&at(lo)) < target {
        return Err(Error::Numerical(format!("error rate {target} not bracketed by the power range")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ber(&at(mid)) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

/// Counts errors of `detect` over about `bits` uniformly drawn bits through a fixed channel.
fn fixed_channel_mc(
    ch: &ChannelState,
    nm: &NoiseModel,
    len: usize,
    bits: u64,
    seed: u64,
    exec: Execution,
    detect: &(dyn Fn(&crate::signal::FrameObservation) -> Result<Vec<u8>> + Sync),
) -> Result<(u64, u64)> {
    let frames = bits.div_ceil(len as u64);
    let chunks = exec.map_chunks(frames, |range| -> Result<(u64, u64)> {
        let mut errors = 0;
        let mut n = 0;
        for index in range {
            let mut rng = frame_rng(seed, index);
            let b = random_bits(&mut rng, len);
            let frame = simulate_frame(&mut rng, &b, ch, nm)?;
            let hat = detect(&frame)?;
            errors += hat.iter().zip(&b).filter(|(x, y)| x != y).count() as u64;
            n += len as u64;
        }
        Ok((errors, n))
    });
    let mut total = (0, 0);
    for c in chunks {
        let (e, n) = c?;
        total.0 += e;
        total.1 += n;
    }
    Ok(total)
}

/// Analytic ideal-ML error rate against Monte Carlo at a fixed channel and
/// the power that puts the analytic value at the plan target. `shot_scale`
/// multiplies the shot-noise coefficient.
pub fn ml_ber_check(
    name: &str,
    cfg: &ExperimentConfig,
    geo: &ArrayGeometry,
    shot_scale: f64,
    plan: &ValidationPlan,
    exec: Execution,
    informational: bool,
) -> Result<CheckResult> {
    let timer = Timer::start();
    let point = ExperimentConfig { array: *geo, ..cfg.clone() };
    let mut base = point.derive()?.noise;
    base.sigma_s2 *= shot_scale;
    let ch = fixed_channel(&point, geo, 0x3e)?;
    let nm = power_for_ber(&base, plan.mc_target_ber, |m| ml_conditional_ber(&ch, m))?;
    let analytic = ml_conditional_ber(&ch, &nm);
    let (errors, bits) = fixed_channel_mc(&ch, &nm, cfg.glrt.window_len, plan.mc_bits, cfg.seed ^ 0x3e3e, exec, &|f| {
        Ok(ml_ideal_detect(f, &ch, &nm)?.bits_hat)
    })?;
    let mc = errors as f64 / bits as f64;
    Ok(timer.finish(
        name,
        ((mc - analytic) / analytic).abs(),
        0.1,
        format!(
            "na={} shot_scale={shot_scale:e} P_t={:.4e} W analytic={analytic:.4e} monte_carlo={mc:.4e} ({errors}/{bits})",
            geo.na, nm.tx_power
        ),
        informational,
    ))
}

fn egc_ber_check(cfg: &ExperimentConfig, plan: &ValidationPlan, exec: Execution, hooks: &ValidationHooks) -> Result<CheckResult> {
    let timer = Timer::start();
    let base = cfg.derive()?.noise;
    let ch = fixed_channel(cfg, &cfg.array, 0x6b)?;
    let (h_t, na) = (ch.h_total(), ch.na());
    let hook = hooks.egc_threshold;
    let ber_at = |m: &NoiseModel| match hook(h_t, m, na) {
        Ok(t) => egc_conditional_ber_at(h_t, t, m, na),
        Err(_) => 0.5,
    };
    let nm = power_for_ber(&base, plan.mc_target_ber, ber_at)?;
    let analytic = ber_at(&nm);
    let threshold = hook(h_t, &nm, na)?;
    let (errors, bits) = fixed_channel_mc(&ch, &nm, cfg.glrt.window_len, plan.mc_bits, cfg.seed ^ 0x6b6b, exec, &|f| {
        Ok(egc_detect_with_threshold(f, threshold).bits_hat)
    })?;
    let mc = errors as f64 / bits as f64;
    Ok(timer.finish(
        "egc_ber_vs_mc",
        ((mc - analytic) / analytic).abs(),
        0.1,
        format!("na={na} P_t={:.4e} W analytic={analytic:.4e} monte_carlo={mc:.4e} ({errors}/{bits})", nm.tx_power),
        false,
    ))
}
