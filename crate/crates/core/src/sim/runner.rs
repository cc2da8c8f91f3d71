use super::config::{Derived, ExperimentConfig};
use super::stats::BerEstimate;
use crate::channel::{sample_channel, ChannelState};
use crate::detectors::{egc_conditional_ber, egc_detect, egc_detect_with_threshold, ml_conditional_ber, ml_ideal_detect, mrc_detect, Scheme};
use crate::glrt::{glrt_detect_exhaustive, glrt_detect_reduced};
use crate::signal::{random_bits, simulate_frame, FrameObservation};
use crate::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::time::Instant;

/// Frames per work unit. Fixed so the reduction order, and therefore every
/// floating-point sum, does not depend on the number of workers.
const CHUNK: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon worker pool; `None` uses the global pool. Without the
    /// `parallel` feature this runs sequentially.
    Parallel { threads: Option<usize> },
}

impl Execution {
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(1) => Execution::Sequential,
            t => Execution::Parallel { threads: t },
        }
    }

    /// Runs `work` on every chunk of `0..n` and returns the results in chunk order.
    pub fn map_chunks<T, F>(&self, n: u64, work: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<u64>) -> T + Sync + Send,
    {
        let chunks = n.div_ceil(CHUNK);
        let range = move |c: u64| c * CHUNK..((c + 1) * CHUNK).min(n);
        match self {
            Execution::Sequential => (0..chunks).map(|c| work(range(c))).collect(),
            Execution::Parallel { threads } => parallel_map(*threads, chunks, |c| work(range(c))),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T: Send, F: Fn(u64) -> T + Sync + Send>(threads: Option<usize>, chunks: u64, f: F) -> Vec<T> {
    use rayon::prelude::*;
    let run = || (0..chunks).into_par_iter().map(&f).collect();
    match threads {
        None => run(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T: Send, F: Fn(u64) -> T + Sync + Send>(_threads: Option<usize>, chunks: u64, f: F) -> Vec<T> {
    (0..chunks).map(f).collect()
}

/// Random stream of frame `index`: the experiment seed selects the key and
/// the frame index selects the stream, so any frame can be regenerated alone.
pub fn frame_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One simulated window: the channel it saw and the received frame.
pub fn simulate_window(cfg: &ExperimentConfig, derived: &Derived, index: u64) -> Result<(ChannelState, FrameObservation)> {
    let mut rng = frame_rng(cfg.seed, index);
    let ch = sample_channel(&mut rng, &cfg.link, &cfg.array, &derived.fading);
    let bits = random_bits(&mut rng, cfg.glrt.window_len);
    let frame = simulate_frame(&mut rng, &bits, &ch, &derived.noise)?;
    Ok((ch, frame))
}

#[derive(Debug, Clone, Default)]
struct SchemeTally {
    errors: u64,
    bits: u64,
    nanos: u128,
}

#[derive(Debug, Clone)]
struct Tally {
    schemes: Vec<SchemeTally>,
    frames: u64,
    all_zero_windows: u64,
    clamped_cells: u64,
    analytic_ml: f64,
    analytic_egc: f64,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally {
            schemes: vec![SchemeTally::default(); n],
            frames: 0,
            all_zero_windows: 0,
            clamped_cells: 0,
            analytic_ml: 0.0,
            analytic_egc: 0.0,
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.schemes.iter_mut().zip(&other.schemes) {
            a.errors += b.errors;
            a.bits += b.bits;
            a.nanos += b.nanos;
        }
        self.frames += other.frames;
        self.all_zero_windows += other.all_zero_windows;
        self.clamped_cells += other.clamped_cells;
        self.analytic_ml += other.analytic_ml;
        self.analytic_egc += other.analytic_egc;
    }
}

/// Per-point diagnostics reported next to the BER records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub axis: String,
    pub axis_value: Option<f64>,
    pub frames: u64,
    /// Windows whose transmitted bits were all zero.
    pub all_zero_windows: u64,
    /// GLRT channel estimates clamped at zero, over all cells and frames.
    pub glrt_clamped_cells: u64,
    pub background_power_w: f64,
    pub tx_power_w: f64,
    pub rytov_variance: Option<f64>,
    /// Frame average of the analytic ideal-ML error rate.
    pub analytic_ideal_ml: f64,
    /// Frame average of the analytic EGC error rate.
    pub analytic_egc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub estimates: Vec<BerEstimate>,
    pub summary: PointSummary,
}

impl PointResult {
    pub fn get(&self, scheme: Scheme) -> Option<&BerEstimate> {
        self.estimates.iter().find(|e| e.scheme == scheme)
    }
}

fn run_frame(cfg: &ExperimentConfig, derived: &Derived, index: u64, tally: &mut Tally) -> Result<()> {
    let (ch, frame) = simulate_window(cfg, derived, index)?;
    let nm = &derived.noise;
    let len = frame.len() as u64;
    let bits = frame.bits();
    let all_zero = bits.iter().all(|&b| b == 0);
    tally.frames += 1;
    tally.all_zero_windows += all_zero as u64;
    tally.analytic_ml += ml_conditional_ber(&ch, nm);
    tally.analytic_egc += egc_conditional_ber(ch.h_total(), nm, ch.na());
    for (slot, scheme) in cfg.schemes.iter().enumerate() {
        let start = Instant::now();
        let errors = match scheme {
            Scheme::IdealMl => ml_ideal_detect(&frame, &ch, nm)?.bit_errors(bits) as u64,
            Scheme::Egc => {
                let h_t = ch.h_total();
                let d = if h_t > 0.0 {
                    egc_detect(&frame, h_t, nm)?
                } else {
                    egc_detect_with_threshold(&frame, f64::INFINITY)
                };
                d.bit_errors(bits) as u64
            }
            Scheme::Mrc => mrc_detect(&frame, &ch, nm)?.bit_errors(bits) as u64,
            Scheme::GlrtExhaustive | Scheme::GlrtReduced => {
                if all_zero {
                    // no nonzero candidate can match; charged as a coin toss per bit
                    len.div_ceil(2)
                } else {
                    let d = if *scheme == Scheme::GlrtExhaustive {
                        glrt_detect_exhaustive(&frame, nm, &cfg.glrt)?
                    } else {
                        glrt_detect_reduced(&frame, nm, &cfg.glrt)?
                    };
                    tally.clamped_cells += d.clamped_cells as u64;
                    d.result.bit_errors(bits) as u64
                }
            }
        };
        let t = &mut tally.schemes[slot];
        t.nanos += start.elapsed().as_nanos();
        t.errors += errors;
        t.bits += len;
    }
    Ok(())
}

/// Monte Carlo estimate at one operating point (the sweep, if any, is ignored).
pub fn run_point(cfg: &ExperimentConfig, exec: Execution) -> Result<PointResult> {
    run_point_labelled(cfg, exec, "none", None)
}

pub(crate) fn run_point_labelled(cfg: &ExperimentConfig, exec: Execution, axis: &str, axis_value: Option<f64>) -> Result<PointResult> {
    let point = ExperimentConfig { sweep: None, ..cfg.clone() };
    point.validate()?;
    let derived = point.derive()?;
    let n_schemes = point.schemes.len();
    let chunks = exec.map_chunks(point.n_frames as u64, |range| -> Result<Tally> {
        let mut t = Tally::new(n_schemes);
        for index in range {
            run_frame(&point, &derived, index, &mut t)?;
        }
        Ok(t)
    });
    let mut total = Tally::new(n_schemes);
    for c in chunks {
        total.merge(&c?);
    }
    let estimates = point
        .schemes
        .iter()
        .zip(&total.schemes)
        .map(|(&scheme, t)| {
            let wall = if point.deterministic { 0.0 } else { t.nanos as f64 * 1e-9 };
            BerEstimate::new(scheme, axis, axis_value, t.bits, t.errors, total.frames, wall)
        })
        .collect();
    let frames = total.frames as f64;
    Ok(PointResult {
        estimates,
        summary: PointSummary {
            axis: axis.to_string(),
            axis_value,
            frames: total.frames,
            all_zero_windows: total.all_zero_windows,
            glrt_clamped_cells: total.clamped_cells,
            background_power_w: derived.background_power,
            tx_power_w: point.electronics.tx_power,
            rytov_variance: derived.rytov_variance,
            analytic_ideal_ml: total.analytic_ml / frames,
            analytic_egc: total.analytic_egc / frames,
        },
    })
}

/// Experiment output: BER records, per-point diagnostics and the config echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub version: String,
    pub config: ExperimentConfig,
    pub records: Vec<BerEstimate>,
    pub points: Vec<PointSummary>,
}

impl SweepResult {
    pub fn at(&self, axis_value: Option<f64>, scheme: Scheme) -> Option<&BerEstimate> {
        self.records
            .iter()
            .find(|r| r.scheme == scheme && r.axis_value == axis_value)
    }

    /// Records of one scheme, in sweep order.
    pub fn series(&self, scheme: Scheme) -> Vec<&BerEstimate> {
        self.records.iter().filter(|r| r.scheme == scheme).collect()
    }
}

/// Runs every sweep point, or the single configured point without a sweep.
pub fn run_sweep(cfg: &ExperimentConfig, exec: Execution) -> Result<SweepResult> {
    cfg.validate()?;
    let axis = cfg.sweep.as_ref().map_or("none", |s| s.axis.as_str());
    let mut records = Vec::new();
    let mut points = Vec::new();
    for (value, point_cfg) in cfg.points()? {
        let p = run_point_labelled(&point_cfg, exec, axis, value)?;
        records.extend(p.estimates);
        points.push(p.summary);
    }
    Ok(SweepResult {
        version: super::version(),
        config: cfg.clone(),
        records,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::{SweepAxis, SweepSpec};

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_frames: 300,
            schemes: Scheme::ALL.to_vec(),
            glrt: crate::glrt::GlrtConfig {
                window_len: 8,
                ..Default::default()
            },
            array: crate::channel::ArrayGeometry {
                na: 3,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn chunk_map_preserves_order() {
        for exec in [Execution::Sequential, Execution::Parallel { threads: Some(3) }] {
            let v = exec.map_chunks(200, |r| r.start);
            assert_eq!(v, vec![0, 64, 128, 192]);
        }
        assert!(Execution::Sequential.map_chunks(0, |r| r.start).is_empty());
    }

    #[test]
    fn frame_streams_are_independent_of_order() {
        let cfg = small();
        let d = cfg.derive().unwrap();
        let (_, a) = simulate_window(&cfg, &d, 17).unwrap();
        let (_, _) = simulate_window(&cfg, &d, 3).unwrap();
        let (_, b) = simulate_window(&cfg, &d, 17).unwrap();
        assert_eq!(a, b);
        let (_, c) = simulate_window(&cfg, &d, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let mut cfg = small();
        cfg.deterministic = true;
        let s = run_point(&cfg, Execution::Sequential).unwrap();
        let p = run_point(&cfg, Execution::Parallel { threads: Some(4) }).unwrap();
        assert_eq!(s, p);
        for e in &s.estimates {
            assert_eq!(e.bits, 300 * 8);
            assert_eq!(e.wall_s, 0.0);
        }
    }

    #[test]
    fn zero_frames_rejected() {
        let cfg = ExperimentConfig {
            n_frames: 0,
            ..small()
        };
        assert!(run_point(&cfg, Execution::Sequential).is_err());
    }

    #[test]
    fn all_zero_windows_are_counted_and_charged() {
        let mut cfg = small();
        cfg.glrt.window_len = 2;
        cfg.n_frames = 400;
        cfg.schemes = vec![Scheme::GlrtReduced];
        let p = run_point(&cfg, Execution::Sequential).unwrap();
        // about a quarter of two-bit windows are all zero
        let z = p.summary.all_zero_windows;
        assert!(z > 60 && z < 140, "{z}");
        assert!(p.estimates[0].errors >= z);
    }

    #[test]
    fn sweep_labels_records() {
        let mut cfg = small();
        cfg.n_frames = 64;
        cfg.schemes = vec![Scheme::Egc];
        cfg.sweep = Some(SweepSpec {
            axis: SweepAxis::TxPowerDb,
            values: vec![0.0, 20.0],
        });
        let r = run_sweep(&cfg, Execution::Sequential).unwrap();
        assert_eq!(r.records.len(), 2);
        assert_eq!(r.records[1].axis, "tx_power_dB");
        assert_eq!(r.records[1].axis_value, Some(20.0));
        assert!(r.at(Some(0.0), Scheme::Egc).is_some());
        assert_eq!(r.points[1].tx_power_w, 0.1);
    }
}
