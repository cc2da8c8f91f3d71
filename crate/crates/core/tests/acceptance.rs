//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its verdict line even when it passes:
//!
//! ```text
//! cargo test -p fsolink --test acceptance
//! cargo test -p fsolink --test acceptance -- c10   # one criterion
//! ```

use fsolink::channel::{array_response, sample_channel, ArrayGeometry, ChannelState};
use fsolink::detectors::{egc_threshold, ml_conditional_ber, ml_ideal_detect, Scheme};
use fsolink::glrt::{estimate_channel_given_s, glrt_detect_exhaustive, glrt_detect_reduced, GlrtConfig, GlrtMode};
use fsolink::oracle;
use fsolink::signal::{random_bits, simulate_frame, Background, NoiseModel};
use fsolink::sim::{
    frame_rng, power_for_ber, results_csv, run_sweep, simulate_window, write_output, BerEstimate, Execution,
    ExperimentConfig, SweepAxis, SweepSpec, SweepResult,
};
use fsolink::tracking::{argmax_track, true_cell};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

struct Verdict {
    pass: bool,
    summary: String,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Verdict {
            pass,
            summary: summary.into(),
        }
    }
}

type Criterion = (&'static str, &'static str, f64, fn() -> Verdict);

const CRITERIA: [Criterion; 12] = [
    ("c01", "egc_threshold_vs_argmin", 10.0, c01_egc_threshold),
    ("c02", "glrt_estimate_vs_grid", 30.0, c02_glrt_estimate),
    ("c03", "array_response_vs_quadrature", 60.0, c03_array_response),
    ("c04", "ml_rule_vs_likelihood", 30.0, c04_ml_rule),
    ("c05", "ml_analytic_vs_monte_carlo", 120.0, c05_ml_analytic_vs_mc),
    ("c06", "scheme_ordering", 600.0, c06_scheme_ordering),
    ("c07", "error_floor", 600.0, c07_error_floor),
    ("c08", "window_convergence", 600.0, c08_window_convergence),
    ("c09", "array_size_optimum", 600.0, c09_array_size_optimum),
    ("c10", "reduced_search_fidelity", 600.0, c10_reduced_search),
    ("c11", "tracking", 600.0, c11_tracking),
    ("c12", "determinism_across_threads", 600.0, c12_determinism),
];

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (id, name, budget, run) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < budget;
        let pass = v.pass && in_time;
        let time_note = if in_time { String::new() } else { format!(" [over the {budget} s budget]") };
        println!(
            "{} {id} {name}: {} ({secs:.2} s, budget {budget} s){time_note}",
            if pass { "PASS" } else { "FAIL" },
            v.summary
        );
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}

fn logspace(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo * (hi / lo).powf(k as f64 / (n - 1) as f64)
    }
}

/// First channel draw of `cfg` whose spot centre lies on an active cell.
fn fixed_channel(cfg: &ExperimentConfig, salt: u64) -> ChannelState {
    let fading = cfg.derive().unwrap().fading;
    for k in 0.. {
        let mut rng = frame_rng(cfg.seed ^ salt, k);
        let ch = sample_channel(&mut rng, &cfg.link, &cfg.array, &fading);
        if true_cell(ch.theta_x, ch.theta_y, &cfg.array).is_some() && ch.h_total() > 0.0 {
            return ch;
        }
    }
    unreachable!()
}

fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> SweepResult {
    let cfg = ExperimentConfig {
        sweep: Some(SweepSpec {
            axis,
            values: values.to_vec(),
        }),
        deterministic: true,
        ..cfg.clone()
    };
    run_sweep(&cfg, Execution::from_threads(None)).unwrap()
}

fn ber(e: &BerEstimate) -> String {
    format!("{:.3e}[{:.3e},{:.3e}]", e.ber, e.ci95_lo, e.ci95_hi)
}

/// Closed-form EGC threshold against a golden-section search of the
/// conditional error rate on a 5×5×5 grid over (h_t, σ_s², N_a). The h_t axis
/// is set per array size through the thermal SNR `a h_t / (N_a σ_0)` in
/// [0.25, 16]; far below that the error rate is flat to rounding around one
/// half and no direct search resolves its minimiser.
fn c01_egc_threshold() -> Verdict {
    const TOL: f64 = 1e-6;
    let base = ExperimentConfig::default().derive().unwrap().noise;
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for a in 0..5 {
        let snr = logspace(0.25, 16.0, 5, a);
        for b in 0..5 {
            let nm = NoiseModel {
                sigma_s2: base.sigma_s2 * logspace(1e-2, 1e2, 5, b),
                ..base
            };
            for na in [1usize, 2, 4, 8, 16] {
                let h_t = snr * na as f64 * nm.sigma0_2.sqrt() / nm.amplitude();
                let closed = egc_threshold(h_t, &nm, na).unwrap();
                let search = oracle::egc_threshold_by_search(h_t, &nm, na);
                let dev = ((closed - search) / search).abs();
                if dev > worst {
                    worst = dev;
                    at = format!("snr={snr:.2} h_t={h_t:.2e} sigma_s2={:.2e} na={na}", nm.sigma_s2);
                }
            }
        }
    }
    Verdict::new(worst <= TOL, format!("worst relative gap {worst:.2e} at {at} (tol {TOL:e})"))
}

/// GLRT channel estimate against a 10⁴-node grid argmin of the per-cell
/// likelihood, for every cell of 100 random frames.
fn c02_glrt_estimate() -> Verdict {
    const TOL: f64 = 1e-6;
    let cfg = ExperimentConfig::default();
    let d = cfg.derive().unwrap();
    let nm = d.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(0xc02);
    let (mut worst, mut interior, mut boundary, mut boundary_bad) = (0.0f64, 0, 0, 0);
    for _ in 0..100 {
        let ch = sample_channel(&mut rng, &cfg.link, &cfg.array, &d.fading);
        let mut bits = random_bits(&mut rng, cfg.glrt.window_len);
        bits[0] = 1;
        let frame = simulate_frame(&mut rng, &bits, &ch, &nm).unwrap();
        for c in 0..frame.cells() {
            let r: Vec<f64> = (0..frame.len()).map(|k| frame.current(k, c)).collect();
            let closed = estimate_channel_given_s(&r, &bits, &nm).unwrap();
            let grid = oracle::glrt_estimate_by_grid(&r, &bits, &nm, 10_000).unwrap();
            if closed > 0.0 {
                interior += 1;
                worst = worst.max(((closed - grid) / closed).abs());
            } else {
                // clamped estimate: the likelihood must be increasing on h > 0
                boundary += 1;
                let f0 = oracle::glrt_cell_objective(0.0, &r, &bits, &nm);
                if oracle::glrt_cell_objective(grid, &r, &bits, &nm) < f0 - 1e-9 * f0.abs() {
                    boundary_bad += 1;
                }
            }
        }
    }
    Verdict::new(
        worst <= TOL && boundary_bad == 0,
        format!(
            "worst relative gap {worst:.2e} over {interior} interior estimates (tol {TOL:e}); \
             {boundary_bad} of {boundary} clamped estimates beaten by the grid"
        ),
    )
}

/// Per-cell spot mass against nested 2-D quadrature for 10³ random
/// (θ_x, θ_y, σ_I), plus the total-mass bound.
fn c03_array_response() -> Verdict {
    const TOL: f64 = 1e-8;
    let base = ArrayGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc03);
    let (mut worst, mut largest_sum) = (0.0f64, 0.0f64);
    for _ in 0..1_000 {
        let geo = ArrayGeometry {
            spot_sigma: 10e-6 * 50f64.powf(rng.random::<f64>()),
            ..base
        };
        let reach = 1.2 * geo.half_fov_box();
        let tx = rng.random_range(-reach..reach);
        let ty = rng.random_range(-reach..reach);
        let h2 = array_response(tx, ty, &geo);
        for i in 0..geo.na {
            for j in 0..geo.na {
                let q = oracle::cell_mass_by_quadrature(tx, ty, &geo, i, j).unwrap();
                worst = worst.max((h2.get(i, j) - q).abs());
            }
        }
        largest_sum = largest_sum.max(h2.sum());
    }
    Verdict::new(
        worst < TOL && largest_sum <= 1.0,
        format!("worst |delta| {worst:.2e} (tol {TOL:e}); largest total mass {largest_sum:.12}"),
    )
}

/// Ideal-ML per-slot rule against the direct two-hypothesis likelihood
/// comparison on 10⁴ random frames.
fn c04_ml_rule() -> Verdict {
    let cfg = ExperimentConfig::default();
    let d = cfg.derive().unwrap();
    let mut differ = 0usize;
    let mut total = 0usize;
    for index in 0..10_000 {
        let (ch, frame) = simulate_window(&cfg, &d, index).unwrap();
        let rule = ml_ideal_detect(&frame, &ch, &d.noise).unwrap().bits_hat;
        let direct = oracle::ml_decide_by_likelihood(&frame, ch.h.as_slice(), &d.noise);
        differ += rule.iter().zip(&direct).filter(|(a, b)| a != b).count();
        total += rule.len();
    }
    Verdict::new(differ == 0, format!("{differ} of {total} decisions differ"))
}

fn fixed_channel_ml_mc(ch: &ChannelState, nm: &NoiseModel, len: usize, bits: u64, seed: u64) -> (u64, u64) {
    let frames = bits.div_ceil(len as u64);
    let mut errors = 0;
    for index in 0..frames {
        let mut rng = frame_rng(seed, index);
        let b = random_bits(&mut rng, len);
        let frame = simulate_frame(&mut rng, &b, ch, nm).unwrap();
        let hat = ml_ideal_detect(&frame, ch, nm).unwrap().bits_hat;
        errors += hat.iter().zip(&b).filter(|(x, y)| x != y).count() as u64;
    }
    (errors, frames * len as u64)
}

/// Analytic ideal-ML error rate against Monte Carlo at a fixed Table I
/// channel with N_a = 6, at the power that puts the analytic value at 1e-3,
/// over 1.6·10⁶ bits.
fn c05_ml_analytic_vs_mc() -> Verdict {
    const TOL: f64 = 0.1;
    let cfg = ExperimentConfig::default();
    let ch = fixed_channel(&cfg, 0xc05);
    let base = cfg.derive().unwrap().noise;
    let mut notes = Vec::new();
    let mut verdict = None;
    for target in [1e-3, 1e-2, 1e-4] {
        let nm = power_for_ber(&base, target, |m| ml_conditional_ber(&ch, m)).unwrap();
        let analytic = ml_conditional_ber(&ch, &nm);
        let (errors, bits) = fixed_channel_ml_mc(&ch, &nm, 16, 1_600_000, 0xc05c05);
        let mc = errors as f64 / bits as f64;
        let gap = ((mc - analytic) / analytic).abs();
        notes.push(format!(
            "P_t={:.3e} W analytic={analytic:.3e} mc={mc:.3e} ({errors}/{bits}) gap={gap:.2}",
            nm.tx_power
        ));
        verdict.get_or_insert(gap <= TOL);
    }
    Verdict::new(
        verdict.unwrap(),
        format!("tol {TOL} relative at the 1e-3 point; {}", notes.join("; ")),
    )
}

/// BER_a ≤ BER_b in the sense that the intervals are compatible with it.
fn le(a: &BerEstimate, b: &BerEstimate) -> bool {
    a.ci95_lo <= b.ci95_hi
}

/// Ideal ML ≤ GLRT ≤ EGC and MRC ≤ EGC over five transmit powers at
/// Table I, L = 16, N_a = 6, σ = 2 mrad.
fn c06_scheme_ordering() -> Verdict {
    let cfg = ExperimentConfig {
        n_frames: 30_000,
        schemes: vec![Scheme::IdealMl, Scheme::GlrtReduced, Scheme::Egc, Scheme::Mrc],
        ..Default::default()
    };
    let powers = [0.0, 5.0, 10.0, 15.0, 20.0];
    let r = sweep(&cfg, SweepAxis::TxPowerDb, &powers);
    let mut ok = true;
    let mut rows = Vec::new();
    for &p in &powers {
        let get = |s| r.at(Some(p), s).unwrap();
        let (ml, glrt, egc, mrc) = (get(Scheme::IdealMl), get(Scheme::GlrtReduced), get(Scheme::Egc), get(Scheme::Mrc));
        let here = le(ml, glrt) && le(glrt, egc) && le(mrc, egc);
        ok &= here;
        rows.push(format!(
            "{p} dBm{}: ml {} glrt {} egc {} mrc {}",
            if here { "" } else { " VIOLATED" },
            ber(ml),
            ber(glrt),
            ber(egc),
            ber(mrc)
        ));
    }
    Verdict::new(ok, rows.join("; "))
}

/// At N_a = 2, the top 10 dB step of the power grid gains less than 2× at
/// σ = 10 mrad and more than 10× at σ = 2 mrad, judged on the interval
/// bounds that are least favourable to each claim.
fn c07_error_floor() -> Verdict {
    let powers = [0.0, 5.0, 10.0, 15.0, 20.0];
    let (lo_p, hi_p) = (10.0, 20.0);
    let mut ok = true;
    let mut rows = Vec::new();
    for (jitter, floor) in [(10.0, true), (2.0, false)] {
        let mut cfg = ExperimentConfig {
            n_frames: 20_000,
            schemes: vec![Scheme::IdealMl, Scheme::GlrtReduced],
            ..Default::default()
        };
        cfg.array.na = 2;
        let cfg = cfg.at(SweepAxis::AoaJitterMrad, jitter).unwrap();
        let r = sweep(&cfg, SweepAxis::TxPowerDb, &powers);
        for scheme in [Scheme::IdealMl, Scheme::GlrtReduced] {
            let (a, b) = (r.at(Some(lo_p), scheme).unwrap(), r.at(Some(hi_p), scheme).unwrap());
            let (pass, ratio) = if floor {
                let upper = a.ci95_hi / b.ci95_lo;
                (upper < 2.0, format!("gain <= {upper:.2} (need < 2)"))
            } else {
                let lower = a.ci95_lo / b.ci95_hi;
                (lower > 10.0, format!("gain >= {lower:.1} (need > 10)"))
            };
            ok &= pass;
            rows.push(format!("sigma={jitter} mrad {scheme} {lo_p}->{hi_p} dBm: {} -> {}, {ratio}", ber(a), ber(b)));
        }
    }
    Verdict::new(ok, rows.join("; "))
}

/// GLRT BER non-increasing in L over {8, 12, 16, 20, 24} and within 2× of
/// the ideal receiver at L = 20, at N_a = 10, σ = 5 mrad, P_t ∈ {5, 10} dBm.
fn c08_window_convergence() -> Verdict {
    let windows = [8.0, 12.0, 16.0, 20.0, 24.0];
    let mut ok = true;
    let mut rows = Vec::new();
    for p in [5.0, 10.0] {
        let mut cfg = ExperimentConfig {
            n_frames: 20_000,
            schemes: vec![Scheme::IdealMl, Scheme::GlrtReduced],
            ..Default::default()
        };
        cfg.array.na = 10;
        let cfg = cfg.at(SweepAxis::AoaJitterMrad, 5.0).unwrap().at(SweepAxis::TxPowerDb, p).unwrap();
        let r = sweep(&cfg, SweepAxis::WindowLen, &windows);
        let glrt = r.series(Scheme::GlrtReduced);
        let monotone = glrt.windows(2).all(|w| le(w[1], w[0]));
        let (g20, m20) = (r.at(Some(20.0), Scheme::GlrtReduced).unwrap(), r.at(Some(20.0), Scheme::IdealMl).unwrap());
        let ratio = g20.ci95_hi / m20.ci95_lo;
        ok &= monotone && ratio <= 2.0;
        let curve: Vec<String> = glrt.iter().map(|e| format!("{:.3e}", e.ber)).collect();
        rows.push(format!(
            "{p} dBm: glrt over L [{}] {}; L=20 ratio <= {ratio:.2} (glrt {} ideal {})",
            curve.join(" "),
            if monotone { "non-increasing" } else { "NOT non-increasing" },
            ber(g20),
            ber(m20)
        ));
    }
    Verdict::new(ok, rows.join("; "))
}

/// Index of the smallest point estimate; ties go to the smaller array.
fn argmin(series: &[&BerEstimate]) -> usize {
    let mut best = 0;
    for (k, e) in series.iter().enumerate() {
        if e.ber < series[best].ber {
            best = k;
        }
    }
    best
}

/// With the field-of-view-dependent background, BER against N_a has an
/// interior minimum at σ = 12 mrad that sits at a larger array than at
/// σ = 5 mrad (P_t = 20 dBm).
fn c09_array_size_optimum() -> Verdict {
    let sizes: Vec<f64> = (1..=10).map(|k| 2.0 * k as f64).collect();
    let mut ok = true;
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for jitter in [12.0, 5.0] {
        let mut cfg = ExperimentConfig {
            n_frames: 10_000,
            schemes: vec![Scheme::IdealMl, Scheme::GlrtReduced],
            ..Default::default()
        };
        cfg.electronics.background = Background::Radiance;
        let cfg = cfg.at(SweepAxis::AoaJitterMrad, jitter).unwrap().at(SweepAxis::TxPowerDb, 20.0).unwrap();
        runs.push(sweep(&cfg, SweepAxis::Na, &sizes));
    }
    for scheme in [Scheme::IdealMl, Scheme::GlrtReduced] {
        let wide = runs[0].series(scheme);
        let narrow = runs[1].series(scheme);
        let (k12, k5) = (argmin(&wide), argmin(&narrow));
        let last = wide.len() - 1;
        let interior = k12 > 0
            && k12 < last
            && wide[k12].ci95_hi < wide[0].ci95_lo
            && wide[k12].ci95_hi < wide[last].ci95_lo;
        // the σ = 12 mrad curve must be measurably worse at the σ = 5 mrad optimum
        let separated = k12 > k5 && wide[k5].ci95_lo > wide[k12].ci95_hi;
        ok &= interior && separated;
        let curve: Vec<String> = wide.iter().map(|e| format!("{:.2e}", e.ber)).collect();
        rows.push(format!(
            "{scheme}: argmin N_a {} at 12 mrad{}, {} at 5 mrad{}; 12 mrad curve [{}]",
            sizes[k12],
            if interior { " (interior)" } else { " (NOT interior)" },
            sizes[k5],
            if separated { "" } else { " (NOT separated)" },
            curve.join(" ")
        ));
    }
    Verdict::new(ok, rows.join("; "))
}

/// Reduced GLRT inside the exhaustive GLRT's 95% interval at L = 10 over 10⁵
/// frames, and at least 100× faster at L = 20.
fn c10_reduced_search() -> Verdict {
    let mut cfg = ExperimentConfig {
        n_frames: 100_000,
        deterministic: true,
        schemes: vec![Scheme::GlrtExhaustive, Scheme::GlrtReduced],
        ..Default::default()
    };
    cfg.glrt.window_len = 10;
    let r = run_sweep(&cfg, Execution::from_threads(None)).unwrap();
    let exh = r.at(None, Scheme::GlrtExhaustive).unwrap();
    let red = r.at(None, Scheme::GlrtReduced).unwrap();
    let inside = red.ber >= exh.ci95_lo && red.ber <= exh.ci95_hi;

    let long = GlrtConfig {
        window_len: 20,
        mode: GlrtMode::Exhaustive,
        ..cfg.glrt
    };
    cfg.glrt = long;
    let d = cfg.derive().unwrap();
    let frames: Vec<_> = (0..200).map(|k| simulate_window(&cfg, &d, k).unwrap().1).collect();
    let start = Instant::now();
    for f in &frames {
        std::hint::black_box(glrt_detect_reduced(f, &d.noise, &long).unwrap());
    }
    let reduced_per = start.elapsed().as_secs_f64() / frames.len() as f64;
    let start = Instant::now();
    let exhaustive_runs = 3;
    for f in &frames[..exhaustive_runs] {
        std::hint::black_box(glrt_detect_exhaustive(f, &d.noise, &long).unwrap());
    }
    let exhaustive_per = start.elapsed().as_secs_f64() / exhaustive_runs as f64;
    let speedup = exhaustive_per / reduced_per;
    Verdict::new(
        inside && speedup >= 100.0,
        format!(
            "L=10 over {} bits: reduced {:.4e} vs exhaustive {}{}; L=20 per window {:.2e} s vs {:.2e} s, speedup {speedup:.0}x (need >= 100x)",
            red.bits,
            red.ber,
            ber(exh),
            if inside { "" } else { " (OUTSIDE)" },
            reduced_per,
            exhaustive_per
        ),
    )
}

/// Brightest response cell equals the containing cell on 10⁵ channel draws,
/// and the blind argmax tracker is right on ≥ 99% of high-SNR windows whose
/// spot centre sits at least w_f inside an active area.
fn c11_tracking() -> Verdict {
    let cfg = ExperimentConfig::default();
    let d = cfg.derive().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc11);
    let (mut inside, mut broken) = (0u64, 0u64);
    for _ in 0..100_000 {
        let ch = sample_channel(&mut rng, &cfg.link, &cfg.array, &d.fading);
        if let Some(cell) = true_cell(ch.theta_x, ch.theta_y, &cfg.array) {
            inside += 1;
            broken += (ch.h.argmax() != cell) as u64;
        }
    }

    let mut hot = ExperimentConfig {
        n_frames: 1,
        ..Default::default()
    };
    hot.glrt.window_len = 32;
    let hot = hot.at(SweepAxis::TxPowerDb, 30.0).unwrap();
    let hd = hot.derive().unwrap();
    let geo = &hot.array;
    let margin_ok = |x: f64| match geo.cell_containing(x) {
        Some(i) => {
            let (lo, hi) = geo.cell_bounds(i);
            x - lo >= geo.dead_space && hi - x >= geo.dead_space
        }
        None => false,
    };
    let (mut judged, mut correct, mut index) = (0u64, 0u64, 0u64);
    while judged < 10_000 {
        let (ch, frame) = simulate_window(&hot, &hd, index).unwrap();
        index += 1;
        let (x, y) = (geo.focal_length * ch.theta_x, geo.focal_length * ch.theta_y);
        if !(margin_ok(x) && margin_ok(y)) || frame.bits().iter().all(|&b| b == 0) {
            continue;
        }
        let (i, j) = true_cell(ch.theta_x, ch.theta_y, geo).unwrap();
        let report = argmax_track(&frame, geo).unwrap();
        judged += 1;
        correct += ((report.cell_i, report.cell_j) == (i + 1, j + 1)) as u64;
    }
    let rate = correct as f64 / judged as f64;
    Verdict::new(
        broken == 0 && rate >= 0.99,
        format!(
            "proposition violated on {broken} of {inside} on-array draws; argmax correct {correct}/{judged} = {rate:.4} (need >= 0.99)"
        ),
    )
}

/// results.csv written from one worker and from several is byte-identical.
fn c12_determinism() -> Verdict {
    let mut cfg = ExperimentConfig {
        n_frames: 3_000,
        deterministic: true,
        schemes: Scheme::ALL.to_vec(),
        sweep: Some(SweepSpec {
            axis: SweepAxis::TxPowerDb,
            values: vec![5.0, 12.0],
        }),
        ..Default::default()
    };
    cfg.glrt.window_len = 8;
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (label, exec) in [
        ("one", Execution::Sequential),
        ("four", Execution::Parallel { threads: Some(4) }),
        ("pool", Execution::Parallel { threads: None }),
    ] {
        let r = run_sweep(&cfg, exec).unwrap();
        let path = write_output(&dir.path().join(label), "results.csv", &results_csv(&r.records)).unwrap();
        files.push(std::fs::read(path).unwrap());
    }
    let same = files.windows(2).all(|w| w[0] == w[1]);
    Verdict::new(
        same,
        format!("{} bytes per file, 1 / 4 / default workers {}", files[0].len(), if same { "identical" } else { "DIFFER" }),
    )
}
