use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fsolink::detectors::Scheme;
use fsolink::sim::{
    results_csv, run_sweep, run_track, to_json, validate_analytics, write_output, Execution, ExperimentConfig, SweepAxis,
    SweepSpec, ValidationPlan,
};
use log::info;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

#[derive(Parser)]
#[command(name = "fsolink", version = fsolink_version(), about = "Monte Carlo simulator for ground-to-CubeSat optical links with an APD-array receiver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error rate of every enabled scheme at a single operating point.
    Ber {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Error rates along one sweep axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
        /// Sweep axis: tx_power_dB, window_L, na or aoa_jitter_mrad.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Blind beam-spot tracking; writes track.json.
    Track {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Check the closed forms against independent numerical oracles.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Smaller sample sizes, for smoke testing.
        #[arg(long)]
        quick: bool,
    },
    /// Print the effective configuration, defaults included, as TOML.
    ConfigPrint {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated observation windows per point.
    #[arg(long)]
    frames: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "fsolink-out")]
    out: PathBuf,
    /// Worker threads (1 runs sequentially).
    #[arg(long)]
    threads: Option<usize>,
    /// Zero the wall-time columns so repeated runs are byte-identical.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct PointArgs {
    /// Comma-separated schemes: ideal_ml, egc, mrc, glrt_exhaustive, glrt_reduced.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Transmit power in the configured power reference (dBm by default).
    #[arg(long, allow_hyphen_values = true)]
    tx_power_db: Option<f64>,
    /// Array side length.
    #[arg(long)]
    na: Option<usize>,
    /// Observation window length L.
    #[arg(long)]
    window: Option<usize>,
    /// AoA jitter standard deviation on both axes, mrad.
    #[arg(long)]
    aoa_jitter_mrad: Option<f64>,
}

fn fsolink_version() -> &'static str {
    static VERSION: OnceLock<String> = OnceLock::new();
    VERSION.get_or_init(|| {
        let v = fsolink::sim::version();
        v.strip_prefix("fsolink ").map(str::to_string).unwrap_or(v)
    })
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: error.into() }
    }
}

impl From<fsolink::Error> for Failure {
    fn from(e: fsolink::Error) -> Self {
        let code = match e {
            fsolink::Error::Config { .. } | fsolink::Error::WindowTooLong { .. } => 2,
            _ => 1,
        };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn load(common: &Common, point: Option<&PointArgs>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::config)?;
            ExperimentConfig::from_toml_str(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(f) = common.frames {
        cfg.n_frames = f;
    }
    if let Some(t) = common.threads {
        cfg.threads = Some(t);
    }
    cfg.deterministic |= common.deterministic;
    if let Some(p) = point {
        if let Some(names) = &p.schemes {
            cfg.schemes = names
                .iter()
                .map(|n| n.trim().parse::<Scheme>())
                .collect::<Result<_, _>>()?;
        }
        if let Some(db) = p.tx_power_db {
            cfg = set_axis(cfg, SweepAxis::TxPowerDb, db)?;
        }
        if let Some(na) = p.na {
            cfg.array.na = na;
        }
        if let Some(l) = p.window {
            cfg.glrt.window_len = l;
        }
        if let Some(j) = p.aoa_jitter_mrad {
            cfg = set_axis(cfg, SweepAxis::AoaJitterMrad, j)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Applies a single axis value while keeping any configured sweep.
fn set_axis(cfg: ExperimentConfig, axis: SweepAxis, value: f64) -> fsolink::Result<ExperimentConfig> {
    let mut c = cfg.at(axis, value)?;
    c.sweep = cfg.sweep;
    Ok(c)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = write_output(dir, name, contents)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn print_table(records: &[fsolink::sim::BerEstimate]) {
    println!("{:<16} {:>12} {:>12} {:>12} {:>12} {:>12}", "scheme", "axis_value", "ber", "ci95_lo", "ci95_hi", "errors");
    for r in records {
        let v = r.axis_value.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:<16} {:>12} {:>12.4e} {:>12.4e} {:>12.4e} {:>12}",
            r.scheme.as_str(), v, r.ber, r.ci95_lo, r.ci95_hi, r.errors
        );
    }
}

fn experiment(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let result = run_sweep(cfg, Execution::from_threads(cfg.threads))?;
    write(out, "results.csv", &results_csv(&result.records))?;
    write(out, "results.json", &to_json(&result)?)?;
    print_table(&result.records);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ber { common, point } => {
            let mut cfg = load(&common, Some(&point))?;
            cfg.sweep = None;
            experiment(&cfg, &common.out)
        }
        Command::Sweep {
            common,
            point,
            axis,
            values,
        } => {
            let mut cfg = load(&common, Some(&point))?;
            match (axis, values) {
                (Some(a), Some(v)) => {
                    cfg.sweep = Some(SweepSpec {
                        axis: a.parse()?,
                        values: v,
                    })
                }
                (Some(a), None) => {
                    let values = cfg.sweep.take().map(|s| s.values).unwrap_or_default();
                    cfg.sweep = Some(SweepSpec { axis: a.parse()?, values });
                }
                (None, Some(v)) => match cfg.sweep.as_mut() {
                    Some(s) => s.values = v,
                    None => return Err(Failure::config(anyhow::anyhow!("--values needs --axis or a [sweep] section"))),
                },
                (None, None) => {}
            }
            if cfg.sweep.is_none() {
                return Err(Failure::config(anyhow::anyhow!(
                    "sweep needs --axis and --values or a [sweep] section in the config"
                )));
            }
            cfg.validate()?;
            experiment(&cfg, &common.out)
        }
        Command::Track { common, point } => {
            let cfg = load(&common, Some(&point))?;
            let run = run_track(&cfg, Execution::from_threads(cfg.threads))?;
            write(&common.out, "track.json", &to_json(&run)?)?;
            println!(
                "frames {}  boundary {}  correct_rate {:.4}",
                run.frames, run.boundary_frames, run.correct_rate
            );
            Ok(())
        }
        Command::Validate { common, quick } => {
            let cfg = load(&common, None)?;
            let plan = if quick { ValidationPlan::quick() } else { ValidationPlan::default() };
            let report = validate_analytics(&cfg, &plan, Execution::from_threads(cfg.threads))?;
            write(&common.out, "validate.json", &to_json(&report)?)?;
            for c in &report.checks {
                let verdict = match (c.passed, c.informational) {
                    (true, _) => "PASS",
                    (false, true) => "INFO",
                    (false, false) => "FAIL",
                };
                println!(
                    "{verdict} {:<30} measured {:.3e} tol {:.1e} ({:.2} s) {}",
                    c.name, c.measured, c.tolerance, c.seconds, c.detail
                );
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure {
                    code: 3,
                    error: anyhow::anyhow!("oracle checks failed"),
                })
            }
        }
        Command::ConfigPrint { common, point } => {
            let cfg = load(&common, Some(&point))?;
            print!("{}", cfg.to_toml_string()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
