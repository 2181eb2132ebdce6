//! Command-line surface: deterministic CSV sweeps of displacement-estimation
//! errors and a self-contained validation report.

mod commands;
mod config;
mod validate;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cmd_bounds, cmd_curve, cmd_fisher_sweep, cmd_loss_sweep, cmd_window};
use config::{Ancilla, Family, Outcome, PriorSpec, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "dispest",
    version,
    about = "Bayesian error sweeps for Gaussian random displacement estimation"
)]
struct Cli {
    /// Scenario file with `key = value` lines (see README for the schema).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write CSV data here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for Monte-Carlo and randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fock-basis truncation for operator-backed scenarios.
    #[arg(long, global = true)]
    ncut: Option<usize>,

    /// Relative tolerance for cross-check quadratures.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical and Gaussian lower bounds over a prior-variance grid.
    Bounds {
        #[arg(long, default_value_t = 0.05)]
        v_min: f64,
        #[arg(long, default_value_t = 10.0)]
        v_max: f64,
        #[arg(long, default_value_t = 60)]
        points: usize,
        /// Linear instead of logarithmic grid spacing.
        #[arg(long)]
        linear: bool,
    },
    /// Post-selected (or Bayes-averaged) error curve for one scenario.
    Curve {
        /// Probe family: fock:N | lossy:L | gaussian:A | gkp.
        #[arg(long)]
        probe: Option<Family>,
        /// Ancilla family, or `same`.
        #[arg(long)]
        ancilla: Option<Ancilla>,
        /// Conditioning: `YX,YP`, `bayes`, or `window:R`.
        #[arg(long)]
        outcome: Option<Outcome>,
        #[arg(long)]
        v_min: Option<f64>,
        #[arg(long)]
        v_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        linear: bool,
    },
    /// Lossy single-photon error surface plus bound-beating thresholds.
    LossSweep {
        #[arg(long, default_value_t = 0.0)]
        l_min: f64,
        #[arg(long, default_value_t = 0.6)]
        l_max: f64,
        #[arg(long, default_value_t = 13)]
        l_points: usize,
        #[arg(long, default_value_t = 0.05)]
        v_min: f64,
        #[arg(long, default_value_t = 10.0)]
        v_max: f64,
        #[arg(long, default_value_t = 60)]
        v_points: usize,
    },
    /// Information gain and outcome probability against photon number.
    FisherSweep {
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 30)]
        n_max: usize,
    },
    /// Windowed post-selection trade-off at fixed prior variance.
    Window {
        /// Prior variance; figures of interest use 0.5, 1.0 and 1.5.
        #[arg(long, default_value_t = 0.5)]
        v: f64,
        #[arg(long, default_value_t = 0.1)]
        r_min: f64,
        #[arg(long, default_value_t = 8.0)]
        r_max: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
    },
    /// Run the golden-value and property suite; exit nonzero on any failure.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(threads) = std::env::var("DISPEST_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        } else {
            eprintln!("warning: ignoring unparsable DISPEST_THREADS = {threads}");
        }
    }

    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    // Scenario defaults come from the config file when given; dedicated
    // flags override individual fields.
    let mut scenario = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?
            .parse::<ScenarioConfig>()?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(ncut) = cli.ncut {
        scenario.n_cut = ncut;
    }
    if let Some(tol) = cli.tol {
        scenario.tol = tol;
    }

    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(
            File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    };

    match cli.command {
        Command::Bounds {
            v_min,
            v_max,
            points,
            linear,
        } => {
            check_grid("v", v_min, v_max, points)?;
            let grid = commands::default_v_grid(v_min, v_max, points, linear);
            cmd_bounds(sink.as_mut(), &grid)?;
        }
        Command::Curve {
            probe,
            ancilla,
            outcome,
            v_min,
            v_max,
            points,
            linear,
        } => {
            if let Some(p) = probe {
                scenario.probe = p;
            }
            if let Some(a) = ancilla {
                scenario.ancilla = a;
            }
            if let Some(o) = outcome {
                scenario.outcome = o;
            }
            if v_min.is_some() || v_max.is_some() || points.is_some() || linear {
                let (dmin, dmax, dpoints) = match scenario.prior {
                    PriorSpec::Sweep {
                        min, max, points, ..
                    } => (min, max, points),
                    PriorSpec::Single(v) => (v, v * 10.0, 60),
                };
                scenario.prior = PriorSpec::Sweep {
                    min: v_min.unwrap_or(dmin),
                    max: v_max.unwrap_or(dmax),
                    points: points.unwrap_or(dpoints),
                    log: !linear,
                };
            }
            cmd_curve(sink.as_mut(), &scenario)?;
        }
        Command::LossSweep {
            l_min,
            l_max,
            l_points,
            v_min,
            v_max,
            v_points,
        } => {
            check_grid("v", v_min, v_max, v_points)?;
            if !(0.0..=1.0).contains(&l_min) || !(0.0..=1.0).contains(&l_max) || l_max <= l_min {
                return Err(format!("loss grid [{l_min}, {l_max}] must sit inside [0, 1]"));
            }
            if l_points < 2 {
                return Err("need at least two loss grid points".into());
            }
            let l_grid = commands::linear_grid(l_min, l_max, l_points);
            let v_grid = commands::default_v_grid(v_min, v_max, v_points, false);
            let mut report = io::stderr().lock();
            cmd_loss_sweep(sink.as_mut(), &mut report, &l_grid, &v_grid)?;
        }
        Command::FisherSweep { v, n_max } => {
            if v <= 0.0 {
                return Err(format!("prior variance must be positive, got {v}"));
            }
            cmd_fisher_sweep(sink.as_mut(), v, n_max)?;
        }
        Command::Window {
            v,
            r_min,
            r_max,
            points,
        } => {
            if v <= 0.0 {
                return Err(format!("prior variance must be positive, got {v}"));
            }
            check_grid("r", r_min, r_max, points)?;
            let r_grid = commands::linear_grid(r_min, r_max, points);
            cmd_window(sink.as_mut(), &scenario, v, &r_grid)?;
        }
        Command::Validate => {
            let failures = validate::run(
                sink.as_mut(),
                scenario.seed,
                scenario.n_cut,
                scenario.tol,
            );
            if failures > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn check_grid(name: &str, min: f64, max: f64, points: usize) -> Result<(), String> {
    if !(min > 0.0 && max > min && min.is_finite() && max.is_finite()) {
        return Err(format!(
            "{name} grid needs 0 < {name}_min < {name}_max, got [{min}, {max}]"
        ));
    }
    if points < 2 {
        return Err(format!("{name} grid needs at least two points"));
    }
    Ok(())
}
