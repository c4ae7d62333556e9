//! `dglab` — reproducible experiments on the De Gregorio model around the
//! first excited state.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use degregorio::linear::{self, InitialData};
use degregorio::nonlinear::{Dealias, InstabilityOptions, SolverConfig};
use degregorio_cli::commands::{self, CommandOutput};
use degregorio_cli::UsageError;

const EXIT_VERDICT_FAILED: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "dglab", version, about = "Numerical laboratory for the De Gregorio model on the torus", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Stream the RunRecord JSON to standard output.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Grid size (power of two).
    #[arg(long = "M", default_value_t = 512)]
    m: usize,
    /// Retained frequencies.
    #[arg(long, default_value_t = 170)]
    modes: usize,
    /// Time step.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Transport parameter (1 = De Gregorio, 0 = CLM).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Disable the two-thirds dealiasing rule.
    #[arg(long)]
    no_dealias: bool,
    /// Record diagnostics every this many steps.
    #[arg(long, default_value_t = 10)]
    sample_every: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            m: self.m,
            modes: self.modes,
            dt: self.dt,
            a: self.a,
            dealias: if self.no_dealias {
                Dealias::None
            } else {
                Dealias::TwoThirds
            },
            sample_every: self.sample_every,
        }
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Exact coefficient records; `--table` writes the full CSV table.
    Coeffs {
        /// Index of the record to print.
        #[arg(long)]
        k: Option<u32>,
        /// Emit a table for k = 1..kmax instead of one record.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        kmax: Option<u32>,
        /// Table output path (CSV); plot panels land next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the eigenvalue and coefficient brackets in exact arithmetic.
    VerifyBounds {
        #[arg(long)]
        kmax: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the truncated linear chain.
    EvolveLinear {
        /// Initial-data spec (JSON: {"kind": ..., "amplitudes": {...}}).
        #[arg(long)]
        init: PathBuf,
        #[arg(long = "T")]
        t_final: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Chain truncation.
        #[arg(long = "N", default_value_t = 256)]
        n: usize,
        /// Keep a state snapshot every this many steps (0 = endpoints).
        #[arg(long, default_value_t = 0)]
        snap_every: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the full model or the perturbation system.
    EvolveNonlinear {
        /// Solver config JSON (defaults when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        init: PathBuf,
        #[arg(long = "T")]
        t_final: f64,
        /// State vector: perturbation (tilde-backed) or vorticity.
        #[arg(long, default_value = "perturbation")]
        formulation: String,
        /// Keep a spectral snapshot every this many samples (0 = endpoints).
        #[arg(long, default_value_t = 0)]
        snap_every: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Canned stability / instability experiments.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentKind,
    },
    /// Cross-validation against the reference oracle, and run comparison.
    Verify {
        /// Run the oracle cross-check suite.
        #[arg(long)]
        cross_check: bool,
        /// Compare the CSVs of two run directories.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Option<Vec<PathBuf>>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExperimentKind {
    /// Even-family decay toward the steady state.
    Stability {
        #[arg(long, default_value_t = 0.01)]
        amplitude: f64,
        /// Even tilde indices, comma separated.
        #[arg(long, default_value = "2", value_delimiter = ',')]
        modes_set: Vec<u32>,
        #[arg(long = "T", default_value_t = 20.0)]
        t_final: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scaled two-mode family escaping the steady state.
    Instability {
        /// Scaling factors, comma separated.
        #[arg(long, default_value = "1e-2,1e-3,1e-4", value_delimiter = ',')]
        epsilons: Vec<f64>,
        /// Amplitude of the first tilde mode.
        #[arg(long, default_value_t = 1.0)]
        a1: f64,
        /// Second mode index.
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Amplitude of the second mode; defaults to the middle of the
        /// admissibility window.
        #[arg(long)]
        ak: Option<f64>,
        /// Position inside the admissibility window when --ak is omitted.
        #[arg(long, default_value_t = 0.5)]
        window_pos: f64,
        /// Growth threshold on the weighted-norm ratio.
        #[arg(long = "K", default_value_t = 10.0)]
        threshold: f64,
        #[arg(long, default_value_t = 60.0)]
        t_max: f64,
        /// Also cross-check this scaling factor against the linear chain.
        #[arg(long)]
        linear_check: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: &Cli) -> anyhow::Result<CommandOutput> {
    match &cli.verb {
        Verb::Coeffs { k, table, kmax, out } => {
            if *table {
                let kmax = kmax.ok_or_else(|| UsageError("--table needs --kmax".into()))?;
                let out = out
                    .as_deref()
                    .ok_or_else(|| UsageError("--table needs --out <path.csv>".into()))?;
                commands::coeffs_table(kmax, out)
            } else {
                let k = k.ok_or_else(|| UsageError("need --k <k> or --table".into()))?;
                commands::coeffs_single(k, cli.json)
            }
        }
        Verb::VerifyBounds { kmax, out } => {
            commands::verify_bounds(*kmax, out.as_deref(), cli.json)
        }
        Verb::EvolveLinear {
            init,
            t_final,
            dt,
            n,
            snap_every,
            out,
        } => commands::evolve_linear(init, *t_final, *dt, *n, *snap_every, out),
        Verb::EvolveNonlinear {
            config,
            init,
            t_final,
            formulation,
            snap_every,
            out,
        } => commands::evolve_nonlinear(
            config.as_deref(),
            init,
            *t_final,
            formulation,
            *snap_every,
            out,
        ),
        Verb::Experiment { kind } => match kind {
            ExperimentKind::Stability {
                amplitude,
                modes_set,
                t_final,
                solver,
                out,
            } => commands::experiment_stability(*amplitude, modes_set, *t_final, &solver.config(), out),
            ExperimentKind::Instability {
                epsilons,
                a1,
                k,
                ak,
                window_pos,
                threshold,
                t_max,
                linear_check,
                solver,
                out,
            } => {
                let ak = match ak {
                    Some(v) => *v,
                    None => {
                        if !(0.0..=1.0).contains(window_pos) {
                            return Err(UsageError("--window-pos must be in [0, 1]".into()).into());
                        }
                        let (lo, hi) = linear::two_mode_window(*k, *a1);
                        (lo + window_pos * (hi - lo)).sqrt()
                    }
                };
                let init = InitialData::two_mode(*a1, *k, ak, true);
                let opts = InstabilityOptions {
                    epsilons: epsilons.clone(),
                    threshold: *threshold,
                    t_max: *t_max,
                    linear_check: *linear_check,
                };
                commands::experiment_instability(&init, &opts, &solver.config(), out)
            }
        },
        Verb::Verify {
            cross_check,
            compare,
            seed,
            out,
        } => {
            if let Some(pair) = compare {
                commands::verify_compare(&pair[0], &pair[1])
            } else if *cross_check {
                commands::verify_cross_check(*seed, out.as_deref())
            } else {
                Err(UsageError("verify needs --cross-check or --compare A B".into()).into())
            }
        }
    }
}

fn main() -> ExitCode {
    // behave like a unix filter when stdout is closed early (e.g. `| head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(output) => {
            if cli.json {
                match serde_json::to_string(&output.record) {
                    Ok(json) => println!("{json}"),
                    Err(e) => {
                        eprintln!("error serializing run record: {e}");
                        return ExitCode::from(EXIT_USAGE);
                    }
                }
            }
            if output.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERDICT_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
