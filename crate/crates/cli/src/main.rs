use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use moyal_cli::cmd;
use moyal_cli::{exit_code_for, load_config, Common, Tolerances, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "moyal", about = "Batch experiments for Weyl-Moyal deformation quantization", version)]
struct Cli {
    /// Optional JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for all random sampling in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory for results.csv / report.json artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Tolerance overrides KEY=VALUE; repeatable.
    #[arg(long = "tol-override", global = true, value_name = "KEY=VAL")]
    tol_overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One star product from serialized inputs, with residual report.
    Star {
        /// Function representation: grid or planewave.
        #[arg(long, default_value = "grid")]
        kind: String,
        /// Left factor file.
        #[arg(long)]
        f: PathBuf,
        /// Right factor file.
        #[arg(long)]
        g: PathBuf,
        /// Poisson matrix JSON {"n": ..., "sigma": [[...]]}.
        #[arg(long)]
        poisson: PathBuf,
    },
    /// Operator norms of left translations vs their L1/seminorm bounds.
    Norms {
        /// Poisson entry sigma^{12} for the 2-d corpus.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Appendix inequality sweep over the corpus (n = 1, 2).
    Estimates,
    /// Approximate-identity convergence tables.
    ApproxId,
    /// Finite-base bundle functor round trips from a description file.
    Bundle {
        /// Bundle description JSON.
        #[arg(long)]
        file: PathBuf,
    },
    /// Lorentz-orbit sampling with invariant checks.
    Orbit {
        /// Reference Poisson tensor JSON; defaults to the standard 4-d form.
        #[arg(long)]
        sigma0_file: Option<PathBuf>,
        /// Number of sampled orbit points.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

fn parse_overrides(raw: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("expected KEY=VAL, got {item}"))?;
        let value: f64 = value
            .parse()
            .map_err(|e| format!("bad value in {item}: {e}"))?;
        out.insert(key.to_string(), value);
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut tolerances = Tolerances::default();
    let mut seed = cli.seed;
    if let Some(path) = &cli.config {
        match load_config(path) {
            Ok(cfg) => {
                for (k, v) in cfg.tolerances {
                    if let Err(e) = tolerances.override_value(&k, v) {
                        eprintln!("config error: {e}");
                        return ExitCode::from(EXIT_CONFIG as u8);
                    }
                }
                if let Some(s) = cfg.seed {
                    seed = s;
                }
            }
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        }
    }
    match parse_overrides(&cli.tol_overrides) {
        Ok(map) => {
            for (k, v) in map {
                if let Err(e) = tolerances.override_value(&k, v) {
                    eprintln!("config error: {e}");
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            }
        }
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }

    let common = Common {
        seed,
        out_dir: cli.out,
        tolerances,
    };

    let outcome = match &cli.command {
        Command::Star { kind, f, g, poisson } => cmd::star::run(
            &cmd::star::StarArgs {
                kind: kind.clone(),
                f_path: f.clone(),
                g_path: g.clone(),
                poisson_path: poisson.clone(),
            },
            &common,
        ),
        Command::Norms { sigma } => cmd::norms::run(&cmd::norms::NormsArgs { sigma: *sigma }, &common),
        Command::Estimates => cmd::estimates::run(&common),
        Command::ApproxId => cmd::approx_id::run(&common),
        Command::Bundle { file } => cmd::bundle::run(
            &cmd::bundle::BundleArgs {
                bundle_path: file.clone(),
            },
            &common,
        ),
        Command::Orbit { sigma0_file, samples } => cmd::orbit::run(
            &cmd::orbit::OrbitArgs {
                sigma0_path: sigma0_file.clone(),
                samples: *samples,
            },
            &common,
        ),
    };

    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}
