use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lpsgd_core::bounds::BoundReport;
use lpsgd_core::experiment::{
    logreg_noise_moments, mode_bound, run_logreg, run_synthetic, synthetic_noise_moments,
    verify_lemma1, ExperimentConfig, ExperimentKind,
};
use lpsgd_core::problems::{fit_holder, HolderMode};
use lpsgd_core::text::{format_float, StructuredText};
use lpsgd_core::{Error, Result};

const OUT_ENV: &str = "LPSGD_OUT";

/// Low-precision SGD simulation and convergence-bound checks.
#[derive(Debug, Parser)]
#[command(name = "lpsgd", version)]
struct Cli {
    /// Experiment or input file (`[section]` / `key = value` text).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Replace the configured seed list with a single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides LPSGD_OUT and the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Power-norm experiment with uniform gradient and update noise.
    RunSynthetic,
    /// PCA-projected logistic regression in the four arithmetic modes.
    RunLogreg,
    /// Evaluate every bound for the `[bounds]` section of an input file.
    Bounds {
        /// Input file; defaults to --config.
        inputs: Option<PathBuf>,
    },
    /// Compare the Lemma 1 closed form with the brute-force oracle.
    VerifyLemma1 {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
    },
    /// Fit Hölder parameters to `distance,excess` samples.
    FitHolder {
        /// CSV of samples; without it the logreg config's probes are used.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, default_value = "least-squares")]
        mode: HolderMode,
    },
    /// Estimate the noise moments of the configured experiment.
    EstimateNoise,
}

enum Outcome {
    Success,
    Violation,
}

fn config_path(cli: &Cli) -> Result<&Path> {
    cli.config
        .as_deref()
        .ok_or_else(|| Error::Config("this command needs --config <path>".into()))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(config_path(cli)?)?;
    if let Some(seed) = cli.seed {
        config.seeds = vec![seed];
    }
    Ok(config)
}

fn out_dir(cli: &Cli, config: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| {
            std::env::var_os(OUT_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::Config(format!(
            "config describes a {:?} experiment",
            config.kind
        )));
    }
    Ok(())
}

fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut samples = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            return Err(Error::Config(format!(
                "{}:{}: expected two columns",
                path.display(),
                n + 1
            )));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(d), Ok(e)) => samples.push((d, e)),
            _ if samples.is_empty() && n == 0 => {} // header
            _ => {
                return Err(Error::Config(format!(
                    "{}:{}: malformed sample",
                    path.display(),
                    n + 1
                )))
            }
        }
    }
    Ok(samples)
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::RunSynthetic => {
            let config = load_config(cli)?;
            expect_kind(&config, ExperimentKind::SyntheticPowerNorm)?;
            let dir = out_dir(cli, &config);
            let outcome = run_synthetic(&config, &dir)?;
            print!("{}", outcome.report);
            println!("wrote {} files to {}", outcome.files.len(), dir.display());
            Ok(if outcome.violations() == 0 {
                Outcome::Success
            } else {
                Outcome::Violation
            })
        }
        Command::RunLogreg => {
            let config = load_config(cli)?;
            expect_kind(&config, ExperimentKind::Logreg)?;
            let dir = out_dir(cli, &config);
            let outcome = run_logreg(&config, &dir)?;
            print!("{}", outcome.report);
            println!("wrote {} files to {}", outcome.files.len(), dir.display());
            Ok(if outcome.violations() == 0 {
                Outcome::Success
            } else {
                Outcome::Violation
            })
        }
        Command::Bounds { inputs } => {
            let path = match inputs {
                Some(p) => p.as_path(),
                None => config_path(cli)?,
            };
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            print!("{}", BoundReport::from_text(&text)?.to_structured_text());
            Ok(Outcome::Success)
        }
        Command::VerifyLemma1 {
            count,
            dim,
            resolution,
        } => {
            let sweep = verify_lemma1(
                *count,
                cli.seed.unwrap_or(0),
                *dim,
                *resolution,
                lpsgd_core::parallel::Execution::Parallel,
            )?;
            print!("{}", sweep.report());
            Ok(if sweep.passed() {
                Outcome::Success
            } else {
                Outcome::Violation
            })
        }
        Command::FitHolder { samples, mode } => {
            let samples = match samples {
                Some(path) => read_samples(path)?,
                None => {
                    let config = load_config(cli)?;
                    expect_kind(&config, ExperimentKind::Logreg)?;
                    lpsgd_core::experiment::prepare_logreg(&config.logreg, config.seeds[0])?
                        .holder_samples
                }
            };
            print!("{}", fit_holder(&samples, *mode)?.to_structured_text());
            Ok(Outcome::Success)
        }
        Command::EstimateNoise => {
            let config = load_config(cli)?;
            let mut doc = StructuredText::new();
            match config.kind {
                ExperimentKind::SyntheticPowerNorm => {
                    let m = synthetic_noise_moments(&config)?;
                    let d = config.synthetic.d as f64;
                    doc.set_float("noise", "d_sigma_r_sq", m.d_sigma_r_sq);
                    doc.set_float("noise", "d_sigma_s_sq", m.d_sigma_s_sq);
                    doc.set_float("noise", "r_hat", m.r_hat);
                    doc.set_float("noise", "s_hat", m.s_hat);
                    doc.set("noise", "probes", m.probes.to_string());
                    let (br, bs) = (config.synthetic.bound_r, config.synthetic.bound_s);
                    doc.set_float("closed_form", "d_sigma_r_sq", d * br * br / 3.0);
                    doc.set_float("closed_form", "d_sigma_s_sq", d * bs * bs / 3.0);
                }
                ExperimentKind::Logreg => {
                    let (setup, estimates) = logreg_noise_moments(&config)?;
                    for (mode, eta, m) in estimates {
                        let sec = format!("mode_{mode}");
                        doc.set_float(&sec, "eta", eta);
                        doc.set_float(&sec, "d_sigma_r_sq", m.d_sigma_r_sq);
                        doc.set_float(&sec, "d_sigma_s_sq", m.d_sigma_s_sq);
                        doc.set_float(&sec, "r_hat", m.r_hat);
                        doc.set_float(&sec, "s_hat", m.s_hat);
                        doc.set(&sec, "probes", m.probes.to_string());
                        doc.set(
                            &sec,
                            "bound_stoch",
                            format_float(mode_bound(&setup, eta, &m)),
                        );
                    }
                }
            }
            print!("{}", doc.render());
            Ok(Outcome::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
