use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, StepSpec, SyntheticConfig};
use super::{ensure_dir, write_file};
use crate::bounds::{
    finite_k_bound, gamma, liminf_bound, optimal_step_deterministic, optimal_step_stochastic,
    stochastic_bound, BoundInputs, StochasticStep,
};
use crate::error::{Error, Result};
use crate::optimizer::{
    estimate_noise_moments, run, BoundOverlay, Domain, NoiseModel, NoiseMoments, SgdConfig,
    Trajectory,
};
use crate::parallel::map_slice;
use crate::problems::PowerNorm;
use crate::rng::{stream_rng, unit_vector, Stream};
use crate::text::format_float;

/// Bounds for one step size of the synthetic study, with `R = B_r sqrt(d)`,
/// `S = B_s sqrt(d)`, `c = C0` and `sigma^2 = B^2 / 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticBounds {
    pub eta: f64,
    pub rho: f64,
    pub deterministic: f64,
    pub deterministic_valid: bool,
    pub vacuous: bool,
    pub finite_k: f64,
    pub stochastic: f64,
}

impl SyntheticBounds {
    pub fn overlay(&self) -> BoundOverlay {
        BoundOverlay {
            bound_det: self.deterministic_valid.then_some(self.deterministic),
            bound_stoch: Some(self.stochastic),
            bound_finite_k: self.deterministic_valid.then_some(self.finite_k),
        }
    }
}

pub fn synthetic_bounds(cfg: &SyntheticConfig, eta: f64) -> SyntheticBounds {
    let sqrt_d = (cfg.d as f64).sqrt();
    let inputs = BoundInputs {
        p: cfg.p,
        l: cfg.l,
        f_star: 0.0,
        eta,
        c: cfg.start_distance,
        r: cfg.bound_r * sqrt_d,
        s: cfg.bound_s * sqrt_d,
        d: cfg.d,
        sigma_r_sq: cfg.bound_r * cfg.bound_r / 3.0,
        sigma_s_sq: cfg.bound_s * cfg.bound_s / 3.0,
        k: cfg.steps,
    };
    let g = gamma(eta, inputs.r, inputs.s, inputs.c);
    SyntheticBounds {
        eta,
        rho: inputs.rho(),
        deterministic: liminf_bound(cfg.p, cfg.l, 0.0, g),
        deterministic_valid: inputs.deterministic_valid(),
        vacuous: g >= inputs.c,
        finite_k: finite_k_bound(&inputs),
        stochastic: stochastic_bound(
            cfg.p,
            cfg.l,
            0.0,
            eta,
            cfg.d,
            inputs.sigma_r_sq,
            inputs.sigma_s_sq,
        ),
    }
}

fn resolve_eta(cfg: &SyntheticConfig) -> Result<f64> {
    match cfg.eta {
        StepSpec::Fixed(eta) => Ok(eta),
        StepSpec::AutoStochastic => {
            let (vr, vs) = (
                cfg.bound_r * cfg.bound_r / 3.0,
                cfg.bound_s * cfg.bound_s / 3.0,
            );
            match optimal_step_stochastic(cfg.d, vr, vs)? {
                StochasticStep::Optimal(eta) => Ok(eta),
                StochasticStep::Vanishing => Err(Error::Config(
                    "auto-stochastic needs update noise: without it the optimal step vanishes"
                        .into(),
                )),
            }
        }
        StepSpec::AutoDeterministic => {
            let sqrt_d = (cfg.d as f64).sqrt();
            let step = optimal_step_deterministic(
                cfg.bound_r * sqrt_d,
                cfg.bound_s * sqrt_d,
                cfg.start_distance,
            )
            .map_err(|e| Error::Config(format!("auto-deterministic: {e}")))?;
            Ok(step.eta)
        }
    }
}

/// Start point at distance `C0` from the minimizer, in a seed-dependent
/// direction.
pub(crate) fn synthetic_start(cfg: &SyntheticConfig, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, Stream::Start, 0);
    unit_vector(&mut rng, cfg.d)
        .into_iter()
        .map(|x| x * cfg.start_distance)
        .collect()
}

pub(crate) fn synthetic_setup(
    cfg: &SyntheticConfig,
    eta: f64,
    seed: u64,
) -> Result<(PowerNorm, Vec<f64>, SgdConfig)> {
    let problem = PowerNorm::new(cfg.l, cfg.p, cfg.d)?;
    let domain = Domain::ball(vec![0.0; cfg.d], cfg.ball_radius)?;
    let noise = NoiseModel::uniform(cfg.bound_r, cfg.bound_s, seed);
    Ok((
        problem,
        synthetic_start(cfg, seed),
        SgdConfig::new(eta, noise, domain),
    ))
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub eta: f64,
    pub seed: u64,
    pub bounds: SyntheticBounds,
    pub trajectory: Trajectory,
}

impl SeedRun {
    /// Final running minimum at or below the stochastic bound.
    pub fn within_stochastic(&self) -> bool {
        self.trajectory.final_min_loss() <= self.bounds.stochastic
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticOutcome {
    pub runs: Vec<SeedRun>,
    pub files: Vec<PathBuf>,
    pub report: String,
}

impl SyntheticOutcome {
    pub fn violations(&self) -> usize {
        self.runs.iter().filter(|r| !r.within_stochastic()).count()
    }
}

fn max_trace_csv(eta: f64, runs: &[&SeedRun], overlay: &BoundOverlay) -> String {
    let steps = runs
        .iter()
        .map(|r| r.trajectory.records.len())
        .max()
        .unwrap_or(0);
    let mut out = String::from("k,max_loss,max_min_loss");
    if overlay.bound_stoch.is_some() {
        out.push_str(",bound_stoch");
    }
    out.push('\n');
    for k in 0..steps {
        // runs that stopped at the optimum hold their last value
        let at = |r: &SeedRun| {
            let recs = &r.trajectory.records;
            recs.get(k)
                .unwrap_or_else(|| recs.last().expect("runs record at least one step"))
                .clone()
        };
        let max_loss = runs
            .iter()
            .map(|r| at(r).loss)
            .fold(f64::NEG_INFINITY, f64::max);
        let max_min = runs
            .iter()
            .map(|r| at(r).min_loss)
            .fold(f64::NEG_INFINITY, f64::max);
        let _ = write!(
            out,
            "{k},{},{}",
            format_float(max_loss),
            format_float(max_min)
        );
        if let Some(b) = overlay.bound_stoch {
            let _ = write!(out, ",{}", format_float(b));
        }
        out.push('\n');
    }
    #[derive(Serialize)]
    struct Line {
        eta: f64,
        seeds: Vec<u64>,
        final_max_min_loss: f64,
        #[serde(flatten)]
        bounds: BoundOverlay,
    }
    let line = Line {
        eta,
        seeds: runs.iter().map(|r| r.seed).collect(),
        final_max_min_loss: runs
            .iter()
            .map(|r| r.trajectory.final_min_loss())
            .fold(f64::NEG_INFINITY, f64::max),
        bounds: *overlay,
    };
    let _ = writeln!(
        out,
        "# summary: {}",
        serde_json::to_string(&line).expect("serializable")
    );
    out
}

/// Runs every seed (and every swept step size), writing one trajectory CSV
/// per run and, for sweeps, one max-over-seeds trace per step size.
pub fn run_synthetic(config: &ExperimentConfig, out_dir: &Path) -> Result<SyntheticOutcome> {
    let cfg = &config.synthetic;
    let etas = match &cfg.sweep {
        Some(etas) => etas.clone(),
        None => vec![resolve_eta(cfg)?],
    };
    ensure_dir(out_dir)?;
    let jobs: Vec<(f64, u64)> = etas
        .iter()
        .flat_map(|&eta| config.seeds.iter().map(move |&seed| (eta, seed)))
        .collect();
    let runs = map_slice(config.execution, &jobs, |&(eta, seed)| -> Result<SeedRun> {
        let (problem, start, sgd) = synthetic_setup(cfg, eta, seed)?;
        let trajectory = run(&problem, &start, &sgd, cfg.steps, None)?;
        Ok(SeedRun {
            eta,
            seed,
            bounds: synthetic_bounds(cfg, eta),
            trajectory,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut files = Vec::new();
    let sweep = cfg.sweep.is_some();
    for r in &runs {
        let name = if sweep {
            format!("synthetic_eta{}_seed{}.csv", format_float(r.eta), r.seed)
        } else {
            format!("synthetic_seed{}.csv", r.seed)
        };
        files.push(write_file(
            out_dir.join(name),
            &r.trajectory.to_csv(&r.bounds.overlay()),
        )?);
    }
    if sweep {
        for &eta in &etas {
            let group: Vec<&SeedRun> = runs.iter().filter(|r| r.eta == eta).collect();
            let overlay = synthetic_bounds(cfg, eta).overlay();
            let name = format!("sweep_eta{}_max.csv", format_float(eta));
            files.push(write_file(
                out_dir.join(name),
                &max_trace_csv(eta, &group, &overlay),
            )?);
        }
    }

    let mut report = String::new();
    for &eta in &etas {
        let b = synthetic_bounds(cfg, eta);
        let _ = writeln!(
            report,
            "eta {}: stochastic bound {}, deterministic bound {} ({}), finite-K bound {}",
            format_float(eta),
            format_float(b.stochastic),
            format_float(b.deterministic),
            if b.deterministic_valid {
                "valid"
            } else {
                "invalid: R + S/eta >= 1"
            },
            format_float(b.finite_k)
        );
        for r in runs.iter().filter(|r| r.eta == eta) {
            let _ = writeln!(
                report,
                "  seed {}: final min loss {} -> {}",
                r.seed,
                format_float(r.trajectory.final_min_loss()),
                if r.within_stochastic() {
                    "within"
                } else {
                    "VIOLATES"
                }
            );
        }
    }
    Ok(SyntheticOutcome {
        runs,
        files,
        report,
    })
}

/// Moments of the configured uniform noise, probed along the noiseless
/// trajectory from the first seed's start point.
pub fn synthetic_noise_moments(config: &ExperimentConfig) -> Result<NoiseMoments> {
    let cfg = &config.synthetic;
    let eta = match &cfg.sweep {
        Some(etas) => etas[0],
        None => resolve_eta(cfg)?,
    };
    let (problem, start, sgd) = synthetic_setup(cfg, eta, config.seeds[0])?;
    estimate_noise_moments(&problem, &start, &sgd, cfg.probe_steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_reduction_bounds() {
        let cfg = SyntheticConfig {
            bound_r: 0.0,
            bound_s: 0.0,
            ..SyntheticConfig::default()
        };
        let b = synthetic_bounds(&cfg, 0.01);
        let expect = 3.0 * 0.005f64.powf(0.2);
        assert!((b.stochastic - expect).abs() < 1e-12);
        assert!((b.deterministic - expect).abs() < 1e-12);
        assert!(b.deterministic_valid);
    }

    #[test]
    fn start_sits_at_the_configured_distance() {
        let cfg = SyntheticConfig::default();
        let start = synthetic_start(&cfg, 3);
        assert!((crate::linalg::norm(&start) - cfg.start_distance).abs() < 1e-12);
        assert_ne!(start, synthetic_start(&cfg, 4));
    }

    #[test]
    fn tiny_step_noiseless_run_reaches_the_reduction() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ExperimentConfig::parse(
            "[experiment]\nkind = synthetic-powernorm\nseeds = 5\n[problem]\nd = 3\n[optimizer]\neta = 0.001\nsteps = 3000\n[noise]\ngradient = none\nupdate = none\n",
            None,
        )
        .unwrap();
        config.execution = crate::parallel::Execution::Sequential;
        let outcome = run_synthetic(&config, dir.path()).unwrap();
        let bound = 3.0 * 0.0005f64.powf(0.2);
        assert!(outcome.runs[0].trajectory.final_min_loss() <= bound + 1e-6);
        assert_eq!(outcome.violations(), 0);
        assert_eq!(outcome.files.len(), 1);
    }
}
