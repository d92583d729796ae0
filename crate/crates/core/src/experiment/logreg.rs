use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{DataSource, ExperimentConfig, LogregConfig, LogregMode, StepSpec};
use super::holder_probe::holder_samples;
use super::{ensure_dir, write_file};
use crate::bounds::{optimal_step_stochastic, stochastic_bound, StochasticStep};
use crate::data::{
    fit_pca, load_idx, synthetic_blobs, transform, Dataset, FeatureScale, IdxData, Matrix, PcaModel,
};
use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use crate::optimizer::{
    estimate_noise_moments, run, BoundOverlay, Domain, NoiseModel, NoiseMoments, SgdConfig,
    Trajectory,
};
use crate::parallel::map_slice;
use crate::problems::{
    find_reference_optimum, fit_holder, GradientArithmetic, HolderFit, LogisticRegression, Problem,
    ReferenceOptimum,
};
use crate::text::{format_float, StructuredText};

/// Step size used to probe the noise moments before an automatic step size
/// is known.
const AUTO_PROBE_ETA: f64 = 0.05;

/// Everything the four runs share: the projected data, the reference
/// optimum and the fitted Hölder parameters.
#[derive(Debug, Clone)]
pub struct LogregSetup {
    pub source: String,
    pub pca: PcaModel,
    pub dataset: Dataset,
    pub problem: LogisticRegression,
    pub start: Vec<f64>,
    pub reference: ReferenceOptimum,
    pub holder_samples: Vec<(f64, f64)>,
    pub holder: HolderFit,
}

fn load_dataset(cfg: &LogregConfig, seed: u64) -> Result<(Dataset, String)> {
    let (ds, source) = match &cfg.source {
        DataSource::Idx { images, labels } => {
            let IdxData::Images(features) = load_idx(images)? else {
                return Err(Error::Config(format!(
                    "{} does not hold images",
                    images.display()
                )));
            };
            let IdxData::Labels(raw) = load_idx(labels)? else {
                return Err(Error::Config(format!(
                    "{} does not hold labels",
                    labels.display()
                )));
            };
            if raw.len() != features.rows() {
                return Err(Error::Config(format!(
                    "{} images but {} labels",
                    features.rows(),
                    raw.len()
                )));
            }
            let labels: Vec<usize> = raw.iter().map(|&l| usize::from(l)).collect();
            let classes = labels.iter().max().map_or(0, |m| m + 1).max(2);
            let cols = features.cols();
            let ds = Dataset::new(features, labels, classes, FeatureScale::identity(cols))?;
            (ds, format!("idx:{}", images.display()))
        }
        DataSource::Blobs {
            classes,
            per_class,
            dim,
            separation,
        } => (
            synthetic_blobs(*classes, *per_class, *dim, *separation, seed)?,
            format!("blobs:{classes}x{per_class}x{dim}@{separation}"),
        ),
    };
    Ok(match cfg.limit {
        Some(n) => (ds.truncate(n), source),
        None => (ds, source),
    })
}

/// `1 / (mean ||(x, 1)||^2 / 2 + lambda)`, the inverse of a bound on the
/// gradient's Lipschitz constant.
fn smooth_rate(features: &Matrix, regularizer: f64) -> f64 {
    let mean_sq = (0..features.rows())
        .map(|i| norm_sq(features.row(i)) + 1.0)
        .sum::<f64>()
        / features.rows() as f64;
    1.0 / (0.5 * mean_sq + regularizer)
}

/// Load, project, find the reference optimum and fit the Hölder parameters.
pub fn prepare_logreg(cfg: &LogregConfig, seed: u64) -> Result<LogregSetup> {
    let (raw, source) = load_dataset(cfg, seed)?;
    let pca = fit_pca(&raw.features, cfg.components)?;
    let projected = transform(&pca, &raw.features)?;
    let dataset = Dataset::new(
        projected,
        raw.labels.clone(),
        raw.num_classes,
        FeatureScale::identity(cfg.components),
    )?;
    let problem = LogisticRegression::from_dataset(&dataset, cfg.regularizer)?;
    let start = vec![0.0; problem.dim()];
    let rate = cfg
        .reference_rate
        .unwrap_or_else(|| smooth_rate(&dataset.features, cfg.regularizer));
    let reference = find_reference_optimum(&problem, &start, cfg.reference_steps, rate)?;
    let samples = holder_samples(
        &problem,
        &reference.w_star,
        reference.f_star,
        reference.c0,
        seed,
    )?;
    let holder = fit_holder(&samples, cfg.holder_mode)?;
    Ok(LogregSetup {
        source,
        pca,
        dataset,
        problem,
        start,
        reference,
        holder_samples: samples,
        holder,
    })
}

pub fn mode_noise(cfg: &LogregConfig, mode: LogregMode) -> NoiseModel {
    let wide = GradientArithmetic {
        mul: cfg.mul_format,
        acc: cfg.acc_format,
    };
    match mode {
        LogregMode::A => NoiseModel::none(),
        LogregMode::B => NoiseModel::arithmetic(Some(wide), Some(cfg.update_format)),
        LogregMode::C => NoiseModel::arithmetic(Some(wide), None),
        LogregMode::D => NoiseModel::arithmetic(
            Some(GradientArithmetic {
                acc: cfg.narrow_acc_format,
                ..wide
            }),
            None,
        ),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeResult {
    #[serde(serialize_with = "display")]
    pub mode: LogregMode,
    pub noise: String,
    pub eta: f64,
    pub moments: NoiseMoments,
    pub bound_stoch: f64,
    #[serde(skip)]
    pub runs: Vec<(u64, Trajectory)>,
}

fn display<S: serde::Serializer>(m: &LogregMode, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(m)
}

impl ModeResult {
    pub fn within_bound(&self) -> bool {
        self.runs
            .iter()
            .all(|(_, t)| t.final_min_loss() <= self.bound_stoch)
    }
}

#[derive(Debug, Clone)]
pub struct LogregOutcome {
    pub setup: LogregSetup,
    pub modes: Vec<ModeResult>,
    pub files: Vec<PathBuf>,
    pub report: String,
}

impl LogregOutcome {
    pub fn mode(&self, mode: LogregMode) -> Option<&ModeResult> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    pub fn violations(&self) -> usize {
        self.modes.iter().filter(|m| !m.within_bound()).count()
    }
}

fn mode_moments(
    setup: &LogregSetup,
    cfg: &LogregConfig,
    mode: LogregMode,
    seed: u64,
) -> Result<(f64, NoiseMoments)> {
    let noise = mode_noise(cfg, mode).with_seed(seed);
    let sgd = |eta| SgdConfig::new(eta, noise, Domain::Unconstrained).with_batch_size(cfg.batch);
    match cfg.eta {
        StepSpec::Fixed(eta) => {
            let m =
                estimate_noise_moments(&setup.problem, &setup.start, &sgd(eta), cfg.probe_steps)?;
            Ok((sgd(eta).effective_eta(), m))
        }
        _ => {
            let probe = estimate_noise_moments(
                &setup.problem,
                &setup.start,
                &sgd(AUTO_PROBE_ETA),
                cfg.probe_steps,
            )?;
            let d = setup.problem.dim();
            let step = optimal_step_stochastic(
                d,
                probe.d_sigma_r_sq / d as f64,
                probe.d_sigma_s_sq / d as f64,
            )?;
            let StochasticStep::Optimal(eta) = step else {
                return Err(Error::Config(format!(
                    "auto-stochastic: mode {mode} has no update noise, so the optimal step vanishes"
                )));
            };
            let m =
                estimate_noise_moments(&setup.problem, &setup.start, &sgd(eta), cfg.probe_steps)?;
            Ok((sgd(eta).effective_eta(), m))
        }
    }
}

/// The mode's stochastic bound from its estimated moments.
pub fn mode_bound(setup: &LogregSetup, eta: f64, m: &NoiseMoments) -> f64 {
    let d = setup.problem.dim();
    stochastic_bound(
        setup.holder.p,
        setup.holder.l,
        setup.reference.f_star,
        eta,
        d,
        m.d_sigma_r_sq / d as f64,
        m.d_sigma_s_sq / d as f64,
    )
}

fn summary_text(setup: &LogregSetup, modes: &[ModeResult]) -> String {
    let mut doc = StructuredText::new();
    doc.set("data", "source", setup.source.clone());
    doc.set("data", "samples", setup.dataset.len().to_string());
    doc.set("data", "classes", setup.dataset.num_classes.to_string());
    doc.set("reference", "f_star", format_float(setup.reference.f_star));
    doc.set("reference", "c0", format_float(setup.reference.c0));
    doc.set(
        "reference",
        "gradient_norm",
        format_float(setup.reference.gradient_norm),
    );
    doc.set(
        "reference",
        "iterations",
        setup.reference.iterations.to_string(),
    );
    doc.set_float("holder", "p", setup.holder.p);
    doc.set_float("holder", "L", setup.holder.l);
    doc.set("holder", "mode", setup.holder.mode.to_string());
    for m in modes {
        let sec = format!("mode_{}", m.mode);
        doc.set(&sec, "noise", m.noise.clone());
        doc.set_float(&sec, "eta", m.eta);
        doc.set_float(&sec, "d_sigma_r_sq", m.moments.d_sigma_r_sq);
        doc.set_float(&sec, "d_sigma_s_sq", m.moments.d_sigma_s_sq);
        doc.set_float(&sec, "r_hat", m.moments.r_hat);
        doc.set_float(&sec, "s_hat", m.moments.s_hat);
        doc.set_float(&sec, "bound_stoch", m.bound_stoch);
        for (seed, t) in &m.runs {
            doc.set_float(
                &sec,
                &format!("final_min_loss_seed{seed}"),
                t.final_min_loss(),
            );
        }
        doc.set(&sec, "within_bound", m.within_bound().to_string());
    }
    doc.render()
}

/// The full pipeline: setup, moment estimation and one run per configured
/// mode and seed.
pub fn run_logreg(config: &ExperimentConfig, out_dir: &Path) -> Result<LogregOutcome> {
    let cfg = &config.logreg;
    let seed0 = config.seeds[0];
    let setup = prepare_logreg(cfg, seed0)?;
    ensure_dir(out_dir)?;

    let estimates = map_slice(config.execution, &cfg.modes, |&mode| {
        mode_moments(&setup, cfg, mode, seed0)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = (0..cfg.modes.len())
        .flat_map(|i| config.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let trajectories = map_slice(
        config.execution,
        &jobs,
        |&(i, seed)| -> Result<Trajectory> {
            let noise = mode_noise(cfg, cfg.modes[i]).with_seed(seed);
            let sgd = SgdConfig::new(estimates[i].0, noise, Domain::Unconstrained)
                .with_batch_size(cfg.batch);
            run(
                &setup.problem,
                &setup.start,
                &sgd,
                cfg.steps,
                Some(&setup.reference),
            )
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut modes: Vec<ModeResult> = cfg
        .modes
        .iter()
        .zip(&estimates)
        .map(|(&mode, &(eta, moments))| ModeResult {
            mode,
            noise: {
                let n = mode_noise(cfg, mode);
                format!("gradient {}, update {}", n.gradient, n.update)
            },
            eta,
            moments,
            bound_stoch: mode_bound(&setup, eta, &moments),
            runs: Vec::new(),
        })
        .collect();
    for (&(i, seed), t) in jobs.iter().zip(trajectories) {
        modes[i].runs.push((seed, t));
    }

    let mut files = vec![
        write_file(
            out_dir.join("projection.csv"),
            &setup.dataset.to_projection_csv(),
        )?,
        write_file(out_dir.join("pca.txt"), &setup.pca.to_structured_text())?,
        write_file(
            out_dir.join("holder.txt"),
            &setup.holder.to_structured_text(),
        )?,
    ];
    let mut samples = String::from("distance,excess\n");
    for (d, e) in &setup.holder_samples {
        samples.push_str(&format!("{},{}\n", format_float(*d), format_float(*e)));
    }
    files.push(write_file(out_dir.join("holder_samples.csv"), &samples)?);
    for m in &modes {
        let overlay = BoundOverlay {
            bound_stoch: Some(m.bound_stoch),
            ..BoundOverlay::default()
        };
        for (seed, t) in &m.runs {
            let name = format!("logreg_mode_{}_seed{seed}.csv", m.mode);
            files.push(write_file(out_dir.join(name), &t.to_csv(&overlay))?);
        }
    }
    let report = summary_text(&setup, &modes);
    files.push(write_file(out_dir.join("logreg_summary.txt"), &report)?);
    Ok(LogregOutcome {
        setup,
        modes,
        files,
        report,
    })
}

/// A mode with its step size and estimated moments.
pub type ModeEstimate = (LogregMode, f64, NoiseMoments);

/// Setup plus the estimated moments and step size of every configured mode.
pub fn logreg_noise_moments(config: &ExperimentConfig) -> Result<(LogregSetup, Vec<ModeEstimate>)> {
    let cfg = &config.logreg;
    let setup = prepare_logreg(cfg, config.seeds[0])?;
    let estimates = map_slice(config.execution, &cfg.modes, |&mode| {
        mode_moments(&setup, cfg, mode, config.seeds[0]).map(|(eta, m)| (mode, eta, m))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((setup, estimates))
}
