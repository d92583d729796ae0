use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lowfloat::FloatFormat;
use crate::optimizer::{GradientNoise, UpdateNoise};
use crate::parallel::Execution;
use crate::problems::HolderMode;
use crate::text::{parse_list, StructuredText};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SyntheticPowerNorm,
    Logreg,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthetic-powernorm" => Ok(ExperimentKind::SyntheticPowerNorm),
            "logreg" => Ok(ExperimentKind::Logreg),
            other => Err(Error::Config(format!("unknown experiment kind {other:?}"))),
        }
    }
}

/// A fixed step size, or one of the bound-minimizing choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    Fixed(f64),
    /// Minimizes the deterministic radius `Gamma`.
    AutoDeterministic,
    /// Minimizes the stochastic bound.
    AutoStochastic,
}

impl FromStr for StepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto-deterministic" => Ok(StepSpec::AutoDeterministic),
            "auto-stochastic" => Ok(StepSpec::AutoStochastic),
            v => {
                let eta: f64 = v.parse().map_err(|_| {
                    Error::Config(format!("eta must be a number or auto-*, got {v:?}"))
                })?;
                if !(eta > 0.0 && eta.is_finite()) {
                    return Err(Error::Config(format!("eta must be positive, got {eta}")));
                }
                Ok(StepSpec::Fixed(eta))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub l: f64,
    pub p: f64,
    pub d: usize,
    /// Initial distance to the minimizer.
    pub start_distance: f64,
    pub ball_radius: f64,
    pub eta: StepSpec,
    pub steps: usize,
    pub bound_r: f64,
    pub bound_s: f64,
    /// Step sizes for a sweep; each gets a max-over-seeds trace.
    pub sweep: Option<Vec<f64>>,
    pub probe_steps: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            l: 3.0,
            p: 0.2,
            d: 40,
            start_distance: 1.0,
            ball_radius: 1.0,
            eta: StepSpec::Fixed(0.1),
            steps: 1500,
            bound_r: 0.1,
            bound_s: 0.1,
            sweep: None,
            probe_steps: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Idx {
        images: PathBuf,
        labels: PathBuf,
    },
    Blobs {
        classes: usize,
        per_class: usize,
        dim: usize,
        separation: f64,
    },
}

/// The four arithmetic configurations of the logistic-regression study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LogregMode {
    /// Working precision throughout.
    A,
    /// Low-precision gradient and update, wide accumulator.
    B,
    /// Low-precision gradient, exact update, wide accumulator.
    C,
    /// As `C` with the narrow accumulator.
    D,
}

impl LogregMode {
    pub const ALL: [LogregMode; 4] = [LogregMode::A, LogregMode::B, LogregMode::C, LogregMode::D];
}

impl fmt::Display for LogregMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogregMode::A => "a",
            LogregMode::B => "b",
            LogregMode::C => "c",
            LogregMode::D => "d",
        })
    }
}

impl FromStr for LogregMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" => Ok(LogregMode::A),
            "b" => Ok(LogregMode::B),
            "c" => Ok(LogregMode::C),
            "d" => Ok(LogregMode::D),
            other => Err(Error::Config(format!("unknown logreg mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogregConfig {
    pub source: DataSource,
    /// Fall back to synthetic blobs when the IDX files are missing.
    pub fallback: bool,
    /// Use only the first `limit` samples.
    pub limit: Option<usize>,
    pub components: usize,
    pub regularizer: f64,
    pub reference_steps: usize,
    /// Reference gradient-descent rate; `None` picks `1 / smoothness`.
    pub reference_rate: Option<f64>,
    pub holder_mode: HolderMode,
    pub probe_steps: usize,
    pub eta: StepSpec,
    pub steps: usize,
    pub batch: Option<usize>,
    pub modes: Vec<LogregMode>,
    pub mul_format: FloatFormat,
    pub acc_format: FloatFormat,
    pub narrow_acc_format: FloatFormat,
    pub update_format: FloatFormat,
}

impl Default for LogregConfig {
    fn default() -> Self {
        LogregConfig {
            source: DataSource::Blobs {
                classes: 3,
                per_class: 100,
                dim: 20,
                separation: 3.0,
            },
            fallback: true,
            limit: None,
            components: 2,
            regularizer: 1e-2,
            reference_steps: 20_000,
            reference_rate: None,
            holder_mode: HolderMode::Majorizing,
            probe_steps: 300,
            eta: StepSpec::Fixed(0.05),
            steps: 1000,
            batch: None,
            modes: LogregMode::ALL.to_vec(),
            mul_format: FloatFormat::bfloat16(),
            acc_format: FloatFormat::new(8, 15, true).expect("valid format"),
            narrow_acc_format: FloatFormat::new(8, 10, true).expect("valid format"),
            update_format: FloatFormat::bfloat16(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub execution: Execution,
    pub synthetic: SyntheticConfig,
    pub logreg: LogregConfig,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!(
            "{name} must be non-negative, got {v}"
        )))
    }
}

fn uniform_bound(doc: &StructuredText, key: &str) -> Result<f64> {
    match doc.get("noise", key) {
        None => Ok(0.0),
        Some(spec) => {
            if key == "gradient" {
                match spec.parse::<GradientNoise>()? {
                    GradientNoise::Uniform { bound } => Ok(bound),
                    _ => Ok(0.0),
                }
            } else {
                match spec.parse::<UpdateNoise>()? {
                    UpdateNoise::Uniform { bound } => Ok(bound),
                    _ => Ok(0.0),
                }
            }
        }
    }
}

fn resolve(base: Option<&Path>, p: &str) -> PathBuf {
    let path = PathBuf::from(p);
    match base {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path,
    }
}

impl ExperimentConfig {
    /// Parses and validates a config. Relative data paths resolve against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let doc = StructuredText::parse(text)?;
        let kind: ExperimentKind = doc.parse_required("experiment", "kind")?;
        let seeds = match doc.get("experiment", "seeds") {
            None => vec![0],
            Some(v) => parse_list::<u64>(v)
                .map_err(|_| Error::Config(format!("malformed seed list {v:?}")))?,
        };
        if seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        let execution = match doc.get("experiment", "execution").unwrap_or("parallel") {
            "parallel" => Execution::Parallel,
            "sequential" => Execution::Sequential,
            other => return Err(Error::Config(format!("unknown execution mode {other:?}"))),
        };
        let out = doc.get("experiment", "out").map(PathBuf::from);

        let mut synthetic = SyntheticConfig::default();
        let mut logreg = LogregConfig::default();
        match kind {
            ExperimentKind::SyntheticPowerNorm => synthetic = Self::parse_synthetic(&doc)?,
            ExperimentKind::Logreg => logreg = Self::parse_logreg(&doc, base_dir)?,
        }
        Ok(ExperimentConfig {
            kind,
            seeds,
            out,
            execution,
            synthetic,
            logreg,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    fn parse_synthetic(doc: &StructuredText) -> Result<SyntheticConfig> {
        let def = SyntheticConfig::default();
        for key in ["gradient", "update"] {
            if doc
                .get("noise", key)
                .is_some_and(|v| v.trim() == "arithmetic")
            {
                return Err(Error::Config(
                    "synthetic runs take `none` or `uniform:<B>` noise".into(),
                ));
            }
        }
        let start_distance = positive(
            "start_distance",
            doc.parse_or("optimizer", "start_distance", def.start_distance)?,
        )?;
        let ball_radius = positive(
            "ball_radius",
            doc.parse_or("optimizer", "ball_radius", start_distance)?,
        )?;
        if ball_radius < start_distance {
            return Err(Error::Config(format!(
                "ball_radius {ball_radius} is smaller than start_distance {start_distance}"
            )));
        }
        let p = positive("p", doc.parse_or("problem", "p", def.p)?)?;
        if p > 1.0 {
            return Err(Error::Config(format!("p must lie in (0, 1], got {p}")));
        }
        let sweep = if doc.has_section("sweep") {
            let etas = doc.float_list("sweep", "etas")?;
            if etas.is_empty() {
                return Err(Error::Config("[sweep] etas is empty".into()));
            }
            for &eta in &etas {
                positive("sweep eta", eta)?;
            }
            Some(etas)
        } else {
            None
        };
        let cfg = SyntheticConfig {
            l: positive("L", doc.parse_or("problem", "L", def.l)?)?,
            p,
            d: doc.parse_or("problem", "d", def.d)?,
            start_distance,
            ball_radius,
            eta: doc.parse_or("optimizer", "eta", def.eta)?,
            steps: doc.parse_or("optimizer", "steps", def.steps)?,
            bound_r: non_negative("gradient noise bound", uniform_bound(doc, "gradient")?)?,
            bound_s: non_negative("update noise bound", uniform_bound(doc, "update")?)?,
            sweep,
            probe_steps: doc.parse_or("optimizer", "probe_steps", def.probe_steps)?,
        };
        if cfg.d == 0 || cfg.steps == 0 {
            return Err(Error::Config("d and steps must be positive".into()));
        }
        Ok(cfg)
    }

    fn parse_logreg(doc: &StructuredText, base_dir: Option<&Path>) -> Result<LogregConfig> {
        let def = LogregConfig::default();
        let fallback = doc.parse_or("data", "fallback", def.fallback)?;
        let source = match (doc.get("data", "images"), doc.get("data", "labels")) {
            (Some(images), Some(labels)) => {
                let (images, labels) = (resolve(base_dir, images), resolve(base_dir, labels));
                if images.exists() && labels.exists() {
                    DataSource::Idx { images, labels }
                } else if fallback {
                    Self::parse_blobs(doc)?
                } else {
                    return Err(Error::Config(format!(
                        "dataset files {} / {} not found and fallback is disabled",
                        images.display(),
                        labels.display()
                    )));
                }
            }
            (None, None) if fallback => Self::parse_blobs(doc)?,
            (None, None) => {
                return Err(Error::Config(
                    "no dataset configured and fallback is disabled".into(),
                ))
            }
            _ => return Err(Error::Config("[data] needs both images and labels".into())),
        };
        let fmt = |key: &str, default: FloatFormat| -> Result<FloatFormat> {
            doc.parse_or("noise", key, default)
        };
        let modes = match doc.get("logreg", "modes") {
            None => def.modes.clone(),
            Some(v) => parse_list::<LogregMode>(v)?,
        };
        if modes.is_empty() {
            return Err(Error::Config("[logreg] modes is empty".into()));
        }
        let batch: Option<usize> = doc.parse_opt("optimizer", "batch")?;
        if batch == Some(0) {
            return Err(Error::Config("batch must be positive".into()));
        }
        let reference_rate = match doc.parse_opt::<f64>("logreg", "reference_rate")? {
            Some(r) => Some(positive("reference_rate", r)?),
            None => None,
        };
        let cfg = LogregConfig {
            source,
            fallback,
            limit: doc.parse_opt("data", "limit")?,
            components: doc.parse_or("logreg", "components", def.components)?,
            regularizer: non_negative(
                "regularizer",
                doc.parse_or("logreg", "regularizer", def.regularizer)?,
            )?,
            reference_steps: doc.parse_or("logreg", "reference_steps", def.reference_steps)?,
            reference_rate,
            holder_mode: doc.parse_or("logreg", "holder_mode", def.holder_mode)?,
            probe_steps: doc.parse_or("optimizer", "probe_steps", def.probe_steps)?,
            eta: doc.parse_or("optimizer", "eta", def.eta)?,
            steps: doc.parse_or("optimizer", "steps", def.steps)?,
            batch,
            modes,
            mul_format: fmt("mul_format", def.mul_format)?,
            acc_format: fmt("acc_format", def.acc_format)?,
            narrow_acc_format: fmt("narrow_acc_format", def.narrow_acc_format)?,
            update_format: fmt("update_format", def.update_format)?,
        };
        if cfg.eta == StepSpec::AutoDeterministic {
            return Err(Error::Config(
                "logreg runs take a fixed eta or auto-stochastic".into(),
            ));
        }
        if cfg.components == 0 || cfg.steps == 0 || cfg.limit == Some(0) {
            return Err(Error::Config(
                "components, steps and limit must be positive".into(),
            ));
        }
        if cfg.probe_steps < crate::optimizer::MIN_PROBES {
            return Err(Error::Config(format!(
                "probe_steps must be at least {}",
                crate::optimizer::MIN_PROBES
            )));
        }
        Ok(cfg)
    }

    fn parse_blobs(doc: &StructuredText) -> Result<DataSource> {
        let DataSource::Blobs {
            classes,
            per_class,
            dim,
            separation,
        } = LogregConfig::default().source
        else {
            unreachable!("default source is synthetic");
        };
        Ok(DataSource::Blobs {
            classes: doc.parse_or("data", "blob_classes", classes)?,
            per_class: doc.parse_or("data", "blob_per_class", per_class)?,
            dim: doc.parse_or("data", "blob_dim", dim)?,
            separation: positive(
                "blob_separation",
                doc.parse_or("data", "blob_separation", separation)?,
            )?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTHETIC: &str = "\
[experiment]
kind = synthetic-powernorm
seeds = 1, 2, 3

[problem]
L = 3
p = 0.2
d = 40

[optimizer]
eta = 0.1
steps = 1500
start_distance = 1

[noise]
gradient = uniform:0.1
update = uniform:0.05
";

    #[test]
    fn parses_synthetic() {
        let cfg = ExperimentConfig::parse(SYNTHETIC, None).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::SyntheticPowerNorm);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        let s = &cfg.synthetic;
        assert_eq!((s.d, s.steps, s.bound_r, s.bound_s), (40, 1500, 0.1, 0.05));
        assert_eq!(s.eta, StepSpec::Fixed(0.1));
        assert_eq!(s.ball_radius, 1.0);
    }

    #[test]
    fn rejects_invalid_synthetic() {
        for (from, to) in [
            ("eta = 0.1", "eta = -0.1"),
            ("eta = 0.1", "eta = fast"),
            ("kind = synthetic-powernorm", "kind = other"),
            ("p = 0.2", "p = 1.5"),
            ("update = uniform:0.05", "update = arithmetic"),
            ("steps = 1500", "steps = 0"),
            ("seeds = 1, 2, 3", "seeds = x"),
        ] {
            let text = SYNTHETIC.replace(from, to);
            assert!(ExperimentConfig::parse(&text, None).is_err(), "{to}");
        }
    }

    #[test]
    fn parses_logreg_with_fallback() {
        let text = "[experiment]\nkind = logreg\n[data]\nimages = missing-images\nlabels = missing-labels\n[logreg]\nmodes = a, c\n[noise]\nacc_format = e8m12\n";
        let cfg = ExperimentConfig::parse(text, None).unwrap();
        assert!(matches!(cfg.logreg.source, DataSource::Blobs { .. }));
        assert_eq!(cfg.logreg.modes, vec![LogregMode::A, LogregMode::C]);
        assert_eq!(cfg.logreg.acc_format.fraction_bits(), 12);
        let strict = text.replace("[data]\n", "[data]\nfallback = false\n");
        assert!(matches!(
            ExperimentConfig::parse(&strict, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn step_specs() {
        assert_eq!(
            "auto-stochastic".parse::<StepSpec>().unwrap(),
            StepSpec::AutoStochastic
        );
        assert_eq!("0.5".parse::<StepSpec>().unwrap(), StepSpec::Fixed(0.5));
        assert!("0".parse::<StepSpec>().is_err());
    }
}
