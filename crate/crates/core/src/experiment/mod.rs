//! Experiment recipes: configuration, the synthetic power-norm study, the
//! logistic-regression pipeline and the Lemma 1 verification sweep.

mod config;
mod holder_probe;
mod lemma1_sweep;
mod logreg;
mod synthetic;

pub use config::{
    DataSource, ExperimentConfig, ExperimentKind, LogregConfig, LogregMode, StepSpec,
    SyntheticConfig,
};
pub use holder_probe::{holder_samples, HOLDER_DIRECTIONS, HOLDER_RADII};
pub use lemma1_sweep::{sample_lemma1_instance, verify_lemma1, Lemma1Check, Lemma1Sweep};
pub use logreg::{
    logreg_noise_moments, mode_bound, mode_noise, prepare_logreg, run_logreg, LogregOutcome,
    LogregSetup, ModeEstimate, ModeResult,
};
pub use synthetic::{
    run_synthetic, synthetic_bounds, synthetic_noise_moments, SeedRun, SyntheticBounds,
    SyntheticOutcome,
};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
