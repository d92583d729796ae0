//! Normalized projected quasi-subgradient descent with injected or
//! arithmetic-induced noise.

mod domain;
mod engine;
mod moments;
mod noise;
mod trajectory;

pub use domain::Domain;
pub use engine::{run, sgd_step, SgdConfig, Step};
pub use moments::{estimate_noise_moments, NoiseMoments, MIN_PROBES};
pub use noise::{GradientNoise, NoiseModel, UpdateNoise};
pub use trajectory::{BoundOverlay, StepRecord, Summary, Trajectory, CSV_HEADER};
