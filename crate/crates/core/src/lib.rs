//! Stochastic normalized quasi-subgradient descent under emulated
//! low-precision floating-point arithmetic.
//!
//! The crate is organised bottom-up:
//!
//! * [`lowfloat`] emulates binary formats with round-to-nearest-even,
//!   including dot products with a reduced-precision accumulator.
//! * [`problems`] holds quasi-convex objectives, Hölder-condition fitting and
//!   a working-precision reference optimizer.
//! * [`optimizer`] runs projected normalized SGD with injected or
//!   arithmetic-induced gradient and update errors.
//! * [`bounds`] evaluates the liminf, finite-horizon and stochastic
//!   convergence bounds, the optimal step sizes, and the auxiliary
//!   maximization lemma together with its brute-force oracle.
//! * [`data`] loads MNIST IDX files, fits PCA and generates synthetic blobs.
//! * [`experiment`] wires everything into reproducible experiment recipes.

pub mod bounds;
pub mod data;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod lowfloat;
pub mod optimizer;
pub mod parallel;
pub mod problems;
pub mod rng;
pub mod text;

pub use error::{Error, Result};
