//! Quasi-convex objectives and their quasi-subgradients.

mod holder;
mod logreg;
mod power_norm;
mod reference;

use crate::error::{Error, Result};
use crate::lowfloat::FloatFormat;

pub use holder::{fit_holder, HolderFit, HolderMode};
pub use logreg::LogisticRegression;
pub use power_norm::PowerNorm;
pub use reference::{find_reference_optimum, ReferenceOptimum};

/// Formats used by the emulated gradient pipeline: products are rounded into
/// `mul`, running sums into `acc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradientArithmetic {
    pub mul: FloatFormat,
    pub acc: FloatFormat,
}

pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;

    fn evaluate(&self, w: &[f64]) -> Result<f64>;

    /// A vector `g` with `<g, x' - w> <= 0` on the strict sublevel set of `w`.
    /// Returns [`Error::AtOptimum`] where no descent direction exists.
    fn quasi_subgradient(&self, w: &[f64]) -> Result<Vec<f64>>;

    /// The quasi-subgradient computed from the given samples only.
    fn batch_subgradient(&self, w: &[f64], _batch: &[usize]) -> Result<Vec<f64>> {
        self.quasi_subgradient(w)
    }

    /// The quasi-subgradient evaluated through the emulated arithmetic
    /// pipeline (unnormalized). `batch = None` uses every sample.
    fn lp_subgradient(
        &self,
        w: &[f64],
        batch: Option<&[usize]>,
        arith: &GradientArithmetic,
    ) -> Result<Vec<f64>>;

    /// Number of samples available for mini-batching, if any.
    fn sample_count(&self) -> Option<usize> {
        None
    }

    /// Closed-form minimizer and optimal value, when known.
    fn known_optimum(&self) -> Option<(Vec<f64>, f64)> {
        None
    }

    fn check_dim(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::domain(format!(
                "expected a {}-dimensional point, got {}",
                self.dim(),
                w.len()
            )));
        }
        Ok(())
    }
}

/// Membership in the strict sublevel set `{x : f(x) < level}`.
pub fn sublevel_member(problem: &dyn Problem, level: f64, x: &[f64]) -> Result<bool> {
    Ok(problem.evaluate(x)? < level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sublevel_examples() {
        let f = PowerNorm::new(3.0, 0.2, 2).unwrap();
        // 3 * 0.5^0.2 = 2.6116...
        assert!(sublevel_member(&f, 3.0, &[0.5, 0.0]).unwrap());
        let x = [0.3, -1.2];
        assert!(!sublevel_member(&f, f.evaluate(&x).unwrap(), &x).unwrap());
        assert!(!sublevel_member(&f, 0.0, &[0.0, 0.0]).unwrap());
        assert!(!sublevel_member(&f, 0.0, &[1e-9, 0.0]).unwrap());
    }
}
