use super::Problem;
use crate::error::{Error, Result};
use crate::linalg::{distance, norm};

/// Working-precision reference minimizer used to evaluate the bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptimum {
    pub w_star: Vec<f64>,
    pub f_star: f64,
    /// `||start - w*||`.
    pub c0: f64,
    /// Norm of the gradient at `w*` (zero for closed-form optima).
    pub gradient_norm: f64,
    pub iterations: usize,
}

const DIVERGENCE_WINDOW: usize = 50;

/// Full-batch gradient descent with a constant rate. Problems with a known
/// closed-form optimum are answered without iterating. The best iterate is
/// returned, so `f_star` never exceeds any recorded loss.
pub fn find_reference_optimum(
    problem: &dyn Problem,
    start: &[f64],
    steps: usize,
    rate: f64,
) -> Result<ReferenceOptimum> {
    problem.check_dim(start)?;
    if let Some((w_star, f_star)) = problem.known_optimum() {
        return Ok(ReferenceOptimum {
            c0: distance(start, &w_star),
            w_star,
            f_star,
            gradient_norm: 0.0,
            iterations: 0,
        });
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain("rate must be positive"));
    }
    let mut w = start.to_vec();
    let mut loss = problem.evaluate(&w)?;
    let mut best = (w.clone(), loss);
    let mut rising = 0usize;
    let mut iterations = 0;
    for k in 0..steps {
        let g = match problem.quasi_subgradient(&w) {
            Ok(g) => g,
            Err(Error::AtOptimum) => break,
            Err(e) => return Err(e),
        };
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= rate * gi;
        }
        let next = problem.evaluate(&w)?;
        iterations = k + 1;
        if !next.is_finite() {
            return Err(Error::Divergence {
                steps: iterations,
                last_loss: next,
            });
        }
        rising = if next > loss { rising + 1 } else { 0 };
        if rising >= DIVERGENCE_WINDOW {
            return Err(Error::Divergence {
                steps: iterations,
                last_loss: next,
            });
        }
        loss = next;
        if loss < best.1 {
            best = (w.clone(), loss);
        }
    }
    let gradient_norm = match problem.quasi_subgradient(&best.0) {
        Ok(g) => norm(&g),
        Err(Error::AtOptimum) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(ReferenceOptimum {
        c0: distance(start, &best.0),
        w_star: best.0,
        f_star: best.1,
        gradient_norm,
        iterations,
    })
}
