use super::{GradientArithmetic, Problem};
use crate::error::{Error, Result};
use crate::linalg::norm;

/// `f(x) = L ||x||^p`, minimized at the origin with `f* = 0`. It satisfies the
/// Hölder condition of order `p` with constant `L` with equality.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerNorm {
    l: f64,
    p: f64,
    dim: usize,
}

impl PowerNorm {
    pub fn new(l: f64, p: f64, dim: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::domain(format!("L must be positive, got {l}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::domain(format!("p must lie in (0, 1], got {p}")));
        }
        if dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        Ok(Self { l, p, dim })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Problem for PowerNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, w: &[f64]) -> Result<f64> {
        self.check_dim(w)?;
        Ok(self.l * norm(w).powf(self.p))
    }

    /// Any positive multiple of `w` is a quasi-subgradient; `w` itself is returned.
    fn quasi_subgradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::AtOptimum);
        }
        Ok(w.to_vec())
    }

    fn lp_subgradient(
        &self,
        w: &[f64],
        _batch: Option<&[usize]>,
        arith: &GradientArithmetic,
    ) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        let g: Vec<f64> = w.iter().map(|&x| arith.mul.quantize(x)).collect();
        if g.iter().all(|&x| x == 0.0) {
            return Err(Error::AtOptimum);
        }
        Ok(g)
    }

    fn known_optimum(&self) -> Option<(Vec<f64>, f64)> {
        Some((vec![0.0; self.dim], 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, sub};
    use crate::rng::{stream_rng, unit_vector, Stream};
    use rand::Rng;

    #[test]
    fn evaluation_examples() {
        let f = PowerNorm::new(3.0, 0.2, 2).unwrap();
        assert_eq!(f.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(f.evaluate(&[1.0, 0.0]).unwrap(), 3.0);
        assert!(f.evaluate(&[1.0]).is_err());
    }

    #[test]
    fn subgradient_examples() {
        let f = PowerNorm::new(3.0, 0.2, 2).unwrap();
        let g = f.quasi_subgradient(&[3.0, 4.0]).unwrap();
        assert_eq!(g, vec![3.0, 4.0]);
        let n = norm(&g);
        assert_eq!([g[0] / n, g[1] / n], [0.6, 0.8]);
        assert!(matches!(
            f.quasi_subgradient(&[0.0, 0.0]),
            Err(Error::AtOptimum)
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PowerNorm::new(0.0, 0.5, 2).is_err());
        assert!(PowerNorm::new(1.0, 1.5, 2).is_err());
        assert!(PowerNorm::new(1.0, 0.5, 0).is_err());
    }

    #[test]
    fn holder_equality_everywhere() {
        let f = PowerNorm::new(0.85, 0.7, 5).unwrap();
        let mut rng = stream_rng(3, Stream::Probe, 0);
        for _ in 0..200 {
            let r: f64 = rng.random_range(1e-3..10.0);
            let x: Vec<f64> = unit_vector(&mut rng, 5)
                .into_iter()
                .map(|v| v * r)
                .collect();
            let excess = f.evaluate(&x).unwrap();
            assert!((excess - 0.85 * norm(&x).powf(0.7)).abs() <= 1e-14 * excess.max(1.0));
        }
    }

    #[test]
    fn sampled_quasi_subgradient_validity() {
        let f = PowerNorm::new(3.0, 0.2, 4).unwrap();
        let mut rng = stream_rng(5, Stream::Probe, 1);
        let mut checked = 0;
        while checked < 1000 {
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            if f.evaluate(&x).unwrap() < f.evaluate(&w).unwrap() {
                let g = f.quasi_subgradient(&w).unwrap();
                assert!(dot(&g, &sub(&x, &w)) <= 0.0);
                checked += 1;
            }
        }
    }
}
