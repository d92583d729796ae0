use super::{GradientArithmetic, Problem};
use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};
use crate::lowfloat::{lp_dot, lp_op, Op};

/// Multinomial logistic regression with an L2 penalty.
///
/// Weights are laid out class-major, `w[c * (F + 1) + j]` for feature `j` and
/// the bias at `j = F`. The objective is the mean cross-entropy plus
/// `(lambda / 2) ||w||^2`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    features: Matrix,
    labels: Vec<usize>,
    classes: usize,
    regularizer: f64,
}

impl LogisticRegression {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        classes: usize,
        regularizer: f64,
    ) -> Result<Self> {
        if classes < 2 {
            return Err(Error::domain("need at least two classes"));
        }
        if features.rows() == 0 || labels.len() != features.rows() {
            return Err(Error::domain(
                "features and labels must be non-empty and aligned",
            ));
        }
        if labels.iter().any(|&l| l >= classes) {
            return Err(Error::domain("label out of range"));
        }
        if !(regularizer >= 0.0 && regularizer.is_finite()) {
            return Err(Error::domain("regularizer must be finite and non-negative"));
        }
        Ok(Self {
            features,
            labels,
            classes,
            regularizer,
        })
    }

    pub fn from_dataset(ds: &Dataset, regularizer: f64) -> Result<Self> {
        Self::new(
            ds.features.clone(),
            ds.labels.clone(),
            ds.num_classes,
            regularizer,
        )
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }

    pub fn regularizer(&self) -> f64 {
        self.regularizer
    }

    fn stride(&self) -> usize {
        self.features.cols() + 1
    }

    fn logits(&self, w: &[f64], i: usize, out: &mut [f64]) {
        let x = self.features.row(i);
        let stride = self.stride();
        for (c, z) in out.iter_mut().enumerate() {
            let wc = &w[c * stride..(c + 1) * stride];
            *z = wc[..x.len()].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + wc[x.len()];
        }
    }

    /// Fraction of samples whose arg-max logit matches the label.
    pub fn accuracy(&self, w: &[f64]) -> Result<f64> {
        self.check_dim(w)?;
        let mut z = vec![0.0; self.classes];
        let mut hits = 0usize;
        for i in 0..self.labels.len() {
            self.logits(w, i, &mut z);
            let best = (0..self.classes).fold(0, |b, c| if z[c] > z[b] { c } else { b });
            hits += usize::from(best == self.labels[i]);
        }
        Ok(hits as f64 / self.labels.len() as f64)
    }

    fn gradient_over(&self, w: &[f64], samples: impl Iterator<Item = usize>) -> Vec<f64> {
        let stride = self.stride();
        let f = self.features.cols();
        let mut g = vec![0.0; w.len()];
        let mut z = vec![0.0; self.classes];
        let mut n = 0usize;
        for i in samples {
            n += 1;
            self.logits(w, i, &mut z);
            softmax_in_place(&mut z);
            let x = self.features.row(i);
            for c in 0..self.classes {
                let e = z[c] - f64::from(u8::from(c == self.labels[i]));
                let gc = &mut g[c * stride..(c + 1) * stride];
                for j in 0..f {
                    gc[j] += e * x[j];
                }
                gc[f] += e;
            }
        }
        let inv = 1.0 / n as f64;
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi = *gi * inv + self.regularizer * wi;
        }
        g
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

impl Problem for LogisticRegression {
    fn dim(&self) -> usize {
        self.classes * self.stride()
    }

    fn evaluate(&self, w: &[f64]) -> Result<f64> {
        self.check_dim(w)?;
        let mut z = vec![0.0; self.classes];
        let mut total = 0.0;
        for i in 0..self.labels.len() {
            self.logits(w, i, &mut z);
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            total += lse - z[self.labels[i]];
        }
        let penalty = 0.5 * self.regularizer * crate::linalg::norm_sq(w);
        Ok(total / self.labels.len() as f64 + penalty)
    }

    fn quasi_subgradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        Ok(self.gradient_over(w, 0..self.labels.len()))
    }

    fn batch_subgradient(&self, w: &[f64], batch: &[usize]) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        if batch.is_empty() {
            return Err(Error::domain("empty mini-batch"));
        }
        Ok(self.gradient_over(w, batch.iter().copied()))
    }

    /// Emulated pipeline: logits through `lp_dot`, softmax at working precision,
    /// residuals rounded into the multiplier format, per-weight sums over the
    /// samples through `lp_dot`, then the mean and the penalty term through
    /// `lp_op`.
    fn lp_subgradient(
        &self,
        w: &[f64],
        batch: Option<&[usize]>,
        arith: &GradientArithmetic,
    ) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        let all: Vec<usize>;
        let samples = match batch {
            Some([]) => return Err(Error::domain("empty mini-batch")),
            Some(b) => b,
            None => {
                all = (0..self.labels.len()).collect();
                &all
            }
        };
        let mul = &arith.mul;
        let acc = &arith.acc;
        let f = self.features.cols();
        let stride = self.stride();
        let n = samples.len();

        let w_lp: Vec<f64> = w.iter().map(|&v| mul.quantize(v)).collect();
        // columns[j][s] is feature j of sample s; the last column is the bias input
        let mut columns = vec![Vec::with_capacity(n); stride];
        for &i in samples {
            for (j, col) in columns.iter_mut().enumerate().take(f) {
                col.push(mul.quantize(self.features.get(i, j)));
            }
            columns[f].push(1.0);
        }

        let mut residuals = vec![Vec::with_capacity(n); self.classes];
        let mut x = vec![0.0; stride];
        let mut z = vec![0.0; self.classes];
        for (s, &i) in samples.iter().enumerate() {
            for (j, col) in columns.iter().enumerate() {
                x[j] = col[s];
            }
            for (c, zc) in z.iter_mut().enumerate() {
                *zc = lp_dot(&x, &w_lp[c * stride..(c + 1) * stride], mul, acc)?;
            }
            softmax_in_place(&mut z);
            for (c, res) in residuals.iter_mut().enumerate() {
                let p = mul.quantize(z[c]);
                let y = f64::from(u8::from(c == self.labels[i]));
                res.push(lp_op(p, y, Op::Sub, mul)?.value);
            }
        }

        let count = mul.quantize(n as f64);
        let lambda = mul.quantize(self.regularizer);
        let mut g = vec![0.0; w.len()];
        for (c, res) in residuals.iter().enumerate() {
            for (j, col) in columns.iter().enumerate() {
                let sum = lp_dot(res, col, mul, acc)?;
                let mean = lp_op(sum, count, Op::Div, mul)?.value;
                let idx = c * stride + j;
                let penalty = lp_op(lambda, w_lp[idx], Op::Mul, mul)?.value;
                g[idx] = lp_op(mean, penalty, Op::Add, mul)?.value;
            }
        }
        Ok(g)
    }

    fn sample_count(&self) -> Option<usize> {
        Some(self.labels.len())
    }
}
