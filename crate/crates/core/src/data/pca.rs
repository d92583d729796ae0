//! Principal component analysis through the covariance eigendecomposition.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use super::Matrix;
use crate::error::{Error, Result};
use crate::text::{format_float, StructuredText};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x F`, orthonormal rows, each with its largest-magnitude entry positive.
    pub components: Matrix,
    /// Non-increasing, non-negative.
    pub explained_variance: Vec<f64>,
}

/// Fits the top-`k` principal directions of `features` (centered by the column
/// mean, covariance normalized by `N - 1`).
pub fn fit_pca(features: &Matrix, k: usize) -> Result<PcaModel> {
    let (n, f) = (features.rows(), features.cols());
    if n < 2 {
        return Err(Error::domain("PCA needs at least two samples"));
    }
    if k == 0 || k > n.min(f) {
        return Err(Error::domain(format!("k = {k} outside [1, {}]", n.min(f))));
    }
    let mut mean = vec![0.0; f];
    for i in 0..n {
        for (m, x) in mean.iter_mut().zip(features.row(i)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, f, |i, j| features.get(i, j) - mean[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..f).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(k * f);
    let mut explained_variance = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let v = eig.eigenvectors.column(idx);
        let mut pivot = 0;
        for j in 1..f {
            if v[j].abs() > v[pivot].abs() {
                pivot = j;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        components.extend(v.iter().map(|x| sign * x));
        explained_variance.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components: Matrix::new(k, f, components)?,
        explained_variance,
    })
}

/// `(features - mean) * components^T`.
pub fn transform(model: &PcaModel, features: &Matrix) -> Result<Matrix> {
    let f = model.mean.len();
    if features.cols() != f {
        return Err(Error::domain(format!(
            "feature width {} does not match the model width {f}",
            features.cols()
        )));
    }
    let k = model.components.rows();
    let mut out = Vec::with_capacity(features.rows() * k);
    let mut centered = vec![0.0; f];
    for i in 0..features.rows() {
        for (c, (x, m)) in centered
            .iter_mut()
            .zip(features.row(i).iter().zip(&model.mean))
        {
            *c = x - m;
        }
        for comp in 0..k {
            out.push(crate::linalg::dot(&centered, model.components.row(comp)));
        }
    }
    Matrix::new(features.rows(), k, out)
}

impl PcaModel {
    pub fn inverse_transform(&self, projected: &Matrix) -> Result<Matrix> {
        let (k, f) = (self.components.rows(), self.components.cols());
        if projected.cols() != k {
            return Err(Error::domain("projected width does not match the model"));
        }
        let mut out = Vec::with_capacity(projected.rows() * f);
        for i in 0..projected.rows() {
            for j in 0..f {
                let back: f64 = (0..k)
                    .map(|c| projected.get(i, c) * self.components.get(c, j))
                    .sum();
                out.push(back + self.mean[j]);
            }
        }
        Matrix::new(projected.rows(), f, out)
    }

    /// Structured-text persistence with round-trip decimal floats.
    pub fn to_structured_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format_float(*x))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::from("[pca]\n");
        let _ = writeln!(out, "components = {}", self.components.rows());
        let _ = writeln!(out, "features = {}", self.components.cols());
        let _ = writeln!(out, "mean = {}", join(&self.mean));
        let _ = writeln!(
            out,
            "explained_variance = {}",
            join(&self.explained_variance)
        );
        for c in 0..self.components.rows() {
            let _ = writeln!(
                out,
                "component_{} = {}",
                c + 1,
                join(self.components.row(c))
            );
        }
        out
    }

    pub fn from_structured_text(text: &str) -> Result<Self> {
        let doc = StructuredText::parse(text)?;
        let k: usize = doc.parse_required("pca", "components")?;
        let mean = doc.float_list("pca", "mean")?;
        let explained_variance = doc.float_list("pca", "explained_variance")?;
        let mut comps = Vec::new();
        for c in 1..=k {
            let row = doc.float_list("pca", &format!("component_{c}"))?;
            if row.len() != mean.len() {
                return Err(Error::Config(format!("component_{c} has the wrong width")));
            }
            comps.extend(row);
        }
        Ok(Self {
            components: Matrix::new(k, mean.len(), comps)?,
            mean,
            explained_variance,
        })
    }
}
