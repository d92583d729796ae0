//! Dataset ingestion, PCA reduction and synthetic fallback data.

mod blobs;
mod idx;
mod pca;

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub use blobs::synthetic_blobs;
pub use idx::{encode_idx_images, encode_idx_labels, load_idx, parse_idx, IdxData};
pub use pca::{fit_pca, transform, PcaModel};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::domain(format!(
                "matrix shape {rows}x{cols} does not match {} entries",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::domain("ragged rows"));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Per-feature affine normalization applied before fitting, `x' = (x - offset) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScale {
    pub description: String,
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScale {
    pub fn identity(cols: usize) -> Self {
        Self {
            description: "identity".into(),
            offset: vec![0.0; cols],
            scale: vec![1.0; cols],
        }
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.offset.len() {
            return Err(Error::domain(
                "feature width does not match the recorded scale",
            ));
        }
        let mut out = features.clone();
        for i in 0..out.rows {
            for j in 0..out.cols {
                let v = &mut out.data[i * out.cols + j];
                *v = (*v - self.offset[j]) / self.scale[j];
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub feature_scale: FeatureScale,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        num_classes: usize,
        feature_scale: FeatureScale,
    ) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::domain("dataset must contain at least one sample"));
        }
        if labels.len() != features.rows() {
            return Err(Error::domain(format!(
                "{} labels for {} samples",
                labels.len(),
                features.rows()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::domain(format!(
                "label {bad} outside [0, {num_classes})"
            )));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            feature_scale,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// First `n` samples (or all of them).
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.len());
        let idx: Vec<usize> = (0..n).collect();
        Self {
            features: self.features.select_rows(&idx),
            labels: self.labels[..n].to_vec(),
            num_classes: self.num_classes,
            feature_scale: self.feature_scale.clone(),
        }
    }

    /// Projected-feature cache: header `label,pc1,...,pck`, one row per sample.
    pub fn to_projection_csv(&self) -> String {
        let k = self.features.cols();
        let mut out = String::from("label");
        for j in 1..=k {
            let _ = write!(out, ",pc{j}");
        }
        out.push('\n');
        for (i, label) in self.labels.iter().enumerate() {
            let _ = write!(out, "{label}");
            for v in self.features.row(i) {
                let _ = write!(out, ",{}", crate::text::format_float(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_projection_csv(text: &str, num_classes: usize) -> Result<Self> {
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty projection cache".into()))?;
        let k = header.split(',').count() - 1;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (n, line) in lines.enumerate() {
            let mut fields = line.split(',');
            let bad = || Error::Config(format!("projection cache row {}: malformed", n + 1));
            labels.push(
                fields
                    .next()
                    .ok_or_else(bad)?
                    .trim()
                    .parse()
                    .map_err(|_| bad())?,
            );
            let row: Vec<f64> = fields
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if row.len() != k {
                return Err(bad());
            }
            rows.push(row);
        }
        Dataset::new(
            Matrix::from_rows(&rows)?,
            labels,
            num_classes,
            FeatureScale::identity(k),
        )
    }
}
