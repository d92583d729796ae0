use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, FeatureScale, Matrix};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Unit-covariance Gaussian blobs whose class centers sit at pairwise distance
/// `separation` (simplex layout when `dim >= classes`, otherwise adjacent
/// vertices of a regular polygon in the first two coordinates).
pub fn synthetic_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if classes < 2 || per_class < 1 || dim < 1 {
        return Err(Error::domain(
            "need at least 2 classes, 1 sample per class and 1 feature",
        ));
    }
    if dim < 2 && classes > 2 {
        return Err(Error::domain(
            "more than two classes need at least two features",
        ));
    }
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|c| {
            let mut v = vec![0.0; dim];
            if classes <= dim {
                v[c] = separation / std::f64::consts::SQRT_2;
            } else {
                let radius = separation / (2.0 * (std::f64::consts::PI / classes as f64).sin());
                let angle = 2.0 * std::f64::consts::PI * c as f64 / classes as f64;
                v[0] = radius * angle.cos();
                v[1] = radius * angle.sin();
            }
            v
        })
        .collect();

    let mut rng = stream_rng(seed, Stream::Start, 0);
    let mut data = Vec::with_capacity(classes * per_class * dim);
    let mut labels = Vec::with_capacity(classes * per_class);
    // interleave classes so that any prefix is balanced
    for _ in 0..per_class {
        for (c, center) in centers.iter().enumerate() {
            for &m in center {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(m + z);
            }
            labels.push(c);
        }
    }
    let features = Matrix::new(classes * per_class, dim, data)?;
    Dataset::new(features, labels, classes, FeatureScale::identity(dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let a = synthetic_blobs(3, 10, 4, 2.0, 42).unwrap();
        let b = synthetic_blobs(3, 10, 4, 2.0, 42).unwrap();
        let c = synthetic_blobs(3, 10, 4, 2.0, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.features, c.features);
        assert_eq!(a.len(), 30);
    }

    #[test]
    fn centers_at_requested_separation() {
        for (classes, dim) in [(2, 2), (3, 2), (10, 2), (4, 6)] {
            let ds = synthetic_blobs(classes, 4000, dim, 5.0, 1).unwrap();
            let mean = |c: usize| {
                let mut m = vec![0.0; dim];
                let mut n = 0.0;
                for i in 0..ds.len() {
                    if ds.labels[i] == c {
                        n += 1.0;
                        for (a, x) in m.iter_mut().zip(ds.features.row(i)) {
                            *a += x;
                        }
                    }
                }
                m.into_iter().map(|v| v / n).collect::<Vec<_>>()
            };
            let d = crate::linalg::distance(&mean(0), &mean(1));
            assert!((d - 5.0).abs() < 0.15, "classes {classes} dim {dim}: {d}");
        }
    }

    #[test]
    fn rejects_degenerate_requests() {
        assert!(synthetic_blobs(1, 5, 2, 1.0, 0).is_err());
        assert!(synthetic_blobs(3, 5, 1, 1.0, 0).is_err());
        assert!(synthetic_blobs(2, 0, 2, 1.0, 0).is_err());
    }
}
