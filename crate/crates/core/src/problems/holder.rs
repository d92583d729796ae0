use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::text::StructuredText;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum HolderMode {
    /// Log-log least squares; the curve passes through the data.
    #[default]
    LeastSquares,
    /// Least-squares exponent, constant raised until every sample is covered.
    Majorizing,
}

impl fmt::Display for HolderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HolderMode::LeastSquares => "least-squares",
            HolderMode::Majorizing => "majorizing",
        })
    }
}

impl FromStr for HolderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "least-squares" | "ls" => Ok(HolderMode::LeastSquares),
            "majorizing" | "major" => Ok(HolderMode::Majorizing),
            other => Err(Error::Config(format!("unknown Hölder fit mode {other:?}"))),
        }
    }
}

/// Fitted `excess ~ L * distance^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderFit {
    pub p: f64,
    pub l: f64,
    pub mode: HolderMode,
    /// Root-mean-square residual of `ln(excess)` against the fitted line.
    pub residual: f64,
}

impl HolderFit {
    pub fn to_structured_text(&self) -> String {
        let mut doc = StructuredText::new();
        doc.set_float("holder", "p", self.p);
        doc.set_float("holder", "L", self.l);
        doc.set("holder", "mode", self.mode.to_string());
        doc.set_float("holder", "residual", self.residual);
        doc.render()
    }
}

/// Fits the Hölder order and constant to `(distance, excess)` samples.
/// Samples with zero excess are dropped.
pub fn fit_holder(samples: &[(f64, f64)], mode: HolderMode) -> Result<HolderFit> {
    if let Some(&(d, _)) = samples.iter().find(|(d, _)| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::domain(format!(
            "distances must be positive, got {d}"
        )));
    }
    if let Some(&(_, e)) = samples.iter().find(|(_, e)| !(*e >= 0.0 && e.is_finite())) {
        return Err(Error::domain(format!(
            "excess values must be non-negative, got {e}"
        )));
    }
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(d, e)| (d.ln(), e.ln()))
        .collect();
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = usable.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|s| (s.0 - mean_x).powi(2)).sum();
    if usable.len() < 2 || sxx <= 0.0 {
        return Err(Error::domain(
            "need at least two usable samples with distinct distances",
        ));
    }
    let sxy: f64 = usable.iter().map(|s| (s.0 - mean_x) * (s.1 - mean_y)).sum();
    let p = sxy / sxx;
    let mut intercept = mean_y - p * mean_x;
    if mode == HolderMode::Majorizing {
        intercept = usable
            .iter()
            .map(|(x, y)| y - p * x)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let residual = (usable
        .iter()
        .map(|(x, y)| (y - intercept - p * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(HolderFit {
        p,
        l: intercept.exp(),
        mode,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_law(l: f64, p: f64, distances: &[f64]) -> Vec<(f64, f64)> {
        distances.iter().map(|&d| (d, l * d.powf(p))).collect()
    }

    #[test]
    fn recovers_exact_power_laws() {
        let fit = fit_holder(
            &power_law(3.0, 0.2, &[0.1, 0.5, 1.0, 2.0]),
            HolderMode::LeastSquares,
        )
        .unwrap();
        assert!((fit.p - 0.2).abs() < 1e-6 && (fit.l - 3.0).abs() < 1e-6);
        let fit = fit_holder(
            &power_law(0.85, 1.6, &[0.05, 0.3, 1.0, 4.0]),
            HolderMode::LeastSquares,
        )
        .unwrap();
        assert!((fit.p - 1.6).abs() < 1e-6 && (fit.l - 0.85).abs() < 1e-6);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn majorizing_covers_outliers() {
        let mut samples = power_law(1.0, 1.0, &[0.1, 0.2, 0.5, 1.0, 2.0]);
        samples[2].1 *= 3.0;
        let ls = fit_holder(&samples, HolderMode::LeastSquares).unwrap();
        let major = fit_holder(&samples, HolderMode::Majorizing).unwrap();
        assert_eq!(ls.p, major.p);
        assert!(major.l > ls.l);
        for &(d, e) in &samples {
            assert!(major.l * d.powf(major.p) >= e * (1.0 - 1e-12));
        }
    }

    #[test]
    fn zero_excess_samples_are_dropped() {
        let mut samples = power_law(2.0, 0.5, &[0.1, 1.0, 3.0]);
        samples.push((5.0, 0.0));
        let fit = fit_holder(&samples, HolderMode::LeastSquares).unwrap();
        assert!((fit.p - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_unusable_samples() {
        assert!(fit_holder(&[(1.0, 1.0)], HolderMode::LeastSquares).is_err());
        assert!(fit_holder(&[(1.0, 1.0), (1.0, 2.0)], HolderMode::LeastSquares).is_err());
        assert!(fit_holder(&[(1.0, 1.0), (2.0, 0.0)], HolderMode::LeastSquares).is_err());
        assert!(fit_holder(&[(0.0, 1.0), (2.0, 1.0)], HolderMode::LeastSquares).is_err());
        assert!(fit_holder(&[(-1.0, 1.0), (2.0, 1.0)], HolderMode::LeastSquares).is_err());
    }

    #[test]
    fn record_format() {
        let fit = HolderFit {
            p: 1.6,
            l: 0.85,
            mode: HolderMode::LeastSquares,
            residual: 0.0,
        };
        assert_eq!(
            fit.to_structured_text(),
            "[holder]\np = 1.6\nL = 0.85\nmode = least-squares\nresidual = 0\n"
        );
    }
}
