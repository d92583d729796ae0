use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::format_float;

pub const CSV_HEADER: &str = "k,loss,min_loss,dist_to_opt,norm_r,norm_s";

/// One iteration: the loss at `x_k` and the noise norms of the step taken
/// from `x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub loss: f64,
    pub min_loss: f64,
    pub dist_to_opt: Option<f64>,
    pub norm_r: f64,
    pub norm_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub steps: usize,
    pub min_loss: f64,
    pub argmin: usize,
    /// Mean of `||r_k||^2`, an estimate of `d * sigma_r^2`.
    pub d_sigma_r_sq: f64,
    pub d_sigma_s_sq: f64,
    /// Largest realized `||r_k||`.
    pub r_hat: f64,
    pub s_hat: f64,
    pub eta_used: f64,
    pub reached_optimum: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub summary: Summary,
    /// The iterate after the last recorded step.
    pub final_point: Vec<f64>,
}

/// Constant-valued bound columns appended to the trajectory CSV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundOverlay {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_det: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_stoch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_finite_k: Option<f64>,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    #[serde(flatten)]
    summary: &'a Summary,
    #[serde(flatten)]
    bounds: &'a BoundOverlay,
}

impl Trajectory {
    pub fn final_min_loss(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.min_loss)
    }

    pub fn losses(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.loss)
    }

    pub fn to_csv(&self, overlay: &BoundOverlay) -> String {
        let columns = [
            ("bound_det", overlay.bound_det),
            ("bound_stoch", overlay.bound_stoch),
            ("bound_finiteK", overlay.bound_finite_k),
        ];
        let mut out = String::from(CSV_HEADER);
        for (name, value) in &columns {
            if value.is_some() {
                out.push(',');
                out.push_str(name);
            }
        }
        out.push('\n');
        for r in &self.records {
            let dist = r.dist_to_opt.map(format_float).unwrap_or_default();
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                r.k,
                format_float(r.loss),
                format_float(r.min_loss),
                dist,
                format_float(r.norm_r),
                format_float(r.norm_s)
            );
            for value in columns.iter().filter_map(|c| c.1) {
                out.push(',');
                out.push_str(&format_float(value));
            }
            out.push('\n');
        }
        let line = SummaryLine {
            summary: &self.summary,
            bounds: overlay,
        };
        let json = serde_json::to_string(&line).expect("summary serializes");
        let _ = writeln!(out, "# summary: {json}");
        out
    }

    pub fn write_csv(&self, path: &Path, overlay: &BoundOverlay) -> Result<()> {
        std::fs::write(path, self.to_csv(overlay)).map_err(|e| Error::io(path, e))
    }
}
