use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lowfloat::FloatFormat;
use crate::problems::GradientArithmetic;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum GradientNoise {
    #[default]
    None,
    /// Each coordinate of `r_k` i.i.d. on `[-bound, bound]`.
    Uniform { bound: f64 },
    /// `r_k` is the error of the normalized gradient computed in emulated
    /// arithmetic.
    Arithmetic(GradientArithmetic),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum UpdateNoise {
    #[default]
    None,
    Uniform {
        bound: f64,
    },
    /// `s_k` is the rounding error of the weight update in `format`.
    Arithmetic {
        format: FloatFormat,
    },
}

impl GradientNoise {
    /// Per-coordinate variance of uniform noise, `B^2 / 3`.
    pub fn variance(&self) -> Option<f64> {
        match self {
            GradientNoise::None => Some(0.0),
            GradientNoise::Uniform { bound } => Some(bound * bound / 3.0),
            GradientNoise::Arithmetic(_) => None,
        }
    }

    /// Both arithmetic formats are the working precision, or no noise at all.
    pub fn is_exact(&self) -> bool {
        match self {
            GradientNoise::None => true,
            GradientNoise::Uniform { bound } => *bound == 0.0,
            GradientNoise::Arithmetic(a) => {
                a.mul.is_working_precision() && a.acc.is_working_precision()
            }
        }
    }
}

impl UpdateNoise {
    pub fn variance(&self) -> Option<f64> {
        match self {
            UpdateNoise::None => Some(0.0),
            UpdateNoise::Uniform { bound } => Some(bound * bound / 3.0),
            UpdateNoise::Arithmetic { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            UpdateNoise::None => true,
            UpdateNoise::Uniform { bound } => *bound == 0.0,
            UpdateNoise::Arithmetic { format } => format.is_working_precision(),
        }
    }
}

fn parse_bound(spec: &str) -> Result<f64> {
    let bound: f64 = spec
        .parse()
        .map_err(|_| Error::Config(format!("malformed noise bound {spec:?}")))?;
    if !(bound >= 0.0 && bound.is_finite()) {
        return Err(Error::Config(format!(
            "noise bound must be non-negative, got {bound}"
        )));
    }
    Ok(bound)
}

/// Parses `none` or `uniform:<B>`. Arithmetic noise needs formats and is built
/// directly.
fn parse_kind(s: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s == "none" {
        return Ok(None);
    }
    match s.strip_prefix("uniform:") {
        Some(b) => Ok(Some(parse_bound(b.trim())?)),
        None => Err(Error::Config(format!("unknown noise spec {s:?}"))),
    }
}

impl FromStr for GradientNoise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match parse_kind(s)? {
            None => GradientNoise::None,
            Some(bound) => GradientNoise::Uniform { bound },
        })
    }
}

impl FromStr for UpdateNoise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match parse_kind(s)? {
            None => UpdateNoise::None,
            Some(bound) => UpdateNoise::Uniform { bound },
        })
    }
}

impl fmt::Display for GradientNoise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradientNoise::None => f.write_str("none"),
            GradientNoise::Uniform { bound } => write!(f, "uniform:{bound}"),
            GradientNoise::Arithmetic(a) => write!(f, "arithmetic(mul={}, acc={})", a.mul, a.acc),
        }
    }
}

impl fmt::Display for UpdateNoise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateNoise::None => f.write_str("none"),
            UpdateNoise::Uniform { bound } => write!(f, "uniform:{bound}"),
            UpdateNoise::Arithmetic { format } => write!(f, "arithmetic({format})"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoiseModel {
    pub gradient: GradientNoise,
    pub update: UpdateNoise,
    pub seed: u64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn uniform(bound_r: f64, bound_s: f64, seed: u64) -> Self {
        NoiseModel {
            gradient: GradientNoise::Uniform { bound: bound_r },
            update: UpdateNoise::Uniform { bound: bound_s },
            seed,
        }
    }

    pub fn arithmetic(gradient: Option<GradientArithmetic>, update: Option<FloatFormat>) -> Self {
        NoiseModel {
            gradient: gradient.map_or(GradientNoise::None, GradientNoise::Arithmetic),
            update: update.map_or(UpdateNoise::None, |format| UpdateNoise::Arithmetic {
                format,
            }),
            seed: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseModel { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for bound in [
            match self.gradient {
                GradientNoise::Uniform { bound } => bound,
                _ => 0.0,
            },
            match self.update {
                UpdateNoise::Uniform { bound } => bound,
                _ => 0.0,
            },
        ] {
            if !(bound >= 0.0 && bound.is_finite()) {
                return Err(Error::domain(format!(
                    "noise bound must be non-negative, got {bound}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert_eq!(
            "none".parse::<GradientNoise>().unwrap(),
            GradientNoise::None
        );
        assert_eq!(
            "uniform:0.1".parse::<UpdateNoise>().unwrap(),
            UpdateNoise::Uniform { bound: 0.1 }
        );
        assert!("uniform:-1".parse::<GradientNoise>().is_err());
        assert!("gaussian:1".parse::<GradientNoise>().is_err());
    }

    #[test]
    fn uniform_variance() {
        let g = GradientNoise::Uniform { bound: 0.1 };
        assert!((g.variance().unwrap() - 0.01 / 3.0).abs() < 1e-18);
    }

    #[test]
    fn exactness() {
        let w = FloatFormat::working();
        let arith = GradientArithmetic { mul: w, acc: w };
        assert!(GradientNoise::Arithmetic(arith).is_exact());
        assert!(UpdateNoise::Arithmetic { format: w }.is_exact());
        assert!(!UpdateNoise::Arithmetic {
            format: FloatFormat::bfloat16()
        }
        .is_exact());
    }
}
