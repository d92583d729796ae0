use serde::{Deserialize, Serialize};

use super::{sgd_step, NoiseModel, SgdConfig};
use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use crate::problems::Problem;

pub const MIN_PROBES: usize = 30;

/// Empirical noise moments: mean squared norms estimate `d * sigma^2`, the
/// maxima estimate the deterministic bounds `R` and `S`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseMoments {
    pub d_sigma_r_sq: f64,
    pub d_sigma_s_sq: f64,
    pub r_hat: f64,
    pub s_hat: f64,
    pub probes: usize,
}

/// Evaluates the noise model at `probe_steps` iterates of the exact
/// (noise-free, same mini-batch) process started at `start`, and collects the
/// realized `r_k`, `s_k`.
pub fn estimate_noise_moments(
    problem: &dyn Problem,
    start: &[f64],
    config: &SgdConfig,
    probe_steps: usize,
) -> Result<NoiseMoments> {
    if probe_steps < MIN_PROBES {
        return Err(Error::domain(format!(
            "need at least {MIN_PROBES} probes, got {probe_steps}"
        )));
    }
    let driver = SgdConfig {
        eta: config.eta,
        noise: NoiseModel::none().with_seed(config.noise.seed),
        domain: config.domain.clone(),
        batch_size: config.batch_size,
    };
    let mut w = start.to_vec();
    let mut m = NoiseMoments::default();
    let (mut sum_r, mut sum_s) = (0.0, 0.0);
    for k in 0..probe_steps {
        let probe = match sgd_step(problem, &w, config, k) {
            Ok(step) => step,
            Err(Error::AtOptimum) if k >= MIN_PROBES => break,
            Err(Error::AtOptimum) => {
                return Err(Error::domain(format!(
                    "reached the optimum after {k} probes, before the required {MIN_PROBES}"
                )))
            }
            Err(e) => return Err(e),
        };
        let (r2, s2) = (norm_sq(&probe.r), norm_sq(&probe.s));
        sum_r += r2;
        sum_s += s2;
        m.r_hat = m.r_hat.max(r2.sqrt());
        m.s_hat = m.s_hat.max(s2.sqrt());
        m.probes += 1;
        w = sgd_step(problem, &w, &driver, k)?.next;
    }
    m.d_sigma_r_sq = sum_r / m.probes as f64;
    m.d_sigma_s_sq = sum_s / m.probes as f64;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowfloat::FloatFormat;
    use crate::optimizer::Domain;
    use crate::problems::{GradientArithmetic, PowerNorm};

    #[test]
    fn working_precision_probes_are_silent() {
        let f = PowerNorm::new(3.0, 0.2, 4).unwrap();
        let w = FloatFormat::working();
        let noise = NoiseModel::arithmetic(Some(GradientArithmetic { mul: w, acc: w }), Some(w));
        let config = SgdConfig::new(0.01, noise, Domain::Unconstrained);
        let m = estimate_noise_moments(&f, &[1.0, 2.0, 3.0, 4.0], &config, 100).unwrap();
        assert_eq!(
            (m.d_sigma_r_sq, m.d_sigma_s_sq, m.r_hat, m.s_hat),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(m.probes, 100);
    }

    #[test]
    fn uniform_moments_match_the_closed_form() {
        let d = 40;
        let f = PowerNorm::new(3.0, 0.2, d).unwrap();
        let mut start = vec![0.0; d];
        start[0] = 1.0;
        let domain = Domain::ball(vec![0.0; d], 1.0).unwrap();
        let config = SgdConfig::new(0.1, NoiseModel::uniform(0.1, 0.1, 5), domain);
        let m = estimate_noise_moments(&f, &start, &config, 1000).unwrap();
        let expect = 40.0 * 0.01 / 3.0;
        assert!((m.d_sigma_r_sq / expect - 1.0).abs() < 0.15, "{m:?}");
        assert!((m.d_sigma_s_sq / expect - 1.0).abs() < 0.15, "{m:?}");
        assert!(m.s_hat <= 0.1 * 40f64.sqrt());
        assert!(m.r_hat <= 0.1 * 40f64.sqrt());
    }

    #[test]
    fn optimum_before_minimum_probes_is_an_error() {
        let f = PowerNorm::new(1.0, 1.0, 1).unwrap();
        let config = SgdConfig::new(0.5, NoiseModel::none(), Domain::Unconstrained);
        assert!(estimate_noise_moments(&f, &[2.0], &config, 100).is_err());
        assert!(estimate_noise_moments(&f, &[2.0], &config, 10).is_err());
    }
}
