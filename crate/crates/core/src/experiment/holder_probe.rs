use crate::error::Result;
use crate::problems::Problem;
use crate::rng::{stream_rng, unit_vector, Stream};

pub const HOLDER_RADII: usize = 20;
pub const HOLDER_DIRECTIONS: usize = 8;
const MIN_RADIUS: f64 = 1e-2;

/// Radial probes around `w_star`: `HOLDER_RADII` log-spaced radii from `1e-2`
/// to `c / 2` (at least `2e-2`), `HOLDER_DIRECTIONS` random directions each.
/// Returns `(radius, max excess loss)` pairs.
pub fn holder_samples(
    problem: &dyn Problem,
    w_star: &[f64],
    f_star: f64,
    c: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let hi = (c / 2.0).max(2.0 * MIN_RADIUS);
    let ratio = (hi / MIN_RADIUS).ln() / (HOLDER_RADII - 1) as f64;
    (0..HOLDER_RADII)
        .map(|i| {
            let radius = MIN_RADIUS * (ratio * i as f64).exp();
            let mut rng = stream_rng(seed, Stream::Probe, i as u64);
            let mut excess: f64 = 0.0;
            for _ in 0..HOLDER_DIRECTIONS {
                let u = unit_vector(&mut rng, w_star.len());
                let x: Vec<f64> = w_star.iter().zip(&u).map(|(w, u)| w + radius * u).collect();
                excess = excess.max(problem.evaluate(&x)? - f_star);
            }
            Ok((radius, excess))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{fit_holder, HolderMode, PowerNorm};

    #[test]
    fn power_norm_probes_recover_the_parameters() {
        let f = PowerNorm::new(0.85, 1.0, 3).unwrap();
        let samples = holder_samples(&f, &[0.0; 3], 0.0, 4.0, 1).unwrap();
        assert_eq!(samples.len(), HOLDER_RADII);
        assert!((samples[0].0 - 1e-2).abs() < 1e-15 && (samples[19].0 - 2.0).abs() < 1e-12);
        let fit = fit_holder(&samples, HolderMode::LeastSquares).unwrap();
        assert!((fit.p - 1.0).abs() < 1e-9 && (fit.l - 0.85).abs() < 1e-9);
    }
}
