use super::gamma;
use crate::error::{Error, Result};
use crate::parallel::{grid_argmin, Execution};

/// Grid size used when no closed-form candidate is usable.
pub const GRID_POINTS: usize = 100_000;

/// A closed-form step-size candidate. `eta` is `None` when the formula has no
/// real positive value for the inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub name: &'static str,
    pub eta: Option<f64>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicStep {
    pub eta: f64,
    /// `Gamma(eta)` at the returned step.
    pub value: f64,
    pub candidates: Vec<Candidate>,
    /// The grid search over `(0, c]` took part in the decision.
    pub used_grid: bool,
}

/// Minimizes `G(eta) = Gamma(eta, R, S, c)` over the closed-form candidates
/// `eta1 = S/sqrt(1+R^2)`, `eta2 = sqrt(S(c-2S)/(1-R^2))`,
/// `eta2' = sqrt(S(2c-S)/(1-R^2))` and `eta3 = (c-S)/R`.
///
/// When a candidate degenerates to zero the infimum sits on the boundary, and
/// a grid over `(0, c]` is searched as well.
pub fn optimal_step_deterministic(r: f64, s: f64, c: f64) -> Result<DeterministicStep> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Hypothesis(format!("R must lie in [0, 1), got {r}")));
    }
    if !(s >= 0.0 && c > 0.0 && s.is_finite() && c.is_finite()) {
        return Err(Error::domain(format!(
            "need S >= 0 and c > 0, got S = {s}, c = {c}"
        )));
    }
    if r == 0.0 && s == 0.0 {
        return Err(Error::domain(
            "R = S = 0: Gamma = eta/2 has no positive minimizer",
        ));
    }
    let one_minus = 1.0 - r * r;
    let raw = [
        ("eta1", Some(s / (1.0 + r * r).sqrt())),
        ("eta2", Some((s * (c - 2.0 * s) / one_minus).sqrt())),
        ("eta2'", Some((s * (2.0 * c - s) / one_minus).sqrt())),
        ("eta3", (r > 0.0).then(|| (c - s) / r)),
    ];
    let g = |eta: f64| gamma(eta, r, s, c);
    let mut degenerate = false;
    let candidates: Vec<Candidate> = raw
        .iter()
        .map(|&(name, eta)| {
            let eta = eta.filter(|e| e.is_finite() && *e >= 0.0);
            degenerate |= eta == Some(0.0);
            let eta = eta.filter(|e| *e > 0.0);
            Candidate {
                name,
                eta,
                value: eta.map(g),
            }
        })
        .collect();

    let mut best: Option<(f64, f64)> = None;
    for cand in &candidates {
        if let (Some(eta), Some(value)) = (cand.eta, cand.value) {
            if best.is_none_or(|(_, v)| value < v) {
                best = Some((eta, value));
            }
        }
    }
    let used_grid = degenerate || best.is_none();
    if used_grid {
        let (_, eta, value) = grid_argmin(Execution::default(), 0.0, c, GRID_POINTS, g);
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((eta, value));
        }
    }
    let (eta, value) = best.expect("grid search always yields a point");
    Ok(DeterministicStep {
        eta,
        value,
        candidates,
        used_grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StochasticStep {
    Optimal(f64),
    /// `sigma_s^2 = 0`: the bound decreases all the way to `eta -> 0`.
    Vanishing,
}

impl StochasticStep {
    pub fn eta(self) -> Option<f64> {
        match self {
            StochasticStep::Optimal(eta) => Some(eta),
            StochasticStep::Vanishing => None,
        }
    }
}

/// `sqrt(d sigma_s^2 / (d sigma_r^2 + 1))`.
pub fn optimal_step_stochastic(
    d: usize,
    sigma_r_sq: f64,
    sigma_s_sq: f64,
) -> Result<StochasticStep> {
    if d == 0 || !(sigma_r_sq >= 0.0 && sigma_s_sq >= 0.0) {
        return Err(Error::domain("need d >= 1 and non-negative variances"));
    }
    if sigma_s_sq == 0.0 {
        return Ok(StochasticStep::Vanishing);
    }
    let d = d as f64;
    Ok(StochasticStep::Optimal(
        (d * sigma_s_sq / (d * sigma_r_sq + 1.0)).sqrt(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::stochastic_bound;

    #[test]
    fn zero_update_error_hits_the_boundary() {
        let out = optimal_step_deterministic(0.3, 0.0, 1.0).unwrap();
        assert!(out.used_grid);
        assert_eq!(out.eta, 1.0 / GRID_POINTS as f64);
        assert!((out.value - 0.3).abs() < 1e-5);
        let eta3 = out.candidates.iter().find(|c| c.name == "eta3").unwrap();
        assert!((eta3.eta.unwrap() - 1.0 / 0.3).abs() < 1e-12);
        assert!(out
            .candidates
            .iter()
            .filter(|c| c.name != "eta3")
            .all(|c| c.eta.is_none()));
    }

    #[test]
    fn no_gradient_error() {
        let out = optimal_step_deterministic(0.0, 0.1, 1.0).unwrap();
        assert!(out
            .candidates
            .iter()
            .find(|c| c.name == "eta3")
            .unwrap()
            .eta
            .is_none());
        let (_, grid_eta, grid_value) =
            grid_argmin(Execution::Sequential, 0.0, 1.0, GRID_POINTS, |e| {
                gamma(e, 0.0, 0.1, 1.0)
            });
        assert!(
            (out.eta - grid_eta).abs() <= 1e-4,
            "{} vs {grid_eta}",
            out.eta
        );
        assert!(out.value <= grid_value);
        assert!((out.eta - 0.19f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn result_beats_every_candidate() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(8, crate::rng::Stream::Probe, 0);
        for _ in 0..200 {
            let (r, s, c) = (
                rng.random_range(0.0..0.99),
                rng.random_range(0.0..2.0),
                rng.random_range(0.1..3.0),
            );
            let out = optimal_step_deterministic(r, s, c).unwrap();
            for cand in &out.candidates {
                if let Some(v) = cand.value {
                    assert!(out.value <= v);
                }
            }
        }
    }

    #[test]
    fn hypothesis_errors() {
        assert!(matches!(
            optimal_step_deterministic(1.0, 0.1, 1.0),
            Err(Error::Hypothesis(_))
        ));
        assert!(optimal_step_deterministic(0.0, 0.0, 1.0).is_err());
        assert!(optimal_step_deterministic(0.5, -0.1, 1.0).is_err());
    }

    #[test]
    fn stochastic_examples() {
        assert_eq!(
            optimal_step_stochastic(1, 0.0, 0.09).unwrap(),
            StochasticStep::Optimal(0.3)
        );
        let v = 0.01 / 3.0;
        let eta = optimal_step_stochastic(40, v, v).unwrap().eta().unwrap();
        assert!((eta - 0.3430).abs() < 1e-4);
        assert_eq!(
            optimal_step_stochastic(5, 0.1, 0.0).unwrap(),
            StochasticStep::Vanishing
        );
        let (sr, ss) = (0.04, 0.09);
        let big = optimal_step_stochastic(1_000_000_000, sr, ss)
            .unwrap()
            .eta()
            .unwrap();
        assert!((big - 1.5).abs() < 1e-6);
    }

    #[test]
    fn stochastic_step_minimizes_the_bound() {
        let v = 0.01 / 3.0;
        let eta = optimal_step_stochastic(40, v, v).unwrap().eta().unwrap();
        let f = |e: f64| stochastic_bound(0.2, 3.0, 0.0, e, 40, v, v);
        assert!(f(eta) <= f(eta * (1.0 + 1e-3)) && f(eta) <= f(eta * (1.0 - 1e-3)));
    }
}
