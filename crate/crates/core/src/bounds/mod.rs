//! Closed-form convergence bounds, optimal step sizes and the Lemma 1
//! oracle. All arithmetic runs at working precision.

mod lemma1;
mod report;
mod steps;

pub use lemma1::{
    lemma1_brute_force, lemma1_closed_form, BruteForce, Lemma1Instance, MIN_RESOLUTION,
};
pub use report::BoundReport;
pub use steps::{
    optimal_step_deterministic, optimal_step_stochastic, Candidate, DeterministicStep,
    StochasticStep, GRID_POINTS,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// Hölder order.
    pub p: f64,
    /// Hölder constant.
    pub l: f64,
    pub f_star: f64,
    pub eta: f64,
    /// Domain diameter, or the initial distance `c0` for the finite-`K` bound.
    pub c: f64,
    /// Bound on `||r_k||`.
    pub r: f64,
    /// Bound on `||s_k||`.
    pub s: f64,
    pub d: usize,
    pub sigma_r_sq: f64,
    pub sigma_s_sq: f64,
    pub k: usize,
}

impl Default for BoundInputs {
    fn default() -> Self {
        BoundInputs {
            p: 1.0,
            l: 1.0,
            f_star: 0.0,
            eta: 1.0,
            c: 1.0,
            r: 0.0,
            s: 0.0,
            d: 1,
            sigma_r_sq: 0.0,
            sigma_s_sq: 0.0,
            k: 1,
        }
    }
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.p > 0.0, "p must be positive"),
            (self.l > 0.0, "L must be positive"),
            (self.eta > 0.0, "eta must be positive"),
            (self.c >= 0.0, "c must be non-negative"),
            (self.r >= 0.0, "R must be non-negative"),
            (self.s >= 0.0, "S must be non-negative"),
            (
                self.sigma_r_sq >= 0.0 && self.sigma_s_sq >= 0.0,
                "variances must be non-negative",
            ),
            (self.d >= 1, "d must be at least 1"),
            (self.k >= 1, "K must be at least 1"),
            (self.f_star.is_finite(), "f* must be finite"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::domain(*msg)),
            None => Ok(()),
        }
    }

    /// `R + S / eta`.
    pub fn rho(&self) -> f64 {
        self.r + self.s / self.eta
    }

    /// Whether the deterministic bounds' hypotheses hold: `R < 1` and
    /// `R + S / eta < 1`.
    pub fn deterministic_valid(&self) -> bool {
        self.r < 1.0 && self.rho() < 1.0
    }
}

/// `max{(eta/2)(1 + rho^2), (eta/2)(1 - rho^2) + c rho}` with
/// `rho = R + S/eta`.
pub fn gamma(eta: f64, r: f64, s: f64, c: f64) -> f64 {
    let rho = r + s / eta;
    let first = 0.5 * eta * (1.0 + rho * rho);
    let second = 0.5 * eta * (1.0 - rho * rho) + c * rho;
    first.max(second)
}

/// `f* + L * Gamma^p`.
pub fn liminf_bound(p: f64, l: f64, f_star: f64, gamma: f64) -> f64 {
    f_star + l * gamma.powf(p)
}

/// `f* + L * (Gamma(c0) + c0 / (2 eta K))^p`, with `c0 = inputs.c`.
pub fn finite_k_bound(inputs: &BoundInputs) -> f64 {
    let BoundInputs {
        p,
        l,
        f_star,
        eta,
        c,
        r,
        s,
        k,
        ..
    } = *inputs;
    let radius = gamma(eta, r, s, c) + c / (2.0 * eta * k as f64);
    liminf_bound(p, l, f_star, radius)
}

/// `f* + L * [(eta/2)(1 + d sigma_r^2) + d sigma_s^2 / (2 eta)]^p`.
pub fn stochastic_bound(
    p: f64,
    l: f64,
    f_star: f64,
    eta: f64,
    d: usize,
    sigma_r_sq: f64,
    sigma_s_sq: f64,
) -> f64 {
    let d = d as f64;
    let radius = 0.5 * eta * (1.0 + d * sigma_r_sq) + d * sigma_s_sq / (2.0 * eta);
    liminf_bound(p, l, f_star, radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gamma_examples() {
        for c in [0.1, 1.0, 50.0] {
            assert!(close(gamma(0.3, 0.0, 0.0, c), 0.15, 1e-16));
        }
        assert!(close(gamma(1.0, 0.5, 0.0, 2.0), 1.375, 1e-15));
        assert!(close(gamma(0.1, 0.1, 0.01, 1.0), 0.248, 1e-15));
    }

    #[test]
    fn gamma_is_monotone() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(1, crate::rng::Stream::Probe, 0);
        for _ in 0..2000 {
            let eta = rng.random_range(0.01..2.0);
            let (r, s, c) = (
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..5.0),
            );
            let base = gamma(eta, r, s, c);
            let bump = rng.random_range(0.0..0.5);
            assert!(gamma(eta, r + bump, s, c) >= base);
            assert!(gamma(eta, r, s + bump, c) >= base);
            assert!(gamma(eta, r, s, c + bump) >= base);
        }
    }

    #[test]
    fn liminf_examples() {
        assert_eq!(liminf_bound(0.2, 3.0, 1.5, 0.0), 1.5);
        assert!(close(liminf_bound(0.2, 3.0, 0.0, 0.248), 2.269925, 1e-6));
        assert!(close(liminf_bound(1.0, 1.0, 0.5, 0.248), 0.748, 1e-15));
    }

    #[test]
    fn finite_k_examples() {
        let inputs = BoundInputs {
            p: 1.0,
            l: 1.0,
            eta: 1.0,
            c: 2.0,
            k: 10,
            ..BoundInputs::default()
        };
        assert!(close(finite_k_bound(&inputs), 0.6, 1e-15));
        let big = BoundInputs {
            k: 1 << 40,
            ..inputs
        };
        assert!(close(
            finite_k_bound(&big),
            liminf_bound(1.0, 1.0, 0.0, gamma(1.0, 0.0, 0.0, 2.0)),
            1e-9
        ));
        let zero = BoundInputs {
            c: 0.0,
            r: 0.2,
            s: 0.05,
            eta: 0.5,
            p: 0.5,
            l: 2.0,
            ..BoundInputs::default()
        };
        let rho: f64 = 0.2 + 0.1;
        assert!(close(
            finite_k_bound(&zero),
            2.0 * (0.25 * (1.0 + rho * rho)).sqrt(),
            1e-15
        ));
    }

    #[test]
    fn stochastic_examples() {
        assert!(close(
            stochastic_bound(0.2, 3.0, 0.0, 0.4, 10, 0.0, 0.0),
            3.0 * 0.2f64.powf(0.2),
            1e-15
        ));
        let v = 0.01 / 3.0;
        assert!(close(
            stochastic_bound(0.2, 3.0, 0.0, 0.3430, 40, v, v),
            2.48342,
            1e-5
        ));
        let eta = (40.0 * v / (40.0 * v + 1.0)).sqrt();
        let a = 0.5 * eta * (1.0 + 40.0 * v);
        let b = 40.0 * v / (2.0 * eta);
        assert!(close(a, b, 1e-15));
    }

    #[test]
    fn validity() {
        let ok = BoundInputs {
            r: 0.3,
            s: 0.1,
            eta: 0.5,
            ..BoundInputs::default()
        };
        assert!(ok.deterministic_valid());
        assert!(!BoundInputs { r: 1.2, ..ok }.deterministic_valid());
        assert!(!BoundInputs { s: 0.5, ..ok }.deterministic_valid());
        assert!(BoundInputs { p: 0.0, ..ok }.validate().is_err());
        assert!(ok.validate().is_ok());
    }
}
