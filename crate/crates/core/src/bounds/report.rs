use super::{
    finite_k_bound, gamma, liminf_bound, optimal_step_deterministic, optimal_step_stochastic,
    stochastic_bound, BoundInputs, DeterministicStep, StochasticStep,
};
use crate::error::Result;
use crate::text::{format_float, StructuredText};

/// Every bound applicable to a set of inputs, with validity flags and both
/// optimal step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub rho: f64,
    pub gamma: f64,
    pub deterministic: f64,
    /// `R < 1` and `R + S/eta < 1`.
    pub deterministic_valid: bool,
    /// `Gamma(c) >= c`.
    pub vacuous: bool,
    pub finite_k: Option<f64>,
    pub stochastic: f64,
    pub step_deterministic: std::result::Result<DeterministicStep, String>,
    pub step_stochastic: std::result::Result<StochasticStep, String>,
}

impl BoundReport {
    pub fn new(inputs: BoundInputs, with_finite_k: bool) -> Result<Self> {
        inputs.validate()?;
        let BoundInputs {
            p,
            l,
            f_star,
            eta,
            c,
            r,
            s,
            d,
            sigma_r_sq,
            sigma_s_sq,
            ..
        } = inputs;
        let gamma = gamma(eta, r, s, c);
        Ok(BoundReport {
            inputs,
            rho: inputs.rho(),
            gamma,
            deterministic: liminf_bound(p, l, f_star, gamma),
            deterministic_valid: inputs.deterministic_valid(),
            vacuous: gamma >= c,
            finite_k: with_finite_k.then(|| finite_k_bound(&inputs)),
            stochastic: stochastic_bound(p, l, f_star, eta, d, sigma_r_sq, sigma_s_sq),
            step_deterministic: optimal_step_deterministic(r, s, c).map_err(|e| e.to_string()),
            step_stochastic: optimal_step_stochastic(d, sigma_r_sq, sigma_s_sq)
                .map_err(|e| e.to_string()),
        })
    }

    /// Reads the `[bounds]` section: `p`, `L`, `eta` are required; `f_star`,
    /// `c`, `R`, `S`, `d`, `sigma_r_sq`, `sigma_s_sq` default to the noiseless
    /// unit case; `K` enables the finite-iteration bound.
    pub fn from_text(text: &str) -> Result<Self> {
        let doc = StructuredText::parse(text)?;
        let sec = "bounds";
        let defaults = BoundInputs::default();
        let k: Option<usize> = doc.parse_opt(sec, "K")?;
        let inputs = BoundInputs {
            p: doc.parse_required(sec, "p")?,
            l: doc.parse_required(sec, "L")?,
            eta: doc.parse_required(sec, "eta")?,
            f_star: doc.parse_or(sec, "f_star", defaults.f_star)?,
            c: doc.parse_or(sec, "c", defaults.c)?,
            r: doc.parse_or(sec, "R", defaults.r)?,
            s: doc.parse_or(sec, "S", defaults.s)?,
            d: doc.parse_or(sec, "d", defaults.d)?,
            sigma_r_sq: doc.parse_or(sec, "sigma_r_sq", defaults.sigma_r_sq)?,
            sigma_s_sq: doc.parse_or(sec, "sigma_s_sq", defaults.sigma_s_sq)?,
            k: k.unwrap_or(defaults.k),
        };
        Self::new(inputs, k.is_some())
    }

    pub fn to_structured_text(&self) -> String {
        let mut doc = StructuredText::new();
        let i = &self.inputs;
        for (key, value) in [
            ("p", i.p),
            ("L", i.l),
            ("f_star", i.f_star),
            ("eta", i.eta),
            ("c", i.c),
            ("R", i.r),
            ("S", i.s),
            ("d", i.d as f64),
            ("sigma_r_sq", i.sigma_r_sq),
            ("sigma_s_sq", i.sigma_s_sq),
        ] {
            doc.set_float("inputs", key, value);
        }
        if self.finite_k.is_some() {
            doc.set("inputs", "K", i.k.to_string());
        }

        doc.set_float("deterministic", "rho", self.rho);
        doc.set_float("deterministic", "gamma", self.gamma);
        doc.set_float("deterministic", "bound", self.deterministic);
        doc.set(
            "deterministic",
            "valid",
            self.deterministic_valid.to_string(),
        );
        doc.set("deterministic", "vacuous", self.vacuous.to_string());

        if let Some(bound) = self.finite_k {
            doc.set_float("finite_k", "bound", bound);
            doc.set("finite_k", "valid", self.deterministic_valid.to_string());
        }

        doc.set_float("stochastic", "bound", self.stochastic);

        match &self.step_deterministic {
            Ok(step) => {
                doc.set_float("step_sizes", "deterministic", step.eta);
                doc.set_float("step_sizes", "deterministic_gamma", step.value);
                doc.set(
                    "step_sizes",
                    "deterministic_grid_fallback",
                    step.used_grid.to_string(),
                );
                for cand in &step.candidates {
                    let value = match (cand.eta, cand.value) {
                        (Some(eta), Some(v)) => {
                            format!("{} (gamma {})", format_float(eta), format_float(v))
                        }
                        _ => "invalid".to_string(),
                    };
                    doc.set("step_sizes", cand.name, value);
                }
            }
            Err(msg) => doc.set("step_sizes", "deterministic", format!("unavailable: {msg}")),
        }
        match &self.step_stochastic {
            Ok(StochasticStep::Optimal(eta)) => doc.set_float("step_sizes", "stochastic", *eta),
            Ok(StochasticStep::Vanishing) => doc.set("step_sizes", "stochastic", "vanishing"),
            Err(msg) => doc.set("step_sizes", "stochastic", format!("unavailable: {msg}")),
        }
        doc.render()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stochastic_example_from_text() {
        let text = "[bounds]\np = 0.2\nL = 3\neta = 0.3430\nd = 40\nsigma_r_sq = 0.0033333333333333335\nsigma_s_sq = 0.0033333333333333335\n";
        let report = BoundReport::from_text(text).unwrap();
        assert!((report.stochastic - 2.48342).abs() < 1e-5);
        assert!(report.finite_k.is_none());
        let eta = report.step_stochastic.clone().unwrap().eta().unwrap();
        assert!((eta - 0.3430).abs() < 1e-4);
        let rendered = report.to_structured_text();
        assert!(rendered.contains("[stochastic]\nbound = 2.483"));
    }

    #[test]
    fn noiseless_reductions() {
        let report =
            BoundReport::from_text("[bounds]\np = 1\nL = 2\neta = 0.5\nc = 3\nK = 4\n").unwrap();
        assert_eq!(report.gamma, 0.25);
        assert_eq!(report.deterministic, 0.5);
        assert_eq!(report.stochastic, 0.5);
        assert_eq!(report.finite_k, Some(2.0 * (0.25 + 3.0 / 4.0)));
        assert!(report.deterministic_valid && !report.vacuous);
        assert_eq!(report.step_stochastic, Ok(StochasticStep::Vanishing));
        assert!(report.step_deterministic.is_err());
    }

    #[test]
    fn flags_invalid_hypotheses() {
        let report =
            BoundReport::from_text("[bounds]\np = 1\nL = 1\neta = 0.5\nR = 1.2\nc = 1\n").unwrap();
        assert!(!report.deterministic_valid);
        assert!(report.vacuous);
        let text = report.to_structured_text();
        assert!(text.contains("valid = false"));
        assert!(text.contains("deterministic = unavailable: hypothesis violated"));
    }

    #[test]
    fn malformed_input() {
        assert!(BoundReport::from_text("[bounds]\np = x\nL = 1\neta = 1\n").is_err());
        assert!(BoundReport::from_text("[bounds]\nL = 1\neta = 1\n").is_err());
        assert!(BoundReport::from_text("[bounds]\np = 1\nL = 1\neta = -1\n").is_err());
    }
}
