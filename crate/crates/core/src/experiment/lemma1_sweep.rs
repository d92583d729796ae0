use std::fmt::Write as _;

use rand::Rng;

use crate::bounds::{lemma1_brute_force, lemma1_closed_form, BruteForce, Lemma1Instance};
use crate::error::{Error, Result};
use crate::parallel::{map_range, Execution};
use crate::rng::{stream_rng, unit_vector, Stream};
use crate::text::format_float;

/// A random instance satisfying the hypotheses: `eta in [0.05, 2)`,
/// `R in [0, 0.95)`, `B in [0.05, 2)`, `C - B in [0.05, 2)`, `g` uniform on the
/// sphere.
pub fn sample_lemma1_instance(rng: &mut impl Rng, d: usize) -> Result<Lemma1Instance> {
    let eta = rng.random_range(0.05..2.0);
    let r = rng.random_range(0.0..0.95);
    let b = rng.random_range(0.05..2.0);
    let c = b + rng.random_range(0.05..2.0);
    Lemma1Instance::new(eta, r, b, c, unit_vector(rng, d))
}

#[derive(Debug, Clone)]
pub struct Lemma1Check {
    pub instance: Lemma1Instance,
    pub closed_form: f64,
    pub brute: BruteForce,
}

impl Lemma1Check {
    pub fn gap(&self) -> f64 {
        self.closed_form - self.brute.value
    }

    pub fn tolerance(&self) -> f64 {
        1e-3 * (1.0 + self.closed_form.abs())
    }

    /// The closed form is an upper bound.
    pub fn bounded(&self) -> bool {
        self.gap() >= -self.tolerance()
    }

    /// The closed form is attained.
    pub fn attained(&self) -> bool {
        self.gap().abs() <= self.tolerance()
    }
}

#[derive(Debug, Clone)]
pub struct Lemma1Sweep {
    pub dim: usize,
    pub checks: Vec<Lemma1Check>,
}

impl Lemma1Sweep {
    pub fn max_abs_gap(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.gap().abs())
            .fold(0.0, f64::max)
    }

    /// Attainment for `d >= 2`, the upper bound alone for `d = 1`.
    pub fn passed(&self) -> bool {
        if self.dim >= 2 {
            self.checks.iter().all(Lemma1Check::attained)
        } else {
            self.checks.iter().all(Lemma1Check::bounded)
        }
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# eta,R,B,C,closed_form,brute_force,gap,attained");
        for c in &self.checks {
            let i = &c.instance;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                format_float(i.eta),
                format_float(i.r),
                format_float(i.b),
                format_float(i.c),
                format_float(c.closed_form),
                format_float(c.brute.value),
                format_float(c.gap()),
                c.attained()
            );
        }
        let attained = self.checks.iter().filter(|c| c.attained()).count();
        let bounded = self.checks.iter().filter(|c| c.bounded()).count();
        let _ = writeln!(
            out,
            "instances {} (d = {}), upper bound holds {}, attained {}, max |gap| {}",
            self.checks.len(),
            self.dim,
            bounded,
            attained,
            format_float(self.max_abs_gap())
        );
        out
    }
}

/// Compares the closed form against the brute-force oracle on `count`
/// random instances. Instance `i` draws from block `i` of the probe stream.
pub fn verify_lemma1(
    count: usize,
    seed: u64,
    dim: usize,
    resolution: usize,
    exec: Execution,
) -> Result<Lemma1Sweep> {
    if count == 0 {
        return Err(Error::domain("count must be at least 1"));
    }
    let checks = map_range(exec, count, |i| -> Result<Lemma1Check> {
        let mut rng = stream_rng(seed, Stream::Instances, i as u64);
        let instance = sample_lemma1_instance(&mut rng, dim)?;
        Ok(Lemma1Check {
            closed_form: lemma1_closed_form(&instance)?,
            brute: lemma1_brute_force(&instance, resolution)?,
            instance,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Lemma1Sweep { dim, checks })
}
