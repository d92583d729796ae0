use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Samples per dimension below which the brute-force oracle refuses to run.
pub const MIN_RESOLUTION: usize = 100;

/// `max eta ||g + r||^2 - 2 <x, g + r>` subject to `<g, x> >= B`,
/// `||r|| <= R`, `||x|| <= C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Instance {
    pub eta: f64,
    pub r: f64,
    pub b: f64,
    pub c: f64,
    /// Unit vector; its length is the dimension.
    pub g: Vec<f64>,
}

impl Lemma1Instance {
    pub fn new(eta: f64, r: f64, b: f64, c: f64, g: Vec<f64>) -> Result<Self> {
        let inst = Lemma1Instance { eta, r, b, c, g };
        inst.validate()?;
        Ok(inst)
    }

    /// The instance with `g = e_1` in `d` dimensions.
    pub fn axis(eta: f64, r: f64, b: f64, c: f64, d: usize) -> Result<Self> {
        let mut g = vec![0.0; d];
        if d > 0 {
            g[0] = 1.0;
        }
        Self::new(eta, r, b, c, g)
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.g.is_empty() || (norm(&self.g) - 1.0).abs() > 1e-12 {
            return Err(Error::domain("g must be a unit vector"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::domain(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.b > 0.0 && self.c.is_finite()) {
            return Err(Error::domain(format!("B must be positive, got {}", self.b)));
        }
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::Hypothesis(format!(
                "R must lie in [0, 1), got {}",
                self.r
            )));
        }
        if self.c <= self.b {
            return Err(Error::Hypothesis(format!(
                "C = {} must exceed B = {}",
                self.c, self.b
            )));
        }
        Ok(())
    }

    /// `F(x, r)`.
    pub fn objective(&self, x: &[f64], r: &[f64]) -> f64 {
        let v: Vec<f64> = self.g.iter().zip(r).map(|(g, r)| g + r).collect();
        self.eta * dot(&v, &v) - 2.0 * dot(x, &v)
    }

    /// `max_r F(x, r)`, attained at `r = R (eta g - x) / ||eta g - x||`.
    pub fn objective_best_r(&self, x: &[f64]) -> f64 {
        let diff: Vec<f64> = self
            .g
            .iter()
            .zip(x)
            .map(|(g, x)| self.eta * g - x)
            .collect();
        self.eta * (1.0 + self.r * self.r) + 2.0 * self.r * norm(&diff) - 2.0 * dot(x, &self.g)
    }

    fn feasible(&self, x: &[f64]) -> bool {
        dot(x, &self.g) >= self.b && norm(x) <= self.c
    }
}

/// `max{eta(1+R^2) + 2R sqrt(eta^2 + C^2 - 2 eta B) - 2B, eta(R^2 - 1)}`.
pub fn lemma1_closed_form(inst: &Lemma1Instance) -> Result<f64> {
    inst.validate()?;
    let Lemma1Instance { eta, r, b, c, .. } = *inst;
    let radicand = eta * eta + c * c - 2.0 * eta * b;
    if radicand < 0.0 {
        return Err(Error::domain(format!(
            "negative radicand {radicand} (eta = {eta}, B = {b}, C = {c})"
        )));
    }
    let first = eta * (1.0 + r * r) + 2.0 * r * radicand.sqrt() - 2.0 * b;
    let second = eta * (r * r - 1.0);
    Ok(first.max(second))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForce {
    /// The larger of the two searches.
    pub value: f64,
    /// Search over the boundary of the feasible `x` set with the optimal `r`.
    pub structured: f64,
    /// Dense grid over the whole feasible region, `r` sampled on its sphere.
    pub grid: f64,
}

/// Orthonormal completion of `g` (at most three dimensions).
fn frame(g: &[f64]) -> Vec<Vec<f64>> {
    let d = g.len();
    let mut basis = vec![g.to_vec()];
    for axis in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        for b in &basis {
            let proj = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

fn combine(basis: &[Vec<f64>], coords: &[f64]) -> Vec<f64> {
    let d = basis[0].len();
    let mut out = vec![0.0; d];
    for (b, &c) in basis.iter().zip(coords) {
        for (o, bi) in out.iter_mut().zip(b) {
            *o += c * bi;
        }
    }
    out
}

/// Points on the sphere of radius `radius` in the span of `basis`.
fn sphere_samples(basis: &[Vec<f64>], radius: f64, n: usize) -> Vec<Vec<f64>> {
    match basis.len() {
        1 => vec![combine(basis, &[radius]), combine(basis, &[-radius])],
        2 => (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                combine(basis, &[radius * t.cos(), radius * t.sin()])
            })
            .collect(),
        _ => {
            let rings = (n / 8).max(2);
            let mut out = Vec::new();
            for i in 0..=rings {
                let polar = std::f64::consts::PI * i as f64 / rings as f64;
                let per = if i == 0 || i == rings { 1 } else { 8 };
                for j in 0..per {
                    let az = TAU * j as f64 / per as f64;
                    out.push(combine(
                        basis,
                        &[
                            radius * polar.cos(),
                            radius * polar.sin() * az.cos(),
                            radius * polar.sin() * az.sin(),
                        ],
                    ));
                }
            }
            out
        }
    }
}

/// Numerical maximum of the Lemma 1 problem for `d` in `{1, 2, 3}`.
///
/// The structured search walks the boundary arc `||x|| = C, <g, x> >= B`
/// (and the face `<g, x> = B`) with the analytically optimal `r`. The grid
/// search covers the full feasible region in polar coordinates around `g`
/// and samples `r` on its sphere independently.
pub fn lemma1_brute_force(inst: &Lemma1Instance, resolution: usize) -> Result<BruteForce> {
    inst.validate()?;
    let d = inst.dim();
    if !(1..=3).contains(&d) {
        return Err(Error::domain(format!(
            "brute force supports d in 1..=3, got {d}"
        )));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::domain(format!(
            "resolution {resolution} is below the minimum of {MIN_RESOLUTION}"
        )));
    }
    let basis = frame(&inst.g);
    let (b, c) = (inst.b, inst.c);

    let mut structured = f64::NEG_INFINITY;
    for i in 0..=resolution {
        let a = b + (c - b) * i as f64 / resolution as f64;
        let perp = (c * c - a * a).max(0.0).sqrt();
        structured = structured.max(inst.objective_best_r(&combine(&basis, &[a])));
        if d > 1 {
            // boundary arc, and the flat face <g, x> = B
            structured = structured.max(inst.objective_best_r(&combine(&basis, &[a, perp])));
            let face = (c * c - b * b).sqrt() * i as f64 / resolution as f64;
            structured = structured.max(inst.objective_best_r(&combine(&basis, &[b, face])));
        }
    }

    let n = resolution.min(MIN_RESOLUTION);
    let r_samples = sphere_samples(&basis, inst.r, 64);
    let mut grid = f64::NEG_INFINITY;
    let mut consider = |x: Vec<f64>| {
        if !inst.feasible(&x) {
            return;
        }
        for r in &r_samples {
            grid = grid.max(inst.objective(&x, r));
        }
    };
    for i in 0..=n {
        let radius = c * i as f64 / n as f64;
        match d {
            1 => consider(combine(&basis, &[radius])),
            2 => {
                for j in 0..n {
                    let t = TAU * j as f64 / n as f64;
                    consider(combine(&basis, &[radius * t.cos(), radius * t.sin()]));
                }
            }
            _ => {
                for j in 0..=n / 2 {
                    let polar = std::f64::consts::PI * j as f64 / (n / 2) as f64;
                    for az in 0..4 {
                        let az = TAU * az as f64 / 4.0;
                        consider(combine(
                            &basis,
                            &[
                                radius * polar.cos(),
                                radius * polar.sin() * az.cos(),
                                radius * polar.sin() * az.sin(),
                            ],
                        ));
                    }
                }
            }
        }
    }
    Ok(BruteForce {
        value: structured.max(grid),
        structured,
        grid,
    })
}
