use rand::Rng;

use super::{Domain, GradientNoise, NoiseModel, StepRecord, Summary, Trajectory, UpdateNoise};
use crate::error::{Error, Result};
use crate::linalg::{distance, norm, norm_sq};
use crate::lowfloat::{lp_dot, lp_op, Op};
use crate::problems::{GradientArithmetic, Problem, ReferenceOptimum};
use crate::rng::{stream_rng, uniform_vector, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub eta: f64,
    pub noise: NoiseModel,
    pub domain: Domain,
    /// Mini-batch size, sampled uniformly with replacement. `None` uses the
    /// full batch.
    pub batch_size: Option<usize>,
}

impl SgdConfig {
    pub fn new(eta: f64, noise: NoiseModel, domain: Domain) -> Self {
        SgdConfig {
            eta,
            noise,
            domain,
            batch_size: None,
        }
    }

    pub fn with_batch_size(self, batch_size: Option<usize>) -> Self {
        SgdConfig { batch_size, ..self }
    }

    /// The step size actually applied: rounded into the update format when
    /// the update runs in emulated arithmetic.
    pub fn effective_eta(&self) -> f64 {
        match self.noise.update {
            UpdateNoise::Arithmetic { format } if !format.is_working_precision() => {
                format.quantize(self.eta)
            }
            _ => self.eta,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::domain(format!(
                "step size must be positive, got {}",
                self.eta
            )));
        }
        if self.effective_eta() <= 0.0 {
            return Err(Error::domain(format!(
                "step size {} rounds to zero in the update format",
                self.eta
            )));
        }
        if self.batch_size == Some(0) {
            return Err(Error::domain("batch size must be positive"));
        }
        self.noise.validate()
    }
}

/// One step: the next iterate and the realized noise vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next: Vec<f64>,
    /// Exact normalized quasi-subgradient `g / ||g||`.
    pub direction: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

fn normalized(g: Vec<f64>) -> Vec<f64> {
    let n = norm(&g);
    if n == 0.0 {
        return vec![0.0; g.len()];
    }
    g.into_iter().map(|x| x / n).collect()
}

fn lp_normalized(g: &[f64], arith: &GradientArithmetic) -> Result<Vec<f64>> {
    let sq = lp_dot(g, g, &arith.mul, &arith.acc)?;
    if sq == 0.0 {
        return Ok(vec![0.0; g.len()]);
    }
    let n = arith.acc.quantize(sq.sqrt());
    g.iter()
        .map(|&x| Ok(lp_op(x, n, Op::Div, &arith.mul)?.value))
        .collect()
}

fn draw_batch(seed: u64, k: usize, size: usize, available: usize) -> Vec<usize> {
    let mut rng = stream_rng(seed, Stream::Batch, k as u64);
    (0..size).map(|_| rng.random_range(0..available)).collect()
}

/// `P(w - eta * (g_hat + r_k) + s_k)` for iteration `k`. Random draws for
/// iteration `k` come from the `(seed, stream, k)` blocks.
pub fn sgd_step(problem: &dyn Problem, w: &[f64], config: &SgdConfig, k: usize) -> Result<Step> {
    problem.check_dim(w)?;
    let g = problem.quasi_subgradient(w)?;
    if norm(&g) == 0.0 {
        return Err(Error::AtOptimum);
    }
    let direction = normalized(g);
    let seed = config.noise.seed;
    let batch = match (config.batch_size, problem.sample_count()) {
        (Some(b), Some(n)) if n > 0 => Some(draw_batch(seed, k, b, n)),
        _ => None,
    };
    let sampled = || -> Result<Vec<f64>> {
        match &batch {
            Some(idx) => Ok(normalized(problem.batch_subgradient(w, idx)?)),
            None => Ok(direction.clone()),
        }
    };
    let used = match config.noise.gradient {
        GradientNoise::Uniform { bound } if bound > 0.0 => {
            let mut rng = stream_rng(seed, Stream::GradientNoise, k as u64);
            let noise = uniform_vector(&mut rng, w.len(), bound);
            sampled()?.iter().zip(&noise).map(|(a, b)| a + b).collect()
        }
        GradientNoise::Arithmetic(arith) if !config.noise.gradient.is_exact() => lp_normalized(
            &problem.lp_subgradient(w, batch.as_deref(), &arith)?,
            &arith,
        )?,
        _ => sampled()?,
    };
    let r: Vec<f64> = used.iter().zip(&direction).map(|(u, d)| u - d).collect();

    let eta = config.effective_eta();
    let target: Vec<f64> = w.iter().zip(&used).map(|(wi, ui)| wi - eta * ui).collect();
    let (pre, s) = match config.noise.update {
        UpdateNoise::Uniform { bound } if bound > 0.0 => {
            let mut rng = stream_rng(seed, Stream::UpdateNoise, k as u64);
            let s = uniform_vector(&mut rng, w.len(), bound);
            (target.iter().zip(&s).map(|(t, si)| t + si).collect(), s)
        }
        UpdateNoise::Arithmetic { format } if !format.is_working_precision() => {
            let pre = w
                .iter()
                .zip(&used)
                .map(|(&wi, &ui)| {
                    let step = lp_op(eta, ui, Op::Mul, &format)?.value;
                    Ok(lp_op(wi, step, Op::Sub, &format)?.value)
                })
                .collect::<Result<Vec<f64>>>()?;
            let s = pre.iter().zip(&target).map(|(p, t)| p - t).collect();
            (pre, s)
        }
        _ => (target, vec![0.0; w.len()]),
    };
    Ok(Step {
        next: config.domain.project(&pre),
        direction,
        r,
        s,
    })
}

/// Runs `steps` iterations from `start`, recording `f(x_k)` for
/// `k = 0..steps`. Stops early when an iterate is a minimizer.
pub fn run(
    problem: &dyn Problem,
    start: &[f64],
    config: &SgdConfig,
    steps: usize,
    reference: Option<&ReferenceOptimum>,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::domain("a run needs at least one step"));
    }
    config.validate()?;
    problem.check_dim(start)?;
    if start.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("start point must be finite"));
    }
    if !config.domain.contains(start) {
        return Err(Error::domain("start point lies outside the domain"));
    }
    let eta_used = config.effective_eta();
    let config = SgdConfig {
        eta: eta_used,
        ..config.clone()
    };

    let mut trajectory = Trajectory {
        records: Vec::with_capacity(steps),
        summary: Summary {
            eta_used,
            min_loss: f64::INFINITY,
            ..Summary::default()
        },
        final_point: start.to_vec(),
    };
    let mut w = start.to_vec();
    let (mut sum_r, mut sum_s, mut taken) = (0.0, 0.0, 0usize);
    for k in 0..steps {
        let loss = problem.evaluate(&w)?;
        if !loss.is_finite() {
            trajectory.final_point = w;
            finish(&mut trajectory, sum_r, sum_s, taken);
            return Err(Error::NonFinite {
                k,
                partial: Box::new(trajectory),
            });
        }
        let summary = &mut trajectory.summary;
        if loss < summary.min_loss {
            summary.min_loss = loss;
            summary.argmin = k;
        }
        let mut record = StepRecord {
            k,
            loss,
            min_loss: summary.min_loss,
            dist_to_opt: reference.map(|r| distance(&w, &r.w_star)),
            norm_r: 0.0,
            norm_s: 0.0,
        };
        match sgd_step(problem, &w, &config, k) {
            Ok(step) => {
                let (r2, s2) = (norm_sq(&step.r), norm_sq(&step.s));
                record.norm_r = r2.sqrt();
                record.norm_s = s2.sqrt();
                summary.r_hat = summary.r_hat.max(record.norm_r);
                summary.s_hat = summary.s_hat.max(record.norm_s);
                sum_r += r2;
                sum_s += s2;
                taken += 1;
                w = step.next;
                trajectory.records.push(record);
            }
            Err(Error::AtOptimum) => {
                summary.reached_optimum = true;
                trajectory.records.push(record);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    trajectory.final_point = w;
    finish(&mut trajectory, sum_r, sum_s, taken);
    Ok(trajectory)
}

fn finish(trajectory: &mut Trajectory, sum_r: f64, sum_s: f64, taken: usize) {
    let summary = &mut trajectory.summary;
    summary.steps = trajectory.records.len();
    if taken > 0 {
        summary.d_sigma_r_sq = sum_r / taken as f64;
        summary.d_sigma_s_sq = sum_s / taken as f64;
    }
}
