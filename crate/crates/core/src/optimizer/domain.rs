use crate::error::{Error, Result};
use crate::linalg::distance;

#[derive(Debug, Clone, Default, PartialEq)]
pub enum Domain {
    #[default]
    Unconstrained,
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("ball center must be finite"));
        }
        Ok(Domain::Ball { center, radius })
    }

    /// `2 * radius` for a ball, infinite otherwise.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Unconstrained => f64::INFINITY,
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Membership with a relative slack of `1e-12` on the radius.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Unconstrained => true,
            Domain::Ball { center, radius } => distance(x, center) <= radius * (1.0 + 1e-12),
        }
    }

    /// Euclidean projection.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Domain::Unconstrained => x.to_vec(),
            Domain::Ball { center, radius } => {
                let dist = distance(x, center);
                if dist <= *radius {
                    return x.to_vec();
                }
                let t = radius / dist;
                x.iter()
                    .zip(center)
                    .map(|(xi, ci)| ci + t * (xi - ci))
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, uniform_vector, Stream};

    #[test]
    fn projection_examples() {
        let ball = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball.project(&[0.5, 0.0]), vec![0.5, 0.0]);
        let p = ball.project(&[3.0, 4.0]);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        assert_eq!(ball.diameter(), 2.0);
        assert_eq!(Domain::Unconstrained.project(&[3.0, 4.0]), vec![3.0, 4.0]);
        assert!(Domain::Unconstrained.diameter().is_infinite());
    }

    #[test]
    fn projection_is_nonexpansive_and_lands_in_the_ball() {
        let ball = Domain::ball(vec![0.5, -1.0, 2.0], 1.5).unwrap();
        let mut rng = stream_rng(11, Stream::Probe, 0);
        for _ in 0..10_000 {
            let x = uniform_vector(&mut rng, 3, 5.0);
            let y = uniform_vector(&mut rng, 3, 5.0);
            let (px, py) = (ball.project(&x), ball.project(&y));
            assert!(distance(&px, &py) <= distance(&x, &y) + 1e-12);
            assert!(distance(&px, &[0.5, -1.0, 2.0]) <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(Domain::ball(vec![0.0], 0.0).is_err());
        assert!(Domain::ball(vec![0.0], f64::NAN).is_err());
    }
}
