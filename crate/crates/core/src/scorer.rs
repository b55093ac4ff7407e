//! Parametric prediction functions `g: R^d -> R`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything that maps a feature vector to a real score.
pub trait Score {
    fn score(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> Score for F {
    fn score(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Architecture of a [`Scorer`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `w . x + b`
    #[default]
    Linear,
    /// One `tanh` hidden layer followed by a linear read-out.
    Mlp { hidden: usize },
}

impl ModelSpec {
    pub fn param_count(&self, dimension: usize) -> usize {
        match *self {
            ModelSpec::Linear => dimension + 1,
            ModelSpec::Mlp { hidden } => hidden * dimension + 2 * hidden + 1,
        }
    }
}

/// A linear model or a one-hidden-layer perceptron with flat parameters.
///
/// Parameter layout: linear is `[w_0..w_{d-1}, b]`; the perceptron is
/// `[W (hidden x d, row-major), b_hidden, w_out, b_out]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorer {
    pub model: ModelSpec,
    pub dimension: usize,
    pub params: Vec<f64>,
}

impl Scorer {
    pub fn from_params(model: ModelSpec, dimension: usize, params: Vec<f64>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("scorer dimension must be positive"));
        }
        if let ModelSpec::Mlp { hidden: 0 } = model {
            return Err(Error::invalid("hidden layer must have at least one unit"));
        }
        let expected = model.param_count(dimension);
        if params.len() != expected {
            return Err(Error::invalid(format!(
                "{model:?} on {dimension} inputs needs {expected} parameters, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("scorer parameters must be finite"));
        }
        Ok(Scorer {
            model,
            dimension,
            params,
        })
    }

    /// Linear weights start at zero; perceptron weights are uniform in
    /// `+-1/sqrt(fan_in)` with zero biases.
    pub fn init<R: Rng + ?Sized>(model: ModelSpec, dimension: usize, rng: &mut R) -> Result<Self> {
        let mut params = vec![0.0; model.param_count(dimension)];
        if let ModelSpec::Mlp { hidden } = model {
            let a = 1.0 / (dimension as f64).sqrt();
            for w in &mut params[..hidden * dimension] {
                *w = rng.random_range(-a..=a);
            }
            let b = 1.0 / (hidden as f64).sqrt();
            let out = hidden * dimension + hidden;
            for w in &mut params[out..out + hidden] {
                *w = rng.random_range(-b..=b);
            }
        }
        Self::from_params(model, dimension, params)
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Score `x` and add `weight * d score / d params` into `grad`.
    pub fn score_with_grad(&self, x: &[f64], weight: f64, grad: &mut [f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        debug_assert_eq!(grad.len(), self.params.len());
        let d = self.dimension;
        match self.model {
            ModelSpec::Linear => {
                let s = dot(&self.params[..d], x) + self.params[d];
                for (g, &xi) in grad[..d].iter_mut().zip(x) {
                    *g += weight * xi;
                }
                grad[d] += weight;
                s
            }
            ModelSpec::Mlp { hidden } => {
                let (w1, rest) = self.params.split_at(hidden * d);
                let (b1, rest) = rest.split_at(hidden);
                let (w2, b2) = rest.split_at(hidden);
                let mut s = b2[0];
                let out = hidden * d + hidden;
                for k in 0..hidden {
                    let h = (dot(&w1[k * d..(k + 1) * d], x) + b1[k]).tanh();
                    s += w2[k] * h;
                    grad[out + k] += weight * h;
                    let back = weight * w2[k] * (1.0 - h * h);
                    grad[hidden * d + k] += back;
                    for (g, &xi) in grad[k * d..(k + 1) * d].iter_mut().zip(x) {
                        *g += back * xi;
                    }
                }
                grad[out + hidden] += weight;
                s
            }
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.params.iter().map(|p| p * p).sum()
    }
}

impl Score for Scorer {
    fn score(&self, x: &[f64]) -> f64 {
        let d = self.dimension;
        match self.model {
            ModelSpec::Linear => dot(&self.params[..d], x) + self.params[d],
            ModelSpec::Mlp { hidden } => {
                let (w1, rest) = self.params.split_at(hidden * d);
                let (b1, rest) = rest.split_at(hidden);
                let (w2, b2) = rest.split_at(hidden);
                (0..hidden).fold(b2[0], |acc, k| {
                    acc + w2[k] * (dot(&w1[k * d..(k + 1) * d], x) + b1[k]).tanh()
                })
            }
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn param_counts_checked() {
        assert!(Scorer::from_params(ModelSpec::Linear, 2, vec![0.0; 2]).is_err());
        assert!(Scorer::from_params(ModelSpec::Linear, 2, vec![0.0; 3]).is_ok());
        assert!(Scorer::from_params(ModelSpec::Mlp { hidden: 3 }, 2, vec![0.0; 13]).is_ok());
        assert!(Scorer::from_params(ModelSpec::Mlp { hidden: 0 }, 2, vec![0.0; 1]).is_err());
    }

    #[test]
    fn linear_score() {
        let g = Scorer::from_params(ModelSpec::Linear, 2, vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(g.score(&[3.0, 1.0]), 1.5);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let m = ModelSpec::Mlp { hidden: 4 };
        let a = Scorer::init(m, 9, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = Scorer::init(m, 9, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        assert!(a.params[..36].iter().all(|w| w.abs() <= 1.0 / 3.0));
        assert!(a.params[36..40].iter().all(|&w| w == 0.0));
        let lin = Scorer::init(ModelSpec::Linear, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(lin.params.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn score_with_grad_agrees_with_score_and_differences() {
        let m = ModelSpec::Mlp { hidden: 3 };
        let g = Scorer::init(m, 2, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let x = [0.3, -1.2];
        let mut grad = vec![0.0; g.param_count()];
        let s = g.score_with_grad(&x, 1.0, &mut grad);
        assert_eq!(s, g.score(&x));
        let h = 1e-6;
        for (i, &gi) in grad.iter().enumerate() {
            let mut up = g.clone();
            up.params[i] += h;
            let mut dn = g.clone();
            dn.params[i] -= h;
            let fd = (up.score(&x) - dn.score(&x)) / (2.0 * h);
            assert!((fd - gi).abs() < 1e-8, "param {i}: {fd} vs {gi}");
        }
    }
}
