use serde::{Deserialize, Serialize};

use super::{argmax, check_finite, check_input, check_label, Learner, LearnerError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    /// L2 regularization strength.
    pub alpha: f64,
    /// Offset of the `1 / (alpha * (t0 + t))` schedule; `None` means
    /// `1 / alpha`, which makes the first step exactly 1.
    pub t0: Option<f64>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { alpha: 1e-4, t0: None }
    }
}

/// Linear SVM trained by stochastic subgradient descent on the hinge loss,
/// one-vs-rest over the labels.
#[derive(Debug, Clone)]
pub struct SgdSvm {
    num_labels: usize,
    dim: usize,
    alpha: f64,
    t0: f64,
    steps: u64,
    /// Row-major `[label][feature]`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl SgdSvm {
    pub fn new(num_labels: usize, dim: usize, config: SvmConfig) -> Self {
        let t0 = config.t0.unwrap_or(1.0 / config.alpha);
        Self {
            num_labels,
            dim,
            alpha: config.alpha,
            t0,
            steps: 0,
            weights: vec![0.0; num_labels * dim],
            bias: vec![0.0; num_labels],
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Step size for the next update.
    pub fn learning_rate(&self) -> f64 {
        1.0 / (self.alpha * (self.t0 + self.steps as f64))
    }

    pub fn weights(&self, label: usize) -> &[f64] {
        &self.weights[label * self.dim..(label + 1) * self.dim]
    }

    pub fn bias(&self, label: usize) -> f64 {
        self.bias[label]
    }

    pub fn scores(&self, x: &[f32]) -> Result<Vec<f64>, LearnerError> {
        check_input(x, self.dim)?;
        check_finite(x)?;
        Ok((0..self.num_labels).map(|l| self.score(l, x)).collect())
    }

    fn score(&self, label: usize, x: &[f32]) -> f64 {
        let w = self.weights(label);
        w.iter().zip(x).map(|(w, &x)| w * f64::from(x)).sum::<f64>() + self.bias[label]
    }
}

impl Learner for SgdSvm {
    fn num_labels(&self) -> usize {
        self.num_labels
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn learn_one(&mut self, x: &[f32], label: usize) -> Result<(), LearnerError> {
        check_input(x, self.dim)?;
        check_finite(x)?;
        check_label(label, self.num_labels)?;
        let eta = self.learning_rate();
        let shrink = 1.0 - eta * self.alpha;
        for l in 0..self.num_labels {
            let y = if l == label { 1.0 } else { -1.0 };
            let margin = y * self.score(l, x);
            let w = &mut self.weights[l * self.dim..(l + 1) * self.dim];
            if margin < 1.0 {
                for (w, &xf) in w.iter_mut().zip(x) {
                    *w = *w * shrink + eta * y * f64::from(xf);
                }
                self.bias[l] += eta * y;
            } else {
                w.iter_mut().for_each(|w| *w *= shrink);
            }
        }
        self.steps += 1;
        Ok(())
    }

    fn predict_one(&self, x: &[f32]) -> Result<usize, LearnerError> {
        Ok(argmax(&self.scores(x)?))
    }

    fn score_all(&self, x: &[f32]) -> Option<Result<Vec<f64>, LearnerError>> {
        Some(self.scores(x))
    }
}
