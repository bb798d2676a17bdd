use std::f64::consts::PI;

use super::{argmax, check_finite, check_input, check_label, Learner, LearnerError};

pub const DEFAULT_VAR_SMOOTHING: f64 = 1e-9;
const MIN_EPSILON: f64 = 1e-12;

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.n > 0.0 {
            (self.m2 / self.n).max(0.0)
        } else {
            0.0
        }
    }
}

/// Gaussian Naive Bayes with one-pass per-class moment updates.
///
/// Each class variance is smoothed by `var_smoothing` times the largest
/// per-feature variance seen over all instances (floored at 1e-12).
#[derive(Debug, Clone)]
pub struct GaussianNb {
    num_labels: usize,
    dim: usize,
    var_smoothing: f64,
    counts: Vec<f64>,
    /// Row-major `[label][feature]`.
    stats: Vec<Moments>,
    global: Vec<Moments>,
    total: f64,
}

impl GaussianNb {
    pub fn new(num_labels: usize, dim: usize) -> Self {
        Self::with_smoothing(num_labels, dim, DEFAULT_VAR_SMOOTHING)
    }

    pub fn with_smoothing(num_labels: usize, dim: usize, var_smoothing: f64) -> Self {
        Self {
            num_labels,
            dim,
            var_smoothing,
            counts: vec![0.0; num_labels],
            stats: vec![Moments::default(); num_labels * dim],
            global: vec![Moments::default(); dim],
            total: 0.0,
        }
    }

    pub fn class_count(&self, label: usize) -> f64 {
        self.counts[label]
    }

    pub fn epsilon(&self) -> f64 {
        let max_var = self.global.iter().map(Moments::variance).fold(0.0, f64::max);
        (self.var_smoothing * max_var).max(MIN_EPSILON)
    }

    /// Log prior plus log likelihood per label; unseen labels get -inf.
    pub fn joint_log_likelihood(&self, x: &[f32]) -> Result<Vec<f64>, LearnerError> {
        check_input(x, self.dim)?;
        if self.total == 0.0 {
            return Err(LearnerError::Untrained);
        }
        let eps = self.epsilon();
        let jll = (0..self.num_labels)
            .map(|label| {
                let count = self.counts[label];
                if count == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let row = &self.stats[label * self.dim..(label + 1) * self.dim];
                let mut ll = (count / self.total).ln();
                for (m, &xf) in row.iter().zip(x) {
                    let var = m.variance() + eps;
                    let diff = f64::from(xf) - m.mean;
                    ll -= 0.5 * (2.0 * PI * var).ln() + diff * diff / (2.0 * var);
                }
                ll
            })
            .collect();
        Ok(jll)
    }

    pub fn predict_proba(&self, x: &[f32]) -> Result<Vec<f64>, LearnerError> {
        let jll = self.joint_log_likelihood(x)?;
        let max = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = jll.iter().map(|&v| (v - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        Ok(exp.into_iter().map(|v| v / sum).collect())
    }
}

impl Learner for GaussianNb {
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
        self.counts[label] += 1.0;
        self.total += 1.0;
        let row = &mut self.stats[label * self.dim..(label + 1) * self.dim];
        for ((m, g), &xf) in row.iter_mut().zip(&mut self.global).zip(x) {
            m.add(f64::from(xf));
            g.add(f64::from(xf));
        }
        Ok(())
    }

    fn predict_one(&self, x: &[f32]) -> Result<usize, LearnerError> {
        Ok(argmax(&self.joint_log_likelihood(x)?))
    }

    fn score_all(&self, x: &[f32]) -> Option<Result<Vec<f64>, LearnerError>> {
        Some(self.predict_proba(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn untrained_predict_errors() {
        let g = GaussianNb::new(2, 1);
        assert_eq!(g.predict_one(&[0.0]), Err(LearnerError::Untrained));
    }

    #[test]
    fn single_class_always_wins() {
        let mut g = GaussianNb::new(3, 2);
        for i in 0..20 {
            g.learn_one(&[i as f32, -(i as f32)], 2).unwrap();
        }
        for x in [[0.0, 0.0], [100.0, 5.0], [-3.0, 1e3]] {
            assert_eq!(g.predict_one(&x).unwrap(), 2);
        }
    }

    #[test]
    fn one_dimensional_posterior_matches_closed_form() {
        let mut g = GaussianNb::new(2, 1);
        for (x, y) in [(0.0, 0), (0.2, 0), (1.0, 1), (1.2, 1)] {
            g.learn_one(&[x], y).unwrap();
        }
        // Closed form: means 0.1 / 1.1, population variance 0.01 each,
        // smoothing 1e-9 * var({0, 0.2, 1, 1.2}) = 1e-9 * 0.26, equal priors.
        let xq = 0.1f64;
        let var = 0.01 + 1e-9 * 0.26;
        let dens = |mean: f64| (-(xq - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
        let (d0, d1) = (0.5 * dens(0.1), 0.5 * dens(1.1));
        let expected = [d0 / (d0 + d1), d1 / (d0 + d1)];
        let proba = g.predict_proba(&[xq as f32]).unwrap();
        assert_eq!(g.predict_one(&[xq as f32]).unwrap(), 0);
        for (p, e) in proba.iter().zip(expected) {
            assert!((p - e).abs() < 1e-6, "{p} vs {e}");
        }
    }

    #[test]
    fn constant_features_do_not_blow_up() {
        let mut g = GaussianNb::new(2, 2);
        g.learn_one(&[1.0, 1.0], 0).unwrap();
        g.learn_one(&[1.0, 1.0], 1).unwrap();
        let p = g.predict_proba(&[1.0, 1.0]).unwrap();
        assert!(p.iter().all(|v| v.is_finite()));
        assert!(g.learn_one(&[f32::NAN, 0.0], 0).is_err());
    }

    proptest! {
        #[test]
        fn posterior_sums_to_one(
            train in prop::collection::vec((prop::collection::vec(-5.0f32..5.0, 3), 0usize..4), 1..60),
            query in prop::collection::vec(-10.0f32..10.0, 3),
        ) {
            let mut g = GaussianNb::new(4, 3);
            for (x, y) in &train {
                g.learn_one(x, *y).unwrap();
            }
            let p = g.predict_proba(&query).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert_eq!(argmax(&p), g.predict_one(&query).unwrap());
        }
    }
}
