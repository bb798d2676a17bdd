//! Hoeffding tree (VFDT) for numeric features.
//!
//! Leaves keep a weighted Gaussian estimator per (feature, label). Every
//! `grace_period` units of weight a leaf scores candidate thresholds by
//! information gain and splits when the best feature beats the runner-up by
//! more than the Hoeffding bound, or when the bound has shrunk below the tie
//! threshold.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_finite, check_input, check_label, Learner, LearnerError};

/// `sqrt(R^2 ln(1/delta) / (2n))`.
pub fn hoeffding_bound(range: f64, delta: f64, n: f64) -> f64 {
    (range * range * (1.0 / delta).ln() / (2.0 * n)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoeffdingTreeConfig {
    pub grace_period: f64,
    pub split_confidence: f64,
    pub tie_threshold: f64,
    /// Candidate thresholds per feature.
    pub split_points: usize,
    /// Features considered per leaf; `None` means all of them.
    pub subspace: Option<usize>,
    /// Each side of a split must hold at least this fraction of the weight.
    pub min_branch_fraction: f64,
    pub seed: u64,
}

impl Default for HoeffdingTreeConfig {
    fn default() -> Self {
        Self {
            grace_period: 200.0,
            split_confidence: 1e-7,
            tie_threshold: 0.05,
            split_points: 10,
            subspace: None,
            min_branch_fraction: 0.01,
            seed: 0,
        }
    }
}

/// Weighted running mean and variance, plus the observed range.
#[derive(Debug, Clone, Copy)]
struct GaussianEstimator {
    weight: f64,
    mean: f64,
    m2: f64,
}

impl GaussianEstimator {
    const EMPTY: Self = Self {
        weight: 0.0,
        mean: 0.0,
        m2: 0.0,
    };

    fn add(&mut self, x: f64, w: f64) {
        self.weight += w;
        let delta = x - self.mean;
        self.mean += w * delta / self.weight;
        self.m2 += w * delta * (x - self.mean);
    }

    fn std_dev(&self) -> f64 {
        if self.weight > 1.0 {
            (self.m2 / (self.weight - 1.0)).max(0.0).sqrt()
        } else {
            0.0
        }
    }

    /// Estimated weight at or below `threshold`.
    fn weight_below(&self, threshold: f64) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        let sd = self.std_dev();
        if sd <= 1e-12 {
            return if self.mean <= threshold { self.weight } else { 0.0 };
        }
        let z = (threshold - self.mean) / (sd * std::f64::consts::SQRT_2);
        self.weight * 0.5 * (1.0 + libm::erf(z))
    }
}

#[derive(Debug, Clone)]
struct Leaf {
    class_weights: Vec<f64>,
    features: Vec<usize>,
    /// `[feature slot][label]`
    estimators: Vec<GaussianEstimator>,
    ranges: Vec<(f64, f64)>,
    weight_at_last_eval: f64,
}

impl Leaf {
    fn weight(&self) -> f64 {
        self.class_weights.iter().sum()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Leaf),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

#[derive(Debug, Clone)]
pub struct HoeffdingTree {
    config: HoeffdingTreeConfig,
    num_labels: usize,
    dim: usize,
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
    leaves: usize,
}

fn entropy(dist: &[f64]) -> f64 {
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    dist.iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

impl HoeffdingTree {
    pub fn new(num_labels: usize, dim: usize, config: HoeffdingTreeConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut tree = Self {
            config,
            num_labels,
            dim,
            nodes: Vec::new(),
            rng,
            leaves: 1,
        };
        let root = tree.new_leaf(vec![0.0; num_labels]);
        tree.nodes.push(Node::Leaf(root));
        tree
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn config(&self) -> &HoeffdingTreeConfig {
        &self.config
    }

    /// Range of the information-gain criterion: `log2(K)`.
    pub fn gain_range(&self) -> f64 {
        (self.num_labels.max(2) as f64).log2()
    }

    fn subspace_size(&self) -> usize {
        self.config.subspace.map_or(self.dim, |m| m.clamp(1, self.dim))
    }

    fn new_leaf(&mut self, class_weights: Vec<f64>) -> Leaf {
        let m = self.subspace_size();
        let features = if m >= self.dim {
            (0..self.dim).collect()
        } else {
            let mut picked = index::sample(&mut self.rng, self.dim, m).into_vec();
            picked.sort_unstable();
            picked
        };
        let weight = class_weights.iter().sum();
        Leaf {
            estimators: vec![GaussianEstimator::EMPTY; features.len() * self.num_labels],
            ranges: vec![(f64::INFINITY, f64::NEG_INFINITY); features.len()],
            features,
            class_weights,
            weight_at_last_eval: weight,
        }
    }

    fn route(&self, x: &[f32]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(_) => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if f64::from(x[*feature]) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Class weights at the leaf `x` reaches.
    pub fn leaf_distribution(&self, x: &[f32]) -> Result<&[f64], LearnerError> {
        check_input(x, self.dim)?;
        match &self.nodes[self.route(x)] {
            Node::Leaf(leaf) => Ok(&leaf.class_weights),
            Node::Split { .. } => unreachable!("route ends at a leaf"),
        }
    }

    /// Trains on `x` counted `weight` times.
    pub fn learn_weighted(&mut self, x: &[f32], label: usize, weight: f64) -> Result<(), LearnerError> {
        check_input(x, self.dim)?;
        check_finite(x)?;
        check_label(label, self.num_labels)?;
        if weight <= 0.0 {
            return Ok(());
        }
        let at = self.route(x);
        let k = self.num_labels;
        let Node::Leaf(leaf) = &mut self.nodes[at] else {
            unreachable!("route ends at a leaf")
        };
        leaf.class_weights[label] += weight;
        for (slot, &f) in leaf.features.iter().enumerate() {
            let v = f64::from(x[f]);
            leaf.estimators[slot * k + label].add(v, weight);
            let range = &mut leaf.ranges[slot];
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
        if leaf.weight() - leaf.weight_at_last_eval >= self.config.grace_period {
            leaf.weight_at_last_eval = leaf.weight();
            self.try_split(at);
        }
        Ok(())
    }

    fn best_per_feature(&self, leaf: &Leaf) -> Vec<Candidate> {
        let k = self.num_labels;
        let total = leaf.weight();
        let parent_entropy = entropy(&leaf.class_weights);
        let min_branch = self.config.min_branch_fraction * total;
        let n = self.config.split_points;
        let mut left = vec![0.0; k];
        let mut right = vec![0.0; k];
        let mut out = Vec::new();
        for (slot, &feature) in leaf.features.iter().enumerate() {
            let (lo, hi) = leaf.ranges[slot];
            if !(hi > lo) {
                continue;
            }
            let ests = &leaf.estimators[slot * k..(slot + 1) * k];
            let mut best: Option<Candidate> = None;
            for i in 1..=n {
                let threshold = lo + (hi - lo) * i as f64 / (n + 1) as f64;
                for c in 0..k {
                    left[c] = ests[c].weight_below(threshold);
                    right[c] = ests[c].weight - left[c];
                }
                let (wl, wr): (f64, f64) = (left.iter().sum(), right.iter().sum());
                if wl < min_branch || wr < min_branch {
                    continue;
                }
                let gain = parent_entropy - (wl * entropy(&left) + wr * entropy(&right)) / (wl + wr);
                if best.is_none_or(|b| gain > b.gain) {
                    best = Some(Candidate { feature, threshold, gain });
                }
            }
            out.extend(best);
        }
        out
    }

    fn try_split(&mut self, at: usize) {
        let Node::Leaf(leaf) = &self.nodes[at] else {
            return;
        };
        if leaf.class_weights.iter().filter(|&&w| w > 0.0).count() < 2 {
            return;
        }
        let mut candidates = self.best_per_feature(leaf);
        if candidates.is_empty() {
            return;
        }
        candidates.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.feature.cmp(&b.feature)));
        let best = candidates[0];
        let second = candidates.get(1).map_or(0.0, |c| c.gain);
        let eps = hoeffding_bound(self.gain_range(), self.config.split_confidence, leaf.weight());
        if best.gain <= 0.0 || !(best.gain - second > eps || eps < self.config.tie_threshold) {
            return;
        }

        let k = self.num_labels;
        let slot = leaf.features.iter().position(|&f| f == best.feature).unwrap();
        let ests = &leaf.estimators[slot * k..(slot + 1) * k];
        let left_dist: Vec<f64> = ests.iter().map(|e| e.weight_below(best.threshold)).collect();
        let right_dist: Vec<f64> = ests.iter().zip(&left_dist).map(|(e, l)| e.weight - l).collect();

        let left_leaf = self.new_leaf(left_dist);
        let right_leaf = self.new_leaf(right_dist);
        let left = self.nodes.len();
        self.nodes.push(Node::Leaf(left_leaf));
        self.nodes.push(Node::Leaf(right_leaf));
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right: left + 1,
        };
        self.leaves += 1;
    }
}

impl Learner for HoeffdingTree {
    fn num_labels(&self) -> usize {
        self.num_labels
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn learn_one(&mut self, x: &[f32], label: usize) -> Result<(), LearnerError> {
        self.learn_weighted(x, label, 1.0)
    }

    fn predict_one(&self, x: &[f32]) -> Result<usize, LearnerError> {
        Ok(argmax(self.leaf_distribution(x)?))
    }

    fn score_all(&self, x: &[f32]) -> Option<Result<Vec<f64>, LearnerError>> {
        Some(self.leaf_distribution(x).map(<[f64]>::to_vec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn bound_matches_formula() {
        let r = 5f64.log2();
        let expected = (r * r * 1e7f64.ln() / 400.0).sqrt();
        assert!((hoeffding_bound(r, 1e-7, 200.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn no_split_before_grace_period() {
        let mut tree = HoeffdingTree::new(2, 1, HoeffdingTreeConfig::default());
        for i in 0..199 {
            let x = i as f32 / 199.0;
            tree.learn_one(&[x], usize::from(x > 0.5)).unwrap();
        }
        assert_eq!(tree.leaf_count(), 1);
        assert_eq!(tree.node_count(), 1);
    }

    #[test]
    fn learns_a_threshold_concept() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut tree = HoeffdingTree::new(2, 1, HoeffdingTreeConfig::default());
        let mut window_correct = 0;
        for i in 0..5000 {
            let x: f32 = rng.gen();
            let y = usize::from(x > 0.5);
            if i >= 4000 && tree.predict_one(&[x]).unwrap() == y {
                window_correct += 1;
            }
            tree.learn_one(&[x], y).unwrap();
        }
        assert!(tree.leaf_count() >= 2);
        assert!(window_correct as f64 / 1000.0 >= 0.9, "{window_correct}");
    }

    #[test]
    fn leaf_count_never_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tree = HoeffdingTree::new(3, 4, HoeffdingTreeConfig { subspace: Some(2), ..Default::default() });
        let mut last = tree.leaf_count();
        for _ in 0..5000 {
            let x: Vec<f32> = (0..4).map(|_| rng.gen()).collect();
            let y = if x[0] + x[2] > 1.2 { 2 } else { usize::from(x[1] > 0.5) };
            tree.learn_weighted(&x, y, f64::from(rng.gen_range(0u8..4))).unwrap();
            assert!(tree.leaf_count() >= last);
            last = tree.leaf_count();
        }
        assert!(last > 1);
    }

    #[test]
    fn pure_leaf_does_not_split() {
        let mut tree = HoeffdingTree::new(2, 2, HoeffdingTreeConfig::default());
        for i in 0..1000 {
            tree.learn_one(&[i as f32, 1.0], 1).unwrap();
        }
        assert_eq!(tree.leaf_count(), 1);
        assert_eq!(tree.predict_one(&[3.0, 0.0]).unwrap(), 1);
    }
}
