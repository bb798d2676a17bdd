//! Adaptive Random Forest: online bagging over Hoeffding trees that each
//! grow on random feature subspaces, with optional per-tree warning and
//! drift detectors.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_finite, check_input, check_label, HoeffdingTree, HoeffdingTreeConfig, Learner, LearnerError};
use crate::detect::Adwin;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceSize {
    /// `ceil(sqrt(d))`
    Sqrt,
    All,
    Fixed(usize),
}

impl SubspaceSize {
    pub fn resolve(self, dim: usize) -> usize {
        let m = match self {
            SubspaceSize::Sqrt => (dim as f64).sqrt().ceil() as usize,
            SubspaceSize::All => dim,
            SubspaceSize::Fixed(m) => m,
        };
        m.clamp(1, dim.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArfConfig {
    pub n_models: usize,
    pub lambda: f64,
    pub subspace: SubspaceSize,
    pub warning_delta: f64,
    pub drift_delta: f64,
    pub detectors_enabled: bool,
    /// When false every member trains on every instance with weight 1.
    pub online_bagging: bool,
    pub tree: HoeffdingTreeConfig,
    pub seed: u64,
}

impl Default for ArfConfig {
    fn default() -> Self {
        Self {
            n_models: 10,
            lambda: 6.0,
            subspace: SubspaceSize::Sqrt,
            warning_delta: 0.01,
            drift_delta: 0.001,
            detectors_enabled: false,
            online_bagging: true,
            tree: HoeffdingTreeConfig::default(),
            seed: 0,
        }
    }
}

/// Draws from Poisson(`lambda`) by sequential inversion of the CDF.
pub fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let mut k = 0u32;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= lambda / f64::from(k);
        let next = cdf + p;
        // the tail underflowed; u sits in the rounding gap above the CDF
        if next == cdf {
            break;
        }
        cdf = next;
    }
    k
}

#[derive(Debug, Clone)]
struct Member {
    tree: HoeffdingTree,
    background: Option<HoeffdingTree>,
    warning: Option<Adwin>,
    drift: Option<Adwin>,
    rng: ChaCha8Rng,
    warnings: usize,
    replacements: usize,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRandomForest {
    config: ArfConfig,
    num_labels: usize,
    dim: usize,
    tree_config: HoeffdingTreeConfig,
    members: Vec<Member>,
}

impl AdaptiveRandomForest {
    pub fn new(num_labels: usize, dim: usize, config: ArfConfig) -> Self {
        let m = config.subspace.resolve(dim);
        let tree_config = HoeffdingTreeConfig {
            subspace: (m < dim).then_some(m),
            ..config.tree.clone()
        };
        let members = (0..config.n_models.max(1))
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(i as u64);
                let tree = Self::grow(num_labels, dim, &tree_config, &mut rng);
                let (warning, drift) = if config.detectors_enabled {
                    (
                        Some(Adwin::new(config.warning_delta).expect("valid warning confidence")),
                        Some(Adwin::new(config.drift_delta).expect("valid drift confidence")),
                    )
                } else {
                    (None, None)
                };
                Member {
                    tree,
                    background: None,
                    warning,
                    drift,
                    rng,
                    warnings: 0,
                    replacements: 0,
                }
            })
            .collect();
        Self {
            config,
            num_labels,
            dim,
            tree_config,
            members,
        }
    }

    fn grow(num_labels: usize, dim: usize, cfg: &HoeffdingTreeConfig, rng: &mut ChaCha8Rng) -> HoeffdingTree {
        let cfg = HoeffdingTreeConfig {
            seed: rng.next_u64(),
            ..cfg.clone()
        };
        HoeffdingTree::new(num_labels, dim, cfg)
    }

    pub fn config(&self) -> &ArfConfig {
        &self.config
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    /// Seed of member `i`'s first tree.
    pub fn member_seed(&self, i: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(i as u64);
        rng.next_u64()
    }

    pub fn warnings(&self) -> usize {
        self.members.iter().map(|m| m.warnings).sum()
    }

    pub fn replacements(&self) -> usize {
        self.members.iter().map(|m| m.replacements).sum()
    }

    pub fn votes(&self, x: &[f32]) -> Result<Vec<f64>, LearnerError> {
        check_input(x, self.dim)?;
        check_finite(x)?;
        let mut votes = vec![0.0; self.num_labels];
        for member in &self.members {
            votes[member.tree.predict_one(x)?] += 1.0;
        }
        Ok(votes)
    }
}

impl Learner for AdaptiveRandomForest {
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
        let (k_labels, dim) = (self.num_labels, self.dim);
        for member in &mut self.members {
            let error = f64::from(u8::from(member.tree.predict_one(x)? != label));
            let weight = if self.config.online_bagging {
                f64::from(poisson(self.config.lambda, &mut member.rng))
            } else {
                1.0
            };
            if weight > 0.0 {
                member.tree.learn_weighted(x, label, weight)?;
                if let Some(bg) = &mut member.background {
                    bg.learn_weighted(x, label, weight)?;
                }
            }

            if let Some(warning) = &mut member.warning {
                if warning.update(error).expect("error is 0 or 1") {
                    member.warnings += 1;
                    member.background = Some(Self::grow(k_labels, dim, &self.tree_config, &mut member.rng));
                    warning.reset();
                }
            }
            if let Some(drift) = &mut member.drift {
                if drift.update(error).expect("error is 0 or 1") {
                    member.replacements += 1;
                    member.tree = match member.background.take() {
                        Some(bg) => bg,
                        None => Self::grow(k_labels, dim, &self.tree_config, &mut member.rng),
                    };
                    drift.reset();
                    if let Some(w) = &mut member.warning {
                        w.reset();
                    }
                }
            }
        }
        Ok(())
    }

    fn predict_one(&self, x: &[f32]) -> Result<usize, LearnerError> {
        Ok(argmax(&self.votes(x)?))
    }

    fn score_all(&self, x: &[f32]) -> Option<Result<Vec<f64>, LearnerError>> {
        Some(self.votes(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(seed: u64, n: usize, dim: usize) -> Vec<(Vec<f32>, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let x: Vec<f32> = (0..dim).map(|_| rng.gen()).collect();
                let y = usize::from(x[0] + x[1] > 1.0);
                // concept flips halfway through
                (x, if i < n / 2 { y } else { 1 - y })
            })
            .collect()
    }

    #[test]
    fn poisson_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| f64::from(poisson(6.0, &mut rng))).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 6.0).abs() < 0.05, "{mean}");
        assert!((var - 6.0).abs() < 0.15, "{var}");
        let zeros = draws.iter().filter(|&&d| d == 0.0).count() as f64 / n as f64;
        assert!((zeros - (-6f64).exp()).abs() < 0.002);
        assert_eq!(poisson(1e-300, &mut rng), 0);
    }

    #[test]
    fn subspace_sizes() {
        assert_eq!(SubspaceSize::Sqrt.resolve(384), 20);
        assert_eq!(SubspaceSize::Sqrt.resolve(16), 4);
        assert_eq!(SubspaceSize::All.resolve(7), 7);
        assert_eq!(SubspaceSize::Fixed(50).resolve(7), 7);
    }

    #[test]
    fn ensemble_size_is_fixed() {
        let cfg = ArfConfig { detectors_enabled: true, ..Default::default() };
        let mut arf = AdaptiveRandomForest::new(2, 4, cfg);
        for (x, y) in stream(2, 6000, 4) {
            arf.learn_one(&x, y).unwrap();
            assert_eq!(arf.n_members(), 10);
        }
        assert!(arf.replacements() > 0);
    }

    #[test]
    fn single_member_matches_single_tree() {
        let cfg = ArfConfig {
            n_models: 1,
            online_bagging: false,
            subspace: SubspaceSize::All,
            seed: 4,
            ..Default::default()
        };
        let mut arf = AdaptiveRandomForest::new(2, 4, cfg.clone());
        let tree_cfg = HoeffdingTreeConfig { seed: arf.member_seed(0), ..cfg.tree };
        let mut tree = HoeffdingTree::new(2, 4, tree_cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3000 {
            let x: Vec<f32> = (0..4).map(|_| rng.gen()).collect();
            let y = usize::from(x[2] > 0.3);
            assert_eq!(arf.predict_one(&x).unwrap(), tree.predict_one(&x).unwrap());
            arf.learn_one(&x, y).unwrap();
            tree.learn_one(&x, y).unwrap();
        }
        assert!(tree.leaf_count() > 1);
    }

    #[test]
    fn same_seed_same_predictions() {
        let run = |seed: u64| {
            let cfg = ArfConfig { detectors_enabled: true, seed, ..Default::default() };
            let mut arf = AdaptiveRandomForest::new(2, 9, cfg);
            stream(8, 3000, 9)
                .into_iter()
                .map(|(x, y)| {
                    let p = arf.predict_one(&x).unwrap();
                    arf.learn_one(&x, y).unwrap();
                    p
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(1), run(1));
        assert_ne!(run(1), run(2));
    }
}
