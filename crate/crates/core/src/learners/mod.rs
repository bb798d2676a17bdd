//! Incremental classifiers behind one learn-one / predict-one interface.

mod arf;
mod gnb;
mod hoeffding;
mod svm;

pub use arf::{poisson, AdaptiveRandomForest, ArfConfig, SubspaceSize};
pub use gnb::GaussianNb;
pub use hoeffding::{hoeffding_bound, HoeffdingTree, HoeffdingTreeConfig};
pub use svm::{SgdSvm, SvmConfig};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("input has dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {label} outside [0, {num_labels})")]
    LabelOutOfRange { label: usize, num_labels: usize },
    #[error("untrained model")]
    Untrained,
    #[error("non-finite input at feature {0}")]
    NonFinite(usize),
}

/// An incremental classifier that sees each instance once.
pub trait Learner: Send {
    fn num_labels(&self) -> usize;

    fn dim(&self) -> usize;

    fn learn_one(&mut self, x: &[f32], label: usize) -> Result<(), LearnerError>;

    /// Must not change the model.
    fn predict_one(&self, x: &[f32]) -> Result<usize, LearnerError>;

    /// Per-label scores where the model has a natural notion of them.
    fn score_all(&self, _x: &[f32]) -> Option<Result<Vec<f64>, LearnerError>> {
        None
    }
}

pub(crate) fn check_input(x: &[f32], dim: usize) -> Result<(), LearnerError> {
    if x.len() != dim {
        return Err(LearnerError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(x: &[f32]) -> Result<(), LearnerError> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(LearnerError::NonFinite(i)),
        None => Ok(()),
    }
}

pub(crate) fn check_label(label: usize, num_labels: usize) -> Result<(), LearnerError> {
    if label >= num_labels {
        return Err(LearnerError::LabelOutOfRange { label, num_labels });
    }
    Ok(())
}

/// Index of the largest value; the smallest index wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LearnerKind {
    #[serde(rename = "GNB")]
    Gnb,
    #[serde(rename = "ISVM")]
    Isvm,
    #[serde(rename = "ARF")]
    Arf,
    #[serde(rename = "ARF_DD")]
    ArfDd,
    #[serde(rename = "HT")]
    HoeffdingTree,
}

impl LearnerKind {
    pub const STANDARD_SET: [LearnerKind; 4] = [LearnerKind::Gnb, LearnerKind::Isvm, LearnerKind::Arf, LearnerKind::ArfDd];

    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Gnb => "GNB",
            LearnerKind::Isvm => "ISVM",
            LearnerKind::Arf => "ARF",
            LearnerKind::ArfDd => "ARF_DD",
            LearnerKind::HoeffdingTree => "HT",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "GNB" => Ok(LearnerKind::Gnb),
            "ISVM" => Ok(LearnerKind::Isvm),
            "ARF" => Ok(LearnerKind::Arf),
            "ARF_DD" => Ok(LearnerKind::ArfDd),
            "HT" => Ok(LearnerKind::HoeffdingTree),
            other => Err(format!("unknown learner {other:?}")),
        }
    }
}

/// Hyperparameters for every learner kind; defaults follow the
/// reference implementations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerParams {
    pub gnb_var_smoothing: f64,
    pub svm: SvmConfig,
    pub tree: HoeffdingTreeConfig,
    pub arf: ArfConfig,
}

impl Default for LearnerParams {
    fn default() -> Self {
        Self {
            gnb_var_smoothing: gnb::DEFAULT_VAR_SMOOTHING,
            svm: SvmConfig::default(),
            tree: HoeffdingTreeConfig::default(),
            arf: ArfConfig::default(),
        }
    }
}

/// Builds a fresh learner. `seed` feeds the randomized models.
pub fn build_learner(kind: LearnerKind, num_labels: usize, dim: usize, params: &LearnerParams, seed: u64) -> Box<dyn Learner> {
    match kind {
        LearnerKind::Gnb => Box::new(GaussianNb::with_smoothing(num_labels, dim, params.gnb_var_smoothing)),
        LearnerKind::Isvm => Box::new(SgdSvm::new(num_labels, dim, params.svm.clone())),
        LearnerKind::HoeffdingTree => {
            let mut cfg = params.tree.clone();
            cfg.seed = seed;
            Box::new(HoeffdingTree::new(num_labels, dim, cfg))
        }
        LearnerKind::Arf | LearnerKind::ArfDd => {
            let mut cfg = params.arf.clone();
            cfg.detectors_enabled = kind == LearnerKind::ArfDd;
            cfg.seed = seed;
            Box::new(AdaptiveRandomForest::new(num_labels, dim, cfg))
        }
    }
}
