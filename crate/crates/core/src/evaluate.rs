//! Prequential (test-then-train) evaluation with tumbling-window metrics.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::driftgen::{atomic_write, Annotation, DriftError, DriftedStream};
use crate::learners::{Learner, LearnerError};
use crate::vectorize::{Vector, Vectorizer};

pub const DEFAULT_WINDOW: usize = 1000;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("window size must be at least 1")]
    ZeroWindow,
    #[error("{vectors} vectors supplied for a stream of {stream} instances")]
    LengthMismatch { vectors: usize, stream: usize },
    #[error("vector dimension {got} does not match learner dimension {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error("stream has {stream} labels, learner has {learner}")]
    LabelMismatch { stream: usize, learner: usize },
    #[error("instance {index}: {source}")]
    Learner { index: usize, source: LearnerError },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Write(#[from] DriftError),
}

/// K x K counts; rows are true labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    num_labels: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(num_labels: usize) -> Self {
        Self {
            num_labels,
            counts: vec![0; num_labels * num_labels],
        }
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.num_labels + predicted] += 1;
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.num_labels + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_labels).map(|l| self.get(l, l)).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.num_labels, other.num_labels, "label count mismatch");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// F1 of one label; any 0/0 ratio counts as 0.
    pub fn f1(&self, label: usize) -> f64 {
        let tp = self.get(label, label) as f64;
        let row: u64 = (0..self.num_labels).map(|p| self.get(label, p)).sum();
        let col: u64 = (0..self.num_labels).map(|t| self.get(t, label)).sum();
        let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
        let precision = ratio(tp, col as f64);
        let recall = ratio(tp, row as f64);
        ratio(2.0 * precision * recall, precision + recall)
    }

    /// Labels that occur as truth or as prediction.
    fn observed(&self, label: usize) -> bool {
        (0..self.num_labels).any(|o| self.get(label, o) > 0 || self.get(o, label) > 0)
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    if cm.is_empty() {
        return Err(EvalError::EmptyMatrix);
    }
    Ok(cm.trace() as f64 / cm.total() as f64)
}

/// Unweighted mean of per-label F1. Labels never seen as truth nor predicted
/// are left out; labels that occur contribute their F1, possibly 0.
pub fn macro_f1(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    if cm.is_empty() {
        return Err(EvalError::EmptyMatrix);
    }
    let (sum, n) = (0..cm.num_labels)
        .filter(|&l| cm.observed(l))
        .fold((0.0, 0usize), |(s, n), l| (s + cm.f1(l), n + 1));
    Ok(sum / n as f64)
}

/// Where feature vectors come from.
#[derive(Clone, Copy)]
pub enum VectorSource<'a> {
    /// Vectorize each text inside the timed loop.
    Inline(&'a dyn Vectorizer),
    /// One vector per stream instance, in order.
    Precomputed(&'a [Vector]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub window: usize,
    /// L2-normalize precomputed vectors before use.
    pub normalize: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowMetrics {
    pub index: usize,
    pub size: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub elapsed_seconds: f64,
    pub windows: Vec<WindowMetrics>,
    pub annotations: Vec<Annotation>,
    pub predictions: Vec<usize>,
    pub confusion: ConfusionMatrix,
}

impl RunResult {
    pub fn window_f1(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.macro_f1).collect()
    }
}

/// Runs `learner` over `stream`: each instance is predicted, scored, and
/// only then learned. A learner with no usable state yet predicts label 0,
/// so every instance counts from the first one.
pub fn prequential_run(
    stream: &DriftedStream,
    source: VectorSource<'_>,
    learner: &mut dyn Learner,
    options: RunOptions,
) -> Result<RunResult, EvalError> {
    if options.window == 0 {
        return Err(EvalError::ZeroWindow);
    }
    if learner.num_labels() != stream.num_labels {
        return Err(EvalError::LabelMismatch {
            stream: stream.num_labels,
            learner: learner.num_labels(),
        });
    }
    let source_dim = match source {
        VectorSource::Inline(v) => v.dim(),
        VectorSource::Precomputed(vectors) => {
            if vectors.len() != stream.len() {
                return Err(EvalError::LengthMismatch {
                    vectors: vectors.len(),
                    stream: stream.len(),
                });
            }
            vectors.first().map_or(learner.dim(), Vector::dim)
        }
    };
    if source_dim != learner.dim() {
        return Err(EvalError::DimMismatch {
            expected: learner.dim(),
            got: source_dim,
        });
    }

    let k = stream.num_labels;
    let mut cumulative = ConfusionMatrix::new(k);
    let mut current = ConfusionMatrix::new(k);
    let mut windows = Vec::with_capacity(stream.len().div_ceil(options.window));
    let mut predictions = Vec::with_capacity(stream.len());
    let flush = |current: &mut ConfusionMatrix, windows: &mut Vec<WindowMetrics>| -> Result<(), EvalError> {
        let cm = std::mem::replace(current, ConfusionMatrix::new(k));
        windows.push(WindowMetrics {
            index: windows.len(),
            size: cm.total() as usize,
            accuracy: accuracy(&cm)?,
            macro_f1: macro_f1(&cm)?,
            confusion: cm,
        });
        Ok(())
    };

    let start = Instant::now();
    for (i, inst) in stream.instances.iter().enumerate() {
        let owned;
        let x: &[f32] = match source {
            VectorSource::Inline(v) => {
                owned = v.transform(&inst.text);
                owned.as_slice()
            }
            VectorSource::Precomputed(vectors) if options.normalize => {
                let mut v = vectors[i].clone();
                v.normalize();
                owned = v;
                owned.as_slice()
            }
            VectorSource::Precomputed(vectors) => vectors[i].as_slice(),
        };
        let predicted = match learner.predict_one(x) {
            Ok(p) => p,
            Err(LearnerError::Untrained) => 0,
            Err(source) => return Err(EvalError::Learner { index: i, source }),
        };
        cumulative.record(inst.label, predicted);
        current.record(inst.label, predicted);
        predictions.push(predicted);
        learner
            .learn_one(x, inst.label)
            .map_err(|source| EvalError::Learner { index: i, source })?;
        if (i + 1) % options.window == 0 {
            flush(&mut current, &mut windows)?;
        }
    }
    if !current.is_empty() {
        flush(&mut current, &mut windows)?;
    }
    let elapsed_seconds = start.elapsed().as_secs_f64();

    Ok(RunResult {
        accuracy: accuracy(&cumulative)?,
        macro_f1: macro_f1(&cumulative)?,
        elapsed_seconds,
        windows,
        annotations: stream.annotations.clone(),
        predictions,
        confusion: cumulative,
    })
}

/// Windows after `drift_window` until the windowed score is back within
/// `tolerance` of `baseline`; counts the drift window itself as 1.
/// `None` when the series never recovers.
pub fn windows_to_recovery(series: &[f64], drift_window: usize, baseline: f64, tolerance: f64) -> Option<usize> {
    series
        .iter()
        .skip(drift_window)
        .position(|&v| v >= baseline - tolerance)
        .map(|p| p + 1)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Identifies one run in the metrics files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RunKey {
    pub dataset: String,
    pub scenario: String,
    pub learner: String,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct WindowRow<'a> {
    dataset: &'a str,
    scenario: &'a str,
    learner: &'a str,
    seed: u64,
    window_index: usize,
    window_size: usize,
    accuracy: f64,
    macro_f1: f64,
}

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    dataset: &'a str,
    scenario: &'a str,
    learner: &'a str,
    seed: u64,
    accuracy: f64,
    macro_f1: f64,
    elapsed_seconds: f64,
}

#[derive(Debug, Serialize)]
struct MarkerRow<'a> {
    dataset: &'a str,
    scenario: &'a str,
    seed: u64,
    index: usize,
    kind: &'a str,
}

pub const WINDOWS_HEADER: &str = "dataset,scenario,learner,seed,window_index,window_size,accuracy,macro_f1";
pub const SUMMARY_HEADER: &str = "dataset,scenario,learner,seed,accuracy,macro_f1,elapsed_seconds";
pub const MARKERS_HEADER: &str = "dataset,scenario,seed,index,kind";

fn write_rows<T: Serialize>(path: &Path, header: &str, rows: impl IntoIterator<Item = T>) -> Result<(), EvalError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    atomic_write(path, &bytes)?;
    Ok(())
}

/// Long-format windowed metrics, one row per (run, window).
pub fn write_windows_csv(path: &Path, runs: &[(RunKey, &RunResult)]) -> Result<(), EvalError> {
    let rows = runs.iter().flat_map(|(key, run)| {
        run.windows.iter().map(move |w| WindowRow {
            dataset: &key.dataset,
            scenario: &key.scenario,
            learner: &key.learner,
            seed: key.seed,
            window_index: w.index,
            window_size: w.size,
            accuracy: w.accuracy,
            macro_f1: w.macro_f1,
        })
    });
    write_rows(path, WINDOWS_HEADER, rows)
}

pub fn write_summary_csv(path: &Path, runs: &[(RunKey, &RunResult)]) -> Result<(), EvalError> {
    let rows = runs.iter().map(|(key, run)| SummaryRow {
        dataset: &key.dataset,
        scenario: &key.scenario,
        learner: &key.learner,
        seed: key.seed,
        accuracy: run.accuracy,
        macro_f1: run.macro_f1,
        elapsed_seconds: run.elapsed_seconds,
    });
    write_rows(path, SUMMARY_HEADER, rows)
}

/// Drift markers per stream; `learner` in the key is ignored.
pub fn write_markers_csv(path: &Path, streams: &[(RunKey, &[Annotation])]) -> Result<(), EvalError> {
    let rows = streams.iter().flat_map(|(key, annotations)| {
        annotations.iter().map(move |a| MarkerRow {
            dataset: &key.dataset,
            scenario: &key.scenario,
            seed: key.seed,
            index: a.index,
            kind: a.kind.as_str(),
        })
    });
    write_rows(path, MARKERS_HEADER, rows)
}
