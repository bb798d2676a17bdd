//! Config-driven experiment pipeline: generate drifted streams, evaluate
//! learners on them, and merge the metrics into a plot-ready table.
//!
//! Output layout under the `--out` directory:
//!
//! ```text
//! streams/<dataset>_<scenario>_<seed>.jsonl   (+ .drifts)
//! metrics/windows.csv summary.csv markers.csv evaluation.json
//! report/report.csv report_markers.csv
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, Corpus, CorpusError, FieldMapping, SampleSpec};
use crate::driftgen::{
    self, apply_drift, atomic_write, drifts_path, select_removal_years, Annotation, DriftDeps, DriftError, DriftMethod,
    DriftSpec, DriftedStream,
};
use crate::evaluate::{self, prequential_run, EvalError, RunKey, RunOptions, RunResult, VectorSource};
use crate::learners::{build_learner, LearnerKind, LearnerParams};
use crate::lexswap::{bundled_wordnet_dir, AdjectiveLexicon, WordNetError, WORDNET_DIR_ENV};
use crate::vectorize::{load_embedding_file, EmbeddingError, HashingVectorizer, Vector, DEFAULT_DIM};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing config {path}: {source}")]
    Toml { path: String, source: toml::de::Error },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    WordNet(#[from] WordNetError),
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("metrics disagree on the label count: {0:?}")]
    InconsistentLabels(BTreeMap<String, usize>),
    #[error("building worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix of every output file name.
    pub dataset: String,
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub subsets: SubsetConfig,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default)]
    pub vectorizer: VectorizerConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    /// Directory with WordNet's `index.adj` and `data.adj`.
    #[serde(default)]
    pub wordnet_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub path: PathBuf,
    pub num_labels: usize,
    #[serde(default)]
    pub fields: FieldMapping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubsetConfig {
    pub count: usize,
    pub target_length: usize,
    /// Explicit subset seeds; `0..count` when absent.
    pub seeds: Option<Vec<u64>>,
}

impl Default for SubsetConfig {
    fn default() -> Self {
        Self {
            count: 10,
            target_length: 200_000,
            seeds: None,
        }
    }
}

impl SubsetConfig {
    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| (0..self.count as u64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub method: DriftMethod,
    #[serde(default)]
    pub drift_points: Vec<usize>,
    /// Number of years to delete (time-slice removal), drawn per seed.
    #[serde(default)]
    pub removed_years: Option<usize>,
    /// Exact years to delete instead of drawing them.
    #[serde(default)]
    pub years: Option<BTreeSet<i32>>,
}

impl ScenarioConfig {
    pub fn new(name: &str, method: DriftMethod, drift_points: &[usize]) -> Self {
        Self {
            name: name.into(),
            method,
            drift_points: drift_points.to_vec(),
            removed_years: None,
            years: None,
        }
    }

    pub fn removal_count(&self) -> usize {
        self.years.as_ref().map_or(self.removed_years.unwrap_or(3), BTreeSet::len)
    }
}

pub fn default_scenarios() -> Vec<ScenarioConfig> {
    let three = [50_000, 100_000, 150_000];
    vec![
        ScenarioConfig::new("none", DriftMethod::None, &[]),
        ScenarioConfig::new("class_swap", DriftMethod::ClassSwap, &[50_000]),
        ScenarioConfig::new("class_shift", DriftMethod::ClassShift, &three),
        ScenarioConfig {
            removed_years: Some(3),
            ..ScenarioConfig::new("time_slice_removal", DriftMethod::TimeSliceRemoval, &[])
        },
        ScenarioConfig::new("adjective_swap", DriftMethod::AdjectiveSwap, &[50_000]),
        ScenarioConfig::new("adjective_swap_multi", DriftMethod::AdjectiveSwap, &three),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorizerConfig {
    Hashing {
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Precomputed vectors, one file per stream named like the stream with
    /// a `.dfe` extension.
    Embedding { dir: PathBuf },
}

fn default_dim() -> usize {
    DEFAULT_DIM
}

impl Default for VectorizerConfig {
    fn default() -> Self {
        VectorizerConfig::Hashing { dim: DEFAULT_DIM, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub learners: Vec<LearnerKind>,
    pub window: usize,
    pub params: LearnerParams,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            learners: LearnerKind::STANDARD_SET.to_vec(),
            window: evaluate::DEFAULT_WINDOW,
            params: LearnerParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|source| ExperimentError::Toml {
            path: path.display().to_string(),
            source,
        })
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.corpus.path);
        if let VectorizerConfig::Embedding { dir } = &mut cfg.vectorizer {
            resolve(dir);
        }
        if let Some(dir) = &mut cfg.wordnet_dir {
            resolve(dir);
        }
        Ok(cfg)
    }

    pub fn needs_wordnet(&self) -> bool {
        self.scenarios.iter().any(|s| s.method == DriftMethod::AdjectiveSwap)
    }

    /// Config value first, then the environment, then the bundled copy.
    pub fn resolved_wordnet_dir(&self) -> PathBuf {
        self.wordnet_dir
            .clone()
            .or_else(|| std::env::var_os(WORDNET_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(bundled_wordnet_dir)
    }

    pub fn field_mapping(&self) -> FieldMapping {
        self.corpus.fields.clone().with_num_labels(self.corpus.num_labels)
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut problems = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                problems.push(msg);
            }
        };
        let safe = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '.');
        check(safe(&self.dataset), format!("dataset name {:?} must be non-empty [A-Za-z0-9.-]", self.dataset));
        check(
            self.corpus.path.is_file(),
            format!("corpus file {} does not exist", self.corpus.path.display()),
        );
        check(self.corpus.num_labels >= 2, "corpus.num_labels must be at least 2".into());

        let seeds = self.subsets.seeds();
        check(!seeds.is_empty(), "no subset seeds".into());
        check(
            seeds.iter().collect::<HashSet<_>>().len() == seeds.len(),
            "subset seeds must be distinct".into(),
        );
        check(self.subsets.target_length >= 1, "subsets.target_length must be positive".into());

        check(!self.scenarios.is_empty(), "no scenarios".into());
        let mut names = HashSet::new();
        for s in &self.scenarios {
            let id = &s.name;
            check(
                !s.name.is_empty() && s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'),
                format!("scenario name {id:?} must be non-empty [A-Za-z0-9_-]"),
            );
            check(names.insert(id.clone()), format!("scenario name {id:?} repeated"));
            let increasing = s.drift_points.windows(2).all(|w| w[0] < w[1]);
            check(increasing, format!("scenario {id}: drift points must be strictly increasing"));
            check(
                s.drift_points.iter().all(|&p| p < self.subsets.target_length),
                format!("scenario {id}: drift points must lie inside the {}-instance subset", self.subsets.target_length),
            );
            match s.method {
                DriftMethod::None | DriftMethod::TimeSliceRemoval => {
                    check(s.drift_points.is_empty(), format!("scenario {id}: takes no drift points"))
                }
                _ => check(!s.drift_points.is_empty(), format!("scenario {id}: needs drift points")),
            }
            if s.method == DriftMethod::TimeSliceRemoval {
                check(s.removal_count() >= 1, format!("scenario {id}: must remove at least one year"));
            } else {
                check(
                    s.removed_years.is_none() && s.years.is_none(),
                    format!("scenario {id}: removed years only apply to time_slice_removal"),
                );
            }
        }

        match &self.vectorizer {
            VectorizerConfig::Hashing { dim, .. } => check(*dim >= 1, "vectorizer.dim must be positive".into()),
            VectorizerConfig::Embedding { dir } => {
                check(dir.is_dir(), format!("embedding directory {} does not exist", dir.display()))
            }
        }

        if self.needs_wordnet() {
            let dir = self.resolved_wordnet_dir();
            check(
                dir.join("index.adj").is_file() && dir.join("data.adj").is_file(),
                format!(
                    "adjective swap needs WordNet index.adj and data.adj in {} (set wordnet_dir or {WORDNET_DIR_ENV})",
                    dir.display()
                ),
            );
        }

        let eval = &self.evaluation;
        check(!eval.learners.is_empty(), "evaluation.learners is empty".into());
        check(
            eval.learners.iter().collect::<HashSet<_>>().len() == eval.learners.len(),
            "evaluation.learners has duplicates".into(),
        );
        check(eval.window >= 1, "evaluation.window must be positive".into());
        let p = &eval.params;
        let unit = |x: f64| x > 0.0 && x < 1.0;
        check(p.gnb_var_smoothing >= 0.0, "gnb_var_smoothing must be >= 0".into());
        check(p.svm.alpha > 0.0, "svm.alpha must be positive".into());
        check(p.svm.t0.is_none_or(|t| t > 0.0), "svm.t0 must be positive".into());
        for (name, tree) in [("tree", &p.tree), ("arf.tree", &p.arf.tree)] {
            check(tree.grace_period > 0.0, format!("{name}.grace_period must be positive"));
            check(unit(tree.split_confidence), format!("{name}.split_confidence must lie in (0, 1)"));
            check(tree.split_points >= 1, format!("{name}.split_points must be positive"));
        }
        check(p.arf.n_models >= 1, "arf.n_models must be positive".into());
        check(p.arf.lambda > 0.0, "arf.lambda must be positive".into());
        check(unit(p.arf.warning_delta), "arf.warning_delta must lie in (0, 1)".into());
        check(unit(p.arf.drift_delta), "arf.drift_delta must lie in (0, 1)".into());

        if problems.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::Invalid(problems))
        }
    }

    pub fn stream_file_name(&self, scenario: &str, seed: u64) -> String {
        format!("{}_{scenario}_{seed}.jsonl", self.dataset)
    }
}

pub fn streams_dir(out: &Path) -> PathBuf {
    out.join("streams")
}

pub fn metrics_dir(out: &Path) -> PathBuf {
    out.join("metrics")
}

pub fn report_dir(out: &Path) -> PathBuf {
    out.join("report")
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, ExperimentError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n.max(1));
    }
    Ok(b.build()?)
}

/// One unit of work that went wrong; the rest of the run carried on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub what: String,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct GenerateSummary {
    pub written: Vec<PathBuf>,
    pub failures: Vec<Failure>,
}

/// Samples one subset per seed and writes one drifted stream per scenario.
/// Time-slice removal re-samples from the full corpus after deleting years.
pub fn cmd_generate(config: &ExperimentConfig, out: &Path, jobs: Option<usize>) -> Result<GenerateSummary, ExperimentError> {
    config.validate()?;
    let lexicon = if config.needs_wordnet() {
        Some(AdjectiveLexicon::from_dir(&config.resolved_wordnet_dir())?)
    } else {
        None
    };
    let corpus = corpus::load_corpus(&config.corpus.path, &config.field_mapping())?;
    info!("loaded {} instances from {}", corpus.len(), config.corpus.path.display());
    let dir = streams_dir(out);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let seeds = config.subsets.seeds();
    let target = config.subsets.target_length;
    let pool = pool(jobs)?;
    let results: Vec<(String, Result<PathBuf, String>)> = pool.install(|| {
        let subsets: Vec<Result<Corpus, String>> = seeds
            .par_iter()
            .map(|&seed| {
                corpus::sample_stratified_temporal(&corpus, &SampleSpec { target_length: target, seed })
                    .map_err(|e| e.to_string())
            })
            .collect();
        let tasks: Vec<(usize, &ScenarioConfig)> =
            (0..seeds.len()).flat_map(|i| config.scenarios.iter().map(move |s| (i, s))).collect();
        tasks
            .par_iter()
            .map(|&(i, scenario)| {
                let seed = seeds[i];
                let name = config.stream_file_name(&scenario.name, seed);
                let path = dir.join(&name);
                let result = generate_one(&corpus, &subsets[i], scenario, seed, target, lexicon.as_ref())
                    .and_then(|stream| stream.write(&path).map_err(|e| e.to_string()))
                    .map(|()| path);
                (name, result)
            })
            .collect()
    });

    let mut summary = GenerateSummary::default();
    for (name, result) in results {
        match result {
            Ok(path) => summary.written.push(path),
            Err(error) => {
                warn!("{name}: {error}");
                summary.failures.push(Failure { what: name, error });
            }
        }
    }
    Ok(summary)
}

fn generate_one(
    corpus: &Corpus,
    subset: &Result<Corpus, String>,
    scenario: &ScenarioConfig,
    seed: u64,
    target: usize,
    lexicon: Option<&AdjectiveLexicon>,
) -> Result<DriftedStream, String> {
    let deps = DriftDeps {
        lexicon,
        tagger: None,
        sample_length: Some(target),
    };
    if scenario.method == DriftMethod::TimeSliceRemoval {
        let years = match &scenario.years {
            Some(years) => years.clone(),
            None => select_removal_years(corpus, scenario.removal_count(), seed).map_err(|e| e.to_string())?,
        };
        let spec = DriftSpec::time_slice_removal(years, seed);
        return apply_drift(corpus, &spec, deps).map_err(|e| e.to_string());
    }
    let subset = subset.as_ref().map_err(|e| format!("sampling subset: {e}"))?;
    let spec = DriftSpec {
        seed,
        ..DriftSpec::new(scenario.method, scenario.drift_points.clone())
    };
    apply_drift(subset, &spec, deps).map_err(|e| e.to_string())
}

/// Written next to the metrics so `report` can check label counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationManifest {
    pub dataset: String,
    pub num_labels: usize,
    pub window: usize,
    pub learners: Vec<LearnerKind>,
    pub streams: Vec<String>,
}

pub const EVALUATION_MANIFEST: &str = "evaluation.json";

#[derive(Debug, Default)]
pub struct EvaluateSummary {
    pub runs: usize,
    pub failures: Vec<Failure>,
}

/// Loads a stream written by `generate`.
pub fn read_stream(path: &Path, num_labels: usize) -> Result<DriftedStream, ExperimentError> {
    let corpus = corpus::load_corpus(path, &FieldMapping::canonical().with_num_labels(num_labels))?;
    let drifts = drifts_path(path);
    let annotations = if drifts.exists() {
        driftgen::read_annotations(&drifts)?
    } else {
        Vec::new()
    };
    let mut stream = DriftedStream::unchanged(&corpus);
    stream.annotations = annotations;
    Ok(stream)
}

struct LoadedStream {
    scenario: String,
    seed: u64,
    stream: DriftedStream,
    vectors: Option<Vec<Vector>>,
}

/// Runs every configured learner on every generated stream and writes the
/// windowed, summary and marker CSVs.
pub fn cmd_evaluate(
    config: &ExperimentConfig,
    out: &Path,
    jobs: Option<usize>,
    normalize_embeddings: bool,
) -> Result<EvaluateSummary, ExperimentError> {
    config.validate()?;
    let k = config.corpus.num_labels;
    let streams_dir = streams_dir(out);
    let metrics = metrics_dir(out);
    fs::create_dir_all(&metrics).map_err(io_err(&metrics))?;

    let wanted: Vec<(String, u64)> = config
        .subsets
        .seeds()
        .into_iter()
        .flat_map(|seed| config.scenarios.iter().map(move |s| (s.name.clone(), seed)))
        .collect();
    let pool = pool(jobs)?;
    let loaded: Vec<Result<LoadedStream, Failure>> = pool.install(|| {
        wanted
            .par_iter()
            .map(|(scenario, seed)| {
                let name = config.stream_file_name(scenario, *seed);
                let fail = |error: String| Failure { what: name.clone(), error };
                let path = streams_dir.join(&name);
                if !path.is_file() {
                    return Err(fail(format!("missing stream file {}", path.display())));
                }
                let stream = read_stream(&path, k).map_err(|e| fail(e.to_string()))?;
                let vectors = match &config.vectorizer {
                    VectorizerConfig::Hashing { .. } => None,
                    VectorizerConfig::Embedding { dir } => {
                        let file = dir.join(Path::new(&name).with_extension("dfe"));
                        let (_, vectors) = load_embedding_file(&file).map_err(|e| fail(format!("{}: {e}", file.display())))?;
                        Some(vectors)
                    }
                };
                Ok(LoadedStream {
                    scenario: scenario.clone(),
                    seed: *seed,
                    stream,
                    vectors,
                })
            })
            .collect()
    });

    let mut summary = EvaluateSummary::default();
    let streams: Vec<LoadedStream> = loaded
        .into_iter()
        .filter_map(|r| r.map_err(|f| summary.failures.push(f)).ok())
        .collect();

    let hashing = match config.vectorizer {
        VectorizerConfig::Hashing { dim, seed } => Some(HashingVectorizer::new(dim, seed)),
        VectorizerConfig::Embedding { .. } => None,
    };
    let options = RunOptions {
        window: config.evaluation.window,
        normalize: normalize_embeddings,
    };
    let tasks: Vec<(&LoadedStream, LearnerKind)> = streams
        .iter()
        .flat_map(|s| config.evaluation.learners.iter().map(move |&l| (s, l)))
        .collect();
    let runs: Vec<(RunKey, Result<RunResult, String>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(s, kind)| {
                let key = RunKey {
                    dataset: config.dataset.clone(),
                    scenario: s.scenario.clone(),
                    learner: kind.to_string(),
                    seed: s.seed,
                };
                let result = {
                    let source = match (&hashing, &s.vectors) {
                        (Some(h), _) => VectorSource::Inline(h),
                        (None, Some(v)) => VectorSource::Precomputed(v),
                        (None, None) => unreachable!("embedding runs always load vectors"),
                    };
                    let dim = match source {
                        VectorSource::Inline(v) => v.dim(),
                        VectorSource::Precomputed(v) => v.first().map_or(1, Vector::dim),
                    };
                    let mut learner = build_learner(kind, k, dim, &config.evaluation.params, s.seed);
                    prequential_run(&s.stream, source, learner.as_mut(), options)
                }
                .map_err(|e| e.to_string());
                info!("{} {} {} done", key.scenario, key.learner, key.seed);
                (key, result)
            })
            .collect()
    });

    let mut finished = Vec::new();
    for (key, result) in &runs {
        match result {
            Ok(run) => finished.push((key.clone(), run)),
            Err(error) => summary.failures.push(Failure {
                what: format!("{} {} {}", key.scenario, key.learner, key.seed),
                error: error.clone(),
            }),
        }
    }
    summary.runs = finished.len();
    evaluate::write_windows_csv(&metrics.join("windows.csv"), &finished)?;
    evaluate::write_summary_csv(&metrics.join("summary.csv"), &finished)?;
    let markers: Vec<(RunKey, &[Annotation])> = streams
        .iter()
        .map(|s| {
            let key = RunKey {
                dataset: config.dataset.clone(),
                scenario: s.scenario.clone(),
                learner: String::new(),
                seed: s.seed,
            };
            (key, s.stream.annotations.as_slice())
        })
        .collect();
    evaluate::write_markers_csv(&metrics.join("markers.csv"), &markers)?;
    let manifest = EvaluationManifest {
        dataset: config.dataset.clone(),
        num_labels: k,
        window: config.evaluation.window,
        learners: config.evaluation.learners.clone(),
        streams: streams
            .iter()
            .map(|s| config.stream_file_name(&s.scenario, s.seed))
            .collect(),
    };
    let path = metrics.join(EVALUATION_MANIFEST);
    let json = serde_json::to_vec_pretty(&manifest).map_err(|source| ExperimentError::Json {
        path: path.display().to_string(),
        source,
    })?;
    atomic_write(&path, &json)?;
    Ok(summary)
}

#[derive(Debug, Clone, Deserialize)]
struct WindowIn {
    dataset: String,
    scenario: String,
    learner: String,
    seed: u64,
    window_index: usize,
    window_size: usize,
    accuracy: f64,
    macro_f1: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct MarkerIn {
    dataset: String,
    scenario: String,
    seed: u64,
    index: usize,
    kind: String,
}

#[derive(Debug, Serialize)]
struct ReportRow<'a> {
    dataset: &'a str,
    scenario: &'a str,
    learner: &'a str,
    seed: u64,
    series: String,
    window_index: usize,
    window_size: usize,
    accuracy: f64,
    macro_f1: f64,
    /// Drift kinds whose index falls in this window, `;`-separated.
    drifts: String,
}

#[derive(Debug, Serialize)]
struct ReportMarkerRow<'a> {
    dataset: &'a str,
    scenario: &'a str,
    seed: u64,
    index: usize,
    kind: &'a str,
    window_index: usize,
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct ReportSummary {
    pub rows: usize,
    pub markers: usize,
    pub series: usize,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ExperimentError> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), ExperimentError> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| csv_err(csv::Error::from(e.into_error())))?;
    Ok(atomic_write(path, &bytes)?)
}

pub const REPORT_HEADER: [&str; 10] = [
    "dataset",
    "scenario",
    "learner",
    "seed",
    "series",
    "window_index",
    "window_size",
    "accuracy",
    "macro_f1",
    "drifts",
];
pub const REPORT_MARKERS_HEADER: [&str; 6] = ["dataset", "scenario", "seed", "index", "kind", "window_index"];

/// Merges windowed metrics with drift markers from one or more metrics
/// directories into `report.csv` (one row per input window row, with the
/// drifts that fall in the window) and `report_markers.csv` (each marker
/// with its window index).
pub fn cmd_report(metrics_dirs: &[PathBuf], out_dir: &Path) -> Result<ReportSummary, ExperimentError> {
    let mut labels = BTreeMap::new();
    let mut windows = Vec::new();
    let mut markers = Vec::new();
    for dir in metrics_dirs {
        let path = dir.join(EVALUATION_MANIFEST);
        let text = fs::read(&path).map_err(io_err(&path))?;
        let manifest: EvaluationManifest = serde_json::from_slice(&text).map_err(|source| ExperimentError::Json {
            path: path.display().to_string(),
            source,
        })?;
        labels.insert(dir.display().to_string(), manifest.num_labels);
        windows.extend(read_csv::<WindowIn>(&dir.join("windows.csv"))?);
        markers.extend(
            read_csv::<MarkerIn>(&dir.join("markers.csv"))?
                .into_iter()
                .map(|m| (m, manifest.window)),
        );
    }
    if labels.values().collect::<BTreeSet<_>>().len() > 1 {
        return Err(ExperimentError::InconsistentLabels(labels));
    }

    let mut by_window: BTreeMap<(&str, &str, u64, usize), Vec<&str>> = BTreeMap::new();
    let marker_rows: Vec<ReportMarkerRow> = markers
        .iter()
        .map(|(m, window)| {
            let window_index = m.index / window;
            by_window
                .entry((&m.dataset, &m.scenario, m.seed, window_index))
                .or_default()
                .push(&m.kind);
            ReportMarkerRow {
                dataset: &m.dataset,
                scenario: &m.scenario,
                seed: m.seed,
                index: m.index,
                kind: &m.kind,
                window_index,
            }
        })
        .collect();
    let rows: Vec<ReportRow> = windows
        .iter()
        .map(|w| ReportRow {
            dataset: &w.dataset,
            scenario: &w.scenario,
            learner: &w.learner,
            seed: w.seed,
            series: format!("{}/{}", w.scenario, w.learner),
            window_index: w.window_index,
            window_size: w.window_size,
            accuracy: w.accuracy,
            macro_f1: w.macro_f1,
            drifts: by_window
                .get(&(w.dataset.as_str(), w.scenario.as_str(), w.seed, w.window_index))
                .map(|k| k.join(";"))
                .unwrap_or_default(),
        })
        .collect();

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_csv(&out_dir.join("report.csv"), &rows, &REPORT_HEADER)?;
    write_csv(&out_dir.join("report_markers.csv"), &marker_rows, &REPORT_MARKERS_HEADER)?;
    Ok(ReportSummary {
        rows: rows.len(),
        markers: marker_rows.len(),
        series: rows.iter().map(|r| &r.series).collect::<BTreeSet<_>>().len(),
    })
}
