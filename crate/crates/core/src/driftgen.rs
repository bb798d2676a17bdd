//! Class-based drift generators and the drift dispatch.
//!
//! Every generator returns a [`DriftedStream`]: the transformed instances
//! plus ground-truth annotations saying where the change was injected.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, sample_stratified_temporal, Corpus, CorpusError, SampleSpec, TextInstance};
use crate::lexswap::{adjective_swap_stream, AdjectiveLexicon, LexiconTagger, Tagger};

#[derive(Debug, Error)]
pub enum DriftError {
    #[error("drift points must be strictly increasing, got {0:?}")]
    NotIncreasing(Vec<usize>),
    #[error("class-based drift needs at least 2 labels, corpus has {0}")]
    TooFewLabels(usize),
    #[error("need {needed} removable years but only {eligible:?} are eligible")]
    NotEnoughYears { needed: usize, eligible: Vec<i32> },
    #[error("years {0:?} do not occur in the corpus")]
    UnknownYears(Vec<i32>),
    #[error("removal leaves {remaining} instances, fewer than the target {target}")]
    TooFewAfterRemoval { remaining: usize, target: usize },
    #[error("adjective swap requested without a WordNet lexicon")]
    MissingLexicon,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: bad drift annotation {text:?}")]
    BadAnnotation { path: String, line: usize, text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DriftMethod {
    #[default]
    None,
    ClassSwap,
    ClassShift,
    TimeSliceRemoval,
    AdjectiveSwap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DriftSpec {
    pub method: DriftMethod,
    pub drift_points: Vec<usize>,
    pub removed_years: BTreeSet<i32>,
    pub seed: u64,
}

impl DriftSpec {
    pub fn new(method: DriftMethod, drift_points: Vec<usize>) -> Self {
        Self {
            method,
            drift_points,
            ..Self::default()
        }
    }

    pub fn time_slice_removal(removed_years: BTreeSet<i32>, seed: u64) -> Self {
        Self {
            method: DriftMethod::TimeSliceRemoval,
            drift_points: Vec::new(),
            removed_years,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftKind {
    Swap,
    Shift,
    Gap,
    AdjSwap,
}

impl DriftKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DriftKind::Swap => "swap",
            DriftKind::Shift => "shift",
            DriftKind::Gap => "gap",
            DriftKind::AdjSwap => "adjswap",
        }
    }
}

impl fmt::Display for DriftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DriftKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swap" => Ok(DriftKind::Swap),
            "shift" => Ok(DriftKind::Shift),
            "gap" => Ok(DriftKind::Gap),
            "adjswap" => Ok(DriftKind::AdjSwap),
            other => Err(format!("unknown drift kind {other:?}")),
        }
    }
}

/// A ground-truth drift marker: the first index of the changed region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Annotation {
    pub index: usize,
    pub kind: DriftKind,
}

impl Annotation {
    pub fn new(index: usize, kind: DriftKind) -> Self {
        Self { index, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub spec: DriftSpec,
    pub source: String,
    pub source_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriftedStream {
    pub name: String,
    pub num_labels: usize,
    pub instances: Vec<TextInstance>,
    pub annotations: Vec<Annotation>,
    pub provenance: Provenance,
}

impl DriftedStream {
    pub(crate) fn derived(
        source: &Corpus,
        instances: Vec<TextInstance>,
        annotations: Vec<Annotation>,
        spec: DriftSpec,
    ) -> Self {
        Self {
            name: source.name.clone(),
            num_labels: source.num_labels,
            instances,
            annotations,
            provenance: Provenance {
                spec,
                source: source.name.clone(),
                source_len: source.len(),
            },
        }
    }

    /// A stream with no injected drift.
    pub fn unchanged(source: &Corpus) -> Self {
        Self::derived(source, source.instances.clone(), Vec::new(), DriftSpec::default())
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn to_corpus(&self) -> Corpus {
        Corpus {
            name: self.name.clone(),
            num_labels: self.num_labels,
            instances: self.instances.clone(),
        }
    }

    /// Writes `path` as canonical JSONL and the annotations next to it with
    /// a `.drifts` extension. Both files are written to a temporary name and
    /// renamed into place.
    pub fn write(&self, path: &Path) -> Result<(), DriftError> {
        let mut jsonl = Vec::new();
        corpus::write_instances(&mut jsonl, &self.instances).map_err(|e| io_error(path, e))?;
        let mut drifts = Vec::new();
        write_annotations(&mut drifts, &self.annotations).map_err(|e| io_error(path, e))?;
        atomic_write(path, &jsonl)?;
        atomic_write(&drifts_path(path), &drifts)
    }
}

fn io_error(path: &Path, source: std::io::Error) -> DriftError {
    DriftError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), DriftError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(|e| io_error(&tmp, e))?;
    file.write_all(bytes).map_err(|e| io_error(&tmp, e))?;
    file.sync_all().map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

/// `stream.jsonl` -> `stream.drifts`
pub fn drifts_path(stream_path: &Path) -> PathBuf {
    stream_path.with_extension("drifts")
}

/// One line per drift: `index<TAB>kind`.
pub fn write_annotations<W: Write>(out: &mut W, annotations: &[Annotation]) -> std::io::Result<()> {
    for a in annotations {
        writeln!(out, "{}\t{}", a.index, a.kind)?;
    }
    Ok(())
}

pub fn read_annotations(path: &Path) -> Result<Vec<Annotation>, DriftError> {
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || DriftError::BadAnnotation {
            path: path.display().to_string(),
            line: i + 1,
            text: line.clone(),
        };
        let (index, kind) = line.split_once('\t').ok_or_else(bad)?;
        out.push(Annotation {
            index: index.parse().map_err(|_| bad())?,
            kind: kind.parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

pub(crate) fn check_increasing(points: &[usize]) -> Result<(), DriftError> {
    if points.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(DriftError::NotIncreasing(points.to_vec()))
    }
}

fn check_labels(stream: &Corpus) -> Result<(), DriftError> {
    if stream.num_labels < 2 {
        return Err(DriftError::TooFewLabels(stream.num_labels));
    }
    Ok(())
}

/// Opposite class: `c -> (K-1) - c`.
pub fn swap_label(label: usize, num_labels: usize) -> usize {
    num_labels - 1 - label
}

/// Class rotation after `shifts` drift points: `c -> (c + shifts) mod K`.
pub fn shift_label(label: usize, shifts: usize, num_labels: usize) -> usize {
    (label + shifts) % num_labels
}

/// Replaces every label at or after `t` by its opposite class.
///
/// A `t` past the end of the stream is logged and yields the stream
/// unchanged, without annotations.
pub fn class_swap(stream: &Corpus, t: usize) -> Result<DriftedStream, DriftError> {
    if t > stream.len() {
        warn!("class swap at {t} is past the end of a {}-instance stream; nothing changed", stream.len());
    }
    swap_regions(stream, &[t])
}

/// Swaps labels in every region that follows an odd number of points.
fn swap_regions(stream: &Corpus, points: &[usize]) -> Result<DriftedStream, DriftError> {
    check_increasing(points)?;
    check_labels(stream)?;
    let k = stream.num_labels;
    let instances = stream
        .instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut inst = inst.clone();
            if points.partition_point(|&p| p <= i) % 2 == 1 {
                inst.label = swap_label(inst.label, k);
            }
            inst
        })
        .collect();
    let annotations = points
        .iter()
        .filter(|&&p| p <= stream.len())
        .map(|&p| Annotation::new(p, DriftKind::Swap))
        .collect();
    let spec = DriftSpec::new(DriftMethod::ClassSwap, points.to_vec());
    Ok(DriftedStream::derived(stream, instances, annotations, spec))
}

/// Rotates all labels by one more class at each drift point, cumulatively.
pub fn class_shift(stream: &Corpus, points: &[usize]) -> Result<DriftedStream, DriftError> {
    check_increasing(points)?;
    check_labels(stream)?;
    let k = stream.num_labels;
    let instances = stream
        .instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let shifts = points.partition_point(|&p| p <= i);
            let mut inst = inst.clone();
            inst.label = shift_label(inst.label, shifts, k);
            inst
        })
        .collect();
    let len = stream.len();
    if points.iter().any(|&p| p > len) {
        warn!("class shift points past the stream end ({len}) are ignored");
    }
    let annotations = points
        .iter()
        .filter(|&&p| p <= len)
        .map(|&p| Annotation::new(p, DriftKind::Shift))
        .collect();
    let spec = DriftSpec::new(DriftMethod::ClassShift, points.to_vec());
    Ok(DriftedStream::derived(stream, instances, annotations, spec))
}

/// Draws `k` distinct years uniformly from the corpus's years, excluding
/// the first and the last so each removal leaves data on both sides.
pub fn select_removal_years(corpus: &Corpus, k: usize, seed: u64) -> Result<BTreeSet<i32>, DriftError> {
    if k == 0 {
        return Ok(BTreeSet::new());
    }
    let years = corpus.years();
    let eligible: Vec<i32> = match (years.first(), years.last()) {
        (Some(&first), Some(&last)) => years.iter().copied().filter(|&y| y != first && y != last).collect(),
        _ => Vec::new(),
    };
    if eligible.len() < k {
        return Err(DriftError::NotEnoughYears { needed: k, eligible });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, eligible.len(), k)
        .into_iter()
        .map(|i| eligible[i])
        .collect())
}

/// Deletes every instance from the removed years, then samples.
///
/// One `gap` annotation marks each position whose predecessor lies before
/// a removed year while the instance itself lies after it; adjacent
/// removed years therefore share a single annotation.
pub fn time_slice_removal(corpus: &Corpus, years: &BTreeSet<i32>, spec: &SampleSpec) -> Result<DriftedStream, DriftError> {
    let present: BTreeSet<i32> = corpus.years().into_iter().collect();
    let unknown: Vec<i32> = years.difference(&present).copied().collect();
    if !unknown.is_empty() {
        return Err(DriftError::UnknownYears(unknown));
    }
    let kept: Vec<TextInstance> = corpus
        .instances
        .iter()
        .filter(|inst| !years.contains(&inst.year()))
        .cloned()
        .collect();
    if kept.len() < spec.target_length {
        return Err(DriftError::TooFewAfterRemoval {
            remaining: kept.len(),
            target: spec.target_length,
        });
    }
    let filtered = Corpus {
        name: corpus.name.clone(),
        num_labels: corpus.num_labels,
        instances: kept,
    };
    let sampled = sample_stratified_temporal(&filtered, spec)?;
    let annotations = sampled
        .instances
        .windows(2)
        .enumerate()
        .filter(|(_, pair)| {
            let (before, after) = (pair[0].year(), pair[1].year());
            before < after && years.range(before + 1..=after).next().is_some()
        })
        .map(|(i, _)| Annotation::new(i + 1, DriftKind::Gap))
        .collect();
    let drift_spec = DriftSpec::time_slice_removal(years.clone(), spec.seed);
    Ok(DriftedStream::derived(corpus, sampled.instances, annotations, drift_spec))
}

/// Extra inputs some generators need.
#[derive(Clone, Copy, Default)]
pub struct DriftDeps<'a> {
    pub lexicon: Option<&'a AdjectiveLexicon>,
    /// Overrides the lexicon-based default tagger.
    pub tagger: Option<&'a dyn Tagger>,
    /// Subset length sampled after time-slice removal; defaults to all
    /// remaining instances.
    pub sample_length: Option<usize>,
}

pub fn apply_drift(stream: &Corpus, spec: &DriftSpec, deps: DriftDeps<'_>) -> Result<DriftedStream, DriftError> {
    let mut out = match spec.method {
        DriftMethod::None => DriftedStream::unchanged(stream),
        DriftMethod::ClassSwap => swap_regions(stream, &spec.drift_points)?,
        DriftMethod::ClassShift => class_shift(stream, &spec.drift_points)?,
        DriftMethod::TimeSliceRemoval => {
            let remaining = stream
                .instances
                .iter()
                .filter(|i| !spec.removed_years.contains(&i.year()))
                .count();
            let sample = SampleSpec {
                target_length: deps.sample_length.unwrap_or(remaining),
                seed: spec.seed,
            };
            time_slice_removal(stream, &spec.removed_years, &sample)?
        }
        DriftMethod::AdjectiveSwap => {
            let lexicon = deps.lexicon.ok_or(DriftError::MissingLexicon)?;
            let default_tagger = LexiconTagger::new(lexicon);
            let tagger = deps.tagger.unwrap_or(&default_tagger);
            adjective_swap_stream(stream, &spec.drift_points, lexicon, tagger)?
        }
    };
    out.provenance.spec = spec.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn stream_with(labels: &[usize], k: usize) -> Corpus {
        let instances = labels
            .iter()
            .enumerate()
            .map(|(i, &label)| TextInstance {
                id: format!("i{i}"),
                timestamp: Utc.timestamp_opt(1_000_000 + i as i64, 0).unwrap(),
                text: format!("t{i}"),
                label,
            })
            .collect();
        Corpus::new("s", k, instances)
    }

    fn yearly(years: &[(i32, usize)]) -> Corpus {
        let mut instances = Vec::new();
        for &(year, n) in years {
            for j in 0..n {
                instances.push(TextInstance {
                    id: format!("{year}-{j}"),
                    timestamp: Utc.with_ymd_and_hms(year, 1 + (j % 12) as u32, 1, 0, 0, 0).unwrap(),
                    text: String::new(),
                    label: j % 2,
                });
            }
        }
        Corpus::new("y", 2, instances)
    }

    /// Independent label map: brute force over the explicit point list.
    fn rotated_by_hand(labels: &[usize], points: &[usize], k: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            let mut shifted = l;
            for &p in points {
                if i >= p {
                    shifted = if shifted + 1 == k { 0 } else { shifted + 1 };
                }
            }
            out.push(shifted);
        }
        out
    }

    #[test]
    fn swap_reverses_five_classes_after_t() {
        let s = stream_with(&[0, 1, 2, 3, 4, 0, 1, 2, 3, 4], 5);
        let out = class_swap(&s, 5).unwrap();
        assert_eq!(out.labels(), [0, 1, 2, 3, 4, 4, 3, 2, 1, 0]);
        assert_eq!(out.annotations, [Annotation::new(5, DriftKind::Swap)]);
    }

    #[test]
    fn swap_at_end_and_past_end() {
        let s = stream_with(&[0, 1, 1, 0], 2);
        let at_end = class_swap(&s, 4).unwrap();
        assert_eq!(at_end.labels(), s.labels());
        assert_eq!(at_end.annotations.len(), 1);
        let past = class_swap(&s, 9).unwrap();
        assert_eq!(past.labels(), s.labels());
        assert!(past.annotations.is_empty());
        assert!(matches!(class_swap(&stream_with(&[0, 0], 1), 1), Err(DriftError::TooFewLabels(1))));
    }

    #[test]
    fn shift_rotates_to_the_next_class() {
        let s = stream_with(&[0, 1, 2, 3, 4, 0, 1, 2, 3, 4], 5);
        let out = class_shift(&s, &[5]).unwrap();
        assert_eq!(out.labels(), [0, 1, 2, 3, 4, 1, 2, 3, 4, 0]);
    }

    #[test]
    fn shift_two_points_matches_hand_rotation() {
        let labels = [0, 1, 2, 0, 1, 2];
        let out = class_shift(&stream_with(&labels, 3), &[2, 4]).unwrap();
        let expected = rotated_by_hand(&labels, &[2, 4], 3);
        assert_eq!(expected, [0, 1, 0, 1, 0, 1]);
        assert_eq!(out.labels(), expected);
        assert_eq!(out.annotations.len(), 2);
        assert!(class_shift(&stream_with(&labels, 3), &[4, 2]).is_err());
    }

    #[test]
    fn k_shifts_are_the_identity() {
        let labels: Vec<usize> = (0..50).map(|i| (i * 7) % 5).collect();
        let points = [5, 10, 15, 20, 25];
        let out = class_shift(&stream_with(&labels, 5), &points).unwrap();
        assert_eq!(out.labels()[25..], labels[25..]);
    }

    #[test]
    fn removal_years_skip_the_span_edges() {
        let corpus = yearly(&(2010..=2020).map(|y| (y, 4)).collect::<Vec<_>>());
        let eligible: Vec<i32> = (2011..=2019).collect();
        for seed in 0..20 {
            let years = select_removal_years(&corpus, 3, seed).unwrap();
            assert_eq!(years.len(), 3);
            assert!(years.iter().all(|y| eligible.contains(y)));
            assert_eq!(years, select_removal_years(&corpus, 3, seed).unwrap());
        }
        assert!(select_removal_years(&corpus, 0, 1).unwrap().is_empty());
        let short = yearly(&[(2010, 3), (2011, 3)]);
        assert!(matches!(select_removal_years(&short, 3, 1), Err(DriftError::NotEnoughYears { .. })));
    }

    #[test]
    fn removal_drops_the_year_and_marks_the_gap() {
        let corpus = yearly(&[(2014, 10), (2015, 10), (2016, 10)]);
        let years = BTreeSet::from([2015]);
        let out = time_slice_removal(&corpus, &years, &SampleSpec { target_length: 20, seed: 1 }).unwrap();
        assert!(out.instances.iter().all(|i| i.year() != 2015));
        assert_eq!(out.annotations, [Annotation::new(10, DriftKind::Gap)]);

        let none = time_slice_removal(&corpus, &BTreeSet::new(), &SampleSpec { target_length: 12, seed: 1 }).unwrap();
        let plain = sample_stratified_temporal(&corpus, &SampleSpec { target_length: 12, seed: 1 }).unwrap();
        assert_eq!(none.instances, plain.instances);
        assert!(none.annotations.is_empty());

        let err = time_slice_removal(&corpus, &years, &SampleSpec { target_length: 21, seed: 1 });
        assert!(matches!(err, Err(DriftError::TooFewAfterRemoval { remaining: 20, .. })));
        let err = time_slice_removal(&corpus, &BTreeSet::from([1999]), &SampleSpec { target_length: 5, seed: 1 });
        assert!(matches!(err, Err(DriftError::UnknownYears(_))));
    }

    #[test]
    fn adjacent_removed_years_share_one_gap() {
        let corpus = yearly(&(2010..=2020).map(|y| (y, 6)).collect::<Vec<_>>());
        let years = BTreeSet::from([2012, 2013, 2017]);
        let remaining = corpus.len() - 18;
        let out = time_slice_removal(&corpus, &years, &SampleSpec { target_length: remaining, seed: 4 }).unwrap();
        assert_eq!(out.annotations.len(), 2);
        assert!(out.annotations.iter().all(|a| a.kind == DriftKind::Gap));
        for a in &out.annotations {
            let (before, after) = (out.instances[a.index - 1].year(), out.instances[a.index].year());
            assert!((before == 2011 && after == 2014) || (before == 2016 && after == 2018));
        }
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let labels: Vec<usize> = (0..40).map(|i| i % 5).collect();
        let s = stream_with(&labels, 5);
        let none = apply_drift(&s, &DriftSpec::default(), DriftDeps::default()).unwrap();
        assert_eq!(none.instances, s.instances);
        assert!(none.annotations.is_empty());

        let spec = DriftSpec::new(DriftMethod::ClassSwap, vec![20]);
        let via = apply_drift(&s, &spec, DriftDeps::default()).unwrap();
        assert_eq!(via, class_swap(&s, 20).unwrap());

        let spec = DriftSpec::new(DriftMethod::ClassShift, vec![10, 20, 30]);
        assert_eq!(apply_drift(&s, &spec, DriftDeps::default()).unwrap().annotations.len(), 3);

        let spec = DriftSpec::new(DriftMethod::AdjectiveSwap, vec![10]);
        assert!(matches!(apply_drift(&s, &spec, DriftDeps::default()), Err(DriftError::MissingLexicon)));
    }

    #[test]
    fn sidecar_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let s = stream_with(&[0, 1, 2, 0, 1, 2], 3);
        let out = class_shift(&s, &[2, 4]).unwrap();
        let path = dir.path().join("x_shift_0.jsonl");
        out.write(&path).unwrap();
        assert_eq!(std::fs::read_to_string(drifts_path(&path)).unwrap(), "2\tshift\n4\tshift\n");
        assert_eq!(read_annotations(&drifts_path(&path)).unwrap(), out.annotations);
        let back = corpus::load_corpus(&path, &corpus::FieldMapping::canonical().with_num_labels(3)).unwrap();
        assert_eq!(back.instances, out.instances);
        assert!(!dir.path().join("x_shift_0.jsonl.tmp").exists());
    }

    fn labels_and_k() -> impl Strategy<Value = (usize, Vec<usize>)> {
        prop_oneof![Just(2usize), Just(3usize), Just(5usize)]
            .prop_flat_map(|k| (Just(k), prop::collection::vec(0..k, 0..200)))
    }

    proptest! {
        #[test]
        fn swap_is_an_involution((k, labels) in labels_and_k(), t in 0usize..220) {
            let s = stream_with(&labels, k);
            let once = class_swap(&s, t).unwrap();
            let twice = class_swap(&once.to_corpus(), t).unwrap();
            prop_assert_eq!(twice.labels(), labels);
        }

        #[test]
        fn class_maps_only_touch_labels((k, labels) in labels_and_k(), a in 0usize..100, b in 100usize..220) {
            let s = stream_with(&labels, k);
            let cases = [(class_swap(&s, a).unwrap(), vec![a]), (class_shift(&s, &[a, b]).unwrap(), vec![a, b])];
            for (out, points) in cases {
                prop_assert_eq!(out.len(), s.len());
                for (x, y) in out.instances.iter().zip(&s.instances) {
                    prop_assert_eq!(&x.id, &y.id);
                    prop_assert_eq!(&x.text, &y.text);
                    prop_assert_eq!(x.timestamp, y.timestamp);
                    prop_assert!(x.label < k);
                }
                // each drift region's label multiset is a relabeling of the original
                let mut bounds = vec![0];
                bounds.extend(points.iter().map(|&p| p.min(s.len())));
                bounds.push(s.len());
                for w in bounds.windows(2) {
                    let mut counts_in = vec![0usize; k];
                    let mut counts_out = vec![0usize; k];
                    for i in w[0]..w[1] {
                        counts_in[s.instances[i].label] += 1;
                        counts_out[out.instances[i].label] += 1;
                    }
                    counts_in.sort_unstable();
                    counts_out.sort_unstable();
                    prop_assert_eq!(counts_in, counts_out);
                }
            }
        }
    }
}
