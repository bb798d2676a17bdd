//! Labeled, timestamped text corpora and stratified temporal sampling.
//!
//! Corpora are read from JSONL (one object per line). A [`FieldMapping`]
//! adapts differently-shaped sources to the canonical record
//! `{"id", "ts", "text", "label"}`, which is also the format subsets are
//! written back in.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, SecondsFormat, TimeZone, Utc};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty corpus")]
    Empty,
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: unparseable timestamp {value:?}")]
    Timestamp { line: usize, value: String },
    #[error("line {line}: label {label} outside [0, {num_labels})")]
    LabelOutOfRange {
        line: usize,
        label: i64,
        num_labels: usize,
    },
    #[error("target length {target} exceeds corpus length {available}")]
    TargetTooLong { target: usize, available: usize },
    #[error("target length must be positive")]
    ZeroTarget,
    #[error("label quotas exceed availability: {0:?} (label, quota, available)")]
    QuotaExceeded(Vec<(usize, usize, usize)>),
}

/// One timestamped, labeled text item of a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextInstance {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub label: usize,
}

impl TextInstance {
    pub fn year(&self) -> i32 {
        self.timestamp.year()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub num_labels: usize,
    pub instances: Vec<TextInstance>,
}

impl Corpus {
    /// Builds a corpus, stably sorting the instances by timestamp.
    pub fn new(name: impl Into<String>, num_labels: usize, mut instances: Vec<TextInstance>) -> Self {
        instances.sort_by_key(|inst| inst.timestamp);
        Self {
            name: name.into(),
            num_labels,
            instances,
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_labels];
        for inst in &self.instances {
            counts[inst.label] += 1;
        }
        counts
    }

    pub fn labels(&self) -> Vec<usize> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// Distinct calendar years present, ascending.
    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.instances.iter().map(TextInstance::year).collect();
        years.sort_unstable();
        years.dedup();
        years
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
        write_instances(&mut out, &self.instances).map_err(io_err)?;
        out.flush().map_err(io_err)
    }
}

#[derive(Serialize)]
struct CanonicalRecord<'a> {
    id: &'a str,
    ts: String,
    text: &'a str,
    label: usize,
}

/// Writes instances as canonical JSONL.
pub fn write_instances<W: Write>(out: &mut W, instances: &[TextInstance]) -> std::io::Result<()> {
    for inst in instances {
        let record = CanonicalRecord {
            id: &inst.id,
            ts: format_timestamp(&inst.timestamp),
            text: &inst.text,
            label: inst.label,
        };
        serde_json::to_writer(&mut *out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Parses an ISO-8601 timestamp to UTC at second precision.
///
/// Accepts RFC 3339 with an offset, a naive `YYYY-MM-DD[T ]HH:MM:SS`
/// (taken as UTC), or a bare date (midnight UTC).
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    let parsed = if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        dt.with_timezone(&Utc)
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f") {
        Utc.from_utc_datetime(&dt)
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S%.f") {
        Utc.from_utc_datetime(&dt)
    } else if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0)?)
    } else {
        return None;
    };
    Utc.timestamp_opt(parsed.timestamp(), 0).single()
}

/// Maps source record fields onto the canonical instance.
///
/// The Yelp review dump, for example, maps `review_id`, `date`, `text` and
/// `stars` with `label_offset = -1` so that 1..=5 stars become labels 0..=4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldMapping {
    pub id_field: String,
    pub ts_field: String,
    pub text_field: String,
    pub label_field: String,
    pub label_offset: i64,
    /// Declared label count; inferred as `max label + 1` when absent.
    pub num_labels: Option<usize>,
}

impl Default for FieldMapping {
    fn default() -> Self {
        Self {
            id_field: "id".into(),
            ts_field: "ts".into(),
            text_field: "text".into(),
            label_field: "label".into(),
            label_offset: 0,
            num_labels: None,
        }
    }
}

impl FieldMapping {
    pub fn canonical() -> Self {
        Self::default()
    }

    pub fn with_num_labels(mut self, num_labels: usize) -> Self {
        self.num_labels = Some(num_labels);
        self
    }
}

pub fn load_corpus(path: &Path, mapping: &FieldMapping) -> Result<Corpus, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_corpus(BufReader::new(file), name, mapping)
}

/// Reads JSONL records from any buffered reader. Blank lines are skipped.
pub fn read_corpus<R: BufRead>(
    reader: R,
    name: impl Into<String>,
    mapping: &FieldMapping,
) -> Result<Corpus, CorpusError> {
    let mut instances = Vec::new();
    let mut max_label = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::Malformed {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let inst = parse_record(&line, line_no, mapping)?;
        max_label = max_label.max(inst.label);
        instances.push((line_no, inst));
    }
    if instances.is_empty() {
        return Err(CorpusError::Empty);
    }
    let num_labels = mapping.num_labels.unwrap_or(max_label + 1);
    if let Some((line, inst)) = instances.iter().find(|(_, i)| i.label >= num_labels) {
        return Err(CorpusError::LabelOutOfRange {
            line: *line,
            label: inst.label as i64,
            num_labels,
        });
    }
    Ok(Corpus::new(
        name,
        num_labels,
        instances.into_iter().map(|(_, i)| i).collect(),
    ))
}

fn parse_record(line: &str, line_no: usize, mapping: &FieldMapping) -> Result<TextInstance, CorpusError> {
    let value: Value = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
        line: line_no,
        reason: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| CorpusError::Malformed {
        line: line_no,
        reason: "record is not a JSON object".into(),
    })?;
    let field = |name: &str| {
        obj.get(name).ok_or_else(|| CorpusError::MissingField {
            line: line_no,
            field: name.to_string(),
        })
    };
    let wrong_type = |name: &str, expected: &str| CorpusError::Malformed {
        line: line_no,
        reason: format!("field `{name}` is not {expected}"),
    };

    let id = match field(&mapping.id_field)? {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(wrong_type(&mapping.id_field, "a string or number")),
    };
    let ts_raw = field(&mapping.ts_field)?
        .as_str()
        .ok_or_else(|| wrong_type(&mapping.ts_field, "a string"))?;
    let timestamp = parse_timestamp(ts_raw).ok_or_else(|| CorpusError::Timestamp {
        line: line_no,
        value: ts_raw.to_string(),
    })?;
    let text = field(&mapping.text_field)?
        .as_str()
        .ok_or_else(|| wrong_type(&mapping.text_field, "a string"))?
        .to_string();
    let raw_label = match field(&mapping.label_field)? {
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(v), _) => v,
            (None, Some(f)) if f.fract() == 0.0 && f.abs() < 1e15 => f as i64,
            _ => return Err(wrong_type(&mapping.label_field, "an integer")),
        },
        _ => return Err(wrong_type(&mapping.label_field, "an integer")),
    };
    let label = raw_label + mapping.label_offset;
    let in_declared = mapping.num_labels.is_none_or(|k| label < k as i64);
    if label < 0 || !in_declared {
        return Err(CorpusError::LabelOutOfRange {
            line: line_no,
            label,
            num_labels: mapping.num_labels.unwrap_or(0),
        });
    }
    Ok(TextInstance {
        id,
        timestamp,
        text,
        label: label as usize,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub target_length: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            target_length: 200_000,
            seed: 0,
        }
    }
}

/// Per-label quotas summing exactly to `target`: floor of the proportional
/// share, then the remainder to the largest fractional parts (lower label
/// wins ties).
pub fn label_quotas(counts: &[usize], target: usize) -> Vec<usize> {
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let mut quotas = Vec::with_capacity(counts.len());
    let mut remainders = Vec::with_capacity(counts.len());
    for (label, &c) in counts.iter().enumerate() {
        let scaled = target as u128 * c as u128;
        quotas.push((scaled / total) as usize);
        remainders.push((scaled % total, label));
    }
    let assigned: usize = quotas.iter().sum();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, label) in remainders.iter().take(target.saturating_sub(assigned)) {
        quotas[label] += 1;
    }
    quotas
}

/// Draws a class-stratified subset of `spec.target_length` instances and
/// keeps the source's temporal order.
pub fn sample_stratified_temporal(corpus: &Corpus, spec: &SampleSpec) -> Result<Corpus, CorpusError> {
    if spec.target_length == 0 {
        return Err(CorpusError::ZeroTarget);
    }
    if spec.target_length > corpus.len() {
        return Err(CorpusError::TargetTooLong {
            target: spec.target_length,
            available: corpus.len(),
        });
    }

    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, inst) in corpus.instances.iter().enumerate() {
        by_label.entry(inst.label).or_default().push(pos);
    }
    let counts = corpus.label_counts();
    let quotas = label_quotas(&counts, spec.target_length);
    let short: Vec<_> = quotas
        .iter()
        .zip(&counts)
        .enumerate()
        .filter(|(_, (q, c))| q > c)
        .map(|(l, (&q, &c))| (l, q, c))
        .collect();
    if !short.is_empty() {
        return Err(CorpusError::QuotaExceeded(short));
    }

    let mut chosen = Vec::with_capacity(spec.target_length);
    for (&label, positions) in &by_label {
        let quota = quotas[label];
        if quota == positions.len() {
            chosen.extend_from_slice(positions);
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(label as u64);
        chosen.extend(
            index::sample(&mut rng, positions.len(), quota)
                .into_iter()
                .map(|i| positions[i]),
        );
    }
    // Source positions are already in timestamp order with ties in file order.
    chosen.sort_unstable();
    Ok(Corpus {
        name: corpus.name.clone(),
        num_labels: corpus.num_labels,
        instances: chosen.into_iter().map(|p| corpus.instances[p].clone()).collect(),
    })
}
