//! Synthetic corpora and embedding streams for tests, benchmarks and demos.

use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{Corpus, TextInstance};
use crate::vectorize::Vector;

/// Gaussian clusters in `dim` dimensions, one per label, with isotropic
/// noise of standard deviation `noise`. Cluster means sit at
/// `±separation / 2` along a random unit direction (two labels) or at random
/// points on a sphere of radius `separation / 2` (more labels), all shifted
/// by a shared component of norm `offset` orthogonal to the class axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStreamSpec {
    pub num_labels: usize,
    pub dim: usize,
    pub length: usize,
    pub separation: f64,
    pub noise: f64,
    pub offset: f64,
    /// Scale every vector to unit L2 norm.
    pub normalize: bool,
    pub seed: u64,
}

impl Default for ClusterStreamSpec {
    fn default() -> Self {
        Self {
            num_labels: 2,
            dim: 16,
            length: 20_000,
            separation: 4.0,
            noise: 1.0,
            offset: 0.0,
            normalize: false,
            seed: 0,
        }
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// A label-balanced stream with empty texts and one vector per instance.
/// Timestamps advance one second per instance.
pub fn cluster_stream(spec: &ClusterStreamSpec) -> (Corpus, Vec<Vector>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let radius = spec.separation / 2.0;
    let means: Vec<Vec<f64>> = if spec.num_labels == 2 {
        let u = unit_vector(&mut rng, spec.dim);
        vec![u.iter().map(|x| -radius * x).collect(), u.iter().map(|x| radius * x).collect()]
    } else {
        (0..spec.num_labels)
            .map(|_| unit_vector(&mut rng, spec.dim).iter().map(|x| radius * x).collect())
            .collect()
    };
    let mut means = means;
    if spec.offset != 0.0 {
        // shared direction, made orthogonal to the first class mean
        let mut shared = unit_vector(&mut rng, spec.dim);
        let axis = &means[0];
        let axis_sq: f64 = axis.iter().map(|a| a * a).sum();
        if axis_sq > 0.0 {
            let dot: f64 = shared.iter().zip(axis).map(|(s, a)| s * a).sum();
            shared.iter_mut().zip(axis).for_each(|(s, a)| *s -= dot / axis_sq * a);
            let norm = shared.iter().map(|s| s * s).sum::<f64>().sqrt();
            shared.iter_mut().for_each(|s| *s /= norm);
        }
        for mean in &mut means {
            mean.iter_mut().zip(&shared).for_each(|(m, s)| *m += spec.offset * s);
        }
    }
    let mut instances = Vec::with_capacity(spec.length);
    let mut vectors = Vec::with_capacity(spec.length);
    for i in 0..spec.length {
        let label = rng.gen_range(0..spec.num_labels);
        let x = means[label]
            .iter()
            .map(|m| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                (m + spec.noise * noise) as f32
            })
            .collect();
        let mut v = Vector(x);
        if spec.normalize {
            v.normalize();
        }
        vectors.push(v);
        instances.push(TextInstance {
            id: format!("c{i}"),
            timestamp: Utc.timestamp_opt(1_262_304_000 + i as i64, 0).unwrap(),
            text: String::new(),
            label,
        });
    }
    (Corpus::new("clusters", spec.num_labels, instances), vectors)
}

/// Adjective pairs; the first word's WordNet replacement is the second.
pub const ADJECTIVE_PAIRS: [(&str, &str); 10] = [
    ("good", "bad"),
    ("friendly", "unfriendly"),
    ("clean", "dirty"),
    ("comfortable", "uncomfortable"),
    ("helpful", "unhelpful"),
    ("pleasant", "unpleasant"),
    ("safe", "dangerous"),
    ("happy", "unhappy"),
    ("cheap", "expensive"),
    ("warm", "cool"),
];

const NOUNS: [&str; 10] = [
    "service", "room", "food", "staff", "prices", "location", "breakfast", "bed", "view", "neighborhood",
];

const FILLERS: [&str; 6] = [
    "we stayed three nights",
    "would come back",
    "booked it for a weekend",
    "the host answered quickly",
    "parking was on the street",
    "it is close to the station",
];

/// Review-like texts whose adjectives lean positive as the label grows.
#[derive(Debug, Clone, PartialEq)]
pub struct TextCorpusSpec {
    pub name: String,
    pub num_labels: usize,
    pub length: usize,
    pub first_year: i32,
    pub last_year: i32,
    /// Relative label frequencies; empty means `1, 2, ..., K`.
    pub label_weights: Vec<f64>,
    pub seed: u64,
}

impl Default for TextCorpusSpec {
    fn default() -> Self {
        Self {
            name: "synthetic".into(),
            num_labels: 5,
            length: 100_000,
            first_year: 2010,
            last_year: 2020,
            label_weights: Vec::new(),
            seed: 0,
        }
    }
}

pub fn text_corpus(spec: &TextCorpusSpec) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = spec.num_labels;
    let weights: Vec<f64> = if spec.label_weights.is_empty() {
        (1..=k).map(|w| w as f64).collect()
    } else {
        spec.label_weights.clone()
    };
    let label_dist = rand::distributions::WeightedIndex::new(&weights).expect("positive label weights");
    let start = Utc.with_ymd_and_hms(spec.first_year, 1, 1, 0, 0, 0).unwrap().timestamp();
    let end = Utc.with_ymd_and_hms(spec.last_year + 1, 1, 1, 0, 0, 0).unwrap().timestamp();

    let instances = (0..spec.length)
        .map(|i| {
            let label = label_dist.sample(&mut rng);
            let positive = (label as f64 + 0.5) / k as f64;
            let phrase = |rng: &mut ChaCha8Rng| {
                let (good, bad) = *ADJECTIVE_PAIRS.choose(rng).unwrap();
                let adj = if rng.gen_bool(positive) { good } else { bad };
                format!("{adj} {}", NOUNS.choose(rng).unwrap())
            };
            let first = phrase(&mut rng);
            let second = phrase(&mut rng);
            let mut text = format!("{first} and {second}, {}.", FILLERS.choose(&mut rng).unwrap());
            text[..1].make_ascii_uppercase();
            TextInstance {
                id: format!("{}-{i}", spec.name),
                timestamp: Utc.timestamp_opt(rng.gen_range(start..end), 0).unwrap(),
                text,
                label,
            }
        })
        .collect();
    Corpus::new(spec.name.clone(), k, instances)
}
