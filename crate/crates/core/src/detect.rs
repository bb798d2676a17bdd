//! ADWIN: change detection by adaptive windowing.
//!
//! The window is kept as an exponential histogram. Row `r` holds buckets
//! that each summarize `2^r` consecutive samples; higher rows hold older
//! data. After every insertion each boundary between buckets is a candidate
//! cut, and the oldest bucket is dropped for as long as some cut splits the
//! window into two parts whose means differ by more than the cut threshold.
//! Cuts are tested every `clock` samples, as in the reference
//! implementations.

use std::collections::VecDeque;

use thiserror::Error;

pub const DEFAULT_MAX_BUCKETS: usize = 5;
pub const DEFAULT_MIN_SUBWINDOW: usize = 5;
pub const DEFAULT_CLOCK: u64 = 32;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("confidence must lie in (0, 1), got {0}")]
    BadConfidence(f64),
    #[error("ADWIN input must lie in [0, 1], got {0}")]
    OutOfRange(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Bucket {
    sum: f64,
    sum_sq: f64,
}

impl Bucket {
    fn merge(self, other: Bucket) -> Bucket {
        Bucket {
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adwin {
    delta: f64,
    max_buckets: usize,
    min_subwindow: usize,
    clock: u64,
    rows: Vec<VecDeque<Bucket>>,
    width: usize,
    total: f64,
    total_sq: f64,
    detections: usize,
    seen: u64,
}

impl Adwin {
    pub fn new(delta: f64) -> Result<Self, DetectError> {
        Self::with_params(delta, DEFAULT_MAX_BUCKETS, DEFAULT_MIN_SUBWINDOW)
    }

    /// `max_buckets` per row (M) and the minimum size of either sub-window
    /// for a cut to be tested.
    pub fn with_params(delta: f64, max_buckets: usize, min_subwindow: usize) -> Result<Self, DetectError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(DetectError::BadConfidence(delta));
        }
        Ok(Self {
            delta,
            max_buckets: max_buckets.max(1),
            min_subwindow: min_subwindow.max(1),
            clock: DEFAULT_CLOCK,
            rows: Vec::new(),
            width: 0,
            total: 0.0,
            total_sq: 0.0,
            detections: 0,
            seen: 0,
        })
    }

    /// Tests for a cut every `clock` samples; 1 tests after every sample.
    pub fn with_clock(mut self, clock: u64) -> Self {
        self.clock = clock.max(1);
        self
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn mean(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            self.total / self.width as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.width == 0 {
            return 0.0;
        }
        let mean = self.mean();
        (self.total_sq / self.width as f64 - mean * mean).max(0.0)
    }

    pub fn detections(&self) -> usize {
        self.detections
    }

    pub fn samples_seen(&self) -> u64 {
        self.seen
    }

    pub fn bucket_count(&self) -> usize {
        self.rows.iter().map(VecDeque::len).sum()
    }

    pub fn reset(&mut self) {
        *self = Self::with_params(self.delta, self.max_buckets, self.min_subwindow)
            .expect("parameters were validated at construction")
            .with_clock(self.clock);
    }

    /// Adds one sample; returns true when the window shrank.
    pub fn update(&mut self, x: f64) -> Result<bool, DetectError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(DetectError::OutOfRange(x));
        }
        self.insert(x);
        let changed = self.seen.is_multiple_of(self.clock) && self.shrink();
        if changed {
            self.detections += 1;
        }
        Ok(changed)
    }

    fn insert(&mut self, x: f64) {
        self.seen += 1;
        self.width += 1;
        self.total += x;
        self.total_sq += x * x;
        if self.rows.is_empty() {
            self.rows.push(VecDeque::new());
        }
        self.rows[0].push_back(Bucket { sum: x, sum_sq: x * x });
        let mut r = 0;
        while r < self.rows.len() && self.rows[r].len() > self.max_buckets {
            let a = self.rows[r].pop_front().unwrap();
            let b = self.rows[r].pop_front().unwrap();
            if r + 1 == self.rows.len() {
                self.rows.push(VecDeque::new());
            }
            self.rows[r + 1].push_back(a.merge(b));
            r += 1;
        }
    }

    fn drop_oldest(&mut self) {
        while self.rows.last().is_some_and(VecDeque::is_empty) {
            self.rows.pop();
        }
        let row = self.rows.len() - 1;
        let bucket = self.rows[row].pop_front().unwrap();
        self.width -= 1 << row;
        self.total -= bucket.sum;
        self.total_sq -= bucket.sum_sq;
        if self.rows[row].is_empty() {
            self.rows.pop();
        }
        if self.width == 0 {
            self.total = 0.0;
            self.total_sq = 0.0;
        }
    }

    fn shrink(&mut self) -> bool {
        let mut dropped = false;
        while self.bucket_count() > 1 && self.has_cut() {
            self.drop_oldest();
            dropped = true;
        }
        dropped
    }

    fn has_cut(&self) -> bool {
        let cuts = self.bucket_count() - 1;
        let ln_term = (2.0 * cuts as f64 / self.delta).ln();
        let variance = self.variance();
        let min = self.min_subwindow;
        let mut n0 = 0usize;
        let mut s0 = 0.0;
        let mut remaining = cuts;
        for (r, row) in self.rows.iter().enumerate().rev() {
            for bucket in row {
                if remaining == 0 {
                    return false;
                }
                remaining -= 1;
                n0 += 1 << r;
                s0 += bucket.sum;
                let n1 = self.width - n0;
                if n0 < min || n1 < min {
                    continue;
                }
                let s1 = self.total - s0;
                let diff = (s0 / n0 as f64 - s1 / n1 as f64).abs();
                if diff > cut_threshold(n0, n1, variance, ln_term) {
                    return true;
                }
            }
        }
        false
    }
}

/// `sqrt(2/m * var * L) + 2/(3m) * L` with `m = 1/(1/n0 + 1/n1)` and
/// `L = ln(2/delta')`.
pub fn cut_threshold(n0: usize, n1: usize, variance: f64, ln_term: f64) -> f64 {
    let m = 1.0 / (1.0 / n0 as f64 + 1.0 / n1 as f64);
    (2.0 / m * variance * ln_term).sqrt() + 2.0 / (3.0 * m) * ln_term
}
