//! Adaptive sliding-window drift detection over a [0, 1] value stream.
//!
//! The window is stored as an exponential histogram: rows of buckets whose
//! sizes double per level, so memory stays logarithmic in the window width.
//! After every observation, each adjacent head/tail partition at a bucket
//! boundary is tested; while any partition shows a mean difference at or
//! above the cut threshold, the oldest bucket is dropped. Observations are
//! only ever removed from the head (oldest side).

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Default confidence parameter of the cut test.
pub const DEFAULT_DELTA: f64 = 0.002;

/// Default bucket-compression fanout: how many buckets a level may hold
/// before its two oldest merge into the next level.
pub const DEFAULT_MAX_BUCKETS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bucket {
    sum: f64,
    count: u64,
}

/// Result of feeding one observation to the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    /// True when at least one head bucket was cut this step.
    pub detected: bool,
    /// Observations removed from the window head; positive iff `detected`.
    pub instances_dropped: u64,
    /// Mean of the retained window after any cuts.
    pub window_mean_after: f64,
}

/// Cut threshold for comparing two adjacent sub-windows:
/// `sqrt( ln(4 * n_checks / delta) / (2m) )` where `m` is the harmonic mean
/// of the two sub-window sizes and `n_checks` Bonferroni-corrects for the
/// number of boundaries tested this step.
pub fn cut_threshold(m: f64, delta: f64, n_checks: usize) -> Result<f64> {
    if m.is_nan() || m <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "harmonic mean must be > 0, got {m}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be in (0, 1), got {delta}"
        )));
    }
    if n_checks == 0 {
        return Err(Error::InvalidParameter("n_checks must be >= 1".into()));
    }
    Ok(((4.0 * n_checks as f64 / delta).ln() / (2.0 * m)).sqrt())
}

/// Adaptive windowing drift detector.
#[derive(Debug, Clone)]
pub struct AdwinDetector {
    delta: f64,
    max_buckets: usize,
    /// rows[level] holds buckets of up to 2^level observations;
    /// deeper rows are older, and within a row the front is oldest.
    rows: Vec<VecDeque<Bucket>>,
    total_sum: f64,
    total_count: u64,
}

impl Default for AdwinDetector {
    fn default() -> Self {
        AdwinDetector::new(DEFAULT_DELTA).expect("default delta is valid")
    }
}

impl AdwinDetector {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "adwin delta must be in (0, 1), got {delta}"
            )));
        }
        Ok(AdwinDetector {
            delta,
            max_buckets: DEFAULT_MAX_BUCKETS,
            rows: vec![VecDeque::new()],
            total_sum: 0.0,
            total_count: 0,
        })
    }

    pub fn with_max_buckets(mut self, max_buckets: usize) -> Result<Self> {
        if max_buckets < 2 {
            return Err(Error::InvalidParameter(
                "max buckets per level must be >= 2".into(),
            ));
        }
        self.max_buckets = max_buckets;
        Ok(self)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of observations currently retained.
    pub fn window_len(&self) -> u64 {
        self.total_count
    }

    /// Mean of the retained observations; 0 for an empty window.
    pub fn mean(&self) -> f64 {
        if self.total_count == 0 {
            0.0
        } else {
            self.total_sum / self.total_count as f64
        }
    }

    /// Buckets currently stored, across all levels.
    pub fn bucket_count(&self) -> usize {
        self.rows.iter().map(VecDeque::len).sum()
    }

    /// Append a value in [0, 1], then cut the window head while any adjacent
    /// sub-window pair differs in mean by at least the cut threshold.
    pub fn add_observation(&mut self, value: f64) -> Result<DriftReport> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidParameter(format!(
                "adwin accepts values in [0, 1], got {value}"
            )));
        }
        self.rows[0].push_back(Bucket { sum: value, count: 1 });
        self.total_sum += value;
        self.total_count += 1;
        self.compress();

        let mut dropped = 0u64;
        loop {
            let buckets = self.bucket_count();
            if buckets < 2 || self.total_count < 2 {
                break;
            }
            let n_checks = buckets - 1;
            if !self.find_cut(n_checks) {
                break;
            }
            dropped += self.drop_oldest_bucket();
        }

        Ok(DriftReport {
            detected: dropped > 0,
            instances_dropped: dropped,
            window_mean_after: self.mean(),
        })
    }

    /// Scan boundaries oldest-to-newest; true when some partition violates
    /// the cut threshold.
    fn find_cut(&self, n_checks: usize) -> bool {
        let mut head_sum = 0.0;
        let mut head_count = 0u64;
        for bucket in self.buckets_oldest_first() {
            head_sum += bucket.sum;
            head_count += bucket.count;
            let tail_count = self.total_count - head_count;
            if tail_count == 0 {
                break;
            }
            let tail_sum = self.total_sum - head_sum;
            let head_mean = head_sum / head_count as f64;
            let tail_mean = tail_sum / tail_count as f64;
            let m = 2.0 * head_count as f64 * tail_count as f64
                / (head_count + tail_count) as f64;
            let eps = cut_threshold(m, self.delta, n_checks)
                .expect("window invariants keep parameters valid");
            if (head_mean - tail_mean).abs() >= eps {
                return true;
            }
        }
        false
    }

    fn buckets_oldest_first(&self) -> impl Iterator<Item = &Bucket> {
        self.rows.iter().rev().flat_map(|row| row.iter())
    }

    /// Merge a level's two oldest buckets into the next level whenever a
    /// level overflows its fanout.
    fn compress(&mut self) {
        let mut level = 0;
        while level < self.rows.len() {
            if self.rows[level].len() > self.max_buckets {
                if level + 1 == self.rows.len() {
                    self.rows.push(VecDeque::new());
                }
                let first = self.rows[level].pop_front().expect("len > max >= 2");
                let second = self.rows[level].pop_front().expect("len > max >= 2");
                self.rows[level + 1].push_back(Bucket {
                    sum: first.sum + second.sum,
                    count: first.count + second.count,
                });
            }
            level += 1;
        }
    }

    /// Remove the oldest bucket; returns how many observations it held.
    fn drop_oldest_bucket(&mut self) -> u64 {
        for row in self.rows.iter_mut().rev() {
            if let Some(bucket) = row.pop_front() {
                self.total_sum -= bucket.sum;
                self.total_count -= bucket.count;
                return bucket.count;
            }
        }
        0
    }

    #[cfg(test)]
    fn assert_integrity(&self) {
        let sum: f64 = self.buckets_oldest_first().map(|b| b.sum).sum();
        let count: u64 = self.buckets_oldest_first().map(|b| b.count).sum();
        assert_eq!(count, self.total_count);
        assert!((sum - self.total_sum).abs() < 1e-9);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_threshold_reference_value() {
        // Sub-windows of 100/100: harmonic mean 100. Independently
        // evaluated at high precision.
        let eps = cut_threshold(100.0, 0.01, 1).unwrap();
        assert!((eps - 0.17308183826022853).abs() < 1e-12, "got {eps}");
    }

    #[test]
    fn cut_threshold_limit_and_scaling() {
        let m = 64.0;
        let near_one = cut_threshold(m, 1.0 - 1e-12, 1).unwrap();
        let floor = (4.0f64.ln() / (2.0 * m)).sqrt();
        assert!((near_one - floor).abs() < 1e-6);

        let base = cut_threshold(m, 0.002, 3).unwrap();
        let doubled = cut_threshold(2.0 * m, 0.002, 3).unwrap();
        assert!((doubled * 2.0f64.sqrt() - base).abs() < 1e-12);
    }

    #[test]
    fn cut_threshold_rejects_bad_inputs() {
        assert!(cut_threshold(0.0, 0.01, 1).is_err());
        assert!(cut_threshold(-3.0, 0.01, 1).is_err());
        assert!(cut_threshold(10.0, 0.0, 1).is_err());
        assert!(cut_threshold(10.0, 0.01, 0).is_err());
    }

    #[test]
    fn constant_stream_never_detects() {
        let mut adwin = AdwinDetector::new(0.002).unwrap();
        for _ in 0..10_000 {
            let report = adwin.add_observation(0.5).unwrap();
            assert!(!report.detected);
            assert_eq!(report.instances_dropped, 0);
        }
        assert_eq!(adwin.window_len(), 10_000);
        assert!((adwin.mean() - 0.5).abs() < 1e-12);
        adwin.assert_integrity();
    }

    #[test]
    fn mean_shift_is_detected_from_the_head() {
        let mut adwin = AdwinDetector::new(0.002).unwrap();
        for _ in 0..400 {
            assert!(!adwin.add_observation(0.0).unwrap().detected);
        }
        let mut detected_at = None;
        for step in 0..400 {
            let report = adwin.add_observation(1.0).unwrap();
            assert_eq!(report.detected, report.instances_dropped > 0);
            if report.detected {
                detected_at.get_or_insert(step + 1);
            }
        }
        let at = detected_at.expect("a 0 -> 1 shift must be caught");
        assert!(at <= 100, "detected only after {at} post-change steps");
        // After the cuts settle the window is dominated by the new regime.
        assert!(adwin.mean() > 0.5, "mean {} still stuck", adwin.mean());
        adwin.assert_integrity();
    }

    #[test]
    fn window_memory_is_logarithmic() {
        let mut adwin = AdwinDetector::default();
        for _ in 0..100_000u64 {
            adwin.add_observation(0.5).unwrap();
        }
        let levels = (100_000f64).log2().ceil() as usize + 2;
        assert!(
            adwin.bucket_count() <= (DEFAULT_MAX_BUCKETS + 1) * levels,
            "{} buckets for 1e5 observations",
            adwin.bucket_count()
        );
    }

    #[test]
    fn rejects_out_of_range_values() {
        let mut adwin = AdwinDetector::default();
        assert!(adwin.add_observation(-0.1).is_err());
        assert!(adwin.add_observation(1.1).is_err());
        assert!(adwin.add_observation(f64::NAN).is_err());
        assert!(adwin.add_observation(0.0).is_ok());
        assert!(adwin.add_observation(1.0).is_ok());
    }

    /// Mirror of the window: a buffer that replays the reported drops.
    struct NaiveMirror {
        values: VecDeque<f64>,
    }

    impl NaiveMirror {
        fn new() -> Self {
            NaiveMirror {
                values: VecDeque::new(),
            }
        }

        fn apply(&mut self, value: f64, dropped: u64) {
            self.values.push_back(value);
            for _ in 0..dropped {
                self.values.pop_front();
            }
        }

        fn mean(&self) -> f64 {
            if self.values.is_empty() {
                0.0
            } else {
                self.values.iter().sum::<f64>() / self.values.len() as f64
            }
        }
    }

    #[test]
    fn retained_mean_matches_naive_buffer() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1234);
        let mut adwin = AdwinDetector::new(0.002).unwrap();
        let mut mirror = NaiveMirror::new();
        for step in 0..20_000usize {
            // Two level shifts to force cuts.
            let base = match step {
                s if s < 8_000 => 0.2,
                s if s < 14_000 => 0.8,
                _ => 0.4,
            };
            let value = (base + rng.gen_range(-0.1..0.1f64)).clamp(0.0, 1.0);
            let report = adwin.add_observation(value).unwrap();
            mirror.apply(value, report.instances_dropped);
            assert_eq!(adwin.window_len() as usize, mirror.values.len());
            if step % 997 == 0 {
                assert!((adwin.mean() - mirror.mean()).abs() < 1e-9);
            }
        }
        assert!((adwin.mean() - mirror.mean()).abs() < 1e-9);
        adwin.assert_integrity();
    }
}
