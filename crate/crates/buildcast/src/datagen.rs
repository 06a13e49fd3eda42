//! Synthetic build-metric stream generator.
//!
//! Produces canonical-schema streams from two class-conditional Gaussians:
//! a configurable number of informative features whose class means sit
//! `overlap` pooled standard deviations apart, the rest pure noise. Class
//! counts are exact, dates are monotone, and an optional shift point changes
//! the success probability partway through the stream to emulate a drifting
//! class distribution. This is a desk-scale stand-in, not a model of real
//! build metrics.

use chrono::NaiveDateTime;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{ClassLabel, Instance, LabeledStream, Provenance, StreamSchema, DATE_FORMAT};

/// Label-probability change partway through the stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionShift {
    /// 0-based index of the first instance drawn under the new regime.
    pub at_index: usize,
    /// Probability that a post-shift instance is a Success, honored as
    /// closely as the exact class totals allow.
    pub post_success_probability: f64,
}

/// Generator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n_instances: usize,
    pub success_count: usize,
    pub failure_count: usize,
    /// Separation of the class means on informative features, in pooled
    /// standard deviations. Near 0 the classes are indistinguishable.
    pub overlap: f64,
    /// How many leading features carry class signal; the rest are noise.
    pub informative_features: usize,
    pub shift: Option<DistributionShift>,
    pub seed: u64,
    pub date_start: NaiveDateTime,
    pub date_step_seconds: i64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            n_instances: 199,
            success_count: 127,
            failure_count: 72,
            overlap: 1.0,
            informative_features: 5,
            shift: None,
            seed: 0,
            date_start: default_date_start(),
            date_step_seconds: 3600,
        }
    }
}

pub fn default_date_start() -> NaiveDateTime {
    NaiveDateTime::parse_from_str("2013-01-01T00:00:00", DATE_FORMAT)
        .expect("literal is well formed")
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 {
            return Err(Error::InvalidParameter("need at least one instance".into()));
        }
        if self.success_count + self.failure_count != self.n_instances {
            return Err(Error::InvalidParameter(format!(
                "class counts {} + {} must sum to {}",
                self.success_count, self.failure_count, self.n_instances
            )));
        }
        if self.overlap.is_nan() || self.overlap <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "overlap must be > 0, got {}",
                self.overlap
            )));
        }
        let width = StreamSchema::canonical().n_features();
        if self.informative_features == 0 || self.informative_features > width {
            return Err(Error::InvalidParameter(format!(
                "informative features must be in 1..={width}, got {}",
                self.informative_features
            )));
        }
        if let Some(shift) = &self.shift {
            if shift.at_index >= self.n_instances {
                return Err(Error::InvalidParameter(format!(
                    "shift index {} is past the stream end",
                    shift.at_index
                )));
            }
            if !(0.0..=1.0).contains(&shift.post_success_probability) {
                return Err(Error::InvalidParameter(
                    "post-shift success probability must be in [0, 1]".into(),
                ));
            }
        }
        if self.date_step_seconds < 0 {
            return Err(Error::InvalidParameter(
                "date step must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Lay out the label sequence: exact totals, shuffled within each regime.
/// With a shift, the post-shift segment gets as close to the requested
/// success probability as the remaining totals allow.
fn label_sequence(spec: &GenSpec, rng: &mut ChaCha12Rng) -> Vec<ClassLabel> {
    let n = spec.n_instances;
    let mut labels = Vec::with_capacity(n);
    match &spec.shift {
        None => {
            labels.extend(std::iter::repeat_n(ClassLabel::Success, spec.success_count));
            labels.extend(std::iter::repeat_n(ClassLabel::Failure, spec.failure_count));
            labels.shuffle(rng);
        }
        Some(shift) => {
            let pre_len = shift.at_index;
            let post_len = n - pre_len;
            let want = (shift.post_success_probability * post_len as f64).round() as usize;
            let lo = spec.success_count.saturating_sub(pre_len);
            let hi = spec.success_count.min(post_len);
            let post_success = want.clamp(lo, hi);
            let pre_success = spec.success_count - post_success;

            let mut pre: Vec<ClassLabel> = Vec::with_capacity(pre_len);
            pre.extend(std::iter::repeat_n(ClassLabel::Success, pre_success));
            pre.extend(std::iter::repeat_n(ClassLabel::Failure, pre_len - pre_success));
            pre.shuffle(rng);

            let mut post: Vec<ClassLabel> = Vec::with_capacity(post_len);
            post.extend(std::iter::repeat_n(ClassLabel::Success, post_success));
            post.extend(std::iter::repeat_n(ClassLabel::Failure, post_len - post_success));
            post.shuffle(rng);

            labels.extend(pre);
            labels.extend(post);
        }
    }
    labels
}

/// Generate a canonical-schema stream per the spec. Deterministic for a
/// fixed seed.
pub fn generate_stream(spec: &GenSpec) -> Result<LabeledStream> {
    spec.validate()?;
    let schema = std::sync::Arc::new(StreamSchema::canonical());
    let width = schema.n_features();
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let labels = label_sequence(spec, &mut rng);

    let half = spec.overlap / 2.0;
    let mut instances = Vec::with_capacity(spec.n_instances);
    for (i, label) in labels.into_iter().enumerate() {
        let mut features = Vec::with_capacity(width);
        for j in 0..width {
            let noise: f64 = rng.sample(StandardNormal);
            let mean = if j < spec.informative_features {
                match label {
                    ClassLabel::Success => half,
                    ClassLabel::Failure => -half,
                }
            } else {
                0.0
            };
            features.push(mean + noise);
        }
        instances.push(Instance {
            id: format!("r{}", i + 1),
            date: spec.date_start + chrono::Duration::seconds(i as i64 * spec.date_step_seconds),
            features,
            outcome: label,
            provenance: Provenance::Original,
        });
    }

    LabeledStream::from_instances(schema, instances)
}
