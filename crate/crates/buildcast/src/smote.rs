//! Synthetic Minority Over-sampling: k-nearest-neighbor interpolation within
//! a class, plus the two-pass protocol that scales both classes equally.
//!
//! New instances are placed on the segment between a seed instance and one
//! of its same-class neighbors: `seed + r * (neighbor - seed)` with
//! `r` uniform in [0, 1]. Interpolation never extrapolates, so per-class
//! feature ranges never grow.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{ClassLabel, Instance, LabeledStream, Provenance};

/// Identifier of the RNG family used for sample generation, recorded in run
/// manifests so a run protocol can be reproduced.
pub const RNG_ALGORITHM: &str = "chacha12";

/// How feature space is scaled for neighbor distance computation.
/// Interpolation always happens in raw feature space either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Per-class min-max scaling of each feature before measuring distance.
    /// Metrics live on wildly different scales, so this is the default.
    MinMax,
    /// Raw Euclidean distance.
    None,
}

/// Oversampling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    /// Neighbor count for the k-NN search.
    pub k: usize,
    /// Amount of oversampling in percent; must be a multiple of 100.
    /// `percent / 100` synthetic instances are created per seed instance.
    pub percent: u32,
    /// RNG seed for neighbor choice and interpolation multipliers.
    pub seed: u64,
    pub normalization: Normalization,
}

impl SmoteConfig {
    pub fn new(k: usize, percent: u32, seed: u64, normalization: Normalization) -> Result<Self> {
        let config = SmoteConfig {
            k,
            percent,
            seed,
            normalization,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("smote k must be >= 1".into()));
        }
        if !self.percent.is_multiple_of(100) {
            return Err(Error::InvalidParameter(format!(
                "smote percent must be a multiple of 100, got {}",
                self.percent
            )));
        }
        Ok(())
    }
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k: 5,
            percent: 900,
            seed: 0,
            normalization: Normalization::MinMax,
        }
    }
}

/// The synthetic instances produced by one pass, with the interpolation
/// multiplier used for each (kept for audit).
#[derive(Debug, Clone, Default)]
pub struct SyntheticBatch {
    pub instances: Vec<Instance>,
    pub multipliers: Vec<f64>,
}

/// Per-feature scale factors for distance computation: reciprocal of the
/// class pool's min-max range, or 0 where the range collapses.
fn class_scales(stream: &LabeledStream, class: ClassLabel) -> Vec<f64> {
    let width = stream.schema().n_features();
    let mut min = vec![f64::INFINITY; width];
    let mut max = vec![f64::NEG_INFINITY; width];
    for inst in stream.iter().filter(|i| i.outcome == class) {
        for (j, &v) in inst.features.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    min.iter()
        .zip(&max)
        .map(|(lo, hi)| {
            let range = hi - lo;
            if range > 0.0 {
                1.0 / range
            } else {
                0.0
            }
        })
        .collect()
}

fn scaled_distance_sq(a: &[f64], b: &[f64], scales: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(scales)
        .map(|((&x, &y), &s)| {
            let d = (x - y) * s;
            d * d
        })
        .sum()
}

fn raw_distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum()
}

/// The `k` same-class instances closest to `stream[target]` in (optionally
/// normalized) Euclidean distance, excluding the target itself. Returns
/// stream indices ordered by ascending distance; ties rank the lower stream
/// index first (so an exact duplicate is always the first neighbor).
pub fn k_nearest_same_class(
    stream: &LabeledStream,
    target: usize,
    k: usize,
    normalization: Normalization,
) -> Result<Vec<usize>> {
    let target_inst = stream
        .get(target)
        .ok_or_else(|| Error::InvalidParameter(format!("target index {target} out of range")))?;
    let class = target_inst.outcome;
    let available = stream.count_of(class).saturating_sub(1);
    if available < k {
        return Err(Error::InsufficientNeighbors {
            class: class.to_string(),
            available,
            needed: k,
        });
    }

    let scales = match normalization {
        Normalization::MinMax => Some(class_scales(stream, class)),
        Normalization::None => None,
    };

    let mut candidates: Vec<(f64, usize)> = stream
        .iter()
        .enumerate()
        .filter(|(idx, inst)| *idx != target && inst.outcome == class)
        .map(|(idx, inst)| {
            let d = match &scales {
                Some(s) => scaled_distance_sq(&target_inst.features, &inst.features, s),
                None => raw_distance_sq(&target_inst.features, &inst.features),
            };
            (d, idx)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    candidates.truncate(k);
    Ok(candidates.into_iter().map(|(_, idx)| idx).collect())
}

/// Interpolate a new instance on the segment from `seed` toward `neighbor`:
/// `features = seed + r * (neighbor - seed)`, computed in raw feature space.
/// The result keeps the seed's class and date and records both parents.
pub fn synthesize(seed: &Instance, neighbor: &Instance, r: f64, id: impl Into<String>) -> Result<Instance> {
    if seed.outcome != neighbor.outcome {
        return Err(Error::ClassMismatch {
            seed: seed.outcome.to_string(),
            neighbor: neighbor.outcome.to_string(),
        });
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "interpolation multiplier must be in [0, 1], got {r}"
        )));
    }
    let features = seed
        .features
        .iter()
        .zip(&neighbor.features)
        .map(|(&a, &b)| a + r * (b - a))
        .collect();
    Ok(Instance {
        id: id.into(),
        date: seed.date,
        features,
        outcome: seed.outcome,
        provenance: Provenance::Synthetic {
            seed_id: seed.id.clone(),
            neighbor_id: neighbor.id.clone(),
        },
    })
}

/// One SMOTE pass: for every instance of `minority_class`, create
/// `percent / 100` synthetic instances, each interpolated toward a uniformly
/// chosen one of its `k` nearest same-class neighbors with a fresh uniform
/// multiplier. Returns the stream with the batch appended (unsorted) plus
/// the batch itself.
pub fn smote_pass(
    stream: &LabeledStream,
    minority_class: ClassLabel,
    config: &SmoteConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(LabeledStream, SyntheticBatch)> {
    config.validate()?;
    let reps = (config.percent / 100) as usize;
    if reps == 0 {
        return Ok((stream.clone(), SyntheticBatch::default()));
    }

    // Synthetic ids continue a global counter so double application never
    // collides.
    let mut next_id = stream.iter().filter(|i| i.provenance.is_synthetic()).count();

    let mut batch = SyntheticBatch::default();
    for target in 0..stream.len() {
        if stream.get(target).unwrap().outcome != minority_class {
            continue;
        }
        let neighbors = k_nearest_same_class(stream, target, config.k, config.normalization)?;
        let seed_inst = stream.get(target).unwrap();
        for _ in 0..reps {
            let pick = neighbors[rng.gen_range(0..neighbors.len())];
            let r: f64 = rng.gen_range(0.0..=1.0);
            let neighbor_inst = stream.get(pick).unwrap();
            let inst = synthesize(seed_inst, neighbor_inst, r, format!("s{next_id}"))?;
            next_id += 1;
            batch.multipliers.push(r);
            batch.instances.push(inst);
        }
    }

    let augmented = stream.clone().with_appended(batch.instances.clone())?;
    Ok((augmented, batch))
}

/// Apply SMOTE twice: the first pass oversamples the current minority class,
/// the second whichever class is the minority afterwards. At `percent` = 900
/// both classes end up scaled by 10, preserving the original class ratio.
/// Dates of synthetic instances equal their seed's date and the stream is
/// re-sorted after each pass, so the temporal distribution keeps its shape.
pub fn double_smote(stream: &LabeledStream, config: &SmoteConfig) -> Result<LabeledStream> {
    let (success, failure) = stream.class_counts();
    if success == 0 || failure == 0 {
        return Err(Error::InvalidParameter(
            "double smote needs both classes present".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let first_minority = stream.minority_class();
    let (pass1, _) = smote_pass(stream, first_minority, config, &mut rng)?;
    let pass1 = pass1.sort_by_date();

    let second_minority = pass1.minority_class();
    let (pass2, _) = smote_pass(&pass1, second_minority, config, &mut rng)?;
    Ok(pass2.sort_by_date())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{StreamSchema, DATE_FORMAT};
    use chrono::NaiveDateTime;
    use std::sync::Arc;

    fn date(n: usize) -> NaiveDateTime {
        NaiveDateTime::parse_from_str("2013-01-01T00:00:00", DATE_FORMAT).unwrap()
            + chrono::Duration::seconds(n as i64)
    }

    fn one_dim_stream(values: &[(f64, ClassLabel)]) -> LabeledStream {
        let schema = Arc::new(StreamSchema::new(vec!["m1".into()], "date", "outcome").unwrap());
        let instances = values
            .iter()
            .enumerate()
            .map(|(i, (v, label))| Instance {
                id: format!("r{}", i + 1),
                date: date(i),
                features: vec![*v],
                outcome: *label,
                provenance: Provenance::Original,
            })
            .collect();
        LabeledStream::from_instances(schema, instances).unwrap()
    }

    #[test]
    fn nearest_neighbors_by_distance() {
        use ClassLabel::Failure;
        let stream = one_dim_stream(&[
            (0.0, Failure),
            (1.0, Failure),
            (3.0, Failure),
            (7.0, Failure),
        ]);
        let neighbors = k_nearest_same_class(&stream, 0, 2, Normalization::None).unwrap();
        assert_eq!(neighbors, vec![1, 2]);
    }

    #[test]
    fn duplicate_is_first_neighbor() {
        use ClassLabel::Failure;
        let stream = one_dim_stream(&[
            (5.0, Failure),
            (9.0, Failure),
            (5.0, Failure),
            (6.0, Failure),
        ]);
        let neighbors = k_nearest_same_class(&stream, 0, 2, Normalization::None).unwrap();
        assert_eq!(neighbors[0], 2, "exact duplicate at distance 0 ranks first");
        assert_eq!(neighbors[1], 3);
    }

    #[test]
    fn equidistant_tie_prefers_lower_index() {
        use ClassLabel::Failure;
        let stream = one_dim_stream(&[
            (5.0, Failure),
            (7.0, Failure),
            (3.0, Failure),
        ]);
        // Indices 1 and 2 are both at distance 2; index 1 must rank first.
        let neighbors = k_nearest_same_class(&stream, 0, 2, Normalization::None).unwrap();
        assert_eq!(neighbors, vec![1, 2]);
    }

    #[test]
    fn too_few_candidates_is_an_error() {
        use ClassLabel::{Failure, Success};
        let stream = one_dim_stream(&[(0.0, Failure), (1.0, Failure), (2.0, Success)]);
        let err = k_nearest_same_class(&stream, 0, 2, Normalization::None).unwrap_err();
        match err {
            Error::InsufficientNeighbors {
                class,
                available,
                needed,
            } => {
                assert_eq!(class, "failure");
                assert_eq!(available, 1);
                assert_eq!(needed, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn neighbors_ignore_other_class() {
        use ClassLabel::{Failure, Success};
        let stream = one_dim_stream(&[
            (0.0, Failure),
            (0.1, Success),
            (1.0, Failure),
            (2.0, Failure),
        ]);
        let neighbors = k_nearest_same_class(&stream, 0, 2, Normalization::None).unwrap();
        assert_eq!(neighbors, vec![2, 3]);
    }

    fn two_dim_instance(id: &str, features: [f64; 2], label: ClassLabel) -> Instance {
        Instance {
            id: id.into(),
            date: date(0),
            features: features.to_vec(),
            outcome: label,
            provenance: Provenance::Original,
        }
    }

    #[test]
    fn synthesize_endpoints_and_midpoint() {
        let seed = two_dim_instance("a", [0.0, 0.0], ClassLabel::Failure);
        let neighbor = two_dim_instance("b", [2.0, 4.0], ClassLabel::Failure);

        let at_zero = synthesize(&seed, &neighbor, 0.0, "s0").unwrap();
        assert_eq!(at_zero.features, seed.features);

        let at_one = synthesize(&seed, &neighbor, 1.0, "s1").unwrap();
        assert_eq!(at_one.features, neighbor.features);

        let mid = synthesize(&seed, &neighbor, 0.5, "s2").unwrap();
        assert_eq!(mid.features, vec![1.0, 2.0]);
        assert_eq!(mid.outcome, ClassLabel::Failure);
        assert_eq!(
            mid.provenance,
            Provenance::Synthetic {
                seed_id: "a".into(),
                neighbor_id: "b".into(),
            }
        );
        assert_eq!(mid.date, seed.date);
    }

    #[test]
    fn synthesize_rejects_class_mismatch() {
        let seed = two_dim_instance("a", [0.0, 0.0], ClassLabel::Failure);
        let neighbor = two_dim_instance("b", [1.0, 1.0], ClassLabel::Success);
        assert!(matches!(
            synthesize(&seed, &neighbor, 0.5, "s0"),
            Err(Error::ClassMismatch { .. })
        ));
    }

    #[test]
    fn smote_pass_multiplies_minority() {
        use ClassLabel::{Failure, Success};
        let mut values = vec![(0.0, Failure), (1.0, Failure), (2.0, Failure), (3.0, Failure)];
        values.extend((0..8).map(|i| (10.0 + i as f64, Success)));
        let stream = one_dim_stream(&values);
        let config = SmoteConfig::new(2, 100, 7, Normalization::MinMax).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        let (augmented, batch) = smote_pass(&stream, Failure, &config, &mut rng).unwrap();
        assert_eq!(augmented.count_of(Failure), 8, "percent=100 doubles the class");
        assert_eq!(augmented.count_of(Success), 8);
        assert_eq!(batch.instances.len(), 4);
        assert_eq!(batch.multipliers.len(), 4);
        for inst in &batch.instances {
            assert_eq!(inst.outcome, Failure);
            assert!(inst.provenance.is_synthetic());
        }
    }

    #[test]
    fn smote_pass_percent_zero_is_noop() {
        use ClassLabel::{Failure, Success};
        let stream = one_dim_stream(&[(0.0, Failure), (1.0, Failure), (2.0, Success)]);
        let config = SmoteConfig::new(5, 0, 1, Normalization::MinMax).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        let (augmented, batch) = smote_pass(&stream, Failure, &config, &mut rng).unwrap();
        assert_eq!(augmented.len(), stream.len());
        assert!(batch.instances.is_empty());
    }

    #[test]
    fn double_smote_preserves_class_ratio() {
        use ClassLabel::{Failure, Success};
        let mut values: Vec<(f64, ClassLabel)> =
            (0..12).map(|i| (i as f64, Success)).collect();
        values.extend((0..6).map(|i| (100.0 + i as f64, Failure)));
        let stream = one_dim_stream(&values);
        let config = SmoteConfig::new(3, 900, 11, Normalization::MinMax).unwrap();
        let out = double_smote(&stream, &config).unwrap();
        assert_eq!(out.class_counts(), (120, 60));
    }

    #[test]
    fn double_smote_reoversamples_persistent_minority() {
        use ClassLabel::{Failure, Success};
        // (10 success, 2 failure) at percent=100: pass 1 -> (10, 4), failure
        // is still the minority, pass 2 -> (10, 8).
        let mut values: Vec<(f64, ClassLabel)> =
            (0..10).map(|i| (i as f64, Success)).collect();
        values.push((100.0, Failure));
        values.push((101.0, Failure));
        let stream = one_dim_stream(&values);
        let config = SmoteConfig::new(1, 100, 3, Normalization::MinMax).unwrap();
        let out = double_smote(&stream, &config).unwrap();
        assert_eq!(out.class_counts(), (10, 8));
    }

    #[test]
    fn double_smote_balanced_input_scales_both() {
        use ClassLabel::{Failure, Success};
        let mut values: Vec<(f64, ClassLabel)> = (0..6).map(|i| (i as f64, Success)).collect();
        values.extend((0..6).map(|i| (50.0 + i as f64, Failure)));
        let stream = one_dim_stream(&values);
        let config = SmoteConfig::new(2, 300, 5, Normalization::MinMax).unwrap();
        let out = double_smote(&stream, &config).unwrap();
        assert_eq!(out.class_counts(), (24, 24));
    }

    #[test]
    fn double_smote_is_deterministic() {
        use ClassLabel::{Failure, Success};
        let mut values: Vec<(f64, ClassLabel)> = (0..9).map(|i| (i as f64, Success)).collect();
        values.extend((0..4).map(|i| (30.0 + i as f64, Failure)));
        let stream = one_dim_stream(&values);
        let config = SmoteConfig::new(2, 200, 42, Normalization::MinMax).unwrap();
        let a = double_smote(&stream, &config).unwrap();
        let b = double_smote(&stream, &config).unwrap();
        assert_eq!(a.instances(), b.instances());
    }

    #[test]
    fn synthetic_dates_keep_stream_sorted_with_seeds_first() {
        use ClassLabel::{Failure, Success};
        let mut values: Vec<(f64, ClassLabel)> = (0..4).map(|i| (i as f64, Failure)).collect();
        values.extend((0..8).map(|i| (10.0 + i as f64, Success)));
        let stream = one_dim_stream(&values);
        let config = SmoteConfig::new(2, 100, 9, Normalization::MinMax).unwrap();
        let out = double_smote(&stream, &config).unwrap();
        let mut last_date = None;
        for inst in out.iter() {
            if let Some(prev) = last_date {
                assert!(inst.date >= prev, "dates must be non-decreasing");
            }
            last_date = Some(inst.date);
        }
        // For every (date, original) pair the original precedes the
        // synthetics it seeded.
        for (idx, inst) in out.iter().enumerate() {
            if let Provenance::Synthetic { seed_id, .. } = &inst.provenance {
                let seed_pos = out
                    .iter()
                    .position(|other| &other.id == seed_id)
                    .expect("seed is present");
                assert!(seed_pos < idx, "seed must precede its synthetic");
            }
        }
    }
}
