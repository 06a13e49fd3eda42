//! Incremental decision-tree induction with Hoeffding-bound split decisions.
//!
//! The tree learns one instance at a time and never stores instances: each
//! leaf keeps per-class streaming Gaussian summaries of every attribute.
//! Once a leaf has absorbed a grace period's worth of instances it evaluates
//! candidate binary splits by information gain and splits when the gap
//! between the two best attributes exceeds the Hoeffding bound, or when the
//! bound itself has shrunk below the tie threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::ClassLabel;

/// Split-decision parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Complement of the split confidence: the bound holds with
    /// probability 1 - delta.
    pub delta: f64,
    /// Tie threshold: once the bound falls below tau, near-equal top
    /// attributes are split anyway.
    pub tau: f64,
    /// Instances a leaf accumulates between split checks.
    pub grace_period: u64,
    /// Range of the split heuristic. Information gain on a two-class
    /// problem ranges over [0, 1], so this is 1.
    pub range_r: f64,
    /// Number of equally spaced candidate thresholds evaluated per
    /// attribute, between the observed min and max.
    pub candidate_thresholds: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            delta: 1e-7,
            tau: 0.05,
            grace_period: 200,
            range_r: 1.0,
            candidate_thresholds: 10,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be in (0, 1), got {}",
                self.delta
            )));
        }
        if self.tau < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tau must be >= 0, got {}",
                self.tau
            )));
        }
        if self.grace_period == 0 {
            return Err(Error::InvalidParameter("grace period must be >= 1".into()));
        }
        if self.range_r <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "range R must be > 0, got {}",
                self.range_r
            )));
        }
        if self.candidate_thresholds == 0 {
            return Err(Error::InvalidParameter(
                "candidate thresholds must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// The Hoeffding bound: with confidence 1 - delta, the true mean of a random
/// variable with range R lies within epsilon of the sample mean after n
/// observations.
///
/// epsilon = sqrt( R^2 * ln(1/delta) / (2n) )
pub fn hoeffding_bound(range: f64, delta: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "hoeffding bound is undefined for n = 0".into(),
        ));
    }
    if range <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "range must be > 0, got {range}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be in (0, 1], got {delta}"
        )));
    }
    Ok((range * range * (1.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaussianStats {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl GaussianStats {
    pub fn add(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    /// Sample variance; 0 until two observations exist.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// One attribute's summaries at a leaf: a Gaussian per class plus the
/// observed value range.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeStats {
    pub per_class: [GaussianStats; 2],
    pub min: f64,
    pub max: f64,
}

impl AttributeStats {
    fn new() -> Self {
        AttributeStats {
            per_class: [GaussianStats::default(); 2],
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, value: f64, class: usize) {
        self.per_class[class].add(value);
        self.min = self.min.min(value);
        self.max = self.max.max(value);
    }

    /// Estimated number of this-class instances with value <= threshold,
    /// from the class Gaussian. A zero-variance summary is a point mass.
    fn estimated_left_count(&self, class: usize, threshold: f64) -> f64 {
        let g = &self.per_class[class];
        if g.count == 0 {
            return 0.0;
        }
        let count = g.count as f64;
        let sd = g.std_dev();
        if sd <= 0.0 {
            if g.mean <= threshold {
                count
            } else {
                0.0
            }
        } else {
            count * normal_cdf((threshold - g.mean) / sd)
        }
    }
}

/// Sufficient statistics of a learning leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafStats {
    pub class_counts: [u64; 2],
    pub attributes: Vec<AttributeStats>,
    since_check: u64,
}

impl LeafStats {
    pub fn new(n_attributes: usize) -> Self {
        LeafStats {
            class_counts: [0, 0],
            attributes: (0..n_attributes).map(|_| AttributeStats::new()).collect(),
            since_check: 0,
        }
    }

    /// Instances seen at this leaf since its creation.
    pub fn n(&self) -> u64 {
        self.class_counts[0] + self.class_counts[1]
    }

    pub fn add(&mut self, features: &[f64], outcome: ClassLabel) {
        let class = outcome.index();
        self.class_counts[class] += 1;
        self.since_check += 1;
        for (attr, &value) in self.attributes.iter_mut().zip(features) {
            attr.add(value, class);
        }
    }

    fn is_pure(&self) -> bool {
        self.class_counts[0] == 0 || self.class_counts[1] == 0
    }

    /// Candidate split thresholds for one attribute: equally spaced interior
    /// points of the observed range. Empty when the attribute is constant.
    fn candidate_thresholds(&self, attribute: usize, count: usize) -> Vec<f64> {
        let stats = &self.attributes[attribute];
        if stats.max <= stats.min {
            return Vec::new();
        }
        let span = stats.max - stats.min;
        (1..=count)
            .map(|i| stats.min + span * i as f64 / (count + 1) as f64)
            .collect()
    }
}

fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

/// Information gain of the binary test `attribute <= threshold`, with the
/// side class counts estimated from the leaf's per-class Gaussians. Clamped
/// to [0, 1]; a constant attribute yields 0.
pub fn info_gain(stats: &LeafStats, attribute: usize, threshold: f64) -> f64 {
    let n = stats.n();
    if n < 2 {
        return 0.0;
    }
    let parent = [stats.class_counts[0] as f64, stats.class_counts[1] as f64];
    let attr = &stats.attributes[attribute];
    let left = [
        attr.estimated_left_count(0, threshold),
        attr.estimated_left_count(1, threshold),
    ];
    let right = [parent[0] - left[0], parent[1] - left[1]];
    let total = parent[0] + parent[1];
    let left_total = left[0] + left[1];
    let right_total = right[0] + right[1];
    let weighted =
        (left_total / total) * entropy(&left) + (right_total / total) * entropy(&right);
    (entropy(&parent) - weighted).clamp(0.0, 1.0)
}

/// Outcome of a split check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitDecision {
    NoSplit,
    Split { attribute: usize, threshold: f64 },
}

/// Details of a committed split, reported by `learn_one`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEvent {
    pub attribute: usize,
    pub threshold: f64,
    /// Leaf size when the split was taken.
    pub n: u64,
    pub gain: f64,
    pub runner_up_gain: f64,
    pub epsilon: f64,
}

struct SplitEval {
    attribute: usize,
    threshold: f64,
    gain: f64,
    runner_up_gain: f64,
    epsilon: f64,
    split: bool,
}

fn evaluate_split(stats: &LeafStats, config: &SplitConfig) -> Option<SplitEval> {
    if stats.n() == 0 || stats.is_pure() {
        return None;
    }

    // Best gain and threshold per attribute; the first-seen threshold wins
    // ties so the outcome is deterministic.
    let mut best: Option<(usize, f64, f64)> = None; // (attr, threshold, gain)
    let mut runner_up_gain = 0.0;
    for attribute in 0..stats.attributes.len() {
        let mut attr_best: Option<(f64, f64)> = None; // (threshold, gain)
        for threshold in stats.candidate_thresholds(attribute, config.candidate_thresholds) {
            let gain = info_gain(stats, attribute, threshold);
            if attr_best.is_none_or(|(_, g)| gain > g) {
                attr_best = Some((threshold, gain));
            }
        }
        let Some((threshold, gain)) = attr_best else {
            continue;
        };
        match best {
            Some((_, _, best_gain)) if gain <= best_gain => {
                if gain > runner_up_gain {
                    runner_up_gain = gain;
                }
            }
            _ => {
                if let Some((_, _, prev)) = best {
                    runner_up_gain = prev;
                }
                best = Some((attribute, threshold, gain));
            }
        }
    }

    let (attribute, threshold, gain) = best?;
    if gain <= 0.0 {
        return None;
    }
    let epsilon = hoeffding_bound(config.range_r, config.delta, stats.n())
        .expect("leaf is non-empty and config validated");
    let split = gain - runner_up_gain > epsilon || epsilon < config.tau;
    Some(SplitEval {
        attribute,
        threshold,
        gain,
        runner_up_gain,
        epsilon,
        split,
    })
}

/// Decide whether a leaf should split: the best attribute wins when its gain
/// beats the runner-up by more than the Hoeffding bound, or when the bound
/// is below the tie threshold. A pure leaf, or one where no attribute has
/// positive gain, never splits.
pub fn attempt_split(stats: &LeafStats, config: &SplitConfig) -> SplitDecision {
    match evaluate_split(stats, config) {
        Some(SplitEval {
            attribute,
            threshold,
            split: true,
            ..
        }) => SplitDecision::Split {
            attribute,
            threshold,
        },
        _ => SplitDecision::NoSplit,
    }
}

enum Node {
    Leaf(LeafStats),
    Internal {
        attribute: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// Class membership scores from a prediction: Laplace-smoothed leaf
/// frequencies that always sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: ClassLabel,
    pub p_success: f64,
    pub p_failure: f64,
}

impl Prediction {
    pub fn score(&self, label: ClassLabel) -> f64 {
        match label {
            ClassLabel::Success => self.p_success,
            ClassLabel::Failure => self.p_failure,
        }
    }
}

/// Structural counters of a tree, exported alongside the DOT rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    /// Longest root-to-leaf edge count.
    pub depth: usize,
    pub leaves: usize,
    pub internal_nodes: usize,
    pub instances_learned: u64,
}

/// Incremental two-class decision tree over numeric attributes.
pub struct HoeffdingModel {
    root: Node,
    n_features: usize,
    config: SplitConfig,
    instances_learned: u64,
    split_events: u64,
    split_checks: u64,
}

impl HoeffdingModel {
    pub fn new(n_features: usize, config: SplitConfig) -> Result<Self> {
        config.validate()?;
        if n_features == 0 {
            return Err(Error::InvalidParameter(
                "model needs at least one feature".into(),
            ));
        }
        Ok(HoeffdingModel {
            root: Node::Leaf(LeafStats::new(n_features)),
            n_features,
            config,
            instances_learned: 0,
            split_events: 0,
            split_checks: 0,
        })
    }

    pub fn config(&self) -> &SplitConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn instances_learned(&self) -> u64 {
        self.instances_learned
    }

    /// Committed splits since the last reset.
    pub fn split_events(&self) -> u64 {
        self.split_events
    }

    /// Split checks run (grace-period expiries), whether or not they split.
    pub fn split_checks(&self) -> u64 {
        self.split_checks
    }

    /// Drop all learned structure, keeping the configuration.
    pub fn reset(&mut self) {
        self.root = Node::Leaf(LeafStats::new(self.n_features));
        self.instances_learned = 0;
        self.split_events = 0;
        self.split_checks = 0;
    }

    /// Absorb one labeled instance: route it to a leaf by the threshold
    /// tests, update that leaf's statistics, and run a split check once the
    /// leaf has seen `grace_period` instances since the last check. The
    /// instance itself is not retained.
    pub fn learn_one(&mut self, features: &[f64], outcome: ClassLabel) -> Option<SplitEvent> {
        debug_assert_eq!(features.len(), self.n_features);
        let config = self.config;

        let mut node = &mut self.root;
        loop {
            match node {
                Node::Internal {
                    attribute,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features[*attribute] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
                Node::Leaf(_) => break,
            }
        }
        let Node::Leaf(stats) = node else { unreachable!() };

        stats.add(features, outcome);
        self.instances_learned += 1;

        if stats.since_check < config.grace_period {
            return None;
        }
        stats.since_check = 0;
        self.split_checks += 1;

        let eval = evaluate_split(stats, &config)?;
        if !eval.split {
            return None;
        }
        let event = SplitEvent {
            attribute: eval.attribute,
            threshold: eval.threshold,
            n: stats.n(),
            gain: eval.gain,
            runner_up_gain: eval.runner_up_gain,
            epsilon: eval.epsilon,
        };
        *node = Node::Internal {
            attribute: eval.attribute,
            threshold: eval.threshold,
            left: Box::new(Node::Leaf(LeafStats::new(self.n_features))),
            right: Box::new(Node::Leaf(LeafStats::new(self.n_features))),
        };
        self.split_events += 1;
        Some(event)
    }

    /// Route a feature vector to its leaf and report the Laplace-smoothed
    /// class distribution there. Ties predict Success; an empty model
    /// returns the uniform distribution.
    pub fn predict(&self, features: &[f64]) -> Prediction {
        debug_assert_eq!(features.len(), self.n_features);
        let mut node = &self.root;
        while let Node::Internal {
            attribute,
            threshold,
            left,
            right,
        } = node
        {
            node = if features[*attribute] <= *threshold {
                left
            } else {
                right
            };
        }
        let Node::Leaf(stats) = node else { unreachable!() };
        let n = stats.n() as f64;
        let p_success = (stats.class_counts[0] as f64 + 1.0) / (n + 2.0);
        let p_failure = (stats.class_counts[1] as f64 + 1.0) / (n + 2.0);
        let label = if p_success >= p_failure {
            ClassLabel::Success
        } else {
            ClassLabel::Failure
        };
        Prediction {
            label,
            p_success,
            p_failure,
        }
    }

    /// Structural counters: depth, leaf count, internal-node count.
    pub fn stats(&self) -> TreeStats {
        fn walk(node: &Node, depth: usize, acc: &mut TreeStats) {
            match node {
                Node::Leaf(_) => {
                    acc.leaves += 1;
                    acc.depth = acc.depth.max(depth);
                }
                Node::Internal { left, right, .. } => {
                    acc.internal_nodes += 1;
                    walk(left, depth + 1, acc);
                    walk(right, depth + 1, acc);
                }
            }
        }
        let mut acc = TreeStats {
            depth: 0,
            leaves: 0,
            internal_nodes: 0,
            instances_learned: self.instances_learned,
        };
        walk(&self.root, 0, &mut acc);
        acc
    }

    /// Render the tree as a Graphviz digraph. Internal nodes show
    /// `name ≤ threshold`; leaves show the predicted class and the class
    /// counts observed there. Node `n0` is the root.
    pub fn to_dot<S: AsRef<str>>(&self, feature_names: &[S]) -> String {
        fn escape(text: &str) -> String {
            text.replace('\\', "\\\\").replace('"', "\\\"")
        }
        fn emit<S: AsRef<str>>(
            node: &Node,
            names: &[S],
            counter: &mut usize,
            out: &mut String,
        ) -> usize {
            let id = *counter;
            *counter += 1;
            match node {
                Node::Leaf(stats) => {
                    let label = if stats.class_counts[0] >= stats.class_counts[1] {
                        ClassLabel::Success
                    } else {
                        ClassLabel::Failure
                    };
                    out.push_str(&format!(
                        "  n{id} [label=\"{label}\\n(success={}, failure={})\"];\n",
                        stats.class_counts[0], stats.class_counts[1]
                    ));
                }
                Node::Internal {
                    attribute,
                    threshold,
                    left,
                    right,
                } => {
                    let name = names
                        .get(*attribute)
                        .map(|s| s.as_ref().to_string())
                        .unwrap_or_else(|| format!("x{attribute}"));
                    out.push_str(&format!(
                        "  n{id} [label=\"{} \u{2264} {}\"];\n",
                        escape(&name),
                        crate::stream::format_float(*threshold)
                    ));
                    let left_id = emit(left, names, counter, out);
                    let right_id = emit(right, names, counter, out);
                    out.push_str(&format!("  n{id} -> n{left_id} [label=\"true\"];\n"));
                    out.push_str(&format!("  n{id} -> n{right_id} [label=\"false\"];\n"));
                }
            }
            id
        }

        let mut out = String::from("digraph hoeffding_tree {\n  node [shape=box];\n");
        let mut counter = 0;
        emit(&self.root, feature_names, &mut counter, &mut out);
        out.push_str("}\n");
        out
    }
}

/// Standard normal CDF via the Abramowitz–Stegun erf approximation
/// (absolute error below 1.5e-7).
fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}
