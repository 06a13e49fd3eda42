//! Prequential (test-then-train) evaluation.
//!
//! Every instance is scored against the current model before the model is
//! allowed to learn it, so the accuracy series never sees a label early.
//! The 0/1 error of each prediction also feeds the drift detector, and
//! drift hits are either recorded or trigger a model reset.

use std::collections::VecDeque;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adwin::AdwinDetector;
use crate::error::{Error, Result};
use crate::hoeffding::{HoeffdingModel, Prediction, SplitConfig};
use crate::smote::SmoteConfig;
use crate::stream::{ClassLabel, Instance, LabeledStream};

/// Anything that can predict a label for a feature vector and learn from a
/// labeled instance, one instance at a time.
pub trait StreamLearner {
    fn predict(&self, features: &[f64]) -> Prediction;
    fn learn(&mut self, instance: &Instance);
    /// Forget all learned state (used by the reset-on-drift policy).
    fn reset(&mut self);
}

impl StreamLearner for HoeffdingModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        HoeffdingModel::predict(self, features)
    }

    fn learn(&mut self, instance: &Instance) {
        self.learn_one(&instance.features, instance.outcome);
    }

    fn reset(&mut self) {
        HoeffdingModel::reset(self);
    }
}

/// What to do when the drift detector fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftAction {
    /// Record the drift point in the series and keep learning.
    Record,
    /// Additionally rebuild the model from scratch.
    ResetTree,
}

impl FromStr for DriftAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "record" => Ok(DriftAction::Record),
            "reset-tree" => Ok(DriftAction::ResetTree),
            other => Err(Error::InvalidParameter(format!(
                "drift action must be `record` or `reset-tree`, got `{other}`"
            ))),
        }
    }
}

/// Full configuration of one evaluation run, with every default
/// materialized so a manifest can reproduce it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Window for the windowed accuracy and class-distribution series.
    pub window_size: usize,
    pub drift_action: DriftAction,
    pub seed: u64,
    pub split: SplitConfig,
    pub smote: SmoteConfig,
    /// Confidence parameter of the drift detector.
    pub adwin_delta: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            window_size: 100,
            drift_action: DriftAction::Record,
            seed: 0,
            split: SplitConfig::default(),
            smote: SmoteConfig::default(),
            adwin_delta: crate::adwin::DEFAULT_DELTA,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::InvalidParameter("window size must be >= 1".into()));
        }
        if !(self.adwin_delta > 0.0 && self.adwin_delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "adwin delta must be in (0, 1), got {}",
                self.adwin_delta
            )));
        }
        self.split.validate()?;
        self.smote.validate()
    }
}

/// One row of the evaluation series. Success is the positive class for the
/// confusion counts; the mirrored rates are recoverable from the counts at
/// every row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based instance index.
    pub index: usize,
    pub cumulative_accuracy: f64,
    pub windowed_accuracy: f64,
    pub sensitivity_success: f64,
    pub sensitivity_failure: f64,
    pub precision_success: f64,
    pub precision_failure: f64,
    pub false_positive_rate: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Fraction of Success among the true labels of the trailing window.
    pub window_success_fraction: f64,
    /// 1 when the drift detector fired at this step.
    pub drift: u8,
}

/// The per-step series of one prequential run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSeries {
    pub steps: Vec<StepRecord>,
    pub window_size: usize,
}

/// Headline numbers of a run, written as a single JSON line.
/// `start_accuracy` is the cumulative accuracy after the first full window,
/// `end_accuracy` the final cumulative accuracy, and `average_accuracy` the
/// mean of the cumulative-accuracy curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub instances: usize,
    pub success_count: u64,
    pub failure_count: u64,
    pub start_accuracy: f64,
    pub end_accuracy: f64,
    pub average_accuracy: f64,
    pub sensitivity_success: f64,
    pub sensitivity_failure: f64,
    pub drift_points: Vec<usize>,
}

impl EvaluationSeries {
    pub fn drift_points(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter(|s| s.drift == 1)
            .map(|s| s.index)
            .collect()
    }

    pub fn summary(&self) -> RunSummary {
        let last = self.steps.last();
        let start_idx = self.window_size.min(self.steps.len());
        let start_accuracy = if start_idx == 0 {
            0.0
        } else {
            self.steps[start_idx - 1].cumulative_accuracy
        };
        let average_accuracy = if self.steps.is_empty() {
            0.0
        } else {
            self.steps.iter().map(|s| s.cumulative_accuracy).sum::<f64>()
                / self.steps.len() as f64
        };
        RunSummary {
            instances: self.steps.len(),
            success_count: last.map_or(0, |s| s.tp + s.fn_),
            failure_count: last.map_or(0, |s| s.tn + s.fp),
            start_accuracy,
            end_accuracy: last.map_or(0.0, |s| s.cumulative_accuracy),
            average_accuracy,
            sensitivity_success: last.map_or(0.0, |s| s.sensitivity_success),
            sensitivity_failure: last.map_or(0.0, |s| s.sensitivity_failure),
            drift_points: self.drift_points(),
        }
    }

    /// Write the series as CSV, one row per instance.
    pub fn write_csv(&self, sink: impl Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        for step in &self.steps {
            writer.serialize(step)?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Run the test-then-train loop: each instance is predicted, scored, fed to
/// the drift detector as a 0/1 error, and only then learned.
pub fn prequential_run<L: StreamLearner>(
    stream: &LabeledStream,
    learner: &mut L,
    detector: &mut AdwinDetector,
    config: &RunConfig,
) -> Result<EvaluationSeries> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::InvalidParameter(
            "prequential run needs a non-empty stream".into(),
        ));
    }

    let window = config.window_size;
    let mut recent: VecDeque<(bool, ClassLabel)> = VecDeque::with_capacity(window);
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    let mut steps = Vec::with_capacity(stream.len());

    for (i, instance) in stream.iter().enumerate() {
        let index = i + 1;
        let predicted = learner.predict(&instance.features).label;
        let correct = predicted == instance.outcome;
        match (predicted, instance.outcome) {
            (ClassLabel::Success, ClassLabel::Success) => tp += 1,
            (ClassLabel::Success, ClassLabel::Failure) => fp += 1,
            (ClassLabel::Failure, ClassLabel::Failure) => tn += 1,
            (ClassLabel::Failure, ClassLabel::Success) => fn_ += 1,
        }

        if recent.len() == window {
            recent.pop_front();
        }
        recent.push_back((correct, instance.outcome));

        let report = detector
            .add_observation(if correct { 0.0 } else { 1.0 })
            .expect("0/1 error values are always in range");
        if report.detected && config.drift_action == DriftAction::ResetTree {
            learner.reset();
        }

        let windowed_correct = recent.iter().filter(|(c, _)| *c).count();
        let window_success = recent
            .iter()
            .filter(|(_, label)| *label == ClassLabel::Success)
            .count();

        steps.push(StepRecord {
            index,
            cumulative_accuracy: ratio(tp + tn, index as u64),
            windowed_accuracy: ratio(windowed_correct as u64, recent.len() as u64),
            sensitivity_success: ratio(tp, tp + fn_),
            sensitivity_failure: ratio(tn, tn + fp),
            precision_success: ratio(tp, tp + fp),
            precision_failure: ratio(tn, tn + fn_),
            false_positive_rate: ratio(fp, fp + tn),
            tp,
            fp,
            tn,
            fn_,
            window_success_fraction: ratio(window_success as u64, recent.len() as u64),
            drift: u8::from(report.detected),
        });

        learner.learn(instance);
    }

    Ok(EvaluationSeries {
        steps,
        window_size: window,
    })
}

/// Per-step fraction of Success among the last `window` true labels.
pub fn class_distribution_series(stream: &LabeledStream, window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be >= 1".into()));
    }
    let mut recent: VecDeque<ClassLabel> = VecDeque::with_capacity(window);
    let mut series = Vec::with_capacity(stream.len());
    for instance in stream.iter() {
        if recent.len() == window {
            recent.pop_front();
        }
        recent.push_back(instance.outcome);
        let successes = recent.iter().filter(|l| **l == ClassLabel::Success).count();
        series.push(successes as f64 / recent.len() as f64);
    }
    Ok(series)
}
