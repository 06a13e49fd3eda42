//! Prequential evaluation: every instance is tested before it is learned,
//! producing accuracy and sensitivity series with drift points.
//!
//! ```bash
//! cargo run -p buildcast --example prequential
//! ```

use buildcast::adwin::AdwinDetector;
use buildcast::datagen::{generate_stream, DistributionShift, GenSpec};
use buildcast::evaluation::{class_distribution_series, prequential_run, RunConfig};
use buildcast::hoeffding::HoeffdingModel;

fn main() -> buildcast::Result<()> {
    let stream = generate_stream(&GenSpec {
        n_instances: 3000,
        success_count: 1800,
        failure_count: 1200,
        overlap: 3.0,
        informative_features: 1,
        shift: Some(DistributionShift {
            at_index: 1500,
            post_success_probability: 0.85,
        }),
        seed: 2,
        ..GenSpec::default()
    })?
    .sort_by_date();

    let config = RunConfig::default();
    let mut model = HoeffdingModel::new(stream.schema().n_features(), config.split)?;
    let mut detector = AdwinDetector::new(config.adwin_delta)?;
    let series = prequential_run(&stream, &mut model, &mut detector, &config)?;

    for step in series.steps.iter().filter(|s| s.index % 500 == 0) {
        println!(
            "step {:>4}: accuracy {:.3} (windowed {:.3}), sensitivity S {:.3} / F {:.3}, \
success mix {:.2}",
            step.index,
            step.cumulative_accuracy,
            step.windowed_accuracy,
            step.sensitivity_success,
            step.sensitivity_failure,
            step.window_success_fraction
        );
    }

    let summary = series.summary();
    println!(
        "summary: start {:.3} -> end {:.3} (average {:.3}), {} drift points, first at {:?}",
        summary.start_accuracy,
        summary.end_accuracy,
        summary.average_accuracy,
        summary.drift_points.len(),
        summary.drift_points.first()
    );

    // The class-distribution series on its own, like a build-mix plot.
    let mix = class_distribution_series(&stream, 100)?;
    println!(
        "success fraction at steps 500/1500/3000: {:.2} / {:.2} / {:.2}",
        mix[499], mix[1499], mix[2999]
    );
    Ok(())
}
