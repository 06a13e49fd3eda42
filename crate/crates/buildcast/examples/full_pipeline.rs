//! The whole pipeline in one go: generate an imbalanced date-ordered
//! stream, oversample it 10x with two-pass SMOTE, learn it prequentially,
//! and write the series CSV, summary, tree, and manifest.
//!
//! ```bash
//! cargo run -p buildcast --example full_pipeline
//! ```

use buildcast::datagen::{generate_stream, DistributionShift, GenSpec};
use buildcast::evaluation::RunConfig;
use buildcast::pipeline::{run_csv_file, write_outputs};
use buildcast::stream::{serialize_csv, StreamSchema};

fn main() -> buildcast::Result<()> {
    let dir = std::env::temp_dir().join("buildcast-demo-run");
    std::fs::create_dir_all(&dir)?;

    // A 199-instance base stream whose class mix shifts toward success.
    let input = dir.join("builds.csv");
    let stream = generate_stream(&GenSpec {
        shift: Some(DistributionShift {
            at_index: 90,
            post_success_probability: 0.75,
        }),
        seed: 7,
        ..GenSpec::default()
    })?;
    let mut bytes = Vec::new();
    serialize_csv(&stream, &mut bytes, false)?;
    std::fs::write(&input, bytes)?;

    // Defaults: SMOTE 900% twice, grace 200, tau 0.05, delta 1e-7.
    let mut config = RunConfig {
        seed: 7,
        ..RunConfig::default()
    };
    config.smote.seed = 7;

    let (result, mut manifest) = run_csv_file(&input, &StreamSchema::canonical(), &config)?;
    println!(
        "evaluated {} instances: accuracy start {:.3} -> end {:.3} (average {:.3})",
        result.summary.instances,
        result.summary.start_accuracy,
        result.summary.end_accuracy,
        result.summary.average_accuracy
    );
    let drift = &result.summary.drift_points;
    println!(
        "tree depth {} with {} leaves; {} drift points (first {:?})",
        result.tree_stats.depth,
        result.tree_stats.leaves,
        drift.len(),
        &drift[..drift.len().min(5)]
    );

    let written = write_outputs(&dir, "demo", &result, &mut manifest)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    println!("replay me with: buildcast pipeline --replay {}/demo.manifest.json", dir.display());
    Ok(())
}
