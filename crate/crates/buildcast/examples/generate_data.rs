//! Generate a synthetic build-metric stream and write it as CSV.
//!
//! ```bash
//! cargo run -p buildcast --example generate_data
//! ```

use buildcast::datagen::{generate_stream, DistributionShift, GenSpec};
use buildcast::stream::serialize_csv;

fn main() -> buildcast::Result<()> {
    // 199 builds, 127 successes / 72 failures, class mix shifting toward
    // success in the last half of the stream.
    let spec = GenSpec {
        shift: Some(DistributionShift {
            at_index: 90,
            post_success_probability: 0.75,
        }),
        seed: 7,
        ..GenSpec::default()
    };
    let stream = generate_stream(&spec)?;
    let (success, failure) = stream.class_counts();
    println!(
        "generated {} instances: {success} success / {failure} failure, {} features",
        stream.len(),
        stream.schema().n_features()
    );

    let path = std::env::temp_dir().join("buildcast-demo-builds.csv");
    let mut bytes = Vec::new();
    serialize_csv(&stream, &mut bytes, false)?;
    std::fs::write(&path, bytes)?;
    println!("wrote {}", path.display());
    Ok(())
}
