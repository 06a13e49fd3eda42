//! Two-pass SMOTE: oversample both classes by 10x while keeping the
//! original class ratio.
//!
//! ```bash
//! cargo run -p buildcast --example oversample
//! ```

use buildcast::datagen::{generate_stream, GenSpec};
use buildcast::smote::{double_smote, SmoteConfig};
use buildcast::stream::Provenance;

fn main() -> buildcast::Result<()> {
    let stream = generate_stream(&GenSpec::default())?;
    let (s0, f0) = stream.class_counts();
    println!("before: {} instances ({s0} success / {f0} failure)", stream.len());

    let config = SmoteConfig {
        percent: 900,
        seed: 7,
        ..SmoteConfig::default()
    };
    let augmented = double_smote(&stream, &config)?;
    let (s1, f1) = augmented.class_counts();
    println!("after two passes at {}%: {} instances ({s1} success / {f1} failure)",
        config.percent,
        augmented.len()
    );

    // Every synthetic instance records its parents for audit.
    let first_synthetic = augmented
        .iter()
        .find(|inst| inst.provenance.is_synthetic())
        .expect("oversampling created synthetics");
    if let Provenance::Synthetic { seed_id, neighbor_id } = &first_synthetic.provenance {
        println!(
            "example synthetic {} interpolates between {seed_id} and {neighbor_id} (date {})",
            first_synthetic.id, first_synthetic.date
        );
    }
    Ok(())
}
