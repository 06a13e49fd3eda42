//! Render a trained tree as Graphviz DOT with its structural stats.
//!
//! ```bash
//! cargo run -p buildcast --example export_tree | dot -Tpng > tree.png
//! ```

use buildcast::datagen::{generate_stream, GenSpec};
use buildcast::hoeffding::{HoeffdingModel, SplitConfig};

fn main() -> buildcast::Result<()> {
    let stream = generate_stream(&GenSpec {
        n_instances: 2500,
        success_count: 1400,
        failure_count: 1100,
        overlap: 3.5,
        informative_features: 2,
        seed: 5,
        ..GenSpec::default()
    })?;

    let mut model = HoeffdingModel::new(stream.schema().n_features(), SplitConfig::default())?;
    for inst in stream.iter() {
        model.learn_one(&inst.features, inst.outcome);
    }

    let stats = model.stats();
    eprintln!(
        "tree stats: {}",
        serde_json::to_string(&stats).expect("stats serialize")
    );
    print!("{}", model.to_dot(&stream.schema().metric_columns));
    Ok(())
}
