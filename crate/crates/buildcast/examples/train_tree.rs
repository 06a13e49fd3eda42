//! Incremental tree induction: watch the Hoeffding bound commit splits as
//! instances stream in.
//!
//! ```bash
//! cargo run -p buildcast --example train_tree
//! ```

use buildcast::datagen::{generate_stream, GenSpec};
use buildcast::hoeffding::{HoeffdingModel, SplitConfig};

fn main() -> buildcast::Result<()> {
    let stream = generate_stream(&GenSpec {
        n_instances: 4000,
        success_count: 2000,
        failure_count: 2000,
        overlap: 3.0,
        informative_features: 1,
        seed: 1,
        ..GenSpec::default()
    })?;

    let mut model = HoeffdingModel::new(stream.schema().n_features(), SplitConfig::default())?;
    for (i, inst) in stream.iter().enumerate() {
        if let Some(event) = model.learn_one(&inst.features, inst.outcome) {
            println!(
                "instance {:>4}: split on `{}` at {:.3} (gain {:.3}, runner-up {:.3}, eps {:.3})",
                i + 1,
                stream.schema().metric_columns[event.attribute],
                event.threshold,
                event.gain,
                event.runner_up_gain,
                event.epsilon
            );
        }
    }

    let stats = model.stats();
    println!(
        "final tree: depth {}, {} leaves, {} internal nodes after {} instances",
        stats.depth, stats.leaves, stats.internal_nodes, stats.instances_learned
    );

    let probe = stream.get(0).unwrap();
    let prediction = model.predict(&probe.features);
    println!(
        "prediction for the first instance: {:?} (success {:.3} / failure {:.3}), truth {:?}",
        prediction.label, prediction.p_success, prediction.p_failure, probe.outcome
    );
    Ok(())
}
