//! Adaptive windowing over an error stream: the window grows while the
//! error rate is stable and cuts its head when the rate shifts.
//!
//! ```bash
//! cargo run -p buildcast --example detect_drift
//! ```

use buildcast::adwin::AdwinDetector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn main() -> buildcast::Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    let mut adwin = AdwinDetector::new(0.002)?;

    // 1,500 steps at a 10% error rate, then a degradation to 60%.
    for step in 0..3000usize {
        let error_rate = if step < 1500 { 0.10 } else { 0.60 };
        let value = if rng.gen_bool(error_rate) { 1.0 } else { 0.0 };
        let report = adwin.add_observation(value)?;
        if report.detected {
            println!(
                "step {:>4}: drift — dropped {} observations, window mean now {:.3} over {} kept",
                step + 1,
                report.instances_dropped,
                report.window_mean_after,
                adwin.window_len()
            );
        }
    }

    println!(
        "final window: {} observations, mean {:.3}, {} buckets in memory",
        adwin.window_len(),
        adwin.mean(),
        adwin.bucket_count()
    );
    Ok(())
}
