//! buildcast: stream mining for software build outcomes.
//!
//! The toolkit covers the full path from an imbalanced, date-ordered CSV of
//! per-build source-code metrics to an incrementally learned decision model
//! and its evaluation series:
//!
//! - [`stream`]: schema, instances, CSV ingestion, date ordering.
//! - [`smote`]: synthetic minority oversampling, including the two-pass
//!   protocol that scales both classes while preserving their ratio.
//! - [`hoeffding`]: incremental decision-tree induction with Hoeffding-bound
//!   split decisions and Graphviz export.
//! - [`adwin`]: adaptive-window drift detection over the error stream.
//! - [`evaluation`]: prequential (test-then-train) harness emitting
//!   accuracy, sensitivity, and class-distribution series.
//! - [`datagen`]: synthetic stream generator for desk-scale experiments.
//! - [`pipeline`]: end-to-end runs with reproducible manifests.
//!
//! Each capability has a runnable demo under `examples/`; the `buildcast`
//! binary wires the same functions into `gen`, `smote`, `pipeline`, and
//! `export-tree` subcommands.

pub mod adwin;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod hoeffding;
pub mod pipeline;
pub mod smote;
pub mod stream;

pub use error::{Error, Result};
