//! End-to-end runs: ingest, sort, oversample, evaluate, export — with a
//! manifest that pins every resolved setting so a run can be replayed
//! byte-for-byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adwin::AdwinDetector;
use crate::error::{Error, Result};
use crate::evaluation::{prequential_run, EvaluationSeries, RunConfig, RunSummary};
use crate::hoeffding::{HoeffdingModel, TreeStats};
use crate::smote::{double_smote, RNG_ALGORITHM};
use crate::stream::{parse_stream, LabeledStream, StreamSchema};

/// Everything needed to reproduce a run: resolved configuration, input
/// identity, and the files the run wrote. Replaying a manifest against the
/// same input reproduces every output byte-for-byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub rng_algorithm: String,
    pub input_path: String,
    pub input_sha256: String,
    pub config: RunConfig,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(input_path: impl Into<String>, input_sha256: String, config: RunConfig) -> Self {
        RunManifest {
            tool: "buildcast".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            input_path: input_path.into(),
            input_sha256,
            config,
            outputs: Vec::new(),
        }
    }
}

/// Rendered artifacts of one run, built fully in memory before anything is
/// written so a failed run leaves no partial outputs.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub series: EvaluationSeries,
    pub summary: RunSummary,
    pub tree_stats: TreeStats,
    pub series_csv: Vec<u8>,
    pub summary_json: String,
    pub tree_dot: String,
    pub tree_stats_json: String,
}

/// Sort by date, apply the two-pass SMOTE protocol (skipped at percent 0),
/// run the prequential loop, and render every artifact.
pub fn run_pipeline(stream: &LabeledStream, config: &RunConfig) -> Result<PipelineResult> {
    config.validate()?;
    let sorted = stream.clone().sort_by_date();
    let augmented = if config.smote.percent > 0 {
        double_smote(&sorted, &config.smote)?
    } else {
        sorted
    };

    let schema = augmented.schema().clone();
    let mut model = HoeffdingModel::new(schema.n_features(), config.split)?;
    let mut detector = AdwinDetector::new(config.adwin_delta)?;
    let series = prequential_run(&augmented, &mut model, &mut detector, config)?;

    let summary = series.summary();
    let tree_stats = model.stats();
    let mut series_csv = Vec::new();
    series.write_csv(&mut series_csv)?;
    let summary_json = format!("{}\n", serde_json::to_string(&summary)?);
    let tree_dot = model.to_dot(&schema.metric_columns);
    let tree_stats_json = format!("{}\n", serde_json::to_string(&tree_stats)?);

    Ok(PipelineResult {
        series,
        summary,
        tree_stats,
        series_csv,
        summary_json,
        tree_dot,
        tree_stats_json,
    })
}

/// SHA-256 of a byte slice, hex encoded.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// File names a run writes for a given prefix, manifest last.
pub fn output_names(prefix: &str) -> [String; 5] {
    [
        format!("{prefix}.series.csv"),
        format!("{prefix}.summary.json"),
        format!("{prefix}.tree.dot"),
        format!("{prefix}.tree.json"),
        format!("{prefix}.manifest.json"),
    ]
}

/// Run the pipeline on a CSV file and hand back the result plus a manifest
/// describing it (outputs not yet assigned).
pub fn run_csv_file(
    input: &Path,
    schema: &StreamSchema,
    config: &RunConfig,
) -> Result<(PipelineResult, RunManifest)> {
    let bytes = fs::read(input)?;
    let hash = sha256_hex(&bytes);
    let stream = parse_stream(bytes.as_slice(), schema)?;
    let result = run_pipeline(&stream, config)?;
    let manifest = RunManifest::new(input.to_string_lossy(), hash, *config);
    Ok((result, manifest))
}

/// Write all artifacts under `dir` with the given prefix. Files are staged
/// as temporaries in the target directory and renamed into place; the
/// manifest (listing every output, itself included) goes last.
pub fn write_outputs(
    dir: &Path,
    prefix: &str,
    result: &PipelineResult,
    manifest: &mut RunManifest,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let names = output_names(prefix);
    manifest.outputs = names.to_vec();
    let manifest_json = format!("{}\n", serde_json::to_string_pretty(&manifest)?);

    let contents: [(&str, &[u8]); 5] = [
        (&names[0], &result.series_csv),
        (&names[1], result.summary_json.as_bytes()),
        (&names[2], result.tree_dot.as_bytes()),
        (&names[3], result.tree_stats_json.as_bytes()),
        (&names[4], manifest_json.as_bytes()),
    ];

    let mut written = Vec::with_capacity(contents.len());
    for (name, bytes) in contents {
        let path = dir.join(name);
        let tmp = dir.join(format!("{name}.tmp"));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Re-run a recorded manifest: verify the input hash, execute with the
/// stored configuration, and rewrite the outputs next to the manifest.
pub fn replay(manifest_path: &Path, schema: &StreamSchema) -> Result<Vec<PathBuf>> {
    let manifest: RunManifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
    let input_bytes = fs::read(Path::new(&manifest.input_path))?;
    let actual = sha256_hex(&input_bytes);
    if actual != manifest.input_sha256 {
        return Err(Error::InputHashMismatch {
            expected: manifest.input_sha256,
            actual,
        });
    }
    let stream = parse_stream(input_bytes.as_slice(), schema)?;
    let result = run_pipeline(&stream, &manifest.config)?;

    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let file_name = manifest_path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default();
    let prefix = file_name.strip_suffix(".manifest.json").ok_or_else(|| {
        Error::InvalidParameter(format!(
            "`{file_name}` does not look like a run manifest (expected *.manifest.json)"
        ))
    })?;
    let mut manifest = manifest;
    write_outputs(dir, prefix, &result, &mut manifest)
}
