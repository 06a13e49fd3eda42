//! Data model for build-metric streams: schema, instances, CSV ingestion,
//! and date ordering.
//!
//! A stream is an ordered sequence of build instances. Each instance carries
//! a fixed-width vector of numeric source-code metrics, a second-resolution
//! timestamp, and a binary build outcome. Streams are parsed from CSV,
//! sorted by date, and then consumed incrementally by the learners.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timestamp format used everywhere: ISO-8601 without zone or sub-second
/// precision, so lexicographic order equals chronological order.
pub const DATE_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// The 15 basic software metrics.
pub const BASIC_METRICS: [&str; 15] = [
    "Number of Types Per Package",
    "Number of Comments",
    "Lines of Code",
    "Comment/Code Ratio",
    "Number of Import Statements",
    "Number of Interfaces",
    "Number of Methods",
    "Number of Parameters",
    "Number of Lines",
    "Average Number of Attributes Per Class",
    "Average Number of Constructors Per Class",
    "Average Number of Comments",
    "Average Lines of Code Per Method",
    "Average Number of Methods",
    "Average Number of Parameters",
];

/// The 6 dependency metrics.
pub const DEPENDENCY_METRICS: [&str; 6] = [
    "Abstractness",
    "Afferent Coupling",
    "Efferent Coupling",
    "Maintainability index",
    "Instability",
    "Normalized Distance",
];

/// The 2 complexity metrics.
pub const COMPLEXITY_METRICS: [&str; 2] = ["Average Block Depth", "Average Cyclomatic Complexity"];

/// The 3 cohesion metrics.
pub const COHESION_METRICS: [&str; 3] = [
    "Lack of Cohesion 1 (LCOM1)",
    "Lack of Cohesion 2 (LCOM2)",
    "Lack of Cohesion 3 (LCOM3)",
];

/// The 12 Halstead metrics.
pub const HALSTEAD_METRICS: [&str; 12] = [
    "Number of Operands",
    "Number of Operators",
    "Number of Unique Operands",
    "Number of Unique Operators",
    "Program Volume",
    "Difficulty Level",
    "Effort to Implement",
    "Number of Delivered Bugs",
    "Time to Implement",
    "Program Length",
    "Program Level",
    "Program Vocabulary Size",
];

/// Reserved column recording whether a row is original or synthetic.
pub const PROVENANCE_COLUMN: &str = "provenance";
/// Reserved column recording the seed and neighbor ids of a synthetic row.
pub const PARENTS_COLUMN: &str = "parents";

/// Binary build outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    Success,
    Failure,
}

impl ClassLabel {
    /// Dense index used by per-class statistics: Success = 0, Failure = 1.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            ClassLabel::Success => 0,
            ClassLabel::Failure => 1,
        }
    }

    /// The opposite label.
    pub fn other(self) -> ClassLabel {
        match self {
            ClassLabel::Success => ClassLabel::Failure,
            ClassLabel::Failure => ClassLabel::Success,
        }
    }

    /// Decode a CSV outcome token (case-insensitive).
    pub fn parse_token(token: &str) -> Option<ClassLabel> {
        if token.eq_ignore_ascii_case("success") {
            Some(ClassLabel::Success)
        } else if token.eq_ignore_ascii_case("failure") {
            Some(ClassLabel::Failure)
        } else {
            None
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::Success => write!(f, "success"),
            ClassLabel::Failure => write!(f, "failure"),
        }
    }
}

/// Where an instance came from: the original dataset, or SMOTE interpolation
/// between a seed instance and one of its neighbors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Original,
    Synthetic { seed_id: String, neighbor_id: String },
}

impl Provenance {
    pub fn is_synthetic(&self) -> bool {
        matches!(self, Provenance::Synthetic { .. })
    }
}

/// One build: metric vector, date, outcome, and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub date: NaiveDateTime,
    pub features: Vec<f64>,
    pub outcome: ClassLabel,
    pub provenance: Provenance,
}

/// Numeric encoding of the two outcomes in exported artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeEncoding {
    pub success: u8,
    pub failure: u8,
}

impl Default for OutcomeEncoding {
    fn default() -> Self {
        OutcomeEncoding {
            success: 1,
            failure: 0,
        }
    }
}

/// Ordered column layout of a build-metric CSV: the metric columns, the date
/// column, the outcome column, and the outcome encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSchema {
    pub metric_columns: Vec<String>,
    pub date_column: String,
    pub outcome_column: String,
    pub outcome_encoding: OutcomeEncoding,
}

impl StreamSchema {
    /// The canonical 38-metric schema: 15 basic, 6 dependency, 2 complexity,
    /// 3 cohesion, and 12 Halstead metrics, with `date` and `outcome`
    /// bookkeeping columns.
    pub fn canonical() -> StreamSchema {
        let metric_columns = BASIC_METRICS
            .iter()
            .chain(DEPENDENCY_METRICS.iter())
            .chain(COMPLEXITY_METRICS.iter())
            .chain(COHESION_METRICS.iter())
            .chain(HALSTEAD_METRICS.iter())
            .map(|s| s.to_string())
            .collect();
        StreamSchema::new(metric_columns, "date", "outcome")
            .expect("canonical schema is valid")
    }

    /// Build a custom schema. Column names must be unique, and the date and
    /// outcome columns must not collide with a metric column or the reserved
    /// provenance columns.
    pub fn new(
        metric_columns: Vec<String>,
        date_column: impl Into<String>,
        outcome_column: impl Into<String>,
    ) -> Result<StreamSchema> {
        let date_column = date_column.into();
        let outcome_column = outcome_column.into();
        if metric_columns.is_empty() {
            return Err(Error::Schema("schema needs at least one metric column".into()));
        }
        let mut seen = HashMap::new();
        for name in metric_columns
            .iter()
            .chain([&date_column, &outcome_column])
        {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::Schema(format!("duplicate column name `{name}`")));
            }
            if name == PROVENANCE_COLUMN || name == PARENTS_COLUMN {
                return Err(Error::Schema(format!("column name `{name}` is reserved")));
            }
        }
        Ok(StreamSchema {
            metric_columns,
            date_column,
            outcome_column,
            outcome_encoding: OutcomeEncoding::default(),
        })
    }

    /// Number of metric columns.
    pub fn n_features(&self) -> usize {
        self.metric_columns.len()
    }
}

/// An ordered sequence of instances sharing one schema, with O(1) class
/// counts. Immutable once built; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct LabeledStream {
    schema: Arc<StreamSchema>,
    instances: Vec<Instance>,
    success_count: usize,
    failure_count: usize,
}

impl LabeledStream {
    /// Build a stream, validating every instance against the schema:
    /// feature-vector width must match and all values must be finite.
    pub fn from_instances(
        schema: Arc<StreamSchema>,
        instances: Vec<Instance>,
    ) -> Result<LabeledStream> {
        let width = schema.n_features();
        let mut success_count = 0;
        let mut failure_count = 0;
        for inst in &instances {
            if inst.features.len() != width {
                return Err(Error::Schema(format!(
                    "instance `{}` has {} features, schema has {}",
                    inst.id,
                    inst.features.len(),
                    width
                )));
            }
            if let Some(pos) = inst.features.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!(
                    "instance `{}` has a non-finite value in column `{}`",
                    inst.id, schema.metric_columns[pos]
                )));
            }
            match inst.outcome {
                ClassLabel::Success => success_count += 1,
                ClassLabel::Failure => failure_count += 1,
            }
        }
        Ok(LabeledStream {
            schema,
            instances,
            success_count,
            failure_count,
        })
    }

    pub fn schema(&self) -> &Arc<StreamSchema> {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn get(&self, index: usize) -> Option<&Instance> {
        self.instances.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Instance> {
        self.instances.iter()
    }

    /// `(success, failure)` counts, maintained at construction time.
    pub fn class_counts(&self) -> (usize, usize) {
        (self.success_count, self.failure_count)
    }

    pub fn count_of(&self, label: ClassLabel) -> usize {
        match label {
            ClassLabel::Success => self.success_count,
            ClassLabel::Failure => self.failure_count,
        }
    }

    /// The class with strictly fewer instances; a tie counts Failure as the
    /// minority so oversampling targets failed builds first.
    pub fn minority_class(&self) -> ClassLabel {
        if self.success_count < self.failure_count {
            ClassLabel::Success
        } else {
            ClassLabel::Failure
        }
    }

    /// Stable sort by date: instances with equal dates keep their relative
    /// order. Idempotent, and a permutation of the input.
    pub fn sort_by_date(mut self) -> LabeledStream {
        self.instances.sort_by_key(|inst| inst.date);
        self
    }

    /// Append instances, rechecking schema invariants. Used by SMOTE to add
    /// a synthetic batch.
    pub(crate) fn with_appended(self, extra: Vec<Instance>) -> Result<LabeledStream> {
        let schema = Arc::clone(&self.schema);
        let mut instances = self.instances;
        instances.extend(extra);
        LabeledStream::from_instances(schema, instances)
    }
}

/// Parse a CSV byte source against a schema.
///
/// The header row must contain exactly the schema's columns (any order).
/// The reserved `provenance` and `parents` columns are accepted so that
/// oversampled exports can be re-ingested; any other extra column is a hard
/// error. Outcome tokens are `success`/`failure`, case-insensitive. Row
/// order is preserved and ids are assigned as `r1`, `r2`, ... by data row.
pub fn parse_stream(source: impl Read, schema: &StreamSchema) -> Result<LabeledStream> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let mut positions: HashMap<&str, usize> = HashMap::new();
    for (idx, name) in headers.iter().enumerate() {
        if positions.insert(name, idx).is_some() {
            return Err(Error::Schema(format!("duplicate column `{name}` in header")));
        }
    }

    let mut metric_idx = Vec::with_capacity(schema.n_features());
    for name in &schema.metric_columns {
        match positions.get(name.as_str()) {
            Some(&idx) => metric_idx.push(idx),
            None => return Err(Error::Schema(format!("missing column `{name}`"))),
        }
    }
    let date_idx = *positions
        .get(schema.date_column.as_str())
        .ok_or_else(|| Error::Schema(format!("missing column `{}`", schema.date_column)))?;
    let outcome_idx = *positions
        .get(schema.outcome_column.as_str())
        .ok_or_else(|| Error::Schema(format!("missing column `{}`", schema.outcome_column)))?;
    let provenance_idx = positions.get(PROVENANCE_COLUMN).copied();
    let parents_idx = positions.get(PARENTS_COLUMN).copied();

    let known: Vec<usize> = metric_idx
        .iter()
        .copied()
        .chain([date_idx, outcome_idx])
        .chain(provenance_idx)
        .chain(parents_idx)
        .collect();
    for (idx, name) in headers.iter().enumerate() {
        if !known.contains(&idx) {
            return Err(Error::Schema(format!("unknown column `{name}`")));
        }
    }

    let mut instances = Vec::new();
    for (row_0, record) in reader.records().enumerate() {
        let row = row_0 + 1;
        let record = record?;
        let mut features = Vec::with_capacity(metric_idx.len());
        for (&idx, name) in metric_idx.iter().zip(&schema.metric_columns) {
            let cell = record.get(idx).unwrap_or("");
            let value: f64 = cell.trim().parse().map_err(|_| Error::Row {
                row,
                message: format!("non-numeric value `{cell}` in column `{name}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Row {
                    row,
                    message: format!("non-finite value `{cell}` in column `{name}`"),
                });
            }
            features.push(value);
        }
        let date_cell = record.get(date_idx).unwrap_or("").trim();
        let date = NaiveDateTime::parse_from_str(date_cell, DATE_FORMAT).map_err(|_| Error::Row {
            row,
            message: format!(
                "invalid date `{date_cell}` (expected {})",
                "YYYY-MM-DDTHH:MM:SS"
            ),
        })?;
        let outcome_cell = record.get(outcome_idx).unwrap_or("").trim();
        let outcome = ClassLabel::parse_token(outcome_cell).ok_or_else(|| Error::Row {
            row,
            message: format!("unknown outcome token `{outcome_cell}`"),
        })?;

        let provenance = match provenance_idx {
            None => Provenance::Original,
            Some(idx) => {
                let tag = record.get(idx).unwrap_or("").trim();
                let parents = parents_idx
                    .and_then(|p| record.get(p))
                    .unwrap_or("")
                    .trim();
                decode_provenance(tag, parents).ok_or_else(|| Error::Row {
                    row,
                    message: format!("invalid provenance `{tag}` / parents `{parents}`"),
                })?
            }
        };

        instances.push(Instance {
            id: format!("r{row}"),
            date,
            features,
            outcome,
            provenance,
        });
    }

    LabeledStream::from_instances(Arc::new(schema.clone()), instances)
}

fn decode_provenance(tag: &str, parents: &str) -> Option<Provenance> {
    match tag {
        "" | "original" => Some(Provenance::Original),
        "synthetic" => {
            let (seed, neighbor) = parents.split_once(';')?;
            Some(Provenance::Synthetic {
                seed_id: seed.to_string(),
                neighbor_id: neighbor.to_string(),
            })
        }
        _ => None,
    }
}

/// Write a stream as CSV in schema order: date, metrics, outcome. With
/// `include_provenance`, two extra columns record each row's origin
/// (`provenance` = original|synthetic, `parents` = `seed_id;neighbor_id`).
///
/// Floats are written with the shortest representation that re-reads to the
/// identical value, so serialize-then-parse is lossless.
pub fn serialize_csv(
    stream: &LabeledStream,
    sink: impl Write,
    include_provenance: bool,
) -> Result<()> {
    let schema = stream.schema();
    let mut writer = csv::Writer::from_writer(sink);

    let mut header = Vec::with_capacity(schema.n_features() + 4);
    header.push(schema.date_column.as_str());
    for name in &schema.metric_columns {
        header.push(name.as_str());
    }
    header.push(schema.outcome_column.as_str());
    if include_provenance {
        header.push(PROVENANCE_COLUMN);
        header.push(PARENTS_COLUMN);
    }
    writer.write_record(&header)?;

    for inst in stream.iter() {
        let mut record = Vec::with_capacity(header.len());
        record.push(inst.date.format(DATE_FORMAT).to_string());
        for value in &inst.features {
            record.push(format_float(*value));
        }
        record.push(inst.outcome.to_string());
        if include_provenance {
            match &inst.provenance {
                Provenance::Original => {
                    record.push("original".to_string());
                    record.push(String::new());
                }
                Provenance::Synthetic { seed_id, neighbor_id } => {
                    record.push("synthetic".to_string());
                    record.push(format!("{seed_id};{neighbor_id}"));
                }
            }
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Shortest decimal text that parses back to the same f64. `{}` on f64
/// already produces the shortest round-trip form; integral values get a
/// trailing `.0` so metric cells stay visibly numeric.
pub(crate) fn format_float(value: f64) -> String {
    let mut buffer = format!("{value}");
    if !buffer.contains('.') && !buffer.contains('e') {
        buffer.push_str(".0");
    }
    buffer
}
