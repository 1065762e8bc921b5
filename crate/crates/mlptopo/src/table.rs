//! Delimited numeric tables with a header row.

use std::path::Path;

use mlptopo_core::dataset::{group_rows, ClassGrouping, GroupedCloud};

use crate::error::{Error, Result};

/// Feature columns of the UCI cardiotocography table.
pub const CARDIOTOCOGRAPHY_FEATURES: [&str; 21] = [
    "LB", "AC", "FM", "UC", "DL", "DS", "DP", "ASTV", "MSTV", "ALTV", "MLTV", "Width", "Min", "Max", "Nmax",
    "Nzeros", "Mode", "Mean", "Median", "Variance", "Tendency",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub label_column: String,
    /// Columns used as coordinates, in order. Empty means every column except
    /// the label column and `exclude`.
    pub feature_columns: Vec<String>,
    pub exclude: Vec<String>,
    pub grouping: ClassGrouping,
    pub normalize: bool,
}

/// `;` if the header holds more semicolons than commas, else `,`.
pub fn detect_delimiter(header: &str) -> u8 {
    let count = |c| header.bytes().filter(|&b| b == c).count();
    if count(b';') > count(b',') {
        b';'
    } else {
        b','
    }
}

pub fn load_table(path: &Path, spec: &TableSpec) -> Result<GroupedCloud> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::artifact(path, e))?;
    parse_table(&text, spec, path)
}

/// Malformed contents are artifact errors attributed to `origin`; unknown
/// columns and unmapped labels are configuration errors.
pub fn parse_table(text: &str, spec: &TableSpec, origin: &Path) -> Result<GroupedCloud> {
    let bad = |reason: String| Error::artifact(origin, reason);
    let header = text.lines().next().ok_or_else(|| bad("table has no header row".into()))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(header))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::config(format!("unknown column `{name}`")))
    };
    let label = column(&spec.label_column)?;
    for name in &spec.exclude {
        column(name)?;
    }
    let features: Vec<usize> = if spec.feature_columns.is_empty() {
        (0..headers.len())
            .filter(|&i| i != label && !spec.exclude.iter().any(|x| x == &headers[i]))
            .collect()
    } else {
        spec.feature_columns.iter().map(|c| column(c)).collect::<Result<_>>()?
    };
    if features.is_empty() {
        return Err(Error::config("table has no feature columns"));
    }
    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let line = n + 2;
        let row = features
            .iter()
            .map(|&i| {
                let cell = record.get(i).unwrap_or("");
                cell.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                    bad(format!("line {line}, column `{}`: non-numeric value {cell:?}", &headers[i]))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
        raw_labels.push(record.get(label).unwrap_or("").to_string());
    }
    if rows.is_empty() {
        return Err(bad("table has no data rows".into()));
    }
    Ok(group_rows(&rows, &raw_labels, &spec.grouping, spec.normalize)?)
}
