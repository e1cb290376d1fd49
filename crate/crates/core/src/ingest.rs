//! CSV ingestion, kind inference, name tokenization and discretization.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Attribute, AttributeKind, Dataset, Values};

/// Fraction of non-null cells that must parse as finite numbers for a column to be numeric.
pub const NUMERIC_RATIO_THRESHOLD: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeInferenceReport {
    pub attribute: String,
    pub kind: AttributeKind,
    pub numeric_ratio: f64,
}

/// Splits an attribute name into lowercase tokens.
///
/// Breaks on every non-alphanumeric character and on lower-to-upper case
/// transitions, so `u_heightCode` becomes `["u", "height", "code"]`. Runs of
/// capitals stay together.
pub fn tokenize(name: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if !c.is_alphanumeric() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            prev_lower = false;
            continue;
        }
        if c.is_uppercase() && prev_lower && !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        current.extend(c.to_lowercase());
        prev_lower = c.is_lowercase();
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn is_null_cell(raw: &str) -> bool {
    let t = raw.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("null")
}

fn parse_number(raw: &str) -> Option<f64> {
    raw.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Infers a column's kind from its raw cells (nulls already removed as `None`).
pub fn infer_column(name: &str, cells: Vec<Option<String>>) -> (Attribute, TypeInferenceReport) {
    let non_null = cells.iter().flatten().count();
    let parsed = cells.iter().flatten().filter(|c| parse_number(c).is_some()).count();
    let numeric_ratio = if non_null == 0 {
        0.0
    } else {
        parsed as f64 / non_null as f64
    };
    let kind = if numeric_ratio >= NUMERIC_RATIO_THRESHOLD {
        AttributeKind::Numeric
    } else {
        AttributeKind::Categorical
    };
    let attr = match kind {
        AttributeKind::Numeric => Attribute::numeric(
            name,
            cells
                .iter()
                .map(|c| c.as_deref().and_then(parse_number))
                .collect(),
        ),
        AttributeKind::Categorical => Attribute::categorical(name, cells),
    };
    let report = TypeInferenceReport {
        attribute: name.to_string(),
        kind,
        numeric_ratio,
    };
    (attr, report)
}

/// Reads a dataset from any CSV source, returning per-column inference reports.
pub fn read_dataset_with_report<R: Read>(
    reader: R,
    name: &str,
) -> Result<(Dataset, Vec<TypeInferenceReport>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::MalformedCsv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() {
        return Err(Error::MalformedCsv("missing header row".into()));
    }
    let mut columns: Vec<Vec<Option<String>>> = vec![Vec::new(); headers.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            col.push((!is_null_cell(cell)).then(|| cell.to_string()));
        }
    }
    let mut attributes = Vec::with_capacity(headers.len());
    let mut reports = Vec::with_capacity(headers.len());
    for (header, cells) in headers.iter().zip(columns) {
        let (attr, report) = infer_column(header, cells);
        attributes.push(attr);
        reports.push(report);
    }
    Ok((Dataset::new(name, attributes)?, reports))
}

pub fn read_dataset<R: Read>(reader: R, name: &str) -> Result<Dataset> {
    read_dataset_with_report(reader, name).map(|(ds, _)| ds)
}

/// Loads a CSV file with a mandatory header row.
pub fn load_dataset(path: impl AsRef<Path>, name: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, name)
}

/// Dataset name derived from a file path (its stem).
pub fn dataset_name_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

/// Writes a dataset as CSV. Nulls become empty cells.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::MalformedCsv(e.to_string());
    w.write_record(dataset.names()).map_err(to_err)?;
    for row in 0..dataset.row_count() {
        let record: Vec<String> = dataset
            .attributes()
            .iter()
            .map(|a| match a.values() {
                Values::Numeric(v) => v[row].map(|x| x.to_string()).unwrap_or_default(),
                Values::Categorical(v) => v[row].clone().unwrap_or_default(),
            })
            .collect();
        w.write_record(&record).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn bin_label(k: usize) -> String {
    format!("bin_{k}")
}

/// Equal-width bin index of `value` over `[min, max]`. The maximum lands in the last bin.
pub fn bin_index(value: f64, min: f64, max: f64, bins: usize) -> usize {
    if max <= min {
        return 0;
    }
    let width = (max - min) / bins as f64;
    let k = ((value - min) / width).floor();
    (k.max(0.0) as usize).min(bins - 1)
}

/// Converts a numeric attribute to `bin_k` labels using equal-width bins.
pub fn discretize(attr: &Attribute, bins: usize) -> Result<Attribute> {
    let values = attr
        .numeric_values()
        .ok_or_else(|| Error::NotNumeric(attr.name().to_string()))?;
    if bins == 0 {
        return Err(Error::NonPositiveParam {
            name: "bins",
            value: 0,
        });
    }
    let (min, max) = values
        .iter()
        .flatten()
        .fold(None, |acc: Option<(f64, f64)>, &x| match acc {
            None => Some((x, x)),
            Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
        })
        .ok_or_else(|| Error::EmptyAttribute(attr.name().to_string()))?;
    let labels = values
        .iter()
        .map(|v| v.map(|x| bin_label(bin_index(x, min, max, bins))))
        .collect();
    Ok(Attribute::categorical(attr.name(), labels))
}
