//! Delimited-text dataset loading and benchmark result files.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

impl LabelColumn {
    fn describe(&self) -> String {
        match self {
            LabelColumn::Index(i) => i.to_string(),
            LabelColumn::Name(n) => format!("{n:?}"),
            LabelColumn::Last => "last".into(),
        }
    }
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Integers are zero-based indices, `last` is the final column, anything
    /// else is a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => s
                .parse()
                .map(LabelColumn::Index)
                .unwrap_or_else(|_| LabelColumn::Name(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    Char(char),
    /// Runs of spaces and tabs.
    Whitespace,
}

impl Default for Delimiter {
    fn default() -> Self {
        Delimiter::Char(',')
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub path: PathBuf,
    pub label_column: Option<LabelColumn>,
    pub delimiter: Delimiter,
    pub has_header: bool,
    pub standardize: bool,
    /// True number of clusters, if known.
    pub expected_k: Option<usize>,
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, path: impl Into<PathBuf>) -> Self {
        Self {
            name: name.into(),
            path: path.into(),
            label_column: None,
            delimiter: Delimiter::default(),
            has_header: false,
            standardize: false,
            expected_k: None,
        }
    }

    /// Manifests for the known benchmark files under `data_dir`.
    pub fn builtin(name: &str, data_dir: &Path) -> Option<Self> {
        let m = |file: &str, label, delimiter, has_header, k| Self {
            name: name.to_string(),
            path: data_dir.join(file),
            label_column: Some(label),
            delimiter,
            has_header,
            standardize: false,
            expected_k: Some(k),
        };
        let comma = Delimiter::Char(',');
        Some(match name {
            "iris" => m("iris.csv", LabelColumn::Index(4), comma, true, 3),
            "seeds" => m(
                "seeds_dataset.txt",
                LabelColumn::Index(7),
                Delimiter::Whitespace,
                false,
                3,
            ),
            "optdigits" => m("optdigits.tes", LabelColumn::Last, comma, false, 10),
            "pendigits" => m("pendigits.tes", LabelColumn::Last, comma, false, 10),
            "leukemia" => m("leukemia.csv", LabelColumn::Last, comma, true, 2),
            _ => return None,
        })
    }

    pub const BUILTIN: [&'static str; 5] = ["iris", "seeds", "optdigits", "pendigits", "leukemia"];
}

fn split_line(line: &str, delimiter: Delimiter) -> Vec<&str> {
    match delimiter {
        Delimiter::Whitespace => line.split_whitespace().collect(),
        Delimiter::Char(c) => line.split(c).map(str::trim).collect(),
    }
}

fn read_records(manifest: &DatasetManifest) -> Result<Vec<(usize, Vec<String>)>> {
    let io = |source| Error::Io {
        path: manifest.path.clone(),
        source,
    };
    let mut text = String::new();
    File::open(&manifest.path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(io)?;
    match manifest.delimiter {
        Delimiter::Whitespace => Ok(text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                (
                    i + 1,
                    split_line(l, manifest.delimiter)
                        .into_iter()
                        .map(String::from)
                        .collect(),
                )
            })
            .collect()),
        Delimiter::Char(c) => {
            let byte = u8::try_from(c).map_err(|_| {
                Error::InvalidParameter(format!("delimiter {c:?} is not a single byte"))
            })?;
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(byte)
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let mut out = Vec::new();
            for record in reader.records() {
                let record = record?;
                let line = record
                    .position()
                    .map_or(out.len() + 1, |p| p.line() as usize);
                if record.iter().all(str::is_empty) {
                    continue;
                }
                out.push((line, record.iter().map(String::from).collect()));
            }
            Ok(out)
        }
    }
}

/// Reads a delimited file into a dataset. Errors name the file, and parse
/// errors give the 1-based line and column of the offending cell.
pub fn load_csv(manifest: &DatasetManifest) -> Result<Dataset> {
    let mut records = read_records(manifest)?.into_iter();
    let header = if manifest.has_header {
        records.next().map(|(_, h)| h)
    } else {
        None
    };
    let records: Vec<(usize, Vec<String>)> = records.collect();
    let width = records
        .first()
        .map(|r| r.1.len())
        .or(header.as_ref().map(Vec::len))
        .unwrap_or(0);
    let missing = |column: String| Error::MissingLabelColumn {
        path: manifest.path.clone(),
        column,
    };
    let label = match &manifest.label_column {
        None => None,
        Some(LabelColumn::Index(i)) if *i < width => Some(*i),
        Some(LabelColumn::Last) if width > 0 => Some(width - 1),
        Some(LabelColumn::Name(name)) => Some(
            header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| missing(format!("{name:?}")))?,
        ),
        Some(other) => return Err(missing(other.describe())),
    };
    if records.is_empty() {
        return Err(Error::EmptyDataset {
            path: manifest.path.clone(),
        });
    }
    let d = width - usize::from(label.is_some());
    if d == 0 {
        return Err(Error::InvalidParameter(format!(
            "{}: no feature columns",
            manifest.path.display()
        )));
    }
    let mut values = Vec::with_capacity(records.len() * d);
    let mut labels = Vec::with_capacity(records.len());
    for (line, cells) in &records {
        if cells.len() != width {
            return Err(Error::Parse {
                path: manifest.path.clone(),
                row: *line,
                column: cells.len().min(width) + 1,
                cell: format!("<expected {width} cells, found {}>", cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            if Some(j) == label {
                labels.push(cell.clone());
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: manifest.path.clone(),
                    row: *line,
                    column: j + 1,
                    cell: cell.clone(),
                })?;
            values.push(v);
        }
    }
    let data = Dataset::new(manifest.name.clone(), d, values, label.map(|_| labels))?;
    Ok(if manifest.standardize {
        data.standardized()
    } else {
        data
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::InvalidParameter(format!(
                "unknown format {s:?}, expected json or csv"
            ))),
        }
    }
}

#[derive(Serialize)]
struct DocumentRef<'a, T> {
    schema_version: u32,
    records: &'a [T],
}

#[derive(Deserialize)]
struct Document<T> {
    schema_version: u32,
    records: Vec<T>,
}

/// Writes records as a versioned JSON document or as CSV whose columns follow
/// the field order of `T`.
pub fn write_results<T: Serialize>(records: &[T], path: &Path, format: OutputFormat) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    write_to(records, &mut out, format)?;
    out.flush().map_err(io)
}

pub fn write_to<T: Serialize, W: Write>(records: &[T], out: W, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Json => {
            let doc = DocumentRef {
                schema_version: SCHEMA_VERSION,
                records,
            };
            serde_json::to_writer_pretty(out, &doc)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
    }
    Ok(())
}

pub fn read_results<T: DeserializeOwned>(path: &Path, format: OutputFormat) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        OutputFormat::Json => {
            let doc: Document<T> = serde_json::from_reader(file)?;
            if doc.schema_version != SCHEMA_VERSION {
                return Err(Error::InvalidParameter(format!(
                    "unsupported schema_version {}",
                    doc.schema_version
                )));
            }
            Ok(doc.records)
        }
        OutputFormat::Csv => csv::Reader::from_reader(file)
            .deserialize()
            .map(|r| r.map_err(Error::from))
            .collect(),
    }
}
