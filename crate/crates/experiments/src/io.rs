//! CSV sample tables, prediction files and result files.
//!
//! Sample files have a header row naming the input columns followed by one
//! response column (`x1,x2,y` or any other names); the input dimension is
//! the column count minus one. Leading lines starting with `#` are free-text
//! notes (units and the like) and are kept with the table. Numbers are
//! written in shortest round-trip form, so write-then-load is lossless.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{ExpError, Result};
use crate::result::ExperimentResult;

/// Inputs and responses read from one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    /// Input column names followed by the response column name.
    pub columns: Vec<String>,
    pub points: DMatrix<f64>,
    pub responses: Vec<f64>,
    /// Text of leading `#` lines, without the marker.
    pub notes: Vec<String>,
}

impl SampleTable {
    pub fn new(columns: Vec<String>, points: DMatrix<f64>, responses: Vec<f64>) -> Result<Self> {
        if columns.len() != points.ncols() + 1 {
            return Err(ExpError::Data(format!(
                "{} column names for {} inputs plus a response",
                columns.len(),
                points.ncols()
            )));
        }
        if points.nrows() != responses.len() {
            return Err(ExpError::Data(format!("{} points but {} responses", points.nrows(), responses.len())));
        }
        Ok(Self {
            columns,
            points,
            responses,
            notes: Vec::new(),
        })
    }

    /// Default column names `x1..xs, y`.
    pub fn default_columns(s: usize) -> Vec<String> {
        (1..=s).map(|k| format!("x{k}")).chain(std::iter::once("y".to_string())).collect()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            columns: self.columns.clone(),
            points: DMatrix::from_fn(rows.len(), self.dim(), |i, k| self.points[(rows[i], k)]),
            responses: rows.iter().map(|&i| self.responses[i]).collect(),
            notes: self.notes.clone(),
        }
    }
}

/// LF and HF tables of an external study, sharing one header.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalDataset {
    pub lf: SampleTable,
    pub hf: SampleTable,
}

impl ExternalDataset {
    pub fn new(lf: SampleTable, hf: SampleTable) -> Result<Self> {
        if lf.columns != hf.columns {
            return Err(ExpError::Data(format!(
                "LF columns {:?} do not match HF columns {:?}",
                lf.columns, hf.columns
            )));
        }
        Ok(Self { lf, hf })
    }

    pub fn dim(&self) -> usize {
        self.hf.dim()
    }

    pub fn columns(&self) -> &[String] {
        &self.hf.columns
    }
}

pub fn load_dataset(lf: &Path, hf: &Path) -> Result<ExternalDataset> {
    ExternalDataset::new(load_table(lf)?, load_table(hf)?)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| ExpError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| ExpError::io(path, e))
}

/// Loads a sample table (inputs plus a response column).
pub fn load_table(path: &Path) -> Result<SampleTable> {
    parse_table(&read(path)?, path)
}

/// Loads query points: every column is an input.
pub fn load_points(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let (columns, rows, _) = parse_rows(&read(path)?, path, 1)?;
    let s = columns.len();
    Ok((columns, DMatrix::from_fn(rows.len(), s, |i, k| rows[i][k])))
}

pub fn parse_table(text: &str, path: &Path) -> Result<SampleTable> {
    let (columns, rows, notes) = parse_rows(text, path, 2)?;
    let s = columns.len() - 1;
    let points = DMatrix::from_fn(rows.len(), s, |i, k| rows[i][k]);
    let responses = rows.iter().map(|r| r[s]).collect();
    Ok(SampleTable {
        columns,
        points,
        responses,
        notes,
    })
}

type Parsed = (Vec<String>, Vec<Vec<f64>>, Vec<String>);

fn parse_rows(text: &str, path: &Path, min_columns: usize) -> Result<Parsed> {
    let err = |line: u64, message: String| ExpError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let notes: Vec<String> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_string())
        .collect();
    let skipped = notes.len() as u64;
    let body: usize = text.split_inclusive('\n').take(notes.len()).map(str::len).sum();

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(&text.as_bytes()[body..]);
    let header_line = skipped + 1;
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| err(header_line, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if columns.len() < min_columns || columns.iter().any(String::is_empty) {
        return Err(err(
            header_line,
            format!("header needs at least {min_columns} non-empty column names, found {columns:?}"),
        ));
    }
    for (i, c) in columns.iter().enumerate() {
        if columns[..i].contains(c) {
            return Err(err(header_line, format!("column name {c:?} appears twice")));
        }
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(header_line + 1, |p| p.line() + skipped);
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line()) + skipped;
        let row = record
            .iter()
            .zip(&columns)
            .map(|(field, name)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(err(line, format!("column {name}: non-finite value {v}"))),
                Err(_) => Err(err(line, format!("column {name}: {field:?} is not a number"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(err(header_line + 1, "no data rows".into()));
    }
    Ok((columns, rows, notes))
}

fn csv_text(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV output is UTF-8")
}

pub fn table_to_csv(table: &SampleTable) -> String {
    let notes: String = table.notes.iter().map(|n| format!("# {n}\n")).collect();
    let rows = (0..table.len()).map(|i| {
        table
            .point(i)
            .into_iter()
            .chain(std::iter::once(table.responses[i]))
            .map(|v| v.to_string())
            .collect()
    });
    notes + &csv_text(&table.columns, rows)
}

pub fn write_table(table: &SampleTable, path: &Path) -> Result<()> {
    write(path, &table_to_csv(table))
}

/// Writes query points with a prediction column appended.
pub fn write_predictions(columns: &[String], points: &DMatrix<f64>, predictions: &[f64], path: &Path) -> Result<()> {
    let mut header = columns.to_vec();
    header.push("y".into());
    let rows = (0..points.nrows()).map(|i| {
        points
            .row(i)
            .iter()
            .copied()
            .chain(std::iter::once(predictions[i]))
            .map(|v| v.to_string())
            .collect()
    });
    write(path, &csv_text(&header, rows))
}

/// `<out>` plus a suffix, e.g. `results.csv` → `results.csv.meta.toml`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub const META_SUFFIX: &str = ".meta.toml";
pub const TIMING_SUFFIX: &str = ".timing.csv";
pub const REPEATS_SUFFIX: &str = ".repeats.csv";

/// Writes the result table and its sidecars:
///
/// * `<out>`: one row per (m, model) with
///   `family,m,model,mean_r2,std_r2,pearson_r2,n_repeats,seed`
/// * `<out>.repeats.csv`: the R² of every repeat or fold
/// * `<out>.meta.toml`: spec hash, version, domain, budgets, resample counts
/// * `<out>.timing.csv`: wall time per row (not deterministic)
///
/// All files except the timing sidecar are byte-identical across reruns.
pub fn write_result(result: &ExperimentResult, path: &Path) -> Result<()> {
    write(path, &result.to_csv())?;
    write(&sidecar(path, REPEATS_SUFFIX), &result.repeats_csv())?;
    write(&sidecar(path, META_SUFFIX), &result.meta_toml())?;
    write(&sidecar(path, TIMING_SUFFIX), &result.timing_csv())
}

pub(crate) fn result_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    csv_text(&header, rows)
}
