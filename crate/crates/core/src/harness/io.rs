//! Readers and writers for distance matrices, query-distance lists and
//! pattern sets.
//!
//! * Distance matrix (CSV): square `N × N`, optional header row of class ids,
//!   diagonal ignored (may be empty). Row `i` holds class `i`'s distances.
//! * Distance map (JSON): `{"class_id": [d, ...], ...}` in file order.
//! * Query distances (CSV): header `query,true_class,claimed_class,distance`.
//! * Pattern set: CSV with one vector per row (optional header), or a JSON
//!   array of arrays.

use std::io::{BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;

use crate::distances::{unbound_transform, PatternSet};
use crate::error::{json_err, open_file};
use crate::model::InterClassDistances;
use crate::synth::QueryDistance;
use crate::{Error, Result};

/// Off-diagonal pairs further apart than this trigger an asymmetry warning.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceFormat {
    Csv,
    Json,
}

impl DistanceFormat {
    /// Guess from the file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

impl FromStr for DistanceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

/// Per-class distance lists plus any non-fatal warnings raised while loading.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    pub classes: Vec<InterClassDistances>,
    pub warnings: Vec<String>,
}

impl DistanceTable {
    pub fn pooled(&self) -> Vec<f64> {
        self.classes
            .iter()
            .flat_map(|c| c.distances.iter().copied())
            .collect()
    }
}

fn parse_err(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

fn csv_records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(open_file(path)?);
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn looks_numeric(row: &[String]) -> bool {
    row.iter().all(|f| f.is_empty() || f.parse::<f64>().is_ok())
}

/// Loads per-class distance lists; `bounded` maps every value through
/// [`unbound_transform`] first.
pub fn load_distances(path: &Path, format: DistanceFormat, bounded: bool) -> Result<DistanceTable> {
    match format {
        DistanceFormat::Csv => load_matrix_csv(path, bounded),
        DistanceFormat::Json => load_map_json(path, bounded),
    }
}

fn transform(value: f64, bounded: bool) -> std::result::Result<f64, String> {
    if bounded {
        unbound_transform(value).map_err(|e| e.to_string())
    } else {
        Ok(value)
    }
}

fn load_matrix_csv(path: &Path, bounded: bool) -> Result<DistanceTable> {
    let mut rows = csv_records(path)?;
    if rows.is_empty() {
        return Err(parse_err(path, 1, 1, "file contains no rows"));
    }
    let header = if looks_numeric(&rows[0].1) {
        None
    } else {
        Some(rows.remove(0))
    };
    let n = rows.len();
    let ids: Vec<String> = match &header {
        Some((line, h)) => {
            if h.len() != n {
                return Err(parse_err(
                    path,
                    *line,
                    1,
                    format!("header names {} classes but matrix has {n} rows", h.len()),
                ));
            }
            h.clone()
        }
        None => (0..n).map(|i| i.to_string()).collect(),
    };

    let mut matrix = vec![vec![f64::NAN; n]; n];
    for (i, (line, row)) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(parse_err(
                path,
                *line,
                row.len().min(n) + 1,
                format!("row {} has {} fields, expected {n}", i + 1, row.len()),
            ));
        }
        for (j, field) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            let raw: f64 = field.parse().map_err(|_| {
                parse_err(
                    path,
                    *line,
                    j + 1,
                    format!("row {}: `{field}` is not a number", i + 1),
                )
            })?;
            matrix[i][j] = transform(raw, bounded)
                .map_err(|m| parse_err(path, *line, j + 1, format!("row {}: {m}", i + 1)))?;
        }
    }

    let mut warnings = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if (matrix[i][j] - matrix[j][i]).abs() > SYMMETRY_TOL {
                warnings.push(format!(
                    "asymmetric distances: [{}][{}] = {} but [{}][{}] = {}",
                    ids[i], ids[j], matrix[i][j], ids[j], ids[i], matrix[j][i]
                ));
            }
        }
    }

    let classes = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let row = (0..n).filter(|&j| j != i).map(|j| matrix[i][j]).collect();
            InterClassDistances::new(id, row)
                .map_err(|e| parse_err(path, rows[i].0, 1, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceTable { classes, warnings })
}

fn load_map_json(path: &Path, bounded: bool) -> Result<DistanceTable> {
    let map: IndexMap<String, Vec<f64>> =
        serde_json::from_reader(BufReader::new(open_file(path)?)).map_err(|e| json_err(path, e))?;
    let classes = map
        .into_iter()
        .enumerate()
        .map(|(i, (id, values))| {
            let values = values
                .into_iter()
                .enumerate()
                .map(|(j, v)| {
                    transform(v, bounded)
                        .map_err(|m| parse_err(path, i + 1, j + 1, format!("class `{id}`: {m}")))
                })
                .collect::<Result<Vec<_>>>()?;
            InterClassDistances::new(id, values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceTable {
        classes,
        warnings: Vec::new(),
    })
}

/// Writes a square distance matrix with a header row of class ids.
pub fn write_matrix_csv<W: Write>(out: W, ids: &[String], matrix: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ids)?;
    for row in matrix {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_query_distances<W: Write>(out: W, trials: &[QueryDistance]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in trials {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_query_distances(path: &Path, bounded: bool) -> Result<Vec<QueryDistance>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open_file(path)?);
    let mut out = Vec::new();
    for rec in reader.deserialize::<QueryDistance>() {
        let mut t = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, 1, e.to_string())
        })?;
        t.distance =
            transform(t.distance, bounded).map_err(|m| parse_err(path, out.len() + 2, 4, m))?;
        out.push(t);
    }
    Ok(out)
}

/// Loads one pattern set; the class label is the file stem.
pub fn load_pattern_set(path: &Path, format: DistanceFormat) -> Result<PatternSet> {
    let label = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("set")
        .to_owned();
    let vectors: Vec<Vec<f64>> = match format {
        DistanceFormat::Json => serde_json::from_reader(BufReader::new(open_file(path)?))
            .map_err(|e| json_err(path, e))?,
        DistanceFormat::Csv => {
            let mut rows = csv_records(path)?;
            if rows.first().is_some_and(|(_, r)| !looks_numeric(r)) {
                rows.remove(0);
            }
            rows.into_iter()
                .map(|(line, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, f)| {
                            f.parse::<f64>().map_err(|_| {
                                parse_err(path, line, j + 1, format!("`{f}` is not a number"))
                            })
                        })
                        .collect()
                })
                .collect::<Result<_>>()?
        }
    };
    PatternSet::new(label, vectors)
}
