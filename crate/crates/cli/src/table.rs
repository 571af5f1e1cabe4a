//! Wide CSV tables keyed by `snr_db`. Missing cells are left empty.

use std::io::Write;
use std::path::Path;

use crate::error::{invalid, CliResult};

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub snr_db: Vec<f64>,
    pub columns: Vec<(String, Vec<Option<f64>>)>,
}

impl Table {
    pub fn new(snr_db: Vec<f64>) -> Self {
        Self {
            snr_db,
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<Option<f64>>) {
        debug_assert_eq!(values.len(), self.snr_db.len());
        self.columns.push((name.into(), values));
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["snr_db".to_string()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (i, db) in self.snr_db.iter().enumerate() {
            let mut row = vec![db.to_string()];
            row.extend(
                self.columns
                    .iter()
                    .map(|(_, v)| v[i].map_or(String::new(), |x| format!("{x:e}"))),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One numeric column of a CSV file, with its `snr_db` grid.
#[derive(Debug, Clone)]
pub struct Column {
    pub label: String,
    pub snr_db: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

/// Column used when none is named: `fer`, then `fer_analytical`, then the
/// first column after `snr_db`.
fn default_column(headers: &csv::StringRecord) -> Option<usize> {
    ["fer", "fer_analytical"]
        .iter()
        .find_map(|name| headers.iter().position(|h| h == *name))
        .or_else(|| headers.iter().position(|h| h != "snr_db"))
}

pub fn read_column(path: &Path, column: Option<&str>) -> CliResult<Column> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let snr_idx = headers
        .iter()
        .position(|h| h == "snr_db")
        .ok_or_else(|| invalid(format!("{} has no snr_db column", path.display())))?;
    let idx = match column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("{} has no column `{name}`", path.display())))?,
        None => default_column(&headers).ok_or_else(|| invalid(format!("{} has no value column", path.display())))?,
    };
    let stem = path
        .file_stem()
        .map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
    let mut out = Column {
        label: format!("{stem}:{}", &headers[idx]),
        snr_db: Vec::new(),
        values: Vec::new(),
    };
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> CliResult<Option<f64>> {
            let cell = record.get(i).unwrap_or("").trim();
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse::<f64>().map(Some).map_err(|_| {
                invalid(format!(
                    "{} row {}: `{cell}` in column `{}` is not a number",
                    path.display(),
                    line + 2,
                    &headers[i]
                ))
            })
        };
        let snr =
            parse(snr_idx)?.ok_or_else(|| invalid(format!("{} row {}: empty snr_db", path.display(), line + 2)))?;
        out.snr_db.push(snr);
        out.values.push(parse(idx)?);
    }
    Ok(out)
}
