//! CSV input and output. Inputs must have a header row; blank cells and
//! non-finite numbers are rejected rather than imputed.

use std::path::Path;

use crate::error::{invalid, CliError, CliResult};

pub struct Table {
    path: String,
    pub headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

pub fn read_table(path: &Path, field: &str) -> CliResult<Table> {
    if !path.is_file() {
        return Err(invalid!("{field}: no such file {}", path.display()));
    }
    let shown = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| invalid!("{field}: cannot open {shown}: {e}"))?;
    let headers = rdr
        .headers()
        .map_err(|e| invalid!("{field}: {shown}: {e}"))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = rdr
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| invalid!("{field}: {shown}: {e}"))?;
    if rows.is_empty() {
        return Err(invalid!("{field}: {shown} has no data rows"));
    }
    Ok(Table { path: shown, headers, rows })
}

impl Table {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn require_headers(&self, names: &[&str]) -> CliResult<()> {
        let ok = self.headers.len() == names.len()
            && self.headers.iter().zip(names).all(|(h, n)| h.eq_ignore_ascii_case(n));
        if ok {
            Ok(())
        } else {
            Err(invalid!(
                "{}: expected header `{}`, found `{}`",
                self.path,
                names.join(","),
                self.headers.join(",")
            ))
        }
    }

    fn where_(&self, row: usize, col: usize) -> String {
        // Row 0 is the first data line, which is line 2 of the file.
        format!("{} line {} column `{}`", self.path, row + 2, self.headers[col])
    }

    pub fn text(&self, row: usize, col: usize) -> CliResult<&str> {
        let v = &self.rows[row][col];
        if v.is_empty() {
            return Err(invalid!("{}: blank cell", self.where_(row, col)));
        }
        Ok(v)
    }

    pub fn real(&self, row: usize, col: usize) -> CliResult<f64> {
        let s = self.text(row, col)?;
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(invalid!("{}: non-finite value `{s}`", self.where_(row, col))),
            Err(_) => Err(invalid!("{}: not a number `{s}`", self.where_(row, col))),
        }
    }

    pub fn count(&self, row: usize, col: usize) -> CliResult<u64> {
        let s = self.text(row, col)?;
        s.parse::<u64>()
            .map_err(|_| invalid!("{}: not a non-negative integer `{s}`", self.where_(row, col)))
    }

    pub fn column(&self, col: usize) -> CliResult<Vec<f64>> {
        (0..self.len()).map(|r| self.real(r, col)).collect()
    }
}

/// Shortest round-trip decimal form; never locale dependent.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv<I>(path: &Path, headers: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e: csv::Error| CliError::Io {
        path: path.display().to_string(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(headers).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
