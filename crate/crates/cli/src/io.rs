//! Input parsing and tabular output.

use std::fs;
use std::path::Path;

use bmt_core::matrix::IntegerMatrix;
use bmt_core::tree::{parse_newick, RootedTree};
use serde::Serialize;

use crate::error::CliError;

/// Inline Newick (ends with `;`) or a path to a file holding one.
pub fn read_tree(arg: &str) -> Result<RootedTree, CliError> {
    let text = if arg.trim_end().ends_with(';') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Io(format!("cannot read tree file {arg}: {e}")))?
    };
    parse_newick(text.trim()).map_err(|e| CliError::Parse(format!("bad tree {}: {e}", text.trim())))
}

/// Square matrix of floats from CSV; a first row that does not parse as
/// numbers is taken as a header.
pub fn read_covariance(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read covariance file {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse(format!("covariance csv: {e}")))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(CliError::Parse(format!("covariance csv row {}: {e}", k + 1))),
        }
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Parse(format!("covariance csv must be square, got {n} rows")));
    }
    Ok(rows)
}

#[derive(Serialize)]
pub struct LabelledMatrix {
    pub name: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub rows: Vec<Vec<i64>>,
}

impl LabelledMatrix {
    pub fn from_integer(name: &str, m: &IntegerMatrix) -> Self {
        let labels = |l: Option<&[String]>, k: usize| match l {
            Some(v) => v.to_vec(),
            None => (0..k).map(|i| i.to_string()).collect(),
        };
        LabelledMatrix {
            name: name.to_string(),
            row_labels: labels(m.row_labels(), m.rows()),
            col_labels: labels(m.col_labels(), m.cols()),
            rows: (0..m.rows())
                .map(|r| m.row(r).iter().map(|x| i64::try_from(x).expect("small entries")).collect())
                .collect(),
        }
    }

    /// Header row of column labels, then one row per matrix row led by its
    /// label.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (label, row) in self.row_labels.iter().zip(&self.rows) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn to_text(&self) -> String {
        let width = self.col_labels.iter().chain(&self.row_labels).map(String::len).max().unwrap_or(1);
        let mut out = format!("{}\n{:>width$}", self.name, "");
        for c in &self.col_labels {
            out.push_str(&format!(" {c:>width$}"));
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.rows) {
            out.push_str(&format!("{label:>width$}"));
            for x in row {
                out.push_str(&format!(" {x:>width$}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Rows of string cells as CSV.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
