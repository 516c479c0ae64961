//! Result tables: a `# {json}` provenance line followed by CSV rows.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    /// `key=value` pairs joined by `;`.
    pub parameters: String,
    pub value_re: f64,
    pub value_im: f64,
    pub reference_re: f64,
    pub reference_im: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    /// `pass`, `fail`, or empty when the row carries no check.
    pub status: String,
    pub runtime_s: f64,
}

impl ResultRow {
    pub fn new(experiment: &str, parameters: String, value: C64, reference: C64) -> Self {
        let abs = (value - reference).norm();
        let rel = if reference.norm() > 0.0 { abs / reference.norm() } else { abs };
        Self {
            experiment: experiment.to_string(),
            parameters,
            value_re: value.re,
            value_im: value.im,
            reference_re: reference.re,
            reference_im: reference.im,
            abs_error: abs,
            rel_error: rel,
            status: String::new(),
            runtime_s: 0.0,
        }
    }

    pub fn check(mut self, ok: bool) -> Self {
        self.status = if ok { "pass" } else { "fail" }.to_string();
        self
    }

    pub fn timed(mut self, seconds: f64) -> Self {
        self.runtime_s = seconds;
        self
    }

    pub fn failed(&self) -> bool {
        self.status == "fail"
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn push(&mut self, row: ResultRow) {
        self.rows.push(row);
    }

    pub fn failures(&self) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.failed()).collect()
    }

    /// Writes the table. In deterministic mode runtimes are written as zero
    /// so repeated runs produce identical bytes.
    pub fn write_csv(&self, path: &Path, header: &serde_json::Value, deterministic: bool) -> Result<()> {
        let io = |e: std::io::Error| Error::Config(format!("{}: {e}", path.display()));
        let mut file = std::fs::File::create(path).map_err(io)?;
        writeln!(file, "# {header}").map_err(io)?;
        let mut w = csv::Writer::from_writer(file);
        for row in &self.rows {
            let mut row = row.clone();
            if deterministic {
                row.runtime_s = 0.0;
            }
            w.serialize(row)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
        w.flush().map_err(io)
    }
}

/// Writes plain numeric columns with a header row.
pub fn write_columns(path: &Path, names: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(names).map_err(err)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:.17e}"))).map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_tables_are_byte_identical() {
        let dir = std::env::temp_dir().join(format!("czq-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut t = ResultTable::default();
        t.push(ResultRow::new("x", "a=1".into(), C64::new(1.0, 2.0), C64::new(1.0, 0.0)).timed(0.5));
        let header = serde_json::json!({"config_hash": "abc"});
        let (p1, p2) = (dir.join("a.csv"), dir.join("b.csv"));
        t.write_csv(&p1, &header, true).unwrap();
        t.rows[0].runtime_s = 9.0;
        t.write_csv(&p2, &header, true).unwrap();
        let a = std::fs::read(&p1).unwrap();
        assert_eq!(a, std::fs::read(&p2).unwrap());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("# {\"config_hash\":\"abc\"}\n"));
        assert!(text.contains("rel_error"));
        std::fs::remove_dir_all(dir).ok();
    }
}
