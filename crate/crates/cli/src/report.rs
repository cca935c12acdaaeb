//! Serializable report records and the output directory writer.

use std::path::{Path, PathBuf};

use chaoskit::measure::Kernel;
use chaoskit::verify::{CheckReport, CheckRow, ExpectationMethod, ExpectationResult, WitnessTable};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct RowRecord {
    pub label: String,
    pub expected: f64,
    pub actual: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl From<&CheckRow> for RowRecord {
    fn from(r: &CheckRow) -> Self {
        Self {
            label: r.label.clone(),
            expected: r.expected,
            actual: r.actual,
            discrepancy: r.discrepancy,
            tolerance: r.tolerance,
            passed: r.passed(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub max_discrepancy: f64,
    pub tolerance_used: f64,
    pub rows: Vec<RowRecord>,
}

impl From<&CheckReport> for CheckRecord {
    fn from(r: &CheckReport) -> Self {
        Self {
            name: r.name.clone(),
            passed: r.passed,
            max_discrepancy: r.max_discrepancy,
            tolerance_used: r.tolerance_used,
            rows: r.details.iter().map(RowRecord::from).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ExpectationRecord {
    pub value: f64,
    pub method: &'static str,
    pub truncation_mass: f64,
    pub truncation_slack: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl From<&ExpectationResult> for ExpectationRecord {
    fn from(e: &ExpectationResult) -> Self {
        Self {
            value: e.value,
            method: match e.method {
                ExpectationMethod::ExactTruncated => "exact-truncated",
                ExpectationMethod::MonteCarlo => "monte-carlo",
            },
            truncation_mass: e.truncation_mass,
            truncation_slack: e.truncation_slack,
            stderr: e.stderr,
            samples: e.samples,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct KernelRecord {
    pub q: usize,
    pub values: serde_json::Value,
}

impl KernelRecord {
    pub fn new(q: usize, k: &Kernel) -> Self {
        fn nest(values: &[f64], atoms: usize, depth: usize) -> serde_json::Value {
            if depth == 0 {
                return serde_json::json!(values[0]);
            }
            let chunk = values.len() / atoms;
            serde_json::Value::Array(values.chunks(chunk).map(|c| nest(c, atoms, depth - 1)).collect())
        }
        Self {
            q,
            values: nest(k.values(), k.atoms(), k.order()),
        }
    }
}

/// CSV with one row per kernel entry: `q`, the argument tuple, the value.
pub fn kernels_csv(kernels: &[(usize, &Kernel)]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["q", "args", "value"]).map_err(csv_err)?;
    for &(q, k) in kernels {
        let atoms = k.atoms().max(1);
        for (flat, v) in k.values().iter().enumerate() {
            let mut args = vec![0usize; k.order()];
            let mut code = flat;
            for slot in args.iter_mut().rev() {
                *slot = code % atoms;
                code /= atoms;
            }
            let args: Vec<String> = args.iter().map(usize::to_string).collect();
            w.write_record([q.to_string(), args.join(" "), format_f64(*v)]).map_err(csv_err)?;
        }
    }
    finish_csv(w)
}

pub fn check_csv(report: &CheckReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.details {
        w.serialize(RowRecord::from(row)).map_err(csv_err)?;
    }
    finish_csv(w)
}

pub fn witness_csv(table: &WitnessTable) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["upper", "step", "atoms", "sigma_mass", "local_mass"]).map_err(csv_err)?;
    for r in &table.rows {
        w.write_record([
            format_f64(r.upper),
            format_f64(r.step),
            r.atoms.to_string(),
            format_f64(r.sigma_mass),
            format_f64(r.local_mass),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

fn format_f64(x: f64) -> String {
    format!("{x:e}")
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io {
        path: "<csv>".into(),
        source: std::io::Error::other(e),
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: "<csv>".into(),
        source: std::io::Error::other(e.to_string()),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report records serialize");
    s.push('\n');
    s
}

/// Files produced by a command, plus the summary lines.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub summary: Vec<String>,
    pub passed: bool,
}

impl Output {
    pub fn new() -> Self {
        Self {
            passed: true,
            ..Self::default()
        }
    }

    pub fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn line(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    /// Writes every file and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir.to_path_buf(), e))?;
        let mut summary = self.summary.join("\n");
        summary.push('\n');
        let all = self.files.iter().map(|(n, c)| (n.as_str(), c.as_str()));
        for (name, contents) in all.chain(std::iter::once(("summary.txt", summary.as_str()))) {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| io_err(path, e))?;
        }
        Ok(())
    }
}

fn io_err(path: PathBuf, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}
