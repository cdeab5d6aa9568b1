//! Machine-readable experiment reports: named checks with tolerances plus an
//! optional table, serialized to JSON or RFC-4180-style CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct ResolvedConfig {
    pub grid_step: f64,
    pub grid_max: usize,
    pub t: f64,
    pub dim: usize,
    pub seed: u64,
    pub tol: f64,
    pub levels: usize,
    pub samples: usize,
}

/// A full experiment report.  Field order is fixed so that identical runs
/// serialize byte-identically; the timestamp is the only varying field and
/// sits last so consumers can strip it.
#[derive(Debug, Serialize)]
pub struct Report {
    pub subcommand: String,
    pub config: ResolvedConfig,
    pub tolerance: f64,
    pub worst_residual: f64,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    pub timestamp: String,
}

impl Report {
    pub fn new(subcommand: &str, config: ResolvedConfig) -> Self {
        Report {
            subcommand: subcommand.to_string(),
            config,
            tolerance: 0.0,
            worst_residual: 0.0,
            pass: true,
            checks: Vec::new(),
            table: None,
            timestamp: unix_timestamp(),
        }
    }

    /// Records a named residual check; the report fails if any check fails.
    pub fn check(&mut self, name: &str, residual: f64, tolerance: f64) {
        let pass = residual <= tolerance;
        self.pass &= pass;
        self.tolerance = self.tolerance.max(tolerance);
        self.worst_residual = self.worst_residual.max(residual);
        self.checks.push(Check { name: name.to_string(), residual, tolerance, pass });
    }

    /// Records a check of the form `value >= bound` (slack checks).
    pub fn check_at_least(&mut self, name: &str, value: f64, bound: f64) {
        // expressed as a residual so the report stays uniform
        self.check(name, (bound - value).max(0.0), 0.0);
    }

    /// Records a windowed metric (`lo <= value <= hi`), e.g. a convergence
    /// ratio.  Metrics gate the pass flag but are not residuals, so they do
    /// not enter `worst_residual`.
    pub fn metric(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        let pass = (lo..=hi).contains(&value);
        self.pass &= pass;
        self.checks.push(Check { name: name.to_string(), residual: value, tolerance: hi, pass });
    }

    pub fn set_table(&mut self, columns: Vec<&str>, rows: Vec<Vec<f64>>) {
        self.table = Some(Table { columns: columns.into_iter().map(String::from).collect(), rows });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV body: the table when present, otherwise the checks.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.table {
            Some(table) => {
                out.push_str(&table.columns.join(","));
                out.push('\n');
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            None => {
                out.push_str("check,residual,tolerance,pass\n");
                for c in &self.checks {
                    out.push_str(&format!("{},{:?},{:?},{}\n", c.name, c.residual, c.tolerance, c.pass));
                }
            }
        }
        out
    }

    /// Writes the report and returns the process exit code (0 pass, 1 fail).
    pub fn emit(&self, format: Format, out: Option<&Path>) -> std::io::Result<i32> {
        let body = match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        };
        match out {
            Some(path) => std::fs::write(path, body)?,
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                if body.ends_with('\n') {
                    write!(lock, "{body}")?;
                } else {
                    writeln!(lock, "{body}")?;
                }
            }
        }
        Ok(if self.pass { 0 } else { 1 })
    }
}

fn unix_timestamp() -> String {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into())
}
