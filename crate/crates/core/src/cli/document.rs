//! Result documents and their JSON and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::spec::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// A residual compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Certificate {
    pub fn new(value: f64, tolerance: f64) -> Self {
        Self {
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub kind: String,
    pub spec: ProblemSpec,
    pub seed: u64,
    pub scalars: BTreeMap<String, f64>,
    pub certificates: BTreeMap<String, Certificate>,
    pub tables: Vec<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl ResultDocument {
    pub fn new(spec: ProblemSpec, seed: u64) -> Self {
        Self {
            kind: spec.kind().name().into(),
            spec,
            seed,
            scalars: BTreeMap::new(),
            certificates: BTreeMap::new(),
            tables: Vec::new(),
            wall_time_seconds: None,
        }
    }

    pub fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.into(), value);
    }

    pub fn certify(&mut self, name: &str, value: f64, tolerance: f64) {
        self.certificates.insert(name.into(), Certificate::new(value, tolerance));
    }

    pub fn all_certified(&self) -> bool {
        self.certificates.values().all(|c| c.passed)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.render_csv(),
        }
    }

    /// Scalars and certificates as `#` comment lines, then each table as a
    /// CSV block headed by `# table <name>`.
    fn render_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# kind {}", self.kind);
        let _ = writeln!(s, "# seed {}", self.seed);
        for (k, v) in &self.scalars {
            let _ = writeln!(s, "# scalar {k} = {v:e}");
        }
        for (k, c) in &self.certificates {
            let verdict = if c.passed { "pass" } else { "fail" };
            let _ = writeln!(s, "# certificate {k} = {:e} (tolerance {:e}, {verdict})", c.value, c.tolerance);
        }
        if let Some(t) = self.wall_time_seconds {
            let _ = writeln!(s, "# wall_time_seconds = {t}");
        }
        for table in &self.tables {
            let _ = writeln!(s, "# table {}", table.name);
            let _ = writeln!(s, "{}", table.columns.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
        }
        s
    }
}
