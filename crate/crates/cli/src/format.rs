//! Fixed-format CSV artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_bool(b: bool) -> String {
    u8::from(b).to_string()
}

/// One CSV file: a `# ` header block, a column line, then data rows.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, scenario: &str, resolved: &BTreeMap<String, String>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qlbe-core {}", qlbe_core::VERSION);
        let _ = writeln!(out, "# scenario = {scenario}");
        for (k, v) in resolved {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(
        &self,
        dir: &Path,
        name: &str,
        scenario: &str,
        resolved: &BTreeMap<String, String>,
    ) -> std::io::Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, self.render(scenario, resolved))?;
        Ok(path)
    }
}
