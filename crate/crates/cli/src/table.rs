//! Columnar text output with deterministic float formatting.

use std::fmt::Write as _;
use std::path::Path;

use crate::{CliError, CliResult};

/// Fixed-width scientific notation; identical inputs give identical bytes.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // avoid printing negative zero
        return format!("{:.12e}", 0.0);
    }
    format!("{x:.12e}")
}

/// A tab-separated table preceded by `#` comment lines.
#[derive(Debug, Clone, Default)]
pub struct Table {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    /// `columns` are `(name, unit)` pairs.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        let mut t = Self::default();
        t.comments.push(format!(
            "columns: {}",
            columns.iter().map(|(n, u)| format!("{n}[{u}]")).collect::<Vec<_>>().join(" ")
        ));
        t.columns = columns.iter().map(|(n, _)| n.to_string()).collect();
        t
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.insert(self.comments.len() - 1, line.into());
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join("\t"));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join("\t"));
        }
        out
    }
}

/// `key<TAB>value` records.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn put(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.lines.push((key.to_string(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.put(key, num(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_stable() {
        assert_eq!(num(-0.0), num(0.0));
        assert_eq!(num(1.0), "1.000000000000e0");
        let mut t = Table::new(&[("t", "time"), ("p0", "1")]);
        t.comment("run");
        t.row(vec![num(0.0), num(0.5)]);
        assert_eq!(t.render(), "# run\n# columns: t[time] p0[1]\nt\tp0\n0.000000000000e0\t5.000000000000e-1\n");
    }
}
