//! Tab-separated numeric tables: `# key: value` metadata lines, one header
//! row, then rows of numbers with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn number(out: &mut String, v: f64) {
    if v.is_finite() {
        write!(out, "{v:.16e}").unwrap();
    } else {
        write!(out, "{v}").unwrap();
    }
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { meta: Vec::new(), header, rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        out.push_str(&self.header.join("\t"));
        out.push('\n');
        for row in &self.rows {
            for (j, &v) in row.iter().enumerate() {
                if j > 0 {
                    out.push('\t');
                }
                number(&mut out, v);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = Table::default();
        let mut have_header = false;
        for (n, line) in text.lines().enumerate() {
            if let Some(m) = line.strip_prefix("# ") {
                let (k, v) = m
                    .split_once(": ")
                    .ok_or_else(|| Error::Config(format!("table line {}: bad metadata", n + 1)))?;
                t.meta.push((k.to_string(), v.to_string()));
            } else if !have_header {
                t.header = line.split('\t').map(str::to_string).collect();
                have_header = true;
            } else {
                let row = line
                    .split('\t')
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| Error::Config(format!("table line {}: bad number {s:?}", n + 1)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if row.len() != t.header.len() {
                    return Err(Error::Config(format!(
                        "table line {}: {} fields, header has {}",
                        n + 1,
                        row.len(),
                        t.header.len()
                    )));
                }
                t.rows.push(row);
            }
        }
        if !have_header {
            return Err(Error::Config("table has no header row".into()));
        }
        Ok(t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = Table::new(vec!["time".into(), "x".into()]).meta("seed", 7);
        t.push(vec![0.1, -1.0 / 3.0]);
        t.push(vec![f64::MIN_POSITIVE, 1e300]);
        t.push(vec![f64::NAN, f64::INFINITY]);
        let back = Table::parse(&t.render()).unwrap();
        assert_eq!(back.meta, t.meta);
        assert_eq!(back.rows[0], t.rows[0]);
        assert_eq!(back.rows[1], t.rows[1]);
        assert!(back.rows[2][0].is_nan() && back.rows[2][1] == f64::INFINITY);
        assert_eq!(back.render(), t.render());
    }
}
