use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// CSV with a `#` comment preamble (config echo), one header row, data rows
/// and a `#` trailer for anything run-dependent such as wall time.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub preamble: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub trailer: Vec<String>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), ..Self::default() }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.preamble.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        for line in &self.preamble {
            writeln!(buf, "# {line}")?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        for line in &self.trailer {
            writeln!(buf, "# {line}")?;
        }
        Ok(buf)
    }

    /// Write to `path`, or stdout when `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        let bytes = self.render()?;
        match path {
            Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => io::stdout().write_all(&bytes).context("writing to stdout"),
        }
    }
}

/// Shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut t = Table::new(&["a", "method"]);
        t.comment("purcell rates");
        t.push(vec![num(0.5), "series(8,10)".into()]);
        t.trailer.push("wall_time_s=0.1".into());
        let s = String::from_utf8(t.render().unwrap()).unwrap();
        assert_eq!(s, "# purcell rates\na,method\n0.5,\"series(8,10)\"\n# wall_time_s=0.1\n");
    }
}
