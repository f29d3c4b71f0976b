//! Files written by the commands: CSV tables with a `#` comment block, JSON
//! sidecars and gnuplot stubs. Floats are written in shortest round-trip form
//! and nothing depends on the clock, so equal inputs give equal bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use crate::error::{Error, Result};

/// A CSV table built in memory.
pub struct Table {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for c in &self.comments {
            out.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Shortest round-trip form; switches to exponent notation for very large
/// and very small magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Everything needed to repeat a run: feeding the file back through
/// `--config` restores `config`, seed included.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, R: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub resolved: R,
    pub outputs: Vec<String>,
}

/// Output directory with a record of the files written to it.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        self.write(name, &table.to_bytes()?)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Writes `<command>.manifest.json` listing every file written so far.
    pub fn manifest<R: Serialize>(
        &mut self,
        command: &'static str,
        config: &RunConfig,
        resolved: R,
    ) -> Result<()> {
        let manifest = Manifest {
            schema_version: config.schema_version,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            resolved,
            outputs: self.written.clone(),
        };
        self.json(&format!("{command}.manifest.json"), &manifest)
    }
}

/// Gnuplot script plotting columns of a CSV written next to it.
pub fn gnuplot_stub(
    data: &str,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    logscale: &str,
    plots: &[(usize, usize, &str)],
) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"));
    if !logscale.is_empty() {
        s.push_str(&format!("set logscale {logscale}\n"));
    }
    let lines: Vec<String> = plots
        .iter()
        .map(|(x, y, t)| format!("'{data}' using {x}:{y} with linespoints title '{t}'"))
        .collect();
    s.push_str(&format!("plot {}\n", lines.join(", \\\n     ")));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.comment("units: a=1");
        t.row(vec![num(0.1), num(2.0)]);
        t.row(vec![num(1e-300), opt(None)]);
        let s = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(s, "# units: a=1\na,b\n0.1,2.0\n1e-300,\n");
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("x.csv", b"a\n").unwrap();
        let cfg = RunConfig {
            schema_version: 1,
            ..Default::default()
        };
        out.manifest("test", &cfg, ()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("test.manifest.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["outputs"][0], "x.csv");
        assert_eq!(v["config"]["schema_version"], 1);
    }
}
