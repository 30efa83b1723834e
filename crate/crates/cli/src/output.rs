use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sumdiff::features::SCHEMA_VERSION;

use crate::Failure;

/// A self-describing result: the full invocation plus the outcome.
#[derive(Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub command: &'static str,
    pub schema_version: &'static str,
    pub seed: u64,
    pub threads: Option<usize>,
    pub config: &'a C,
    pub result: R,
}

pub struct Run {
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Run {
    pub fn report<'a, C: Serialize, R: Serialize>(
        &self,
        command: &'static str,
        config: &'a C,
        result: R,
    ) -> Report<'a, C, R> {
        Report {
            command,
            schema_version: SCHEMA_VERSION,
            seed: self.seed,
            threads: self.threads,
            config,
            result,
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Lib(sumdiff::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Pretty JSON to `out`, or to stdout when no path is given.
pub fn emit<T: Serialize>(out: Option<&PathBuf>, value: &T) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(value).map_err(sumdiff::Error::from)?;
    match out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| io_failure(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{json}").map_err(|e| io_failure(Path::new("<stdout>"), e))
        }
    }
}

/// One point of a plot-ready table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

impl PlotRow {
    pub fn new(label: impl Into<String>, x: f64, y: f64) -> Self {
        PlotRow {
            label: label.into(),
            x,
            y,
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_plot(path: Option<&PathBuf>, rows: &[PlotRow]) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> io::Result<()> {
        writeln!(w, "label,x,y")?;
        for r in rows {
            writeln!(w, "{},{},{}", csv_field(&r.label), r.x, r.y)?;
        }
        w.flush()
    };
    write().map_err(|e| io_failure(path, e))
}
