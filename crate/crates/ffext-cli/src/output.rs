//! Report emission: CSV with a fixed preamble, JSON mirrors, and the
//! stdout/file switch.
//!
//! Every CSV starts with an optional `# timestamp=...` line followed by
//! the frozen `# schema=1` marker and the header row, so downstream
//! readers can skip comments and trust column layout.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

/// Where and how a command writes its report.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub no_timestamp: bool,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, format: Format, no_timestamp: bool) -> Result<Self> {
        if format == Format::Both && out.is_none() {
            bail!("--format both needs --out to name the two files");
        }
        Ok(Sink { out, format, no_timestamp })
    }

    /// Writes the report in the configured format(s). With `--format
    /// both` the given path gains `.csv` and `.json` suffixes.
    pub fn write<R: Serialize>(&self, rows: &[R], json: &serde_json::Value) -> Result<()> {
        match (self.format, &self.out) {
            (Format::Csv, None) => self.write_csv(rows, &mut io::stdout().lock()),
            (Format::Csv, Some(path)) => self.write_csv(rows, &mut create(path)?),
            (Format::Json, None) => write_json(json, &mut io::stdout().lock()),
            (Format::Json, Some(path)) => write_json(json, &mut create(path)?),
            (Format::Both, Some(path)) => {
                self.write_csv(rows, &mut create(&suffixed(path, "csv"))?)?;
                write_json(json, &mut create(&suffixed(path, "json"))?)
            }
            (Format::Both, None) => unreachable!("rejected in Sink::new"),
        }
    }

    fn write_csv<R: Serialize>(&self, rows: &[R], w: &mut dyn Write) -> Result<()> {
        if !self.no_timestamp {
            writeln!(w, "# timestamp={}", chrono::Utc::now().to_rfc3339())?;
        }
        writeln!(w, "# schema=1")?;
        let mut csv = csv::Writer::from_writer(w);
        for row in rows {
            csv.serialize(row).context("CSV row serialization")?;
        }
        csv.flush()?;
        Ok(())
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn suffixed(path: &Path, ext: &str) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn write_json(json: &serde_json::Value, w: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, json)?;
    writeln!(w)?;
    Ok(())
}
