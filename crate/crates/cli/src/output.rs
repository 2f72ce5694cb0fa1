use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use qfc_core::csv::Table;
use serde::Serialize;
use serde_json::Value;

use crate::config::Resolved;
use crate::error::CliError;

/// Everything needed to rerun a command and the files it produced.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub args: Vec<String>,
    pub parameters: &'a Resolved,
    pub options: Value,
    pub seed: Option<u64>,
    pub timestamp: String,
    pub outputs: Vec<String>,
}

/// Collects output files for the manifest.
pub struct Sink {
    out: Option<PathBuf>,
    files: Vec<PathBuf>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        Self {
            out,
            files: Vec::new(),
        }
    }

    pub fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    /// Writes the table to `--out`, or to stdout when none was given.
    pub fn primary_table(&mut self, table: &Table) -> Result<(), CliError> {
        match self.out.clone() {
            Some(path) => self.table_to(&path, table),
            None => {
                let stdout = io::stdout();
                table.write_csv(stdout.lock())?;
                Ok(())
            }
        }
    }

    pub fn table_to(&mut self, path: &Path, table: &Table) -> Result<(), CliError> {
        create_parent(path)?;
        let mut w = BufWriter::new(File::create(path)?);
        table.write_csv(&mut w)?;
        w.flush()?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    pub fn json_to<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<(), CliError> {
        create_parent(path)?;
        let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        fs::write(path, text + "\n")?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    /// Path next to `--out` with the given suffix replacing its extension.
    pub fn sibling(&self, suffix: &str) -> Option<PathBuf> {
        self.out.as_ref().map(|p| sibling(p, suffix))
    }

    pub fn manifest<'a>(
        &self,
        command: &'a str,
        params: &'a Resolved,
        options: Value,
        seed: Option<u64>,
    ) -> RunManifest<'a> {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            args: std::env::args().skip(1).collect(),
            parameters: params,
            options,
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: self.files.iter().map(|p| p.display().to_string()).collect(),
        }
    }

    /// Writes the manifest next to `--out`. Without `--out` nothing is written.
    pub fn finish(
        mut self,
        command: &str,
        params: &Resolved,
        options: Value,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        let Some(path) = self.sibling("manifest.json") else {
            return Ok(());
        };
        self.files.push(path.clone());
        let manifest = self.manifest(command, params, options, seed);
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        fs::write(&path, text + "\n")?;
        Ok(())
    }
}

pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn create_parent(path: &Path) -> io::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_names() {
        assert_eq!(
            sibling(Path::new("a/b.csv"), "manifest.json"),
            Path::new("a/b.manifest.json")
        );
        assert_eq!(
            sibling(Path::new("b"), "calibration.csv"),
            Path::new("b.calibration.csv")
        );
    }
}
