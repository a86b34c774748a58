use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// Provenance block written into every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: Option<u64>,
    pub config: &'a C,
}

impl<'a, C: Serialize> Metadata<'a, C> {
    pub fn new(command: &'a str, seed: Option<u64>, config: &'a C) -> Self {
        Self {
            tool: "dfs-sim",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
        }
    }
}

#[derive(Serialize)]
struct Document<'a, M: Serialize, D: Serialize> {
    metadata: &'a M,
    data: &'a D,
}

pub struct OutputDir {
    root: PathBuf,
    quiet: bool,
}

impl OutputDir {
    pub fn create(root: &Path, quiet: bool) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            quiet,
        })
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        if !self.quiet {
            eprintln!("wrote {}", path.display());
        }
        Ok(path)
    }

    pub fn json<M: Serialize, D: Serialize>(&self, name: &str, metadata: &M, data: &D) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(&Document { metadata, data })
            .map_err(|e| CliError::Other(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }

    /// `# `-prefixed metadata lines, one header row, then `rows`.
    pub fn csv<M: Serialize>(&self, name: &str, metadata: &M, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let meta = serde_json::to_string(metadata).map_err(|e| CliError::Other(format!("serializing {name}: {e}")))?;
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(header).map_err(|e| CliError::Other(e.to_string()))?;
        for r in rows {
            w.write_record(r).map_err(|e| CliError::Other(e.to_string()))?;
        }
        let body = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
        let body = String::from_utf8(body).map_err(|e| CliError::Other(e.to_string()))?;
        self.write(name, &format!("# metadata: {meta}\n{body}"))
    }

    pub fn text(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        self.write(name, contents)
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
