use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};

/// First line of every artifact: what produced it and with which settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub threads: Option<usize>,
    pub config: ExperimentConfig,
}

impl RunHeader {
    pub fn new(config: &ExperimentConfig, threads: Option<usize>) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { tool: "sirs".into(), version: env!("CARGO_PKG_VERSION").into(), timestamp, threads, config: config.clone() }
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: RunHeader,
}

/// An output file opened before any work starts, so that a bad path fails
/// fast.
pub struct Artifact {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Artifact {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| HarnessError::Unwritable { path: path.to_path_buf(), source })?;
        }
        let file = File::create(path).map_err(|source| HarnessError::Unwritable { path: path.to_path_buf(), source })?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn io(&self, source: std::io::Error) -> HarnessError {
        HarnessError::Io { path: self.path.clone(), source }
    }

    pub fn write_jsonl<T: Serialize>(mut self, header: &RunHeader, rows: &[T]) -> Result<(), HarnessError> {
        let mut line = serde_json::to_string(&HeaderLine { header: header.clone() })?;
        line.push('\n');
        for r in rows {
            line.push_str(&serde_json::to_string(r)?);
            line.push('\n');
            if line.len() > 1 << 16 {
                self.out.write_all(line.as_bytes()).map_err(|e| self.io(e))?;
                line.clear();
            }
        }
        self.out.write_all(line.as_bytes()).map_err(|e| self.io(e))?;
        self.out.flush().map_err(|e| self.io(e))
    }

    /// CSV with the header as a `#` comment line on top.
    pub fn write_csv<T: Serialize>(mut self, header: &RunHeader, rows: &[T]) -> Result<(), HarnessError> {
        let top = format!("# {}\n", serde_json::to_string(&HeaderLine { header: header.clone() })?);
        self.out.write_all(top.as_bytes()).map_err(|e| self.io(e))?;
        let mut w = csv::Writer::from_writer(&mut self.out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| HarnessError::Io { path: self.path.clone(), source: e })?;
        drop(w);
        self.out.flush().map_err(|e| self.io(e))
    }
}

/// Reads a JSONL artifact back into its header and rows.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(RunHeader, Vec<T>), HarnessError> {
    let io = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut lines = reader.lines();
    let first = lines.next().ok_or(HarnessError::EmptyArtifact(path.to_path_buf()))?.map_err(io)?;
    let header: HeaderLine = serde_json::from_str(&first)?;
    let mut rows = Vec::new();
    for line in lines {
        let line = line.map_err(io)?;
        if !line.trim().is_empty() {
            rows.push(serde_json::from_str(&line)?);
        }
    }
    Ok((header.header, rows))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<(RunHeader, Vec<T>), HarnessError> {
    let io = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let text = std::fs::read_to_string(path).map_err(io)?;
    let (first, _) = text.split_once('\n').ok_or(HarnessError::EmptyArtifact(path.to_path_buf()))?;
    let json = first.strip_prefix("# ").ok_or(HarnessError::EmptyArtifact(path.to_path_buf()))?;
    let header: HeaderLine = serde_json::from_str(json)?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok((header.header, rows))
}

/// Body of a JSONL artifact: everything after the header line.
pub fn jsonl_body(path: &Path) -> Result<String, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    Ok(text.split_once('\n').map(|(_, b)| b.to_string()).unwrap_or_default())
}
