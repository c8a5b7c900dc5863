//! Judgment records: one line-delimited record per evaluated answer,
//! carrying input and config digests, the full verdict, and raw
//! transcripts. Reports are recomputable offline from these files, and
//! benchmark runs resume by skipping answers already recorded under the
//! same digests.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Polarity;

use super::{AnswerVerdict, TranscriptEntry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub answer_id: String,
    pub input_digest: String,
    pub config_digest: String,
    pub prompt_digests: BTreeMap<String, String>,
    pub predicted: Polarity,
    pub verdict: AnswerVerdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub transcripts: Vec<TranscriptEntry>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("cannot access records file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: bad judgment record: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
}

/// Load all records from a file. A missing file reads as empty, so fresh
/// and resumed runs share one code path.
pub fn load_records(path: &Path) -> Result<Vec<JudgmentRecord>, RecordError> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(RecordError::Io {
                path: path.display().to_string(),
                source,
            })
        }
    };
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: JudgmentRecord =
            serde_json::from_str(line).map_err(|e| RecordError::Malformed {
                path: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

/// Rewrite the records file with the given records, one per line.
pub fn write_records(path: &Path, records: &[JudgmentRecord]) -> Result<(), RecordError> {
    let io_err = |source| RecordError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let file = fs::File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut writer, record).map_err(|e| io_err(std::io::Error::other(e)))?;
        writer.write_all(b"\n").map_err(io_err)?;
    }
    writer.flush().map_err(io_err)?;
    Ok(())
}

/// Incremental appender used while a run is in flight; completed runs
/// rewrite the file in dataset order afterwards.
pub struct RecordAppender {
    writer: BufWriter<fs::File>,
    path: String,
}

impl RecordAppender {
    pub fn open(path: &Path) -> Result<Self, RecordError> {
        let io_err = |source| RecordError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(io_err)?;
            }
        }
        let file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io_err)?;
        Ok(RecordAppender {
            writer: BufWriter::new(file),
            path: path.display().to_string(),
        })
    }

    pub fn append(&mut self, record: &JudgmentRecord) -> Result<(), RecordError> {
        let io_err = |source| RecordError::Io {
            path: self.path.clone(),
            source,
        };
        serde_json::to_writer(&mut self.writer, record)
            .map_err(|e| io_err(std::io::Error::other(e)))?;
        self.writer.write_all(b"\n").map_err(io_err)?;
        self.writer.flush().map_err(io_err)?;
        Ok(())
    }
}
