//! Cassette files: JSONL transcripts of request/response exchanges, used
//! for audit and for network-free replay.

use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::request::ChatRequest;
use crate::GatewayError;

/// One recorded exchange: a request (kept for audit), its fingerprint, and
/// the responses it produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CassetteRecord {
    pub fingerprint: String,
    pub request: ChatRequest,
    pub responses: Vec<String>,
}

impl CassetteRecord {
    pub fn new(request: &ChatRequest, responses: Vec<String>) -> Self {
        CassetteRecord {
            fingerprint: request.fingerprint(),
            request: request.clone(),
            responses,
        }
    }
}

/// In-memory replay state: per fingerprint, the recorded exchanges in file
/// order. Repeated identical requests consume successive entries.
#[derive(Debug, Default)]
pub struct ReplayState {
    entries: HashMap<String, VecDeque<Vec<String>>>,
    pub loaded: usize,
}

impl ReplayState {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let file = File::open(path).map_err(|e| GatewayError::Cassette {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut state = ReplayState::default();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| GatewayError::Cassette {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: CassetteRecord =
                serde_json::from_str(&line).map_err(|e| GatewayError::Cassette {
                    path: path.display().to_string(),
                    message: format!("line {}: {e}", lineno + 1),
                })?;
            state.entries.entry(record.fingerprint).or_default().push_back(record.responses);
            state.loaded += 1;
        }
        Ok(state)
    }

    pub fn take(&mut self, fingerprint: &str) -> Option<Vec<String>> {
        let queue = self.entries.get_mut(fingerprint)?;
        let responses = queue.pop_front();
        if queue.is_empty() {
            self.entries.remove(fingerprint);
        }
        responses
    }
}

/// Appends one record to a cassette file, creating it if needed.
pub fn append_record(path: &Path, record: &CassetteRecord) -> Result<(), GatewayError> {
    let to_err = |message: String| GatewayError::Cassette {
        path: path.display().to_string(),
        message,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| to_err(e.to_string()))?;
        }
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| to_err(e.to_string()))?;
    let line = serde_json::to_string(record).map_err(|e| to_err(e.to_string()))?;
    writeln!(file, "{line}").map_err(|e| to_err(e.to_string()))?;
    Ok(())
}
