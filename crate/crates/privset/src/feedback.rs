//! Append-only JSON-lines feedback log. A later line for the same session
//! replaces earlier ones when the log is read back.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use privset_core::eval::FeedbackRecord;

use crate::files::{self, Error};

/// Reads a feedback log, keeping the last record per session in first-seen
/// order. A missing file is an error.
pub fn read_log(path: &Path) -> Result<Vec<FeedbackRecord>, Error> {
    let text = files::read_to_string(path)?;
    parse_log(&text).map_err(|(line, e)| Error::parse(path, format!("line {line}: {e}")))
}

fn parse_log(text: &str) -> Result<Vec<FeedbackRecord>, (usize, String)> {
    let mut order: Vec<String> = Vec::new();
    let mut latest: BTreeMap<String, FeedbackRecord> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: FeedbackRecord =
            serde_json::from_str(line).map_err(|e| (i + 1, e.to_string()))?;
        record.ratings.validate().map_err(|e| (i + 1, e.to_string()))?;
        if !latest.contains_key(&record.session_id) {
            order.push(record.session_id.clone());
        }
        latest.insert(record.session_id.clone(), record);
    }
    Ok(order
        .into_iter()
        .map(|id| latest.remove(&id).expect("recorded"))
        .collect())
}

pub struct FeedbackStore {
    path: PathBuf,
    file: Mutex<File>,
    records: RwLock<Vec<FeedbackRecord>>,
}

impl FeedbackStore {
    /// Opens (creating if needed) the log at `path` and loads what it holds.
    pub fn open(path: &Path) -> Result<Self, Error> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let records = read_log(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            file: Mutex::new(file),
            records: RwLock::new(records),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends and syncs one line, then makes it visible to readers.
    pub fn submit(&self, record: FeedbackRecord) -> Result<(), Error> {
        let mut line = serde_json::to_string(&record).map_err(|e| Error::Internal(e.to_string()))?;
        line.push('\n');
        let mut file = self.file.lock().expect("feedback file lock");
        file.write_all(line.as_bytes())
            .and_then(|_| file.sync_data())
            .map_err(|e| Error::io(&self.path, e))?;
        let mut records = self.records.write().expect("feedback records lock");
        match records.iter_mut().find(|r| r.session_id == record.session_id) {
            Some(existing) => *existing = record,
            None => records.push(record),
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<FeedbackRecord> {
        self.records.read().expect("feedback records lock").clone()
    }
}
