//! Append-only answer log.
//!
//! One JSON object per line:
//!
//! ```text
//! {"seq":1,"time":"2026-03-02T10:00:00Z","student":"s1","lecture":"L","question":"q1","event":"allocated"}
//! {"seq":2,"time":"2026-03-02T10:00:09Z","student":"s1","lecture":"L","question":"q1","event":"answered","correct":true,"points":1.0,"grade_after":1.0}
//! ```
//!
//! Every entry is flushed and synced before [`AnswerLog::append`] returns.
//! Replaying the log over the item bank rebuilds every counter and student
//! state exactly.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::NodeId;
use crate::engine::{AllocationPolicy, Engine, Event, EventKind, ReplayError, StudentId};
use crate::item_bank::{ItemBank, QuestionId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub time: DateTime<Utc>,
    pub student: StudentId,
    pub lecture: NodeId,
    pub question: QuestionId,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl LogEntry {
    pub fn from_event(event: &Event, time: DateTime<Utc>) -> Self {
        LogEntry {
            seq: event.seq,
            time,
            student: event.student.clone(),
            lecture: event.lecture.clone(),
            question: event.question.clone(),
            kind: event.kind.clone(),
        }
    }

    pub fn event(&self) -> Event {
        Event {
            seq: self.seq,
            student: self.student.clone(),
            lecture: self.lecture.clone(),
            question: self.question.clone(),
            kind: self.kind.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log ordering violation at seq {seq}: {reason}")]
    OrderingViolation { seq: u64, reason: String },
    #[error("corrupt log at seq {seq}: {reason}")]
    CorruptLog { seq: u64, reason: String },
    #[error("log storage failure: {0}")]
    StorageFailure(#[from] io::Error),
}

impl From<ReplayError> for LogError {
    fn from(e: ReplayError) -> Self {
        LogError::CorruptLog { seq: e.seq, reason: e.source.to_string() }
    }
}

/// Tracks the ordering invariants of a log prefix.
#[derive(Debug, Clone, Default)]
struct Ordering {
    last_seq: u64,
    pending: BTreeMap<(StudentId, NodeId), QuestionId>,
}

impl Ordering {
    fn check(&self, e: &LogEntry) -> Result<(), String> {
        if e.seq <= self.last_seq {
            return Err(format!("seq {} does not exceed {}", e.seq, self.last_seq));
        }
        if let EventKind::Answered { .. } = e.kind {
            let key = (e.student.clone(), e.lecture.clone());
            if self.pending.get(&key) != Some(&e.question) {
                return Err(format!("answer for {} by {} without a preceding allocation", e.question, e.student));
            }
        }
        Ok(())
    }

    fn accept(&mut self, e: &LogEntry) {
        let key = (e.student.clone(), e.lecture.clone());
        match e.kind {
            EventKind::Allocated => {
                self.pending.insert(key, e.question.clone());
            }
            EventKind::Answered { .. } => {
                self.pending.remove(&key);
            }
        }
        self.last_seq = e.seq;
    }
}

#[derive(Debug)]
pub struct AnswerLog {
    path: Option<PathBuf>,
    file: Option<File>,
    entries: Vec<LogEntry>,
    ordering: Ordering,
}

impl AnswerLog {
    /// A log that lives only in memory.
    pub fn in_memory() -> Self {
        AnswerLog { path: None, file: None, entries: Vec::new(), ordering: Ordering::default() }
    }

    /// Opens (or creates) a log file. A final line without its newline is a
    /// write that never completed; it is cut off.
    pub fn open(path: &Path) -> Result<Self, LogError> {
        let mut entries = Vec::new();
        let mut ordering = Ordering::default();
        let mut valid_len = 0u64;
        if path.exists() {
            let mut reader = BufReader::new(File::open(path)?);
            let mut line = String::new();
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 || !line.ends_with('\n') {
                    break;
                }
                if line.trim().is_empty() {
                    valid_len += n as u64;
                    continue;
                }
                let entry: LogEntry = serde_json::from_str(&line)
                    .map_err(|e| LogError::CorruptLog { seq: ordering.last_seq + 1, reason: e.to_string() })?;
                ordering.check(&entry).map_err(|reason| LogError::CorruptLog { seq: entry.seq, reason })?;
                ordering.accept(&entry);
                entries.push(entry);
                valid_len += n as u64;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        if file.metadata()?.len() != valid_len {
            file.set_len(valid_len)?;
        }
        Ok(AnswerLog { path: Some(path.to_owned()), file: Some(file), entries, ordering })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_seq(&self) -> u64 {
        self.ordering.last_seq
    }

    /// Validates, writes and syncs one entry. Returns its seq.
    pub fn append(&mut self, entry: LogEntry) -> Result<u64, LogError> {
        self.ordering.check(&entry).map_err(|reason| LogError::OrderingViolation { seq: entry.seq, reason })?;
        if let Some(file) = &mut self.file {
            let mut line = serde_json::to_vec(&entry).map_err(io::Error::from)?;
            line.push(b'\n');
            file.write_all(&line)?;
            file.sync_data()?;
        }
        self.ordering.accept(&entry);
        let seq = entry.seq;
        self.entries.push(entry);
        Ok(seq)
    }
}

/// Parses log lines, stopping at the first torn (unterminated) line.
pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, LogError> {
    let mut out: Vec<LogEntry> = Vec::new();
    for line in text.split_inclusive('\n') {
        if !line.ends_with('\n') {
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let seq = out.last().map_or(0, |e| e.seq) + 1;
        out.push(serde_json::from_str(line).map_err(|e| LogError::CorruptLog { seq, reason: e.to_string() })?);
    }
    Ok(out)
}

/// Rebuilds engine state from a log on top of `bank`.
pub fn replay_log(entries: &[LogEntry], bank: ItemBank, policy: AllocationPolicy) -> Result<Engine, LogError> {
    let events: Vec<Event> = entries.iter().map(LogEntry::event).collect();
    Ok(Engine::replay(bank, policy, &events)?)
}
