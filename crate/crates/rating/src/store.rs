//! Append-only ratings log and the study service built on it.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::study::{rater_order, RatingTask, Study};
use crate::summary::{summarize, RatingSummary};
use crate::RatingError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub rater_id: String,
    pub task_id: String,
    pub score: u8,
    /// Unix time in milliseconds.
    pub timestamp: u64,
}

/// A rating as submitted; the score is validated before it becomes a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub rater_id: String,
    pub task_id: String,
    pub score: i64,
    #[serde(default)]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    /// Ratings stored in the study after this one.
    pub count: usize,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// JSONL file, one record per line, synced after every append.
#[derive(Debug)]
pub struct RatingLog {
    path: PathBuf,
    file: File,
}

impl RatingLog {
    /// Opens for appending and returns the records already present. A
    /// partial last line left by a crash is dropped and cut from the file.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<RatingRecord>), RatingError> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let (records, good_len) = parse_log(&text)?;
        if good_len < text.len() {
            log::warn!("{}: dropping truncated last line", path.display());
            file.set_len(good_len as u64)?;
            file.sync_all()?;
        }
        Ok((RatingLog { path, file }, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, rec: &RatingRecord) -> Result<(), RatingError> {
        let mut line = serde_json::to_vec(rec)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        Ok(())
    }
}

/// Reads a log without opening it for writing.
pub fn replay(path: impl AsRef<Path>) -> Result<Vec<RatingRecord>, RatingError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_log(&text)?.0)
}

/// Records plus the byte length of the well-formed prefix.
fn parse_log(text: &str) -> Result<(Vec<RatingRecord>, usize), RatingError> {
    let mut records = Vec::new();
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let complete = line.ends_with('\n');
        let body = line.trim_end();
        if body.is_empty() {
            offset += line.len();
            continue;
        }
        match serde_json::from_str::<RatingRecord>(body) {
            Ok(r) if complete => records.push(r),
            // no newline: the write was cut short, even if it happens to parse
            _ if !complete => break,
            Ok(_) => unreachable!(),
            Err(e) => {
                return Err(RatingError::CorruptLog {
                    line: i + 1,
                    reason: e.to_string(),
                })
            }
        }
        offset += line.len();
    }
    Ok((records, offset))
}

#[derive(Debug, Default)]
struct State {
    records: Vec<RatingRecord>,
    rated: HashMap<String, HashSet<usize>>,
}

impl State {
    fn insert(&mut self, idx: usize, rec: RatingRecord) -> bool {
        if !self.rated.entry(rec.rater_id.clone()).or_default().insert(idx) {
            return false;
        }
        self.records.push(rec);
        true
    }
}

/// One study's live state. Appends go through a single writer; readers
/// share a lock that is never held across disk I/O.
#[derive(Debug)]
pub struct RatingService {
    study: Study,
    state: RwLock<State>,
    writer: Mutex<RatingLog>,
}

impl RatingService {
    /// Opens the study's log and replays it.
    pub fn open(study: Study) -> Result<Self, RatingError> {
        let (log, records) = RatingLog::open(&study.log_path)?;
        let mut state = State::default();
        for (i, rec) in records.into_iter().enumerate() {
            let bad = |reason: String| RatingError::CorruptLog { line: i + 1, reason };
            let idx = study
                .task_index(&rec.task_id)
                .ok_or_else(|| bad(format!("unknown task {}", rec.task_id)))?;
            if !(1..=4).contains(&rec.score) {
                return Err(bad(format!("score {}", rec.score)));
            }
            if !state.insert(idx, rec) {
                return Err(bad("duplicate rating".into()));
            }
        }
        log::info!(
            "study {}: {} tasks, {} ratings replayed",
            study.id,
            study.tasks().len(),
            state.records.len()
        );
        Ok(RatingService {
            study,
            state: RwLock::new(state),
            writer: Mutex::new(log),
        })
    }

    pub fn study(&self) -> &Study {
        &self.study
    }

    /// The first task in this rater's order they have not rated yet. Asking
    /// again without rating returns the same task.
    pub fn next_task(&self, rater_id: &str) -> Result<Option<&RatingTask>, RatingError> {
        if rater_id.is_empty() {
            return Err(RatingError::EmptyRater);
        }
        let tasks = self.study.tasks();
        let order = rater_order(self.study.seed, rater_id, tasks.len());
        let state = self.state.read();
        let done = state.rated.get(rater_id);
        Ok(order
            .into_iter()
            .find(|i| done.is_none_or(|d| !d.contains(i)))
            .map(|i| &tasks[i]))
    }

    pub fn submit(&self, sub: Submission) -> Result<Ack, RatingError> {
        if sub.rater_id.is_empty() {
            return Err(RatingError::EmptyRater);
        }
        let idx = self
            .study
            .task_index(&sub.task_id)
            .ok_or_else(|| RatingError::UnknownTask(sub.task_id.clone()))?;
        if !(1..=4).contains(&sub.score) {
            return Err(RatingError::InvalidScore(sub.score));
        }
        let rec = RatingRecord {
            rater_id: sub.rater_id,
            task_id: sub.task_id,
            score: sub.score as u8,
            timestamp: sub.timestamp.unwrap_or_else(now_ms),
        };
        let mut writer = self.writer.lock();
        let duplicate = self
            .state
            .read()
            .rated
            .get(&rec.rater_id)
            .is_some_and(|d| d.contains(&idx));
        if duplicate {
            return Err(RatingError::DuplicateRating {
                rater_id: rec.rater_id,
                task_id: rec.task_id,
            });
        }
        writer.append(&rec)?;
        let mut state = self.state.write();
        state.insert(idx, rec);
        Ok(Ack {
            count: state.records.len(),
        })
    }

    pub fn count(&self) -> usize {
        self.state.read().records.len()
    }

    pub fn records(&self) -> Vec<RatingRecord> {
        self.state.read().records.clone()
    }

    pub fn summarize(&self) -> Result<RatingSummary, RatingError> {
        summarize(&self.study, &self.state.read().records)
    }
}
