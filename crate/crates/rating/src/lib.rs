//! Blinded four-criterion rating study: task scheduling, durable rating log,
//! summaries and an HTTP front end.

pub mod rubric;
pub mod server;
pub mod store;
pub mod study;
pub mod summary;

pub use rubric::{Rubric, Rubrics, RUBRICS_JSON};
pub use store::{RatingLog, RatingRecord, RatingService, Submission};
pub use study::{Criterion, Mode, RatingTask, Study, StudyDef, TaskView};
pub use summary::{RaterMean, RatingSummary, SummaryRow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RatingError {
    #[error("unknown study {0}")]
    UnknownStudy(String),
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("score {0} is outside 1..4")]
    InvalidScore(i64),
    #[error("rater {rater_id} already rated task {task_id}")]
    DuplicateRating { rater_id: String, task_id: String },
    #[error("no ratings recorded")]
    NoRatings,
    #[error("invalid study: {0}")]
    InvalidStudy(String),
    #[error("empty rater id")]
    EmptyRater,
    #[error("corrupt ratings log at line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
