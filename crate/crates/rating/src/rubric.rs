//! Rubric anchors shared with the rating UI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::study::{Criterion, Mode};

/// The shared rubric fixture, served verbatim at `/api/rubrics`.
pub const RUBRICS_JSON: &str = include_str!("../assets/rubrics.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rubric {
    pub name: String,
    pub mode: Mode,
    /// Keyed by score, "1" to "4".
    pub anchors: BTreeMap<String, String>,
}

impl Rubric {
    pub fn anchor(&self, score: u8) -> Option<&str> {
        self.anchors.get(&score.to_string()).map(String::as_str)
    }
}

pub type Rubrics = BTreeMap<Criterion, Rubric>;

pub fn rubrics() -> Rubrics {
    serde_json::from_str(RUBRICS_JSON).expect("embedded rubric fixture parses")
}
