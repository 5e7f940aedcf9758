//! Per (method, criterion) means over a set of ratings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::store::RatingRecord;
use crate::study::{Criterion, Study};
use crate::RatingError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterMean {
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method_id: String,
    pub criterion: Criterion,
    pub mean: f64,
    pub count: usize,
    pub per_rater: BTreeMap<String, RaterMean>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub study_id: String,
    /// Sorted by method, then criterion.
    pub rows: Vec<SummaryRow>,
}

impl RatingSummary {
    pub fn row(&self, method_id: &str, criterion: Criterion) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.method_id == method_id && r.criterion == criterion)
    }

    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// Scores are integers, so sums are exact and the means do not depend on
/// submission order.
pub fn summarize(study: &Study, records: &[RatingRecord]) -> Result<RatingSummary, RatingError> {
    if records.is_empty() {
        return Err(RatingError::NoRatings);
    }
    // (method, criterion) -> rater -> (sum, count)
    let mut acc: BTreeMap<(String, Criterion), BTreeMap<String, (u64, usize)>> = BTreeMap::new();
    for r in records {
        let t = study
            .task(&r.task_id)
            .ok_or_else(|| RatingError::UnknownTask(r.task_id.clone()))?;
        let e = acc
            .entry((t.method_id.clone(), t.criterion))
            .or_default()
            .entry(r.rater_id.clone())
            .or_default();
        e.0 += r.score as u64;
        e.1 += 1;
    }
    let rows = acc
        .into_iter()
        .map(|((method_id, criterion), raters)| {
            let sum: u64 = raters.values().map(|v| v.0).sum();
            let count: usize = raters.values().map(|v| v.1).sum();
            SummaryRow {
                method_id,
                criterion,
                mean: sum as f64 / count as f64,
                count,
                per_rater: raters
                    .into_iter()
                    .map(|(r, (s, n))| {
                        (
                            r,
                            RaterMean {
                                mean: s as f64 / n as f64,
                                count: n,
                            },
                        )
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(RatingSummary {
        study_id: study.id.clone(),
        rows,
    })
}
