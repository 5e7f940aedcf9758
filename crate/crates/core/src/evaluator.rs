//! Automatic metrics: tokenization, smoothed BLEU-1/2, translation quality via
//! round-trip recognition, the harmonic vt-score and corpus reports.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::adapters::{AdapterError, Adapters, CallContext};
use crate::layout::{group_layout, LayoutConfig};
use crate::scene::{LangCode, SceneImage, WordObservation};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no references")]
    NoReferences,
    #[error("BLEU-{0} is undefined: every reference is shorter than {0} tokens")]
    OrderUndefined(usize),
    #[error("unsupported BLEU order {0}")]
    UnsupportedOrder(usize),
    #[error("negative metric input ({0}, {1})")]
    NegativeInput(f64, f64),
    #[error("nothing to aggregate")]
    EmptyInput,
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || ('\u{0964}'..='\u{0965}').contains(&c) || c == '\u{0970}'
}

/// NFC, lowercase, whitespace split; leading and trailing punctuation
/// characters (ASCII, danda, double danda, abbreviation sign) become tokens of
/// their own.
pub fn tokenize(text: &str, _lang: LangCode) -> Vec<String> {
    let norm: String = text.nfc().collect::<String>().to_lowercase();
    let mut out = Vec::new();
    for word in norm.split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        while start < chars.len() && is_punct(chars[start]) {
            start += 1;
        }
        if start == chars.len() {
            out.extend(chars.iter().map(|c| c.to_string()));
            continue;
        }
        let mut end = chars.len();
        while end > start && is_punct(chars[end - 1]) {
            end -= 1;
        }
        out.extend(chars[..start].iter().map(|c| c.to_string()));
        out.push(chars[start..end].iter().collect());
        out.extend(chars[end..].iter().map(|c| c.to_string()));
    }
    out
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and total candidate n-grams.
fn clipped_matches(candidate: &[String], references: &[Vec<String>], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let mut max_ref: HashMap<&[String], usize> = HashMap::new();
    for r in references {
        for (g, c) in ngram_counts(r, n) {
            let slot = max_ref.entry(g).or_insert(0);
            *slot = (*slot).max(c);
        }
    }
    let matched = cand
        .iter()
        .map(|(g, c)| (*c).min(max_ref.get(g).copied().unwrap_or(0)))
        .sum();
    (matched, candidate.len().saturating_sub(n - 1))
}

/// Reference length closest to `c` (shorter wins ties).
fn closest_ref_len(c: usize, references: &[Vec<String>]) -> usize {
    references
        .iter()
        .map(Vec::len)
        .min_by_key(|r| ((*r as i64 - c as i64).abs(), *r))
        .unwrap_or(0)
}

/// Sentence BLEU-n in `[0, 100]`: clipped multi-reference precisions, closest
/// reference brevity penalty, add-one smoothing for orders of two and above.
/// An empty candidate scores 0.
pub fn bleu(candidate: &[String], references: &[Vec<String>], n: usize) -> Result<f64, EvalError> {
    if !(1..=4).contains(&n) {
        return Err(EvalError::UnsupportedOrder(n));
    }
    if references.is_empty() || references.iter().all(Vec::is_empty) {
        return Err(EvalError::NoReferences);
    }
    if references.iter().all(|r| r.len() < n) {
        return Err(EvalError::OrderUndefined(n));
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for k in 1..=n {
        let (m, l) = clipped_matches(candidate, references, k);
        let p = if k == 1 {
            m as f64 / l as f64
        } else {
            (m as f64 + 1.0) / (l as f64 + 1.0)
        };
        if p == 0.0 {
            return Ok(0.0);
        }
        log_sum += p.ln();
    }
    let c = candidate.len() as f64;
    let r = closest_ref_len(candidate.len(), references) as f64;
    let bp = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
    Ok(100.0 * bp * (log_sum / n as f64).exp())
}

/// Harmonic mean of translation and perception quality.
pub fn vt_score(tq: f64, pq: f64) -> Result<f64, EvalError> {
    if tq < 0.0 || pq < 0.0 || tq.is_nan() || pq.is_nan() {
        return Err(EvalError::NegativeInput(tq, pq));
    }
    if tq + pq == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * tq * pq / (tq + pq))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSet {
    pub image_id: String,
    /// One token list per annotator.
    pub references: Vec<Vec<String>>,
}

impl ReferenceSet {
    pub fn from_texts(image_id: impl Into<String>, texts: &[String], lang: LangCode) -> Self {
        Self {
            image_id: image_id.into(),
            references: texts.iter().map(|t| tokenize(t, lang)).collect(),
        }
    }

    pub fn is_valid(&self) -> bool {
        !self.references.is_empty() && self.references.len() <= 3 && self.references.iter().any(|r| !r.is_empty())
    }

    /// BLEU-2 is reported only when some reference has two or more words.
    pub fn multi_word(&self) -> bool {
        self.references.iter().any(|r| r.len() >= 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageScore {
    pub image_id: String,
    pub bleu1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu2: Option<f64>,
    pub tq: f64,
    pub pq: f64,
    pub vt: f64,
}

impl ImageScore {
    /// TQ is BLEU-2 where defined, BLEU-1 for single-word references.
    pub fn new(image_id: impl Into<String>, bleu1: f64, bleu2: Option<f64>, pq: f64) -> Result<Self, EvalError> {
        let tq = bleu2.unwrap_or(bleu1);
        Ok(Self {
            image_id: image_id.into(),
            bleu1,
            bleu2,
            tq,
            pq,
            vt: vt_score(tq, pq)?,
        })
    }
}

/// Labels of one evaluated configuration, mirroring the method columns of the report table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MethodInfo {
    pub id: String,
    #[serde(default)]
    pub str_model: String,
    #[serde(default)]
    pub mt_model: String,
    #[serde(default)]
    pub sts_model: String,
    #[serde(default)]
    pub design_enhancements: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub method: MethodInfo,
    pub bleu1: f64,
    /// Mean over images where BLEU-2 is defined; `None` if there are none.
    pub bleu2: Option<f64>,
    pub pq: f64,
    /// Mean of per-image vt-scores.
    pub vt: f64,
    pub n_images: usize,
    pub n_bleu2: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusReport {
    pub rows: Vec<CorpusRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<ImageScore>,
}

/// Corpus means for one method. VT is the mean of per-image scores, never the
/// harmonic mean of corpus means.
pub fn aggregate(method: MethodInfo, scores: &[ImageScore]) -> Result<CorpusRow, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = scores.len() as f64;
    let mean = |f: fn(&ImageScore) -> f64| scores.iter().map(f).sum::<f64>() / n;
    let b2: Vec<f64> = scores.iter().filter_map(|s| s.bleu2).collect();
    Ok(CorpusRow {
        method,
        bleu1: mean(|s| s.bleu1),
        bleu2: (!b2.is_empty()).then(|| b2.iter().sum::<f64>() / b2.len() as f64),
        pq: mean(|s| s.pq),
        vt: mean(|s| s.vt),
        n_images: scores.len(),
        n_bleu2: b2.len(),
    })
}

impl CorpusReport {
    /// Aligned text table: method, STR, MT, STS, D.E., TQ-BL1, TQ-BL2, PQ, VT.
    pub fn to_table(&self) -> String {
        let header = ["Method", "STR", "MT", "STS", "D.E.", "TQ-BL1", "TQ-BL2", "PQ", "VT"];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            rows.push(vec![
                r.method.id.clone(),
                r.method.str_model.clone(),
                r.method.mt_model.clone(),
                r.method.sts_model.clone(),
                if r.method.design_enhancements { "yes" } else { "no" }.into(),
                format!("{:.2}", r.bleu1),
                r.bleu2.map_or("-".into(), |v| format!("{v:.2}")),
                format!("{:.2}", r.pq),
                format!("{:.2}", r.vt),
            ]);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (v, w))| {
                    let pad = w - v.chars().count();
                    if c >= 5 {
                        format!("{}{v}", " ".repeat(pad))
                    } else {
                        format!("{v}{}", " ".repeat(pad))
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        out
    }
}

/// Recognized target-language words of `output` in reading order.
pub fn read_output_text(
    output: &SceneImage,
    adapters: &Adapters,
    lang: LangCode,
    cfg: &LayoutConfig,
) -> Result<Vec<WordObservation>, AdapterError> {
    let ctx = CallContext::new(format!("eval-{}", output.id()), output.id(), lang, lang);
    let boxes = adapters.detector.detect(output, &ctx)?;
    let mut words = Vec::with_capacity(boxes.len());
    for b in boxes {
        let Ok(crop) = output.crop(b) else { continue };
        let (text, conf) = adapters.recognizer.recognize(&crop, &ctx.clone().with_box(b))?;
        if !text.trim().is_empty() {
            words.push(WordObservation::new(b, &text, conf));
        }
    }
    if words.is_empty() {
        return Ok(words);
    }
    // grouping orders lines and paragraphs; token class is irrelevant here
    let words: Vec<WordObservation> = words
        .into_iter()
        .map(|mut w| {
            w.token_class = Default::default();
            w
        })
        .collect();
    let plan = group_layout(&words, cfg).expect("nonempty");
    Ok(plan.paragraphs.iter().flat_map(|p| p.words().cloned()).collect())
}

/// BLEU-1 and (where defined) BLEU-2 of the text recognized on `output`.
/// With `normalize`, recognized text is passed through the translator
/// (target to target) before scoring.
pub fn compute_tq(
    output: &SceneImage,
    refs: &ReferenceSet,
    adapters: &Adapters,
    tgt: LangCode,
    normalize: bool,
) -> Result<(f64, Option<f64>), EvalError> {
    if !refs.is_valid() {
        return Err(EvalError::NoReferences);
    }
    let words = read_output_text(output, adapters, tgt, &LayoutConfig::default())?;
    let mut text = words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
    if normalize && !text.is_empty() {
        let ctx = CallContext::new(format!("eval-{}", output.id()), output.id(), tgt, tgt);
        text = adapters.translator.translate(&text, &ctx)?;
    }
    let candidate = tokenize(&text, tgt);
    let b1 = bleu(&candidate, &refs.references, 1)?;
    let b2 = if refs.multi_word() {
        Some(bleu(&candidate, &refs.references, 2)?)
    } else {
        None
    };
    Ok((b1, b2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Hello World", LangCode::En), t(&["hello", "world"]));
        assert_eq!(tokenize("रिठाला।", LangCode::Hi), t(&["रिठाला", "।"]));
        assert!(tokenize("", LangCode::En).is_empty());
        assert_eq!(
            tokenize("(Exit!) don't", LangCode::En),
            t(&["(", "exit", "!", ")", "don't"])
        );
        assert_eq!(tokenize("...", LangCode::En), t(&[".", ".", "."]));
    }

    #[test]
    fn bleu_examples() {
        let r = t(&["a", "b", "c"]);
        assert_eq!(bleu(&r, &[r.clone()], 1).unwrap(), 100.0);
        assert_eq!(bleu(&r, &[r.clone()], 2).unwrap(), 100.0);

        let c = t(&["a", "b", "c", "d"]);
        let r = t(&["a", "b", "x", "d"]);
        assert!((bleu(&c, &[r], 1).unwrap() - 75.0).abs() < 1e-9);

        let c = t(&["a", "b"]);
        let r = t(&["a", "b", "c", "d"]);
        let b = bleu(&c, &[r], 1).unwrap();
        assert!((b - 100.0 * (-1.0f64).exp()).abs() < 1e-9);
        assert!((b - 36.79).abs() < 0.01);
    }

    #[test]
    fn bleu_edge_cases() {
        let r = t(&["a"]);
        assert_eq!(bleu(&[], &[r.clone()], 1).unwrap(), 0.0);
        assert!(matches!(bleu(&r, &[r.clone()], 2), Err(EvalError::OrderUndefined(2))));
        assert!(matches!(bleu(&r, &[], 1), Err(EvalError::NoReferences)));
        assert_eq!(bleu(&t(&["z"]), &[r], 1).unwrap(), 0.0);
    }

    #[test]
    fn bleu2_smoothing() {
        // unigram 2/2, bigram (0+1)/(1+1): sqrt(0.5) * BP(2 vs 2)
        let c = t(&["b", "a"]);
        let r = t(&["a", "b"]);
        let got = bleu(&c, &[r], 2).unwrap();
        assert!((got - 100.0 * 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn vt_examples() {
        assert_eq!(vt_score(50.0, 50.0).unwrap(), 50.0);
        assert_eq!(vt_score(0.0, 80.0).unwrap(), 0.0);
        assert_eq!(vt_score(0.0, 0.0).unwrap(), 0.0);
        assert!((vt_score(20.54, 53.79).unwrap() - 29.73).abs() < 0.01);
        assert!(vt_score(-1.0, 3.0).is_err());
    }

    #[test]
    fn aggregate_denominators() {
        let a = ImageScore::new("a", 40.0, None, 60.0).unwrap();
        let b = ImageScore::new("b", 30.0, Some(20.0), 50.0).unwrap();
        let row = aggregate(MethodInfo::default(), &[a.clone(), b.clone()]).unwrap();
        assert_eq!(row.n_images, 2);
        assert_eq!(row.n_bleu2, 1);
        assert_eq!(row.bleu2, Some(20.0));
        assert_eq!(row.bleu1, 35.0);
        assert_eq!(row.vt, (a.vt + b.vt) / 2.0);
        assert!(matches!(
            aggregate(MethodInfo::default(), &[]),
            Err(EvalError::EmptyInput)
        ));

        let single = aggregate(MethodInfo::default(), &[a.clone()]).unwrap();
        assert_eq!(
            (single.bleu1, single.pq, single.vt, single.bleu2),
            (a.bleu1, a.pq, a.vt, None)
        );
    }

    #[test]
    fn table_layout() {
        let s = ImageScore::new("a", 25.28, Some(20.54), 53.79).unwrap();
        let report = CorpusReport {
            rows: vec![aggregate(
                MethodInfo {
                    id: "B-7".into(),
                    str_model: "Oracle".into(),
                    mt_model: "lexicon".into(),
                    sts_model: "stub".into(),
                    design_enhancements: true,
                },
                &[s],
            )
            .unwrap()],
            images: vec![],
        };
        let table = report.to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("Method"));
        assert!(lines[2].contains("20.54") && lines[2].contains("yes"));
    }
}
