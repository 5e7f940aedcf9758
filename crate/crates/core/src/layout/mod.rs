//! Geometric layout planning: lines and paragraphs, proportional re-allocation
//! of translated tokens to lines, spline placement of target words and crop
//! cut/replicate planning.

pub mod spline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{BBox, SceneImage, WordObservation};
use spline::NaturalSpline;

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("no words to group")]
    NoWords,
    #[error("line has zero total width")]
    DegenerateLine,
    #[error("{tokens} tokens but {widths} rendered widths")]
    WidthCountMismatch { tokens: usize, widths: usize },
    #[error("no tokens to place")]
    NoTokens,
}

/// Heuristic constants for grouping and placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    /// Maximum horizontal gap between words of a line, in median word heights.
    pub line_gap_factor: f64,
    /// Maximum vertical center distance between words of a line, as a fraction of the smaller height.
    pub line_overlap_factor: f64,
    /// Maximum vertical gap between lines of a paragraph, in median line heights.
    pub para_gap_factor: f64,
    /// Minimum horizontal overlap of two line boxes (fraction of the narrower one).
    pub para_overlap_min: f64,
    /// Relative width difference below which a source crop is used as is.
    pub width_tolerance: f64,
    /// Rendered-to-extent ratio above which target text height is reduced.
    pub overflow_factor: f64,
    /// Lower bound on the text height reduction.
    pub min_height_scale: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            line_gap_factor: 1.5,
            line_overlap_factor: 0.5,
            para_gap_factor: 0.8,
            para_overlap_min: 0.2,
            width_tolerance: 0.05,
            overflow_factor: 1.15,
            min_height_scale: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub words: Vec<WordObservation>,
    /// Median of the words' vertical centers.
    pub baseline_y: f64,
    /// Median word height.
    pub height: f64,
}

impl Line {
    pub fn new(mut words: Vec<WordObservation>) -> Self {
        assert!(!words.is_empty(), "a line needs at least one word");
        words.sort_by(word_order);
        let baseline_y = median(words.iter().map(|w| w.bbox.center().1).collect());
        let height = median(words.iter().map(|w| w.bbox.h as f64).collect());
        Self {
            words,
            baseline_y,
            height,
        }
    }

    pub fn bbox(&self) -> BBox {
        union_all(self.words.iter().map(|w| w.bbox))
    }

    pub fn char_count(&self) -> usize {
        self.words.iter().map(|w| w.char_count()).sum()
    }

    pub fn text(&self) -> String {
        join_words(&self.words)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paragraph {
    pub lines: Vec<Line>,
    #[serde(rename = "bbox")]
    pub bbox: BBox,
}

impl Paragraph {
    pub fn new(mut lines: Vec<Line>) -> Self {
        assert!(!lines.is_empty(), "a paragraph needs at least one line");
        lines.sort_by(line_order);
        let bbox = union_all(lines.iter().map(|l| l.bbox()));
        Self { lines, bbox }
    }

    pub fn words(&self) -> impl Iterator<Item = &WordObservation> {
        self.lines.iter().flat_map(|l| l.words.iter())
    }

    /// Text of all lines in reading order, space separated.
    pub fn text(&self) -> String {
        self.lines.iter().map(Line::text).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LayoutPlan {
    pub paragraphs: Vec<Paragraph>,
    /// Non-translatable tokens, in reading order.
    pub passthrough: Vec<WordObservation>,
}

impl LayoutPlan {
    /// All words in reading order: paragraphs first, then pass-through tokens.
    pub fn word_count(&self) -> usize {
        self.paragraphs.iter().map(|p| p.words().count()).sum::<usize>() + self.passthrough.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CropAction {
    None,
    CenterCut,
    TileReplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementEntry {
    pub target_text: String,
    pub position: BBox,
    pub source_crop: BBox,
    pub crop_action: CropAction,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub entries: Vec<PlacementEntry>,
}

impl PlacementPlan {
    /// Clamps every box into the image; entries falling fully outside are dropped.
    pub fn clamp_to(mut self, width: u32, height: u32) -> Self {
        self.entries.retain_mut(|e| {
            match (
                e.position.clamp_to(width, height),
                e.source_crop.clamp_to(width, height),
            ) {
                (Some(p), Some(s)) => {
                    e.position = p;
                    e.source_crop = s;
                    true
                }
                _ => false,
            }
        });
        self
    }
}

fn word_order(a: &WordObservation, b: &WordObservation) -> std::cmp::Ordering {
    (a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h)
        .cmp(&(b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h))
        .then_with(|| a.text.cmp(&b.text))
}

fn line_order(a: &Line, b: &Line) -> std::cmp::Ordering {
    a.baseline_y
        .total_cmp(&b.baseline_y)
        .then_with(|| word_order(&a.words[0], &b.words[0]))
}

fn paragraph_order(a: &Paragraph, b: &Paragraph) -> std::cmp::Ordering {
    (a.bbox.y, a.bbox.x)
        .cmp(&(b.bbox.y, b.bbox.x))
        .then_with(|| line_order(&a.lines[0], &b.lines[0]))
}

pub(crate) fn join_words(words: &[WordObservation]) -> String {
    words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ")
}

fn union_all(mut boxes: impl Iterator<Item = BBox>) -> BBox {
    let first = boxes.next().expect("nonempty");
    boxes.fold(first, |acc, b| acc.union(&b))
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Gap between two closed intervals, zero when they overlap.
fn interval_gap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a0.max(b0) - a1.min(b1)).max(0.0)
}

/// Whether two words belong on the same line.
pub fn same_line(a: &BBox, b: &BBox, median_height: f64, cfg: &LayoutConfig) -> bool {
    let dy = (a.center().1 - b.center().1).abs();
    let gap = interval_gap(a.x as f64, a.right() as f64, b.x as f64, b.right() as f64);
    dy <= cfg.line_overlap_factor * a.h.min(b.h) as f64 && gap <= cfg.line_gap_factor * median_height
}

/// Whether two lines (given by their boxes) belong to the same paragraph.
pub fn same_paragraph(a: &BBox, b: &BBox, median_line_height: f64, cfg: &LayoutConfig) -> bool {
    let vgap = interval_gap(a.y as f64, a.bottom() as f64, b.y as f64, b.bottom() as f64);
    let overlap = (a.right().min(b.right()) - a.x.max(b.x)).max(0) as f64;
    let narrower = a.w.min(b.w) as f64;
    vgap <= cfg.para_gap_factor * median_line_height && overlap / narrower >= cfg.para_overlap_min
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|g| !g.is_empty()).collect()
    }
}

/// Groups words into lines and paragraphs by the connected components of the
/// pairwise line and paragraph predicates. Every word takes part in the
/// geometry; non-translatable tokens are then moved to `passthrough`.
pub fn group_layout(words: &[WordObservation], cfg: &LayoutConfig) -> Result<LayoutPlan, LayoutError> {
    if words.is_empty() {
        return Err(LayoutError::NoWords);
    }
    let median_h = median(words.iter().map(|w| w.bbox.h as f64).collect());

    let mut ds = DisjointSet::new(words.len());
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            if same_line(&words[i].bbox, &words[j].bbox, median_h, cfg) {
                ds.union(i, j);
            }
        }
    }
    let lines: Vec<Line> = ds
        .groups()
        .into_iter()
        .map(|g| Line::new(g.into_iter().map(|i| words[i].clone()).collect()))
        .collect();

    let median_line_h = median(lines.iter().map(|l| l.height).collect());
    let line_boxes: Vec<BBox> = lines.iter().map(Line::bbox).collect();
    let mut ds = DisjointSet::new(lines.len());
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if same_paragraph(&line_boxes[i], &line_boxes[j], median_line_h, cfg) {
                ds.union(i, j);
            }
        }
    }
    let mut paragraphs: Vec<Paragraph> = ds
        .groups()
        .into_iter()
        .map(|g| Paragraph::new(g.into_iter().map(|i| lines[i].clone()).collect()))
        .collect();
    paragraphs.sort_by(paragraph_order);

    let mut plan = LayoutPlan::default();
    for para in paragraphs {
        let mut kept_lines = Vec::new();
        for line in para.lines {
            let (keep, pass): (Vec<_>, Vec<_>) = line.words.into_iter().partition(|w| w.token_class.is_translatable());
            plan.passthrough.extend(pass);
            if !keep.is_empty() {
                kept_lines.push(Line::new(keep));
            }
        }
        if !kept_lines.is_empty() {
            plan.paragraphs.push(Paragraph::new(kept_lines));
        }
    }
    Ok(plan)
}

/// Splits `tokens` over the paragraph's lines in proportion to each line's
/// character count (largest remainder, ties to earlier lines). Token order is kept.
pub fn allocate_lines(tokens: &[String], paragraph: &Paragraph) -> Vec<Vec<String>> {
    let weights: Vec<usize> = paragraph.lines.iter().map(Line::char_count).collect();
    let counts = largest_remainder(tokens.len(), &weights);
    let mut out = Vec::with_capacity(counts.len());
    let mut it = tokens.iter().cloned();
    for c in counts {
        out.push(it.by_ref().take(c).collect());
    }
    out
}

/// Apportions `total` items over `weights` by largest remainder. Zero total
/// weight falls back to equal weights.
pub fn largest_remainder(total: usize, weights: &[usize]) -> Vec<usize> {
    if weights.is_empty() {
        return Vec::new();
    }
    let equal;
    let weights = if weights.iter().sum::<usize>() == 0 {
        equal = vec![1; weights.len()];
        &equal[..]
    } else {
        weights
    };
    let sum: u128 = weights.iter().map(|w| *w as u128).sum();
    let t = total as u128;
    let mut counts: Vec<usize> = weights.iter().map(|w| (t * *w as u128 / sum) as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // larger remainder first, earlier line on ties (stable sort)
    order.sort_by_key(|&i| std::cmp::Reverse(t * weights[i] as u128 % sum));
    for &i in order.iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Height multiplier for target text whose rendered width overflows the line.
pub fn overflow_height_scale(total_rendered: f64, extent: f64, cfg: &LayoutConfig) -> f64 {
    if extent <= 0.0 || total_rendered <= cfg.overflow_factor * extent {
        1.0
    } else {
        (extent / total_rendered).max(cfg.min_height_scale)
    }
}

/// Normalized cumulative-width midpoints.
fn width_midpoints(widths: &[f64]) -> Vec<f64> {
    let total: f64 = widths.iter().sum();
    let mut acc = 0.0;
    widths
        .iter()
        .map(|w| {
            let mid = (acc + w / 2.0) / total;
            acc += w;
            mid
        })
        .collect()
}

/// Non-decreasing least-squares fit (pool adjacent violators).
fn isotonic(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().unwrap() = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, n)| std::iter::repeat_n(m, n))
        .collect()
}

/// Target boxes for `new_tokens` on `line`, positioned by natural cubic splines
/// (x and y separately) over the normalized cumulative-width parameter of the
/// original words. Widths are scaled down to fit the line's extent and boxes
/// are separated left to right without overlap.
pub fn spline_place(line: &Line, new_tokens: &[String], rendered_widths: &[f64]) -> Result<Vec<BBox>, LayoutError> {
    if new_tokens.len() != rendered_widths.len() {
        return Err(LayoutError::WidthCountMismatch {
            tokens: new_tokens.len(),
            widths: rendered_widths.len(),
        });
    }
    if new_tokens.is_empty() {
        return Err(LayoutError::NoTokens);
    }
    let src_widths: Vec<f64> = line.words.iter().map(|w| w.bbox.w as f64).collect();
    if src_widths.iter().sum::<f64>() <= 0.0 {
        return Err(LayoutError::DegenerateLine);
    }
    let knots = width_midpoints(&src_widths);
    let xs: Vec<f64> = line.words.iter().map(|w| w.bbox.center().0).collect();
    let ys: Vec<f64> = line.words.iter().map(|w| w.bbox.center().1).collect();
    let sx = NaturalSpline::new(&knots, &xs).map_err(|_| LayoutError::DegenerateLine)?;
    let sy = NaturalSpline::new(&knots, &ys).map_err(|_| LayoutError::DegenerateLine)?;

    let lb = line.bbox();
    let extent = lb.w as f64;
    let rendered: Vec<f64> = rendered_widths.iter().map(|w| w.max(1.0)).collect();
    let total: f64 = rendered.iter().sum();
    let scale = (extent / total).min(1.0);
    let widths: Vec<i64> = rendered.iter().map(|w| ((w * scale).floor() as i64).max(1)).collect();
    let queries = width_midpoints(&rendered);
    let height = line.height.round().max(1.0) as u32;

    let mut prefix = Vec::with_capacity(widths.len());
    let mut acc = 0i64;
    for w in &widths {
        prefix.push(acc);
        acc += w;
    }
    let total_w = acc;
    let desired: Vec<f64> = queries
        .iter()
        .zip(&widths)
        .zip(&prefix)
        .map(|((q, w), p)| sx.eval(*q) - *w as f64 / 2.0 - *p as f64)
        .collect();
    let lo = lb.x as f64;
    let hi = (lb.right() as i64 - total_w) as f64;
    let z = isotonic(&desired);

    Ok(z.iter()
        .zip(&widths)
        .zip(&prefix)
        .zip(&queries)
        .map(|(((z, w), p), q)| {
            let z = if hi >= lo { z.clamp(lo, hi) } else { lo };
            let left = z.round() as i64 + p;
            let top = (sy.eval(*q) - height as f64 / 2.0).round() as i64;
            BBox::new(left as i32, top as i32, *w as u32, height)
        })
        .collect())
}

/// Index of the original word whose normalized width interval contains `u`.
fn source_word_at(line: &Line, u: f64) -> usize {
    let total: f64 = line.words.iter().map(|w| w.bbox.w as f64).sum();
    let mut acc = 0.0;
    for (i, w) in line.words.iter().enumerate() {
        acc += w.bbox.w as f64 / total;
        if u < acc {
            return i;
        }
    }
    line.words.len() - 1
}

/// Places `tokens` on `line` and links each to the original crop at the same
/// relative position, with the crop adjustment its new width needs.
pub fn plan_line(
    line: &Line,
    tokens: &[String],
    rendered_widths: &[f64],
    cfg: &LayoutConfig,
) -> Result<Vec<PlacementEntry>, LayoutError> {
    let boxes = spline_place(line, tokens, rendered_widths)?;
    let queries = width_midpoints(&rendered_widths.iter().map(|w| w.max(1.0)).collect::<Vec<_>>());
    Ok(tokens
        .iter()
        .zip(boxes)
        .zip(queries)
        .map(|((t, position), q)| {
            let source_crop = line.words[source_word_at(line, q)].bbox;
            PlacementEntry {
                target_text: t.clone(),
                position,
                source_crop,
                crop_action: plan_crop_action(source_crop.w, position.w, cfg.width_tolerance),
            }
        })
        .collect())
}

pub fn plan_crop_action(source_w: u32, target_w: u32, tolerance: f64) -> CropAction {
    let diff = (target_w as f64 - source_w as f64).abs();
    if diff <= tolerance * source_w as f64 {
        CropAction::None
    } else if target_w < source_w {
        CropAction::CenterCut
    } else {
        CropAction::TileReplicate
    }
}

/// Adjusts a style crop to `target_w` columns: a centered cut, a horizontal
/// tiling, or a plain resample when the widths already agree.
pub fn apply_crop_action(crop: &SceneImage, action: CropAction, target_w: u32) -> SceneImage {
    let target_w = target_w.max(1);
    let (w, h) = crop.dims();
    match action {
        CropAction::None => crop.resize_nearest(target_w, h),
        CropAction::CenterCut if target_w <= w => {
            let x0 = (w - target_w) / 2;
            crop.crop(BBox::new(x0 as i32, 0, target_w, h))
                .expect("cut lies inside the crop")
        }
        CropAction::CenterCut | CropAction::TileReplicate => {
            SceneImage::from_fn(crop.id().to_string(), target_w, h, |x, y| crop.get(x % w, y))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(x: i32, y: i32, w: u32, h: u32, text: &str) -> WordObservation {
        WordObservation::new(BBox::new(x, y, w, h), text, 1.0)
    }

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn same_band_small_gap_is_one_line() {
        // gap = 10 = 0.5 * median height 20
        let words = [word(0, 0, 50, 20, "exit"), word(60, 0, 40, 20, "gate")];
        let plan = group_layout(&words, &LayoutConfig::default()).unwrap();
        assert_eq!(plan.paragraphs.len(), 1);
        assert_eq!(plan.paragraphs[0].lines.len(), 1);
        assert_eq!(plan.paragraphs[0].lines[0].text(), "exit gate");
    }

    #[test]
    fn large_vertical_gap_splits_paragraphs() {
        let words = [word(0, 0, 50, 20, "top"), word(0, 80, 50, 20, "bottom")];
        let plan = group_layout(&words, &LayoutConfig::default()).unwrap();
        assert_eq!(plan.paragraphs.len(), 2);
        assert_eq!(plan.paragraphs[0].text(), "top");
    }

    #[test]
    fn stacked_lines_form_one_paragraph() {
        let words = [
            word(0, 30, 60, 20, "station"),
            word(0, 0, 40, 20, "metro"),
            word(50, 0, 40, 20, "rail"),
        ];
        let plan = group_layout(&words, &LayoutConfig::default()).unwrap();
        assert_eq!(plan.paragraphs.len(), 1);
        assert_eq!(plan.paragraphs[0].lines.len(), 2);
        assert_eq!(plan.paragraphs[0].text(), "metro rail station");
    }

    #[test]
    fn passthrough_tokens_leave_paragraphs() {
        let words = [word(0, 0, 50, 20, "call"), word(60, 0, 90, 20, "9876543210")];
        let plan = group_layout(&words, &LayoutConfig::default()).unwrap();
        assert_eq!(plan.paragraphs[0].text(), "call");
        assert_eq!(plan.passthrough.len(), 1);
        assert_eq!(plan.word_count(), 2);
    }

    #[test]
    fn no_words_errors() {
        assert_eq!(
            group_layout(&[], &LayoutConfig::default()).unwrap_err(),
            LayoutError::NoWords
        );
    }

    fn paragraph_with_counts(counts: &[usize]) -> Paragraph {
        let lines = counts
            .iter()
            .enumerate()
            .map(|(i, c)| Line::new(vec![word(0, i as i32 * 30, 10, 20, &"x".repeat(*c))]))
            .collect();
        Paragraph::new(lines)
    }

    #[test]
    fn allocation_examples() {
        let eight = toks(&["a", "b", "c", "d", "e", "f", "g", "h"]);
        let one = allocate_lines(&eight, &paragraph_with_counts(&[7]));
        assert_eq!(one, vec![eight.clone()]);

        let four = toks(&["aa", "bb", "cc", "dd"]);
        let even = allocate_lines(&four, &paragraph_with_counts(&[10, 10]));
        assert_eq!(even.iter().map(Vec::len).collect::<Vec<_>>(), [2, 2]);

        let skewed = allocate_lines(&eight, &paragraph_with_counts(&[30, 10]));
        assert_eq!(skewed.iter().map(Vec::len).collect::<Vec<_>>(), [6, 2]);
        assert_eq!(skewed.concat(), eight);
    }

    #[test]
    fn largest_remainder_ties_go_to_earlier_lines() {
        assert_eq!(largest_remainder(1, &[5, 5]), [1, 0]);
        assert_eq!(largest_remainder(2, &[1, 1, 1]), [1, 1, 0]);
        assert_eq!(largest_remainder(1, &[0, 0]), [1, 0]);
        // quotas 5/3, 5/3, 5/3 -> floors 1,1,1, two leftovers
        assert_eq!(largest_remainder(5, &[4, 4, 4]), [2, 2, 1]);
    }

    #[test]
    fn single_knot_centers_new_box() {
        let line = Line::new(vec![word(100, 40, 80, 30, "exit")]);
        let b = spline_place(&line, &toks(&["niकास"]), &[50.0]).unwrap();
        assert_eq!(b.len(), 1);
        let (cx, cy) = b[0].center();
        assert!((cx - 140.0).abs() <= 0.5 && (cy - 55.0).abs() <= 0.5, "{b:?}");
        assert_eq!(b[0].w, 50);
        assert_eq!(b[0].h, 30);
        // wider than the line: squeezed to the extent
        let b = spline_place(&line, &toks(&["x"]), &[200.0]).unwrap();
        assert_eq!(b[0], BBox::new(100, 40, 80, 30));
    }

    #[test]
    fn horizontal_line_keeps_y() {
        let line = Line::new(vec![
            word(0, 10, 40, 20, "a"),
            word(50, 10, 70, 20, "b"),
            word(130, 10, 30, 20, "c"),
            word(170, 10, 50, 20, "d"),
        ]);
        let boxes = spline_place(&line, &toks(&["p", "q", "r"]), &[60.0, 40.0, 80.0]).unwrap();
        assert!(boxes.iter().all(|b| b.y == boxes[0].y));
        for pair in boxes.windows(2) {
            assert!(pair[1].x >= pair[0].right(), "{boxes:?}");
        }
        let lb = line.bbox();
        assert!(boxes[0].x >= lb.x && boxes.last().unwrap().right() <= lb.right());
    }

    #[test]
    fn width_mismatch_errors() {
        let line = Line::new(vec![word(0, 0, 10, 10, "a")]);
        assert!(matches!(
            spline_place(&line, &toks(&["a", "b"]), &[1.0]),
            Err(LayoutError::WidthCountMismatch { .. })
        ));
        assert_eq!(spline_place(&line, &[], &[]), Err(LayoutError::NoTokens));
    }

    #[test]
    fn crop_actions() {
        assert_eq!(plan_crop_action(100, 100, 0.05), CropAction::None);
        assert_eq!(plan_crop_action(100, 105, 0.05), CropAction::None);
        assert_eq!(plan_crop_action(100, 60, 0.05), CropAction::CenterCut);
        assert_eq!(plan_crop_action(100, 180, 0.05), CropAction::TileReplicate);
    }

    #[test]
    fn crop_adjustment_shapes() {
        let crop = SceneImage::from_fn("c", 10, 2, |x, _| [x as u8, 0, 0]);
        let cut = apply_crop_action(&crop, CropAction::CenterCut, 4);
        assert_eq!(cut.dims(), (4, 2));
        assert_eq!(cut.get(0, 0)[0], 3);
        let tiled = apply_crop_action(&crop, CropAction::TileReplicate, 25);
        assert_eq!(tiled.dims(), (25, 2));
        assert_eq!(tiled.get(12, 1)[0], 2);
        assert_eq!(apply_crop_action(&crop, CropAction::None, 10), crop);
    }

    #[test]
    fn overflow_scale() {
        let cfg = LayoutConfig::default();
        assert_eq!(overflow_height_scale(110.0, 100.0, &cfg), 1.0);
        assert!((overflow_height_scale(125.0, 100.0, &cfg) - 0.8).abs() < 1e-12);
        assert_eq!(overflow_height_scale(400.0, 100.0, &cfg), 0.6);
    }

    #[test]
    fn isotonic_pools_violators() {
        assert_eq!(isotonic(&[1.0, 3.0, 2.0, 4.0]), [1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic(&[5.0, 5.0, 5.0]), [5.0, 5.0, 5.0]);
    }
}
