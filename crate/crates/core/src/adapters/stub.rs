//! Deterministic in-process stand-ins for the external models.
//!
//! Detection and recognition read ground-truth annotations ("oracle"), the
//! translator looks phrases up in a bilingual lexicon, and the eraser,
//! synthesizer and scorer are simple image operators with fixed behaviour.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::wire::{AdapterRequest, AdapterResponse, Op};
use super::{
    clamp_boxes, AdapterError, Adapters, CallContext, Detector, Eraser, QualityScorer, Recognizer, Synthesizer,
    Translator,
};
use crate::compositor::{histogram, otsu_threshold};
use crate::render::RENDER_GRAY;
use crate::scene::{luma, BBox, BinaryMask, SceneImage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub text: String,
}

/// Ground-truth words per image id.
#[derive(Debug, Default)]
pub struct OracleStore {
    by_image: RwLock<HashMap<String, Vec<Annotation>>>,
}

impl OracleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, image_id: impl Into<String>, annotations: Vec<Annotation>) {
        self.by_image.write().insert(image_id.into(), annotations);
    }

    pub fn get(&self, image_id: &str) -> Option<Vec<Annotation>> {
        self.by_image.read().get(image_id).cloned()
    }

    pub fn len(&self) -> usize {
        self.by_image.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn iou(a: &BBox, b: &BBox) -> f64 {
    let x0 = a.x.max(b.x);
    let y0 = a.y.max(b.y);
    let x1 = a.right().min(b.right());
    let y1 = a.bottom().min(b.bottom());
    if x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let inter = (x1 - x0) as f64 * (y1 - y0) as f64;
    inter / (a.area() as f64 + b.area() as f64 - inter)
}

pub struct OracleDetector {
    store: Arc<OracleStore>,
}

impl OracleDetector {
    pub fn new(store: Arc<OracleStore>) -> Self {
        Self { store }
    }
}

impl Detector for OracleDetector {
    fn detect(&self, img: &SceneImage, ctx: &CallContext) -> Result<Vec<BBox>, AdapterError> {
        let boxes = self
            .store
            .get(&ctx.image_id)
            .unwrap_or_default()
            .into_iter()
            .map(|a| a.bbox)
            .collect();
        Ok(clamp_boxes(boxes, img))
    }
}

pub struct OracleRecognizer {
    store: Arc<OracleStore>,
}

impl OracleRecognizer {
    pub fn new(store: Arc<OracleStore>) -> Self {
        Self { store }
    }
}

impl Recognizer for OracleRecognizer {
    /// The annotation whose box equals the crop box, else the one overlapping
    /// it best with IoU >= 0.5.
    fn recognize(&self, _crop: &SceneImage, ctx: &CallContext) -> Result<(String, f64), AdapterError> {
        let missing = || AdapterError::NoAnnotation {
            image_id: ctx.image_id.clone(),
            bbox: ctx.bbox,
        };
        let bbox = ctx.bbox.ok_or_else(missing)?;
        let anns = self.store.get(&ctx.image_id).ok_or_else(missing)?;
        if let Some(a) = anns.iter().find(|a| a.bbox == bbox) {
            return Ok((a.text.clone(), 1.0));
        }
        anns.iter()
            .map(|a| (iou(&a.bbox, &bbox), a))
            .filter(|(v, _)| *v >= 0.5)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, a)| (a.text.clone(), 1.0))
            .ok_or_else(missing)
    }
}

/// Longest-match phrase lookup; unknown tokens pass through unchanged.
#[derive(Debug, Clone, Default)]
pub struct LexiconTranslator {
    entries: HashMap<String, String>,
    longest: usize,
}

impl LexiconTranslator {
    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: Into<String>,
    {
        let mut lex = Self::default();
        for (s, t) in pairs {
            let key = Self::key(s.as_ref().split_whitespace());
            if key.is_empty() {
                continue;
            }
            lex.longest = lex.longest.max(key.split(' ').count());
            lex.entries.insert(key, t.into());
        }
        lex
    }

    /// UTF-8 TSV, `source<TAB>target` per line.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, AdapterError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (s, t) = line.split_once('\t').ok_or_else(|| {
                AdapterError::Config(format!("{}:{}: expected source<TAB>target", path.display(), i + 1))
            })?;
            pairs.push((s.to_string(), t.trim().to_string()));
        }
        Ok(Self::from_pairs(pairs))
    }

    fn key<'a>(tokens: impl Iterator<Item = &'a str>) -> String {
        tokens.map(str::to_lowercase).collect::<Vec<_>>().join(" ")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, text: &str) -> Result<String, AdapterError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(AdapterError::EmptyText);
        }
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let max = self.longest.min(tokens.len() - i);
            let hit = (1..=max).rev().find_map(|n| {
                self.entries
                    .get(&Self::key(tokens[i..i + n].iter().copied()))
                    .map(|t| (n, t.clone()))
            });
            match hit {
                Some((n, t)) => {
                    out.push(t);
                    i += n;
                }
                None => {
                    out.push(self.single_with_punct(tokens[i]));
                    i += 1;
                }
            }
        }
        Ok(out.join(" "))
    }

    /// Retries a lone token with surrounding ASCII punctuation stripped.
    fn single_with_punct(&self, token: &str) -> String {
        let core = token.trim_matches(|c: char| c.is_ascii_punctuation());
        if core.is_empty() || core == token {
            return token.to_string();
        }
        match self.entries.get(&core.to_lowercase()) {
            Some(t) => {
                let start = token.find(core).unwrap_or(0);
                format!("{}{t}{}", &token[..start], &token[start + core.len()..])
            }
            None => token.to_string(),
        }
    }
}

impl Translator for LexiconTranslator {
    fn translate(&self, text: &str, _ctx: &CallContext) -> Result<String, AdapterError> {
        self.lookup(text)
    }
}

fn lower_median(v: &mut [u8]) -> u8 {
    v.sort_unstable();
    v[(v.len() - 1) / 2]
}

/// Fills each masked component with the per-channel median of the unmasked
/// pixels within three pixels of it.
#[derive(Debug, Clone, Copy, Default)]
pub struct RingMedianEraser;

pub const RING_WIDTH: i64 = 3;

impl RingMedianEraser {
    pub fn erase_image(&self, img: &SceneImage, mask: &BinaryMask) -> Result<SceneImage, AdapterError> {
        if img.dims() != mask.dims() {
            return Err(AdapterError::DimensionMismatch {
                image: img.dims(),
                mask: mask.dims(),
            });
        }
        let (labels, n) = mask.components();
        if n == 0 {
            return Ok(img.clone());
        }
        let (w, h) = (img.width() as i64, img.height() as i64);
        let mut bounds = vec![(i64::MAX, i64::MAX, i64::MIN, i64::MIN); n as usize + 1];
        for (i, l) in labels.iter().enumerate() {
            if *l > 0 {
                let (x, y) = (i as i64 % w, i as i64 / w);
                let b = &mut bounds[*l as usize];
                *b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
            }
        }
        let mut out = img.clone();
        for comp in 1..=n {
            let (x0, y0, x1, y1) = bounds[comp as usize];
            let mut ring: [Vec<u8>; 3] = Default::default();
            for y in (y0 - RING_WIDTH).max(0)..=(y1 + RING_WIDTH).min(h - 1) {
                for x in (x0 - RING_WIDTH).max(0)..=(x1 + RING_WIDTH).min(w - 1) {
                    if mask.get(x as u32, y as u32) {
                        continue;
                    }
                    let near = (-RING_WIDTH..=RING_WIDTH).any(|dy| {
                        (-RING_WIDTH..=RING_WIDTH).any(|dx| {
                            let (nx, ny) = (x + dx, y + dy);
                            nx >= 0 && ny >= 0 && nx < w && ny < h && labels[(ny * w + nx) as usize] == comp
                        })
                    });
                    if near {
                        let p = img.get(x as u32, y as u32);
                        for c in 0..3 {
                            ring[c].push(p[c]);
                        }
                    }
                }
            }
            if ring[0].is_empty() {
                continue;
            }
            let fill = [
                lower_median(&mut ring[0]),
                lower_median(&mut ring[1]),
                lower_median(&mut ring[2]),
            ];
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if labels[(y * w + x) as usize] == comp {
                        out.put(x as u32, y as u32, fill);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Eraser for RingMedianEraser {
    fn erase(&self, img: &SceneImage, mask: &BinaryMask, _ctx: &CallContext) -> Result<SceneImage, AdapterError> {
        self.erase_image(img, mask)
    }
}

fn is_grayish(p: [u8; 3]) -> bool {
    p.iter().all(|c| (*c as i16 - RENDER_GRAY as i16).abs() <= 8)
}

/// Text color of a word crop: the most frequent 3-bit-per-channel color bin
/// among non-gray pixels of the minority Otsu class (falling back to all
/// non-gray pixels, then black), reported as the mean of that bin.
pub fn dominant_text_color(crop: &SceneImage) -> [u8; 3] {
    let gray = crop.to_grayscale();
    let pixels: Vec<[u8; 3]> = (0..crop.height())
        .flat_map(|y| (0..crop.width()).map(move |x| (x, y)))
        .map(|(x, y)| crop.get(x, y))
        .collect();
    let minority: Option<Vec<usize>> = otsu_threshold(&histogram(&gray)).ok().map(|t| {
        let dark: Vec<usize> = (0..gray.len()).filter(|i| gray[*i] <= t).collect();
        let light: Vec<usize> = (0..gray.len()).filter(|i| gray[*i] > t).collect();
        if dark.len() <= light.len() {
            dark
        } else {
            light
        }
    });
    let non_gray = |idx: &mut dyn Iterator<Item = usize>| -> Vec<[u8; 3]> {
        idx.map(|i| pixels[i]).filter(|p| !is_grayish(*p)).collect()
    };
    let mut candidates = minority.map(|m| non_gray(&mut m.into_iter())).unwrap_or_default();
    if candidates.is_empty() {
        candidates = non_gray(&mut (0..pixels.len()));
    }
    if candidates.is_empty() {
        return [0, 0, 0];
    }
    let bin = |p: &[u8; 3]| ((p[0] >> 5) as usize) << 6 | ((p[1] >> 5) as usize) << 3 | (p[2] >> 5) as usize;
    let mut counts = [0usize; 512];
    for p in &candidates {
        counts[bin(p)] += 1;
    }
    let best = (0..512).max_by_key(|b| (counts[*b], std::cmp::Reverse(*b))).unwrap();
    let mut sum = [0u64; 3];
    for p in candidates.iter().filter(|p| bin(p) == best) {
        for c in 0..3 {
            sum[c] += p[c] as u64;
        }
    }
    let n = counts[best] as u64;
    [
        ((sum[0] + n / 2) / n) as u8,
        ((sum[1] + n / 2) / n) as u8,
        ((sum[2] + n / 2) / n) as u8,
    ]
}

/// Recolors the black-on-gray target render with the source crop's text color.
#[derive(Debug, Clone, Copy, Default)]
pub struct RecolorSynthesizer;

impl RecolorSynthesizer {
    pub fn recolor(&self, source_crop: &SceneImage, target_render: &SceneImage) -> SceneImage {
        let color = dominant_text_color(source_crop);
        let g = RENDER_GRAY as f64;
        SceneImage::from_fn("foreground", target_render.width(), target_render.height(), |x, y| {
            let p = target_render.get(x, y);
            let ink = (1.0 - luma(p[0], p[1], p[2]) as f64 / g).clamp(0.0, 1.0);
            let mix = |c: u8| (g + (c as f64 - g) * ink).round() as u8;
            [mix(color[0]), mix(color[1]), mix(color[2])]
        })
    }
}

impl Synthesizer for RecolorSynthesizer {
    fn synthesize(
        &self,
        source_crop: &SceneImage,
        target_render: &SceneImage,
        _ctx: &CallContext,
    ) -> Result<SceneImage, AdapterError> {
        Ok(self.recolor(source_crop, target_render))
    }
}

/// `min(100, var(Laplacian(luma)) / 50)` over interior pixels.
#[derive(Debug, Clone, Copy, Default)]
pub struct LaplacianScorer;

impl LaplacianScorer {
    pub fn score(&self, img: &SceneImage) -> f64 {
        let (w, h) = (img.width() as usize, img.height() as usize);
        if w < 3 || h < 3 {
            return 0.0;
        }
        let g = img.to_grayscale();
        let at = |x: usize, y: usize| g[y * w + x] as f64;
        let mut vals = Vec::with_capacity((w - 2) * (h - 2));
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                vals.push(at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4.0 * at(x, y));
            }
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (var / 50.0).min(100.0)
    }
}

impl QualityScorer for LaplacianScorer {
    fn score_quality(&self, img: &SceneImage, _ctx: &CallContext) -> Result<f64, AdapterError> {
        Ok(self.score(img))
    }
}

/// Serves an [`Adapters`] set over the wire protocol: one request in, one
/// response out, failures reported in-band.
#[derive(Clone)]
pub struct StubService {
    adapters: Adapters,
}

impl StubService {
    pub fn new(adapters: Adapters) -> Self {
        Self { adapters }
    }

    pub fn handle(&self, req: &AdapterRequest) -> AdapterResponse {
        match self.dispatch(req) {
            Ok(resp) => resp,
            Err(e) => AdapterResponse::failure(&req.request_id, e.to_string()),
        }
    }

    /// Parses one JSON line and returns the JSON response line (without newline).
    pub fn handle_line(&self, line: &str) -> String {
        let resp = match serde_json::from_str::<AdapterRequest>(line) {
            Ok(req) => self.handle(&req),
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(line)
                    .ok()
                    .and_then(|v| v.get("request_id").and_then(|i| i.as_str()).map(String::from))
                    .unwrap_or_default();
                AdapterResponse::failure(id, format!("unparseable request: {e}"))
            }
        };
        serde_json::to_string(&resp).expect("response serializes")
    }

    fn dispatch(&self, req: &AdapterRequest) -> Result<AdapterResponse, AdapterError> {
        req.validate()?;
        let mut ctx = CallContext::new(
            &req.request_id,
            req.texts.get("image_id").cloned().unwrap_or_default(),
            req.src_lang,
            req.tgt_lang,
        );
        if let Some(b) = req.texts.get("box") {
            ctx.bbox = Some(parse_box(b)?);
        }
        let a = &self.adapters;
        let resp = AdapterResponse::ok(&req.request_id);
        Ok(match req.op {
            Op::Detect => {
                let img = req.image("image")?;
                AdapterResponse {
                    boxes: Some(a.detector.detect(&img, &ctx)?),
                    ..resp
                }
            }
            Op::Recognize => {
                let crop = req.image("crop")?;
                let (text, conf) = a.recognizer.recognize(&crop, &ctx)?;
                AdapterResponse {
                    score: Some(conf),
                    ..resp.with_text("text", text)
                }
            }
            Op::Translate => resp.with_text("text", a.translator.translate(req.text("text")?, &ctx)?),
            Op::Erase => {
                let img = req.image("image")?;
                let mask = BinaryMask::from_image(&req.image("mask")?);
                resp.with_image("image", &a.eraser.erase(&img, &mask, &ctx)?)?
            }
            Op::Synthesize => {
                let src = req.image("source_crop")?;
                let tgt = req.image("target_render")?;
                resp.with_image("image", &a.synthesizer.synthesize(&src, &tgt, &ctx)?)?
            }
            Op::ScoreQuality => AdapterResponse {
                score: Some(a.scorer.score_quality(&req.image("image")?, &ctx)?),
                ..resp
            },
        })
    }
}

/// `"x,y,w,h"`.
pub fn format_box(b: &BBox) -> String {
    format!("{},{},{},{}", b.x, b.y, b.w, b.h)
}

pub fn parse_box(s: &str) -> Result<BBox, AdapterError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || AdapterError::BadRequest(format!("bad box {s:?}"));
    if parts.len() != 4 {
        return Err(bad());
    }
    Ok(BBox::new(
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
        parts[3].parse().map_err(|_| bad())?,
    ))
}
