//! Paired bilingual word images for training style-preserving text editors.
//!
//! Each sample renders a source word and a target word with one shared style
//! over one background and keeps every intermediate: the plain target render,
//! the background alone, the styled target foreground on gray, both text
//! masks and the target skeleton.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compositor::composite;
use crate::render::{FontBook, FontFace, RenderError, RENDER_GRAY};
use crate::scene::{BinaryMask, SceneError, SceneImage};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("empty resource: {0}")]
    EmptyResource(String),
    #[error("invalid style: {0}")]
    InvalidStyle(String),
    #[error(transparent)]
    Image(#[from] SceneError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub const MIN_SIZE: f32 = 16.0;
pub const MAX_SIZE: f32 = 72.0;
pub const MAX_ROTATION: f32 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outline {
    pub color: [u8; 3],
    pub px: u32,
}

/// Visual properties shared by both words of a pair. `size` is in points,
/// rendered at one pixel per point; `rotation` is in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSpec {
    pub font_id: String,
    pub size: f32,
    pub fill_color: [u8; 3],
    pub rotation: f32,
    pub shear: f32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outline: Option<Outline>,
}

impl StyleSpec {
    /// Black, upright, no outline.
    pub fn plain(font_id: impl Into<String>, size: f32) -> Self {
        Self {
            font_id: font_id.into(),
            size,
            fill_color: [0; 3],
            rotation: 0.0,
            shear: 0.0,
            outline: None,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(MIN_SIZE..=MAX_SIZE).contains(&self.size) {
            return Err(SynthError::InvalidStyle(format!("size {} outside [16, 72]", self.size)));
        }
        if !self.rotation.is_finite() || self.rotation.abs() > MAX_ROTATION {
            return Err(SynthError::InvalidStyle(format!(
                "rotation {} beyond 15 degrees",
                self.rotation
            )));
        }
        if !self.shear.is_finite() || self.shear.abs() > 1.0 {
            return Err(SynthError::InvalidStyle(format!("shear {}", self.shear)));
        }
        Ok(())
    }

    /// Inverse of rotation-after-shear (determinant 1).
    fn inverse_transform(&self) -> [[f64; 2]; 2] {
        let m = self.transform();
        [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
    }

    fn transform(&self) -> [[f64; 2]; 2] {
        let (s, c) = (self.rotation as f64).to_radians().sin_cos();
        let k = self.shear as f64;
        [[c, c * k - s], [s, s * k + c]]
    }
}

/// What the text is drawn onto.
#[derive(Debug, Clone, Copy)]
pub enum Backdrop<'a> {
    Gray,
    Over(&'a SceneImage),
}

const PAINT_NONE: u8 = 0;
const PAINT_FILL: u8 = 1;
const PAINT_OUTLINE: u8 = 2;

/// Upright paint raster: glyph pixels (coverage > 0.5), then outline ring.
struct LocalRaster {
    width: u32,
    height: u32,
    paint: Vec<u8>,
}

fn local_raster(face: &FontFace, text: &str, style: &StyleSpec) -> Result<LocalRaster, SynthError> {
    let cov = face.rasterize(text, style.size)?;
    let o = style.outline.map_or(0, |o| o.px);
    let (w, h) = (cov.width + 2 * o, cov.height + 2 * o);
    let mut paint = vec![PAINT_NONE; w as usize * h as usize];
    for y in 0..cov.height {
        for x in 0..cov.width {
            if cov.get(x, y) > 0.5 {
                paint[((y + o) * w + x + o) as usize] = PAINT_FILL;
            }
        }
    }
    if o > 0 {
        let r = o as i64;
        let fill = paint.clone();
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                if fill[(y * w as i64 + x) as usize] == PAINT_FILL {
                    continue;
                }
                let near = (-r..=r).any(|dy| {
                    (-r..=r).any(|dx| {
                        let (nx, ny) = (x + dx, y + dy);
                        dx * dx + dy * dy <= r * r
                            && nx >= 0
                            && ny >= 0
                            && nx < w as i64
                            && ny < h as i64
                            && fill[(ny * w as i64 + nx) as usize] == PAINT_FILL
                    })
                });
                if near {
                    paint[(y * w as i64 + x) as usize] = PAINT_OUTLINE;
                }
            }
        }
    }
    Ok(LocalRaster {
        width: w,
        height: h,
        paint,
    })
}

/// Canvas size needed to hold the transformed raster.
fn transformed_extent(w: u32, h: u32, style: &StyleSpec) -> (u32, u32) {
    let m = style.transform();
    let (hw, hh) = (w as f64 / 2.0, h as f64 / 2.0);
    let (mut ex, mut ey) = (0.0f64, 0.0f64);
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
        let (x, y) = (sx * hw, sy * hh);
        ex = ex.max((m[0][0] * x + m[0][1] * y).abs());
        ey = ey.max((m[1][0] * x + m[1][1] * y).abs());
    }
    ((2.0 * ex - 1e-9).ceil() as u32, (2.0 * ey - 1e-9).ceil() as u32)
}

/// Pixel extent `text` needs under `style`.
pub fn measure_word(face: &FontFace, text: &str, style: &StyleSpec) -> Result<(u32, u32), SynthError> {
    if text.is_empty() {
        return Ok((0, 0));
    }
    let r = local_raster(face, text, style)?;
    Ok(transformed_extent(r.width, r.height, style))
}

/// Renders `text` centered on a `canvas`-sized image. Returns the image and
/// the mask of painted pixels (glyphs and outline). Edges are hard, so
/// rendering over a background equals compositing the gray render onto it
/// through the mask.
pub fn render_word(
    face: &FontFace,
    text: &str,
    style: &StyleSpec,
    canvas: (u32, u32),
    backdrop: Backdrop<'_>,
) -> Result<(SceneImage, BinaryMask), SynthError> {
    let (cw, ch) = canvas;
    let mut img = match backdrop {
        Backdrop::Gray => SceneImage::filled("render", cw, ch, [RENDER_GRAY; 3]),
        Backdrop::Over(bg) => {
            if bg.dims() != canvas {
                return Err(SceneError::DimensionMismatch {
                    expected: canvas,
                    actual: bg.dims(),
                }
                .into());
            }
            bg.clone()
        }
    };
    let mut mask = BinaryMask::new(cw, ch);
    if text.is_empty() {
        return Ok((img, mask));
    }
    let r = local_raster(face, text, style)?;
    let needed = transformed_extent(r.width, r.height, style);
    if needed.0 > cw || needed.1 > ch {
        return Err(RenderError::TextTooWide { needed, canvas }.into());
    }
    let inv = style.inverse_transform();
    // integer offset so an untransformed raster lands on whole pixels
    let cx = ((cw - r.width.min(cw)) / 2) as f64 + r.width as f64 / 2.0;
    let cy = ((ch - r.height.min(ch)) / 2) as f64 + r.height as f64 / 2.0;
    let outline = style.outline.map_or([0; 3], |o| o.color);
    for y in 0..ch {
        for x in 0..cw {
            let (px, py) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            let lx = inv[0][0] * px + inv[0][1] * py + r.width as f64 / 2.0;
            let ly = inv[1][0] * px + inv[1][1] * py + r.height as f64 / 2.0;
            if lx < 0.0 || ly < 0.0 || lx >= r.width as f64 || ly >= r.height as f64 {
                continue;
            }
            let v = r.paint[ly as usize * r.width as usize + lx as usize];
            if v != PAINT_NONE {
                img.put(x, y, if v == PAINT_FILL { style.fill_color } else { outline });
                mask.set(x, y, true);
            }
        }
    }
    Ok((img, mask))
}

/// Zhang-Suen neighbours P2..P9 (N, NE, E, SE, S, SW, W, NW).
fn neighbours(m: &BinaryMask, x: u32, y: u32) -> [bool; 8] {
    let (x, y) = (x as i64, y as i64);
    [
        m.get_signed(x, y - 1),
        m.get_signed(x + 1, y - 1),
        m.get_signed(x + 1, y),
        m.get_signed(x + 1, y + 1),
        m.get_signed(x, y + 1),
        m.get_signed(x - 1, y + 1),
        m.get_signed(x - 1, y),
        m.get_signed(x - 1, y - 1),
    ]
}

/// (0 to 1 transitions around the ring, set neighbour count).
fn transitions_and_count(p: &[bool; 8]) -> (usize, usize) {
    let a = (0..8).filter(|i| !p[*i] && p[(i + 1) % 8]).count();
    (a, p.iter().filter(|v| **v).count())
}

fn deletable(m: &BinaryMask, x: u32, y: u32, second: bool) -> bool {
    let p = neighbours(m, x, y);
    let (a, b) = transitions_and_count(&p);
    let [p2, _, p4, _, p6, _, p8, _] = p;
    (2..=6).contains(&b)
        && a == 1
        && if second {
            !(p2 && p4 && p8) && !(p2 && p6 && p8)
        } else {
            !(p2 && p4 && p6) && !(p4 && p6 && p8)
        }
}

/// Zhang-Suen thinning run to completion. When a parallel sub-iteration
/// would change the number of 8-connected components (two-pixel-thick
/// strokes vanish under the plain rule), its candidates are instead removed
/// one at a time in raster order, each only while it is still a simple
/// non-isolated point.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let mut m = mask.clone();
    let target = m.components().1;
    loop {
        let mut changed = false;
        for second in [false, true] {
            let flagged: Vec<(u32, u32)> = (0..m.height())
                .flat_map(|y| (0..m.width()).map(move |x| (x, y)))
                .filter(|&(x, y)| m.get(x, y) && deletable(&m, x, y, second))
                .collect();
            if flagged.is_empty() {
                continue;
            }
            let mut next = m.clone();
            for &(x, y) in &flagged {
                next.set(x, y, false);
            }
            if next.components().1 == target {
                m = next;
                changed = true;
                continue;
            }
            for &(x, y) in &flagged {
                let (a, b) = transitions_and_count(&neighbours(&m, x, y));
                if a == 1 && b >= 1 {
                    m.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            return m;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackgroundSource {
    Image { name: String },
    Texture { pattern: String },
    Flat { color: [u8; 3] },
}

#[derive(Debug, Clone)]
pub struct PairedSample {
    pub src_word: String,
    pub tgt_word: String,
    pub style: StyleSpec,
    pub seed: u64,
    /// Source word in style over the background.
    pub i_s: SceneImage,
    /// Target word, plain black on gray.
    pub i_t: SceneImage,
    /// Background alone.
    pub t_b: SceneImage,
    /// Target word in style on gray.
    pub t_f: SceneImage,
    /// Target word in style over the background.
    pub t_t: SceneImage,
    pub mask_s: BinaryMask,
    pub mask_t: BinaryMask,
    pub t_sk: BinaryMask,
}

impl PairedSample {
    pub fn dims(&self) -> (u32, u32) {
        self.t_b.dims()
    }
}

/// Tiles `bg` from a seeded offset to fill `width x height` (a plain crop
/// when `bg` is large enough).
pub fn fit_background(bg: &SceneImage, width: u32, height: u32, rng: &mut impl Rng) -> SceneImage {
    let pick = |rng: &mut dyn rand::RngCore, have: u32, want: u32| {
        if have >= want {
            rng.gen_range(0..=have - want)
        } else {
            rng.gen_range(0..have)
        }
    };
    let ox = pick(rng, bg.width(), width);
    let oy = pick(rng, bg.height(), height);
    SceneImage::from_fn("background", width, height, |x, y| {
        bg.get((x + ox) % bg.width(), (y + oy) % bg.height())
    })
}

fn random_color(rng: &mut impl Rng) -> [u8; 3] {
    [rng.gen(), rng.gen(), rng.gen()]
}

pub const TEXTURES: [&str; 4] = ["gradient", "stripes", "checker", "noise"];

/// A procedural texture chosen by seed.
pub fn procedural_background(width: u32, height: u32, rng: &mut impl Rng) -> (SceneImage, String) {
    let pattern = TEXTURES[rng.gen_range(0..TEXTURES.len())];
    let a = random_color(rng);
    let b = random_color(rng);
    let mix = |t: f64| -> [u8; 3] {
        let t = t.clamp(0.0, 1.0);
        [0, 1, 2].map(|c| (a[c] as f64 * (1.0 - t) + b[c] as f64 * t).round() as u8)
    };
    let img = match pattern {
        "gradient" => {
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (s, c) = angle.sin_cos();
            let span = (width as f64 * c.abs() + height as f64 * s.abs()).max(1.0);
            SceneImage::from_fn("texture", width, height, |x, y| {
                let d = (x as f64 - width as f64 / 2.0) * c + (y as f64 - height as f64 / 2.0) * s;
                mix(d / span + 0.5)
            })
        }
        "stripes" => {
            let period = rng.gen_range(4..24u32);
            let vertical = rng.gen_bool(0.5);
            SceneImage::from_fn("texture", width, height, |x, y| {
                let v = if vertical { x } else { y };
                if (v / period) % 2 == 0 {
                    a
                } else {
                    b
                }
            })
        }
        "checker" => {
            let cell = rng.gen_range(4..32u32);
            SceneImage::from_fn("texture", width, height, |x, y| {
                if (x / cell + y / cell) % 2 == 0 {
                    a
                } else {
                    b
                }
            })
        }
        _ => {
            // value noise on a coarse lattice
            let cell = rng.gen_range(6..30u32);
            let gw = width / cell + 2;
            let gh = height / cell + 2;
            let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.gen()).collect();
            SceneImage::from_fn("texture", width, height, |x, y| {
                let (fx, fy) = (x as f64 / cell as f64, y as f64 / cell as f64);
                let (ix, iy) = (fx as u32, fy as u32);
                let (tx, ty) = (fx - ix as f64, fy - iy as f64);
                let at = |i: u32, j: u32| lattice[(j * gw + i) as usize];
                let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
                let bot = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
                mix(top * (1.0 - ty) + bot * ty)
            })
        }
    };
    (img, pattern.to_string())
}

/// Renders one pair over `background` (fitted to the canvas with `seed`).
pub fn generate_sample(
    src_word: &str,
    tgt_word: &str,
    style: &StyleSpec,
    face: &FontFace,
    background: &SceneImage,
    seed: u64,
) -> Result<PairedSample, SynthError> {
    style.validate()?;
    face.check_glyphs(src_word)?;
    face.check_glyphs(tgt_word)?;
    let plain = StyleSpec::plain(style.font_id.clone(), style.size);
    let pad = 4 + (style.size / 8.0).ceil() as u32;
    let mut width = 1;
    let mut height = 1;
    for (text, st) in [(src_word, style), (tgt_word, style), (tgt_word, &plain)] {
        let (w, h) = measure_word(face, text, st)?;
        width = width.max(w);
        height = height.max(h);
    }
    let canvas = (width + 2 * pad, height + 2 * pad);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_b = fit_background(background, canvas.0, canvas.1, &mut rng);
    let (i_s, mask_s) = render_word(face, src_word, style, canvas, Backdrop::Over(&t_b))?;
    let (t_t, mask_t) = render_word(face, tgt_word, style, canvas, Backdrop::Over(&t_b))?;
    let (t_f, _) = render_word(face, tgt_word, style, canvas, Backdrop::Gray)?;
    let (i_t, _) = render_word(face, tgt_word, &plain, canvas, Backdrop::Gray)?;
    let t_sk = skeletonize(&mask_t);
    Ok(PairedSample {
        src_word: src_word.to_string(),
        tgt_word: tgt_word.to_string(),
        style: style.clone(),
        seed,
        i_s,
        i_t,
        t_b,
        t_f,
        t_t,
        mask_s,
        mask_t,
        t_sk,
    })
}

/// Checks the structural invariants of a sample; returns the first violation.
pub fn check_sample(s: &PairedSample) -> Result<(), String> {
    let dims = s.t_b.dims();
    for (name, d) in [
        ("i_s", s.i_s.dims()),
        ("i_t", s.i_t.dims()),
        ("t_f", s.t_f.dims()),
        ("t_t", s.t_t.dims()),
        ("mask_s", s.mask_s.dims()),
        ("mask_t", s.mask_t.dims()),
        ("t_sk", s.t_sk.dims()),
    ] {
        if d != dims {
            return Err(format!("{name} is {d:?}, background is {dims:?}"));
        }
    }
    let recomposed = composite(&s.t_b, &s.t_f, &s.mask_t, false).map_err(|e| e.to_string())?;
    for y in 0..dims.1 {
        for x in 0..dims.0 {
            let (tt, tb) = (s.t_t.get(x, y), s.t_b.get(x, y));
            if tt != tb && !s.mask_t.get(x, y) {
                return Err(format!("t_t differs from t_b outside mask_t at ({x}, {y})"));
            }
            if s.mask_t.get(x, y) && tt == tb && s.t_f.get(x, y) != tb {
                return Err(format!("mask_t set at ({x}, {y}) but t_t equals t_b"));
            }
            let r = recomposed.get(x, y);
            if (0..3).any(|c| (r[c] as i16 - tt[c] as i16).abs() > 2) {
                return Err(format!("t_t deviates from composite(t_b, t_f, mask_t) at ({x}, {y})"));
            }
            if s.t_sk.get(x, y) && !s.mask_t.get(x, y) {
                return Err(format!("skeleton pixel outside mask_t at ({x}, {y})"));
            }
            if s.mask_s.get(x, y) && s.i_s.get(x, y) != s.style.fill_color && s.style.outline.is_none() {
                return Err(format!("mask_s pixel at ({x}, {y}) not in the fill color"));
            }
        }
    }
    if s.t_sk.components().1 != s.mask_t.components().1 {
        return Err("skeleton changed the component count".into());
    }
    if s.tgt_word.trim().is_empty() != s.mask_t.is_empty() {
        return Err("mask_t emptiness disagrees with the target word".into());
    }
    Ok(())
}

/// Inputs of a corpus run.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub count: usize,
    pub vocab_src: Vec<String>,
    pub vocab_tgt: Vec<String>,
    pub fonts: FontBook,
    pub backgrounds: Vec<SceneImage>,
    pub seed: u64,
    /// Probability that a pair uses aligned vocabulary lines (translations);
    /// otherwise the two words are drawn independently.
    pub translation_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub index: usize,
    pub seed: u64,
    pub src_word: String,
    pub tgt_word: String,
    pub style: StyleSpec,
    pub background: BackgroundSource,
    pub width: u32,
    pub height: u32,
    /// Artifact name to path relative to the output directory.
    pub files: BTreeMap<String, String>,
}

pub const ARTIFACTS: [&str; 8] = ["i_s", "i_t", "t_b", "t_f", "t_t", "mask_s", "mask_t", "t_sk"];

/// Seed of sample `index`, independent of generation order.
pub fn sample_seed(master: u64, index: usize) -> u64 {
    let mut z = master.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Non-empty trimmed lines.
pub fn load_vocab(path: impl AsRef<Path>) -> Result<Vec<String>, SynthError> {
    Ok(std::fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// PNG and JPEG images under `dir`, sorted by file name.
pub fn load_backgrounds(dir: impl AsRef<Path>) -> Result<Vec<SceneImage>, SynthError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| {
                matches!(
                    e.to_string_lossy().to_ascii_lowercase().as_str(),
                    "png" | "jpg" | "jpeg"
                )
            })
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| SceneImage::load_png(p).map_err(SynthError::from))
        .collect()
}

struct SamplePlan {
    seed: u64,
    src: String,
    tgt: String,
    style: StyleSpec,
    face: usize,
    background: (SceneImage, BackgroundSource),
}

fn plan_sample(spec: &CorpusSpec, index: usize) -> Result<SamplePlan, SynthError> {
    let seed = sample_seed(spec.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i = rng.gen_range(0..spec.vocab_src.len());
    let aligned = spec.vocab_src.len() == spec.vocab_tgt.len() && rng.gen::<f64>() < spec.translation_ratio;
    let j = if aligned {
        i
    } else {
        rng.gen_range(0..spec.vocab_tgt.len())
    };
    let (src, tgt) = (spec.vocab_src[i].clone(), spec.vocab_tgt[j].clone());

    // first face from a random start that covers both words
    let faces = spec.fonts.faces();
    let start = rng.gen_range(0..faces.len());
    let face = (0..faces.len())
        .map(|k| (start + k) % faces.len())
        .find(|f| faces[*f].check_glyphs(&src).is_ok() && faces[*f].check_glyphs(&tgt).is_ok());
    let face = match face {
        Some(f) => f,
        None => {
            faces[start].check_glyphs(&src)?;
            faces[start].check_glyphs(&tgt)?;
            unreachable!("a face failing both checks was skipped")
        }
    };

    let style = StyleSpec {
        font_id: faces[face].id().to_string(),
        size: rng.gen_range(MIN_SIZE..=MAX_SIZE).round(),
        fill_color: random_color(&mut rng),
        rotation: rng.gen_range(-MAX_ROTATION..=MAX_ROTATION),
        shear: rng.gen_range(-0.25..=0.25),
        outline: if rng.gen_bool(0.3) {
            Some(Outline {
                color: random_color(&mut rng),
                px: rng.gen_range(1..=3),
            })
        } else {
            None
        },
    };

    // user images, textures and flat colors are equally likely
    let kinds = if spec.backgrounds.is_empty() { 2 } else { 3 };
    let background = match rng.gen_range(0..kinds) {
        0 => {
            let color = random_color(&mut rng);
            (
                SceneImage::filled("flat", 1, 1, color),
                BackgroundSource::Flat { color },
            )
        }
        1 => {
            let (img, pattern) = procedural_background(256, 256, &mut rng);
            (img, BackgroundSource::Texture { pattern })
        }
        _ => {
            let img = &spec.backgrounds[rng.gen_range(0..spec.backgrounds.len())];
            (
                img.clone(),
                BackgroundSource::Image {
                    name: img.id().to_string(),
                },
            )
        }
    };
    Ok(SamplePlan {
        seed,
        src,
        tgt,
        style,
        face,
        background,
    })
}

/// Generates sample `index` of the corpus described by `spec`.
pub fn corpus_sample(spec: &CorpusSpec, index: usize) -> Result<(PairedSample, BackgroundSource), SynthError> {
    let plan = plan_sample(spec, index)?;
    let face = &spec.fonts.faces()[plan.face];
    let sample = generate_sample(&plan.src, &plan.tgt, &plan.style, face, &plan.background.0, plan.seed)?;
    Ok((sample, plan.background.1))
}

/// Writes `spec.count` samples under `out` (one directory per artifact,
/// `{index:06}.png`) and `out/manifest.jsonl`. Output depends only on the
/// inputs and the seed.
pub fn generate_corpus(spec: &CorpusSpec, out: &Path) -> Result<Vec<ManifestRecord>, SynthError> {
    if spec.count > 0 {
        if spec.vocab_src.is_empty() || spec.vocab_tgt.is_empty() {
            return Err(SynthError::EmptyResource("vocabulary".into()));
        }
        if spec.fonts.is_empty() {
            return Err(SynthError::EmptyResource("fonts".into()));
        }
    }
    std::fs::create_dir_all(out)?;
    for a in ARTIFACTS {
        std::fs::create_dir_all(out.join(a))?;
    }
    let records: Vec<ManifestRecord> = (0..spec.count)
        .into_par_iter()
        .map(|index| {
            let (s, background) = corpus_sample(spec, index)?;
            let mut files = BTreeMap::new();
            let images: [(&str, SceneImage); 8] = [
                ("i_s", s.i_s.clone()),
                ("i_t", s.i_t.clone()),
                ("t_b", s.t_b.clone()),
                ("t_f", s.t_f.clone()),
                ("t_t", s.t_t.clone()),
                ("mask_s", s.mask_s.to_image("mask_s")),
                ("mask_t", s.mask_t.to_image("mask_t")),
                ("t_sk", s.t_sk.to_image("t_sk")),
            ];
            for (name, img) in images {
                let rel = format!("{name}/{index:06}.png");
                img.save_png(out.join(&rel))?;
                files.insert(name.to_string(), rel);
            }
            let (width, height) = s.dims();
            Ok(ManifestRecord {
                index,
                seed: s.seed,
                src_word: s.src_word,
                tgt_word: s.tgt_word,
                style: s.style,
                background,
                width,
                height,
                files,
            })
        })
        .collect::<Result<_, SynthError>>()?;
    let mut manifest = std::io::BufWriter::new(std::fs::File::create(out.join("manifest.jsonl"))?);
    for r in &records {
        serde_json::to_writer(&mut manifest, r)?;
        manifest.write_all(b"\n")?;
    }
    manifest.flush()?;
    Ok(records)
}
