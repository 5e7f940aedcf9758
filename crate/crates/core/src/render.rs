//! Text rasterization.
//!
//! Two faces are available: outline fonts loaded from TTF/OTF files, and a
//! built-in bitmap face that covers every code point (8x8 Latin glyphs, hashed
//! pseudo-glyphs elsewhere, Devanagari with a joining head stroke). Glyphs are
//! laid out one code point at a time; there is no complex-script shaping.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ab_glyph::{Font, FontArc, PxScale, ScaleFont};
use thiserror::Error;

use crate::scene::{BBox, SceneImage};

pub const BUILTIN_FONT_ID: &str = "builtin";
pub const RENDER_GRAY: u8 = 128;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("font {font} has no glyph for {ch:?}")]
    MissingGlyph { font: String, ch: char },
    #[error("text needs {needed:?} pixels but the canvas is {canvas:?}")]
    TextTooWide { needed: (u32, u32), canvas: (u32, u32) },
    #[error("cannot load font {path}: {reason}")]
    FontLoad { path: PathBuf, reason: String },
    #[error("no fonts found in {0}")]
    NoFonts(PathBuf),
    #[error("unknown font id {0:?}")]
    UnknownFont(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Grayscale coverage in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
    /// Union of the glyph ink boxes according to the font metrics.
    pub ink: Option<BBox>,
}

impl Coverage {
    pub fn blank(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width as usize * height as usize],
            ink: None,
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Bilinear sample with zero outside the raster; `(x, y)` are pixel-center coordinates.
    pub fn sample(&self, x: f32, y: f32) -> f32 {
        let fx = x - 0.5;
        let fy = y - 0.5;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let tx = fx - x0;
        let ty = fy - y0;
        let at = |xi: f32, yi: f32| -> f32 {
            if xi < 0.0 || yi < 0.0 || xi >= self.width as f32 || yi >= self.height as f32 {
                0.0
            } else {
                self.get(xi as u32, yi as u32)
            }
        };
        let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1.0, y0) * tx;
        let bottom = at(x0, y0 + 1.0) * (1.0 - tx) + at(x0 + 1.0, y0 + 1.0) * tx;
        top * (1.0 - ty) + bottom * ty
    }

    /// Bilinear resample to exact dimensions.
    pub fn resample(&self, width: u32, height: u32) -> Coverage {
        let (width, height) = (width.max(1), height.max(1));
        if (width, height) == (self.width, self.height) {
            return self.clone();
        }
        let sx = self.width as f32 / width as f32;
        let sy = self.height as f32 / height as f32;
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(self.sample((x as f32 + 0.5) * sx, (y as f32 + 0.5) * sy));
            }
        }
        Coverage {
            width,
            height,
            data,
            ink: None,
        }
    }
}

#[derive(Clone)]
pub enum FontFace {
    Builtin,
    Outline { id: String, font: FontArc },
}

impl std::fmt::Debug for FontFace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FontFace({})", self.id())
    }
}

impl FontFace {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RenderError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        let font = FontArc::try_from_vec(bytes).map_err(|e| RenderError::FontLoad {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(FontFace::Outline { id, font })
    }

    pub fn id(&self) -> &str {
        match self {
            FontFace::Builtin => BUILTIN_FONT_ID,
            FontFace::Outline { id, .. } => id,
        }
    }

    pub fn supports(&self, c: char) -> bool {
        match self {
            FontFace::Builtin => true,
            FontFace::Outline { font, .. } => c.is_whitespace() || font.glyph_id(c).0 != 0,
        }
    }

    pub fn check_glyphs(&self, text: &str) -> Result<(), RenderError> {
        match text.chars().find(|c| !self.supports(*c)) {
            Some(ch) => Err(RenderError::MissingGlyph {
                font: self.id().to_string(),
                ch,
            }),
            None => Ok(()),
        }
    }

    /// Advance width of `text` at pixel size `px`.
    pub fn measure(&self, text: &str, px: f32) -> f32 {
        match self {
            FontFace::Builtin => text.chars().count() as f32 * px * BUILTIN_ADVANCE,
            FontFace::Outline { font, .. } => {
                let sf = font.as_scaled(PxScale::from(px));
                let mut width = 0.0;
                let mut prev = None;
                for c in text.chars() {
                    let g = sf.glyph_id(c);
                    if let Some(p) = prev {
                        width += sf.kern(p, g);
                    }
                    width += sf.h_advance(g);
                    prev = Some(g);
                }
                width
            }
        }
    }

    /// Upright coverage raster of `text` at pixel size `px`. The raster is as
    /// wide as the advance (at least one pixel) and `ceil(px)` tall.
    pub fn rasterize(&self, text: &str, px: f32) -> Result<Coverage, RenderError> {
        self.check_glyphs(text)?;
        let px = px.max(1.0);
        let width = (self.measure(text, px).ceil() as u32).max(1);
        let height = px.ceil() as u32;
        let mut cov = Coverage::blank(width, height);
        match self {
            FontFace::Builtin => rasterize_builtin(text, px, &mut cov),
            FontFace::Outline { font, .. } => rasterize_outline(font, text, px, &mut cov),
        }
        Ok(cov)
    }
}

fn rasterize_outline(font: &FontArc, text: &str, px: f32, cov: &mut Coverage) {
    let sf = font.as_scaled(PxScale::from(px));
    // fit ascent..descent into the raster height
    let line_h = sf.ascent() - sf.descent();
    let baseline = sf.ascent() * px / line_h.max(1e-3);
    let scale = PxScale::from(px * px / line_h.max(1e-3));
    let sf = font.as_scaled(scale);
    let mut caret = 0.0;
    let mut prev = None;
    let mut ink: Option<BBox> = None;
    for c in text.chars() {
        let id = sf.glyph_id(c);
        if let Some(p) = prev {
            caret += sf.kern(p, id);
        }
        let glyph = id.with_scale_and_position(scale, ab_glyph::point(caret, baseline));
        caret += sf.h_advance(id);
        prev = Some(id);
        let Some(outlined) = font.outline_glyph(glyph) else {
            continue;
        };
        let b = outlined.px_bounds();
        let gb = BBox::new(
            b.min.x.floor() as i32,
            b.min.y.floor() as i32,
            (b.max.x.ceil() - b.min.x.floor()) as u32,
            (b.max.y.ceil() - b.min.y.floor()) as u32,
        );
        ink = Some(ink.map_or(gb, |i| i.union(&gb)));
        let (ox, oy) = (b.min.x as i64, b.min.y as i64);
        let (w, h) = (cov.width as i64, cov.height as i64);
        outlined.draw(|gx, gy, v| {
            let x = ox + gx as i64;
            let y = oy + gy as i64;
            if x >= 0 && y >= 0 && x < w && y < h {
                let slot = &mut cov.data[(y * w + x) as usize];
                *slot = (*slot + v).min(1.0);
            }
        });
    }
    cov.ink = ink;
}

/// Advance of a built-in glyph in em units.
const BUILTIN_ADVANCE: f32 = 0.625;

/// 8x8 bitmap for `c`; bit `col` of row `row` set means ink.
fn builtin_glyph(c: char) -> [u8; 8] {
    use font8x8::UnicodeFonts;
    if c.is_whitespace() {
        return [0; 8];
    }
    if let Some(g) = font8x8::BASIC_FONTS.get(c) {
        return g;
    }
    // splitmix64 of the code point
    let mut z = (c as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let mut rows = [0u8; 8];
    for (r, row) in rows.iter_mut().enumerate().take(7).skip(2) {
        *row = ((z >> (r * 8)) as u8 & 0b0011_1110) | 0b0000_0100;
    }
    if ('\u{0900}'..='\u{097F}').contains(&c) {
        // head stroke joins neighbouring glyphs
        rows[1] = 0xFF;
    } else {
        rows[1] = 0b0011_1100;
        rows[7] = 0b0001_1000;
    }
    rows
}

fn rasterize_builtin(text: &str, px: f32, cov: &mut Coverage) {
    // the 8x8 cell maps onto advance x px
    let cell_w = px * BUILTIN_ADVANCE / 8.0;
    let cell_h = px / 8.0;
    const SS: u32 = 4;
    let mut ink: Option<BBox> = None;
    for (i, c) in text.chars().enumerate() {
        let glyph = builtin_glyph(c);
        if glyph.iter().all(|r| *r == 0) {
            continue;
        }
        let x_origin = i as f32 * px * BUILTIN_ADVANCE;
        let (mut c0, mut c1, mut r0, mut r1) = (8, 0, 8, 0);
        for (r, row) in glyph.iter().enumerate() {
            for col in 0..8 {
                if row >> col & 1 == 1 {
                    c0 = c0.min(col);
                    c1 = c1.max(col + 1);
                    r0 = r0.min(r);
                    r1 = r1.max(r + 1);
                }
            }
        }
        let gx0 = x_origin + c0 as f32 * cell_w;
        let gx1 = x_origin + c1 as f32 * cell_w;
        let gy0 = r0 as f32 * cell_h;
        let gy1 = r1 as f32 * cell_h;
        let gb = BBox::new(
            gx0.floor() as i32,
            gy0.floor() as i32,
            (gx1.ceil() - gx0.floor()) as u32,
            (gy1.ceil() - gy0.floor()) as u32,
        );
        ink = Some(ink.map_or(gb, |b| b.union(&gb)));
        let px0 = gx0.floor().max(0.0) as u32;
        let px1 = (gx1.ceil() as u32).min(cov.width);
        let py0 = gy0.floor().max(0.0) as u32;
        let py1 = (gy1.ceil() as u32).min(cov.height);
        for y in py0..py1 {
            for x in px0..px1 {
                let mut hits = 0;
                for sy in 0..SS {
                    for sx in 0..SS {
                        let fx = x as f32 + (sx as f32 + 0.5) / SS as f32 - x_origin;
                        let fy = y as f32 + (sy as f32 + 0.5) / SS as f32;
                        let col = (fx / cell_w).floor();
                        let row = (fy / cell_h).floor();
                        if (0.0..8.0).contains(&col)
                            && (0.0..8.0).contains(&row)
                            && glyph[row as usize] >> col as u32 & 1 == 1
                        {
                            hits += 1;
                        }
                    }
                }
                if hits > 0 {
                    let slot = &mut cov.data[(y * cov.width + x) as usize];
                    *slot = (*slot + hits as f32 / (SS * SS) as f32).min(1.0);
                }
            }
        }
    }
    cov.ink = ink;
}

/// A set of faces addressable by id. The built-in face is always present.
#[derive(Debug, Clone)]
pub struct FontBook {
    faces: Vec<Arc<FontFace>>,
}

impl Default for FontBook {
    fn default() -> Self {
        Self {
            faces: vec![Arc::new(FontFace::Builtin)],
        }
    }
}

impl FontBook {
    /// Loads every `.ttf`/`.otf` under `dir` (sorted by file name). The
    /// built-in face is not included.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, RenderError> {
        let dir = dir.as_ref();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .map(|e| {
                        let e = e.to_string_lossy().to_ascii_lowercase();
                        e == "ttf" || e == "otf"
                    })
                    .unwrap_or(false)
            })
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(RenderError::NoFonts(dir.to_path_buf()));
        }
        let faces = paths
            .iter()
            .map(|p| FontFace::load(p).map(Arc::new))
            .collect::<Result<_, _>>()?;
        Ok(Self { faces })
    }

    pub fn from_faces(faces: Vec<FontFace>) -> Self {
        Self {
            faces: faces.into_iter().map(Arc::new).collect(),
        }
    }

    pub fn faces(&self) -> &[Arc<FontFace>] {
        &self.faces
    }

    pub fn get(&self, id: &str) -> Result<&FontFace, RenderError> {
        self.faces
            .iter()
            .find(|f| f.id() == id)
            .map(|f| f.as_ref())
            .ok_or_else(|| RenderError::UnknownFont(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

/// Black text on gray(128), sized exactly `width` x `height`. The text is
/// rasterized at the box height and stretched to the box.
pub fn render_black_on_gray(face: &FontFace, text: &str, width: u32, height: u32) -> Result<SceneImage, RenderError> {
    let cov = face.rasterize(text, height as f32)?.resample(width, height);
    Ok(SceneImage::from_fn("render", width.max(1), height.max(1), |x, y| {
        let v = (RENDER_GRAY as f32 * (1.0 - cov.get(x, y))).round() as u8;
        [v; 3]
    }))
}
