//! Raster images, boxes and the per-word observation record shared by every stage.

use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::token_filter::TokenClass;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("box {0:?} lies entirely outside the {1}x{2} image")]
    EmptyIntersection(BBox, u32, u32),
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch { expected: (u32, u32), actual: (u32, u32) },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// An 8-bit RGB raster, row-major, no alpha.
#[derive(Clone, PartialEq, Eq)]
pub struct SceneImage {
    id: String,
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for SceneImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SceneImage")
            .field("id", &self.id)
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl SceneImage {
    pub fn new(id: impl Into<String>, width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, SceneError> {
        if width == 0 || height == 0 {
            return Err(SceneError::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(SceneError::InvalidImage(format!(
                "buffer length {} != {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            id: id.into(),
            width,
            height,
            pixels,
        })
    }

    /// Uniformly filled image.
    pub fn filled(id: impl Into<String>, width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Self {
            id: id.into(),
            width,
            height,
            pixels,
        }
    }

    pub fn from_fn(id: impl Into<String>, width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self {
            id: id.into(),
            width,
            height,
            pixels,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn bounds(&self) -> BBox {
        BBox::new(0, 0, self.width, self.height)
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let o = self.offset(x, y);
        self.pixels[o..o + 3].copy_from_slice(&rgb);
    }

    /// Clamped sub-image. The crop keeps the parent id.
    pub fn crop(&self, b: BBox) -> Result<SceneImage, SceneError> {
        let c = b
            .clamp_to(self.width, self.height)
            .ok_or(SceneError::EmptyIntersection(b, self.width, self.height))?;
        let mut pixels = Vec::with_capacity(c.area() as usize * 3);
        for y in c.y..c.y + c.h as i32 {
            let start = self.offset(c.x as u32, y as u32);
            pixels.extend_from_slice(&self.pixels[start..start + c.w as usize * 3]);
        }
        Ok(SceneImage {
            id: self.id.clone(),
            width: c.w,
            height: c.h,
            pixels,
        })
    }

    /// Returns a copy of `self` with `src` written at `at`; only the in-bounds part is written.
    pub fn paste(&self, src: &SceneImage, at: BBox) -> Result<SceneImage, SceneError> {
        let mut out = self.clone();
        out.paste_in_place(src, at)?;
        Ok(out)
    }

    pub fn paste_in_place(&mut self, src: &SceneImage, at: BBox) -> Result<(), SceneError> {
        if at.w != src.width || at.h != src.height {
            return Err(SceneError::DimensionMismatch {
                expected: (at.w, at.h),
                actual: src.dims(),
            });
        }
        let Some(c) = at.clamp_to(self.width, self.height) else {
            return Ok(());
        };
        let sx = (c.x - at.x) as u32;
        let sy = (c.y - at.y) as u32;
        for row in 0..c.h {
            let s = src.offset(sx, sy + row);
            let d = self.offset(c.x as u32, c.y as u32 + row);
            let n = c.w as usize * 3;
            self.pixels[d..d + n].copy_from_slice(&src.pixels[s..s + n]);
        }
        Ok(())
    }

    /// Per-pixel luma, `round(0.299 R + 0.587 G + 0.114 B)`.
    pub fn to_grayscale(&self) -> Vec<u8> {
        self.pixels.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect()
    }

    /// Nearest-neighbour resample.
    pub fn resize_nearest(&self, width: u32, height: u32) -> SceneImage {
        if (width, height) == self.dims() {
            return self.clone();
        }
        SceneImage::from_fn(self.id.clone(), width.max(1), height.max(1), |x, y| {
            let sx = ((x as u64 * self.width as u64) / width.max(1) as u64) as u32;
            let sy = ((y as u64 * self.height as u64) / height.max(1) as u64) as u32;
            self.get(sx.min(self.width - 1), sy.min(self.height - 1))
        })
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<SceneImage, SceneError> {
        let path = path.as_ref();
        let img = image::open(path)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Self::from_dynamic(id, img))
    }

    pub fn decode_png(id: impl Into<String>, bytes: &[u8]) -> Result<SceneImage, SceneError> {
        let img = image::load_from_memory(bytes)?;
        Ok(Self::from_dynamic(id, img))
    }

    /// Alpha is flattened against white.
    fn from_dynamic(id: impl Into<String>, img: image::DynamicImage) -> SceneImage {
        let rgba = img.to_rgba8();
        let (width, height) = rgba.dimensions();
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for p in rgba.pixels() {
            let a = p[3] as u32;
            for c in &p.0[..3] {
                let v = (*c as u32 * a + 255 * (255 - a) + 127) / 255;
                pixels.push(v as u8);
            }
        }
        SceneImage {
            id: id.into(),
            width,
            height,
            pixels,
        }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, SceneError> {
        let mut buf = Cursor::new(Vec::new());
        image::write_buffer_with_format(
            &mut buf,
            &self.pixels,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
            image::ImageFormat::Png,
        )?;
        Ok(buf.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), SceneError> {
        std::fs::write(path, self.encode_png()?)?;
        Ok(())
    }
}

#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let v = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    v.round().clamp(0.0, 255.0) as u8
}

/// Axis-aligned rectangle in pixel coordinates. The origin may be negative
/// (detector jitter); width and height are at least one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    pub fn new(x: i32, y: i32, w: u32, h: u32) -> Self {
        Self {
            x,
            y,
            w: w.max(1),
            h: h.max(1),
        }
    }

    pub fn right(&self) -> i32 {
        self.x + self.w as i32
    }

    pub fn bottom(&self) -> i32 {
        self.y + self.h as i32
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x as f64 + self.w as f64 / 2.0, self.y as f64 + self.h as f64 / 2.0)
    }

    /// Intersection with `[0,width) x [0,height)`, or `None` when empty.
    pub fn clamp_to(&self, width: u32, height: u32) -> Option<BBox> {
        let x0 = self.x.max(0);
        let y0 = self.y.max(0);
        let x1 = self.right().min(width as i32);
        let y1 = self.bottom().min(height as i32);
        (x1 > x0 && y1 > y0).then(|| BBox::new(x0, y0, (x1 - x0) as u32, (y1 - y0) as u32))
    }

    pub fn union(&self, other: &BBox) -> BBox {
        let x0 = self.x.min(other.x);
        let y0 = self.y.min(other.y);
        let x1 = self.right().max(other.right());
        let y1 = self.bottom().max(other.bottom());
        BBox::new(x0, y0, (x1 - x0) as u32, (y1 - y0) as u32)
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.x < other.right() && other.x < self.right() && self.y < other.bottom() && other.y < self.bottom()
    }

    pub fn dilate(&self, by: u32) -> BBox {
        BBox::new(self.x - by as i32, self.y - by as i32, self.w + 2 * by, self.h + 2 * by)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LangCode {
    En,
    Hi,
}

impl LangCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LangCode::En => "en",
            LangCode::Hi => "hi",
        }
    }
}

impl std::str::FromStr for LangCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(LangCode::En),
            "hi" => Ok(LangCode::Hi),
            other => Err(format!("unsupported language code {other:?}")),
        }
    }
}

impl std::fmt::Display for LangCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A located, recognized and classified word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordObservation {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub text: String,
    pub confidence: f64,
    pub token_class: TokenClass,
}

impl WordObservation {
    /// NFC-normalizes `text`, clamps `confidence` into `[0, 1]` and classifies the token.
    pub fn new(bbox: BBox, text: &str, confidence: f64) -> Self {
        let text: String = text.nfc().collect();
        let token_class = crate::token_filter::classify_token(&text).unwrap_or_default();
        Self {
            bbox,
            text,
            confidence: confidence.clamp(0.0, 1.0),
            token_class,
        }
    }

    pub fn char_count(&self) -> usize {
        self.text.chars().count()
    }
}

/// One bit per pixel, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BinaryMask({}x{}, {} set)",
            self.width,
            self.height,
            self.count_ones()
        )
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-range coordinates read as unset.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u64) < self.width as u64
            && (y as u64) < self.height as u64
            && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Tight bounding box of the set pixels.
    pub fn bbox(&self) -> Option<BBox> {
        let mut x0 = u32::MAX;
        let mut y0 = u32::MAX;
        let mut x1 = 0;
        let mut y1 = 0;
        let mut any = false;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    any = true;
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        any.then(|| BBox::new(x0 as i32, y0 as i32, x1 - x0 + 1, y1 - y0 + 1))
    }

    /// Set every pixel of `b` (clamped).
    pub fn fill_box(&mut self, b: BBox) {
        if let Some(c) = b.clamp_to(self.width, self.height) {
            for y in c.y..c.bottom() {
                for x in c.x..c.right() {
                    self.set(x as u32, y as u32, true);
                }
            }
        }
    }

    /// White (255) on black (0) rendering.
    pub fn to_image(&self, id: impl Into<String>) -> SceneImage {
        SceneImage::from_fn(id, self.width.max(1), self.height.max(1), |x, y| {
            if x < self.width && y < self.height && self.get(x, y) {
                [255; 3]
            } else {
                [0; 3]
            }
        })
    }

    /// Luma >= 128 is set.
    pub fn from_image(img: &SceneImage) -> Self {
        let gray = img.to_grayscale();
        Self {
            width: img.width(),
            height: img.height(),
            bits: gray.into_iter().map(|v| v >= 128).collect(),
        }
    }

    /// 8-connected component labels (0 = background) and the component count.
    pub fn components(&self) -> (Vec<u32>, u32) {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut labels = vec![0u32; self.bits.len()];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || labels[start] != 0 {
                continue;
            }
            next += 1;
            labels[start] = next;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = ((i as i64) % w, (i as i64) / w);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let j = (ny * w + nx) as usize;
                        if self.bits[j] && labels[j] == 0 {
                            labels[j] = next;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        (labels, next)
    }
}
