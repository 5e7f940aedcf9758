//! Foreground/background composition: Otsu split of the synthesized foreground,
//! text-mask extraction and per-pixel compositing onto the erased background.

use thiserror::Error;

use crate::render::RENDER_GRAY;
use crate::scene::{BinaryMask, SceneImage};

#[derive(Debug, Error, PartialEq)]
pub enum CompositeError {
    #[error("histogram has a single occupied bin")]
    UniformHistogram,
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("dimension mismatch: background {bg:?}, foreground {fg:?}, mask {mask:?}")]
    DimensionMismatch {
        bg: (u32, u32),
        fg: (u32, u32),
        mask: (u32, u32),
    },
}

pub fn histogram(gray: &[u8]) -> [u64; 256] {
    let mut h = [0u64; 256];
    for v in gray {
        h[*v as usize] += 1;
    }
    h
}

/// Between-class variance `w0 * w1 * (mu0 - mu1)^2` for the split `{<= t, > t}`,
/// from integer class counts and intensity sums.
#[inline]
pub fn between_class_variance(n0: u64, s0: u64, n1: u64, s1: u64) -> f64 {
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let total = (n0 + n1) as f64;
    let w0 = n0 as f64 / total;
    let w1 = n1 as f64 / total;
    let mu0 = s0 as f64 / n0 as f64;
    let mu1 = s1 as f64 / n1 as f64;
    w0 * w1 * (mu0 - mu1) * (mu0 - mu1)
}

/// Otsu threshold: the smallest `t` in `0..=254` maximizing the between-class
/// variance of the split `{<= t, > t}`.
pub fn otsu_threshold(hist: &[u64; 256]) -> Result<u8, CompositeError> {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(CompositeError::EmptyHistogram);
    }
    if hist.iter().filter(|c| **c > 0).count() < 2 {
        return Err(CompositeError::UniformHistogram);
    }
    let sum: u64 = hist.iter().enumerate().map(|(i, c)| i as u64 * c).sum();
    let (mut n0, mut s0) = (0u64, 0u64);
    let mut best = (0u8, f64::NEG_INFINITY);
    for (t, c) in hist.iter().enumerate().take(255) {
        n0 += c;
        s0 += t as u64 * c;
        let var = between_class_variance(n0, s0, total - n0, sum - s0);
        if var > best.1 {
            best = (t as u8, var);
        }
    }
    Ok(best.0)
}

/// Mask of the Otsu class whose mean luma lies farther from the foreground
/// gray. A foreground without contrast yields an empty mask.
pub fn extract_foreground_mask(fg: &SceneImage) -> BinaryMask {
    let gray = fg.to_grayscale();
    let hist = histogram(&gray);
    let Ok(t) = otsu_threshold(&hist) else {
        return BinaryMask::new(fg.width(), fg.height());
    };
    let (mut n0, mut s0, mut n1, mut s1) = (0u64, 0u64, 0u64, 0u64);
    for (v, c) in hist.iter().enumerate() {
        if v <= t as usize {
            n0 += c;
            s0 += v as u64 * c;
        } else {
            n1 += c;
            s1 += v as u64 * c;
        }
    }
    let gray_bg = RENDER_GRAY as f64;
    let d0 = (s0 as f64 / n0 as f64 - gray_bg).abs();
    let d1 = (s1 as f64 / n1 as f64 - gray_bg).abs();
    // ties go to the darker class
    let text_is_dark = d0 >= d1;
    let mut i = 0;
    BinaryMask::from_fn(fg.width(), fg.height(), |_, _| {
        let v = gray[i];
        i += 1;
        (v <= t) == text_is_dark
    })
}

/// Mask pixels with at least one unset 8-neighbour (out-of-image counts as unset).
pub fn mask_boundary(mask: &BinaryMask) -> BinaryMask {
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        if !mask.get(x, y) {
            return false;
        }
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if (dx, dy) != (0, 0) && !mask.get_signed(x as i64 + dx, y as i64 + dy) {
                    return true;
                }
            }
        }
        false
    })
}

/// `fg` where the mask is set, `bg` elsewhere. With `feather`, set pixels on
/// the mask boundary take the rounded 50/50 mean of `fg` and `bg`; unset
/// pixels are always copied from `bg`.
pub fn composite(
    bg: &SceneImage,
    fg: &SceneImage,
    mask: &BinaryMask,
    feather: bool,
) -> Result<SceneImage, CompositeError> {
    if bg.dims() != fg.dims() || bg.dims() != mask.dims() {
        return Err(CompositeError::DimensionMismatch {
            bg: bg.dims(),
            fg: fg.dims(),
            mask: mask.dims(),
        });
    }
    let edge = feather.then(|| mask_boundary(mask));
    Ok(SceneImage::from_fn(
        bg.id().to_string(),
        bg.width(),
        bg.height(),
        |x, y| {
            if !mask.get(x, y) {
                return bg.get(x, y);
            }
            let f = fg.get(x, y);
            match &edge {
                Some(e) if e.get(x, y) => {
                    let b = bg.get(x, y);
                    [
                        (f[0] as u16 + b[0] as u16).div_ceil(2) as u8,
                        (f[1] as u16 + b[1] as u16).div_ceil(2) as u8,
                        (f[2] as u16 + b[2] as u16).div_ceil(2) as u8,
                    ]
                }
                _ => f,
            }
        },
    ))
}
