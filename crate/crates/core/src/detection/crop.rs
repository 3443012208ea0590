use alloc::vec::Vec;

use super::rect::OrientedRect;
use crate::raster::GrayImage;
use crate::{Error, Result};

pub const CROP_ROWS: usize = 33;
pub const CROP_COLS: usize = 144;
pub const CROP_LEN: usize = CROP_ROWS * CROP_COLS;

/// A rotation-compensated plate patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateCrop {
    /// Resampled greylevels before equalization; used for character reading.
    pub patch: GrayImage,
    /// Histogram-equalized patch, row-major; the classifier input.
    pub equalized: Vec<u8>,
}

/// Resamples the interior of `rect` to a `cols x rows` patch with the
/// rectangle's width axis horizontal. Pixel centers sit at integer
/// coordinates, so a rectangle whose edges lie on pixel boundaries maps
/// pixels one to one.
pub fn resample_rect(frame: &GrayImage, rect: &OrientedRect, cols: usize, rows: usize) -> Result<GrayImage> {
    let [ul, ur, _, ll] = rect.vertices();
    let (w, h) = (frame.width() as f64, frame.height() as f64);
    const TOL: f64 = 1e-9;
    for p in rect.vertices() {
        if !p.is_finite() || p.x < -0.5 - TOL || p.y < -0.5 - TOL || p.x > w - 0.5 + TOL || p.y > h - 0.5 + TOL {
            return Err(Error::ClipError);
        }
    }
    let du = ur - ul;
    let dv = ll - ul;
    let mut data = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        let b = (r as f64 + 0.5) / rows as f64;
        for c in 0..cols {
            let a = (c as f64 + 0.5) / cols as f64;
            let p = ul + du * a + dv * b;
            data.push(crate::math::to_u8(frame.sample(p.x, p.y)));
        }
    }
    GrayImage::from_raw(cols, rows, data)
}

/// Exact histogram equalization: pixels are ranked by greylevel (ties broken
/// by the local 3x3 mean, then by position) and rank `k` of `n` maps to
/// `floor(256 k / n)`, so every output level is used almost equally often.
/// A constant image maps to the mid level 127.
pub fn equalize(img: &GrayImage) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let raw = img.as_raw();
    let n = raw.len();
    if n == 0 {
        return Vec::new();
    }
    if raw.iter().all(|&v| v == raw[0]) {
        return alloc::vec![127; n];
    }
    let mut local = Vec::with_capacity(n);
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0u32;
            let mut count = 0u32;
            for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    sum += raw[yy * w + xx] as u32;
                    count += 1;
                }
            }
            // Scaled mean kept integral for exact, portable ordering.
            local.push(sum * 72 / count);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&i| (raw[i], local[i], i));
    let mut out = alloc::vec![0u8; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = (rank * 256 / n) as u8;
    }
    out
}

/// Rotation-compensates, resizes to 33x144 and equalizes the plate region.
pub fn normalize_crop(frame: &GrayImage, rect: &OrientedRect) -> Result<PlateCrop> {
    let patch = resample_rect(frame, rect, CROP_COLS, CROP_ROWS)?;
    let equalized = equalize(&patch);
    Ok(PlateCrop { patch, equalized })
}
