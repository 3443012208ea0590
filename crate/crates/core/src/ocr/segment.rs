//! Character segmentation of a normalized plate patch.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::raster::GrayImage;
use crate::{Error, Result};

pub const GLYPH_ROWS: usize = 16;
pub const GLYPH_COLS: usize = 12;
pub const GLYPH_LEN: usize = GLYPH_ROWS * GLYPH_COLS;
/// Glyphs with fewer ink pixels are discarded.
pub const MIN_GLYPH_INK: usize = 10;
/// Columns whose ink mass is at most this fraction of the busiest column
/// separate characters.
pub const VALLEY_FRACTION: f64 = 0.15;

/// One character: its ink bounding box in the patch (inclusive) and the
/// binarized glyph scaled into a `16 x 12` cell, row-major, 0 to 255 ink
/// coverage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphBox {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
    pub bitmap: Vec<u8>,
}

impl GlyphBox {
    pub fn features(&self) -> Vec<f64> {
        self.bitmap.iter().map(|&v| v as f64 / 255.0).collect()
    }
}

/// Otsu's threshold: the level `t` maximizing between-class variance of
/// `{v <= t}` and `{v > t}`. `None` for a constant image.
pub fn otsu_threshold(img: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in img.as_raw() {
        hist[v as usize] += 1;
    }
    let total = img.as_raw().len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best: Option<(f64, u8)> = None;
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if best.is_none_or(|(b, _)| between > b) {
            best = Some((between, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

/// Components smaller than this fraction of the largest are specks.
const SPECK_FRACTION: f64 = 0.15;

/// Dark-on-light ink mask. Regions touching the patch border (surroundings
/// caught by the crop) and specks are removed.
fn ink_mask(crop: &GrayImage) -> Option<Vec<bool>> {
    let t = otsu_threshold(crop)?;
    let (w, h) = (crop.width(), crop.height());
    let mut ink: Vec<bool> = crop.as_raw().iter().map(|&v| v <= t).collect();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for x in 0..w {
        stack.push((x, 0));
        stack.push((x, h - 1));
    }
    for y in 0..h {
        stack.push((0, y));
        stack.push((w - 1, y));
    }
    while let Some((x, y)) = stack.pop() {
        if !ink[y * w + x] {
            continue;
        }
        ink[y * w + x] = false;
        for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                if ink[ny * w + nx] {
                    stack.push((nx, ny));
                }
            }
        }
    }
    remove_specks(&mut ink, w, h);
    Some(ink)
}

fn remove_specks(ink: &mut [bool], w: usize, h: usize) {
    let mut label = vec![usize::MAX; w * h];
    let mut sizes: Vec<usize> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !ink[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        label[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if ink[j] && label[j] == usize::MAX {
                        label[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        sizes.push(size);
    }
    let largest = sizes.iter().copied().max().unwrap_or(0) as f64;
    for (i, v) in ink.iter_mut().enumerate() {
        if *v && (sizes[label[i]] as f64) < SPECK_FRACTION * largest {
            *v = false;
        }
    }
}

/// Column ranges `[start, end)` for characters, from valleys of the column
/// ink projection. Each valley run is cut at its emptiest column; a cut
/// through a valley that still holds ink is undone when the joined piece is
/// no wider than a typical character, which keeps letters with thin middle
/// columns whole while still separating touching characters.
fn column_segments(mass: &[usize]) -> Vec<(usize, usize)> {
    let max = mass.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Vec::new();
    }
    let thr = VALLEY_FRACTION * max as f64;
    let valley = |c: usize| mass[c] as f64 <= thr;
    let n = mass.len();
    let first = (0..n).find(|&c| !valley(c)).unwrap_or(0);
    let last = (0..n).rev().find(|&c| !valley(c)).unwrap_or(n - 1);

    // Cuts strictly between the first and last strong columns.
    let mut cuts: Vec<(usize, bool)> = Vec::new();
    let mut c = first;
    while c <= last {
        if valley(c) {
            let start = c;
            while valley(c) {
                c += 1;
            }
            let cut = (start..c).min_by_key(|&k| (mass[k], k)).unwrap_or(start);
            cuts.push((cut, mass[cut] > 0));
        } else {
            c += 1;
        }
    }

    let mut bounds = vec![0];
    bounds.extend(cuts.iter().map(|&(k, _)| k));
    bounds.push(n);
    let mut segs: Vec<(usize, usize)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
    let soft: Vec<bool> = cuts.iter().map(|&(_, s)| s).collect();

    // Typical character width from the ink extent of hard-cut pieces.
    let ink_width = |(a, b): (usize, usize)| -> usize {
        let l = (a..b).find(|&k| mass[k] > 0);
        let r = (a..b).rev().find(|&k| mass[k] > 0);
        match (l, r) {
            (Some(l), Some(r)) => r - l + 1,
            _ => 0,
        }
    };
    let mut widths: Vec<usize> = segs.iter().map(|&s| ink_width(s)).filter(|&w| w > 0).collect();
    widths.sort_unstable();
    let typical = widths.get(widths.len().saturating_sub(1) * 3 / 4).copied().unwrap_or(0);

    let mut merged: Vec<(usize, usize)> = vec![segs[0]];
    for (i, seg) in segs.drain(1..).enumerate() {
        let prev = *merged.last().expect("non-empty");
        let joined = (prev.0, seg.1);
        if soft[i] && ink_width(joined) * 20 <= typical * 23 {
            *merged.last_mut().expect("non-empty") = joined;
        } else {
            merged.push(seg);
        }
    }
    merged
}

/// Area-samples the ink inside an inclusive box into a `16 x 12` cell,
/// scaled uniformly and centered.
fn glyph_bitmap(ink: &[bool], w: usize, x0: usize, x1: usize, y0: usize, y1: usize) -> Vec<u8> {
    let (bw, bh) = ((x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64);
    let scale = (GLYPH_ROWS as f64 / bh).min(GLYPH_COLS as f64 / bw);
    let (ow, oh) = (bw * scale, bh * scale);
    let (ox, oy) = ((GLYPH_COLS as f64 - ow) / 2.0, (GLYPH_ROWS as f64 - oh) / 2.0);
    const SUB: usize = 4;
    let mut out = Vec::with_capacity(GLYPH_LEN);
    for r in 0..GLYPH_ROWS {
        for c in 0..GLYPH_COLS {
            let mut hits = 0;
            for j in 0..SUB {
                for i in 0..SUB {
                    let u = (c as f64 + (i as f64 + 0.5) / SUB as f64 - ox) / scale;
                    let v = (r as f64 + (j as f64 + 0.5) / SUB as f64 - oy) / scale;
                    if u < 0.0 || v < 0.0 || u >= bw || v >= bh {
                        continue;
                    }
                    let (sx, sy) = (x0 + u as usize, y0 + v as usize);
                    if ink[sy * w + sx] {
                        hits += 1;
                    }
                }
            }
            out.push((hits * 255 / (SUB * SUB)) as u8);
        }
    }
    out
}

/// Splits a plate patch into characters in reading order.
pub fn segment_glyphs(crop: &GrayImage) -> Result<Vec<GlyphBox>> {
    let (w, h) = (crop.width(), crop.height());
    let ink = ink_mask(crop).ok_or(Error::EmptyPlate)?;
    let mass: Vec<usize> = (0..w).map(|x| (0..h).filter(|&y| ink[y * w + x]).count()).collect();
    let mut out = Vec::new();
    for (a, b) in column_segments(&mass) {
        let mut count = 0;
        let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
        for y in 0..h {
            for x in a..b {
                if ink[y * w + x] {
                    count += 1;
                    x0 = x0.min(x);
                    x1 = x1.max(x);
                    y0 = y0.min(y);
                    y1 = y1.max(y);
                }
            }
        }
        if count < MIN_GLYPH_INK {
            continue;
        }
        let bitmap = glyph_bitmap(&ink, w, x0, x1, y0, y1);
        out.push(GlyphBox { x0, x1, y0, y1, bitmap });
    }
    if out.is_empty() {
        return Err(Error::EmptyPlate);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{render_plate_patch, PatchStyle};

    #[test]
    fn blank_crop_is_empty_plate() {
        let img = GrayImage::new(144, 33, 200);
        assert_eq!(segment_glyphs(&img).unwrap_err(), Error::EmptyPlate);
    }

    #[test]
    fn eight_glyphs_in_reading_order() {
        let p = render_plate_patch("12345678", 144, 33, &PatchStyle::default());
        let g = segment_glyphs(&p).unwrap();
        assert_eq!(g.len(), 8);
        for w in g.windows(2) {
            assert!(w[0].x0 < w[1].x0);
            assert!(w[0].x1 < w[1].x0);
        }
        for b in &g {
            assert!(b.x0 < b.x1 && b.y0 < b.y1);
            assert_eq!(b.bitmap.len(), GLYPH_LEN);
        }
    }

    #[test]
    fn bridged_glyphs_still_split() {
        let mut p = render_plate_patch("88", 144, 33, &PatchStyle::default());
        let g = segment_glyphs(&p).unwrap();
        assert_eq!(g.len(), 2);
        // One-pixel ink bridge across the gap at mid height.
        let y = (g[0].y0 + g[0].y1) / 2;
        for x in g[0].x1..=g[1].x0 {
            p.put(x, y, 20);
        }
        let g = segment_glyphs(&p).unwrap();
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn letters_with_thin_middles_stay_whole() {
        let p = render_plate_patch("VWM1T", 144, 33, &PatchStyle::default());
        assert_eq!(segment_glyphs(&p).unwrap().len(), 5);
    }

    #[test]
    fn brightness_shift_keeps_box_count() {
        let p = render_plate_patch("3159740", 144, 33, &PatchStyle::default());
        let n = segment_glyphs(&p).unwrap().len();
        let shifted: Vec<u8> = p.as_raw().iter().map(|&v| v.saturating_add(20)).collect();
        let q = GrayImage::from_raw(144, 33, shifted).unwrap();
        assert_eq!(segment_glyphs(&q).unwrap().len(), n);
    }

    #[test]
    fn otsu_splits_two_levels() {
        let mut data = vec![30u8; 50];
        data.extend(vec![200u8; 50]);
        let img = GrayImage::from_raw(10, 10, data).unwrap();
        let t = otsu_threshold(&img).unwrap();
        assert!((30..200).contains(&t));
    }
}
