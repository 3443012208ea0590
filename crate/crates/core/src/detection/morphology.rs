//! Binary masks and square-element morphology.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major binary image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of set pixels.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            let row = &self.data[y * self.width..(y + 1) * self.width];
            let Some(first) = row.iter().position(|&b| b) else {
                continue;
            };
            let last = row.iter().rposition(|&b| b).unwrap_or(first);
            bb = Some(match bb {
                None => (first, y, last, y),
                Some((x0, y0, x1, _)) => (x0.min(first), y0, x1.max(last), y),
            });
        }
        bb
    }
}

#[derive(Clone, Copy)]
enum Op {
    Dilate,
    Erode,
}

/// Applies `op` over the window `[x0, x1) x [y0, y1)`. Pixels outside the
/// window but inside the image are assumed clear; pixels outside the image
/// count as set for erosion and clear for dilation, so objects touching the
/// border are not eaten away.
fn apply(mask: &mut BinaryMask, r: usize, op: Op, win: (usize, usize, usize, usize)) {
    let (x0, y0, x1, y1) = win;
    let (w, h) = (mask.width as isize, mask.height as isize);
    let outside = |x: isize, y: isize| -> bool {
        let off_image = x < 0 || y < 0 || x >= w || y >= h;
        matches!(op, Op::Erode) && off_image
    };
    let r = r as isize;
    let combine = |acc: bool, v: bool| match op {
        Op::Dilate => acc || v,
        Op::Erode => acc && v,
    };
    let init = matches!(op, Op::Erode);

    // Horizontal pass over the rows of the window.
    let ww = x1 - x0;
    let mut tmp = vec![false; ww * (y1 - y0)];
    for y in y0..y1 {
        for x in x0..x1 {
            let mut acc = init;
            for dx in -r..=r {
                let xx = x as isize + dx;
                let v = if xx < x0 as isize || xx >= x1 as isize {
                    outside(xx, y as isize)
                } else {
                    mask.data[y * mask.width + xx as usize]
                };
                acc = combine(acc, v);
            }
            tmp[(y - y0) * ww + (x - x0)] = acc;
        }
    }
    // Vertical pass; rows beyond the window are all-outside rows.
    for y in y0..y1 {
        for x in x0..x1 {
            let mut acc = init;
            for dy in -r..=r {
                let yy = y as isize + dy;
                let v = if yy < y0 as isize || yy >= y1 as isize {
                    outside(x as isize, yy)
                } else {
                    tmp[(yy as usize - y0) * ww + (x - x0)]
                };
                acc = combine(acc, v);
            }
            mask.data[y * mask.width + x] = acc;
        }
    }
}

fn window(mask: &BinaryMask, pad: usize) -> Option<(usize, usize, usize, usize)> {
    let (x0, y0, x1, y1) = mask.bounding_box()?;
    Some((
        x0.saturating_sub(pad),
        y0.saturating_sub(pad),
        (x1 + pad + 1).min(mask.width),
        (y1 + pad + 1).min(mask.height),
    ))
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    let mut out = mask.clone();
    if let Some(win) = window(mask, radius + 1) {
        apply(&mut out, radius, Op::Dilate, win);
    }
    out
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    let mut out = mask.clone();
    if let Some(win) = window(mask, 1) {
        apply(&mut out, radius, Op::Erode, win);
    }
    out
}

/// Dilation followed by erosion: bridges gaps narrower than the element.
pub fn close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    let mut out = mask.clone();
    if let Some(win) = window(mask, 3 * radius + 2) {
        apply(&mut out, radius, Op::Dilate, win);
        apply(&mut out, radius, Op::Erode, win);
    }
    out
}

/// Erosion followed by dilation: removes specks smaller than the element.
pub fn open(mask: &BinaryMask, radius: usize) -> BinaryMask {
    let mut out = mask.clone();
    if let Some(win) = window(mask, 3 * radius + 2) {
        apply(&mut out, radius, Op::Erode, win);
        apply(&mut out, radius, Op::Dilate, win);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(mask: &BinaryMask, r: usize, erode: bool) -> BinaryMask {
        let (w, h) = (mask.width() as isize, mask.height() as isize);
        let r = r as isize;
        BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
            let mut acc = erode;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (xx, yy) = (x as isize + dx, y as isize + dy);
                    let v = if xx < 0 || yy < 0 || xx >= w || yy >= h {
                        erode
                    } else {
                        mask.get(xx as usize, yy as usize)
                    };
                    acc = if erode { acc && v } else { acc || v };
                }
            }
            acc
        })
    }

    fn blob() -> BinaryMask {
        BinaryMask::from_fn(40, 30, |x, y| {
            (5..20).contains(&x) && (4..12).contains(&y) || (x == 30 && y == 20) || (x < 3 && y > 25)
        })
    }

    #[test]
    fn windowed_ops_match_naive() {
        let m = blob();
        for r in 0..4 {
            assert_eq!(dilate(&m, r), naive(&m, r, false));
            assert_eq!(erode(&m, r), naive(&m, r, true));
            assert_eq!(close(&m, r), naive(&naive(&m, r, false), r, true));
            assert_eq!(open(&m, r), naive(&naive(&m, r, true), r, false));
        }
    }

    #[test]
    fn closing_bridges_one_pixel_gap() {
        let m = BinaryMask::from_fn(40, 20, |x, y| (5..35).contains(&x) && (5..12).contains(&y) && x != 20);
        let c = close(&m, 2);
        assert!(c.get(20, 8));
    }

    #[test]
    fn empty_mask_is_unchanged() {
        let m = BinaryMask::new(10, 10);
        assert_eq!(close(&m, 2), m);
        assert_eq!(open(&m, 2), m);
    }
}
