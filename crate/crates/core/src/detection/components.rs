use alloc::vec;
use alloc::vec::Vec;

use super::morphology::BinaryMask;

/// One 8-connected component, as a list of pixel coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub pixels: Vec<(usize, usize)>,
    /// Inclusive bounding box `(x0, y0, x1, y1)`.
    pub bbox: (usize, usize, usize, usize),
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// The component as a mask cropped to its bounding box.
    pub fn local_mask(&self) -> BinaryMask {
        let (x0, y0, x1, y1) = self.bbox;
        let mut m = BinaryMask::new(x1 - x0 + 1, y1 - y0 + 1);
        for &(x, y) in &self.pixels {
            m.set(x - x0, y - y0, true);
        }
        m
    }
}

/// 8-connected components with at least `min_area` pixels, in raster order
/// of their first pixel.
pub fn connected_components(mask: &BinaryMask, min_area: usize) -> Vec<Component> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for y0 in 0..h {
        for x0 in 0..w {
            if seen[y0 * w + x0] || !mask.get(x0, y0) {
                continue;
            }
            seen[y0 * w + x0] = true;
            stack.push((x0, y0));
            let mut pixels = Vec::new();
            let mut bbox = (x0, y0, x0, y0);
            while let Some((x, y)) = stack.pop() {
                pixels.push((x, y));
                bbox = (bbox.0.min(x), bbox.1.min(y), bbox.2.max(x), bbox.3.max(y));
                for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        let i = ny * w + nx;
                        if !seen[i] && mask.get(nx, ny) {
                            seen[i] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            if pixels.len() >= min_area {
                pixels.sort_unstable_by_key(|&(x, y)| (y, x));
                out.push(Component { pixels, bbox });
            }
        }
    }
    out
}
