//! Corner refinement by minimum-eigenvalue (Shi-Tomasi) response and
//! sub-pixel plate-edge measurement.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::rect::OrientedRect;
use crate::geometry::Point2;
use crate::linalg::sym2_eigenvalues;
use crate::math;
use crate::raster::GrayImage;
use crate::{Error, Result};

/// Half-size of the corner search window.
pub const SEARCH_RADIUS: usize = 7;
/// Responses at or below this are treated as flat.
pub const MIN_RESPONSE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    UpperLeft,
    #[default]
    UpperRight,
    LowerRight,
    LowerLeft,
}

impl Corner {
    pub fn index(self) -> usize {
        match self {
            Corner::UpperLeft => 0,
            Corner::UpperRight => 1,
            Corner::LowerRight => 2,
            Corner::LowerLeft => 3,
        }
    }
}

/// Minimum structure-tensor eigenvalue for every pixel of the inclusive
/// window `[x0, x1] x [y0, y1]`, row-major. Gradients are 3x3 Sobel and the
/// tensor is summed over a 3x3 neighborhood, so the window must keep two
/// pixels clear of the border.
pub fn min_eigen_response(img: &GrayImage, x0: usize, y0: usize, x1: usize, y1: usize) -> Vec<f64> {
    debug_assert!(x0 >= 2 && y0 >= 2 && x1 + 2 < img.width() && y1 + 2 < img.height());
    let p = |x: usize, y: usize| img.get(x, y) as f64;
    // Gradients over the window grown by one pixel.
    let (gx0, gy0) = (x0 - 1, y0 - 1);
    let gw = x1 - x0 + 3;
    let gh = y1 - y0 + 3;
    let mut ixx = vec![0.0; gw * gh];
    let mut ixy = vec![0.0; gw * gh];
    let mut iyy = vec![0.0; gw * gh];
    for j in 0..gh {
        for i in 0..gw {
            let (x, y) = (gx0 + i, gy0 + j);
            let gx = (p(x + 1, y - 1) + 2.0 * p(x + 1, y) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2.0 * p(x - 1, y) + p(x - 1, y + 1));
            let gy = (p(x - 1, y + 1) + 2.0 * p(x, y + 1) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2.0 * p(x, y - 1) + p(x + 1, y - 1));
            ixx[j * gw + i] = gx * gx;
            ixy[j * gw + i] = gx * gy;
            iyy[j * gw + i] = gy * gy;
        }
    }
    let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
    let mut out = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for dj in 0..3 {
                for di in 0..3 {
                    let k = (j + dj) * gw + (i + di);
                    a += ixx[k];
                    b += ixy[k];
                    c += iyy[k];
                }
            }
            out.push(sym2_eigenvalues(a, b, c).0.max(0.0));
        }
    }
    out
}

/// Vertex offset from the peak of a parabola through three samples.
fn parabola_offset(left: f64, mid: f64, right: f64) -> f64 {
    let denom = left - 2.0 * mid + right;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}

/// Snaps the chosen rectangle vertex to the strongest corner response in a
/// `(2w+1)^2` window around it, with sub-pixel refinement.
pub fn refine_corner(frame: &GrayImage, rect: &OrientedRect, which: Corner) -> Result<Point2> {
    let nominal = rect.vertices()[which.index()];
    refine_point(frame, nominal, SEARCH_RADIUS)
}

/// [`refine_corner`] for an arbitrary nominal position.
pub fn refine_point(frame: &GrayImage, nominal: Point2, radius: usize) -> Result<Point2> {
    if !nominal.is_finite() {
        return Err(Error::ClipError);
    }
    let (cx, cy) = (math::round(nominal.x), math::round(nominal.y));
    // One extra ring for the parabola fit plus two for gradients and sums.
    let reach = (radius + 3) as f64;
    if cx - reach < 0.0
        || cy - reach < 0.0
        || cx + reach > frame.width() as f64 - 1.0
        || cy + reach > frame.height() as f64 - 1.0
    {
        return Err(Error::ClipError);
    }
    let (cx, cy) = (cx as usize, cy as usize);
    let outer = radius + 1;
    let (x0, y0) = (cx - outer, cy - outer);
    let side = 2 * outer + 1;
    let resp = min_eigen_response(frame, x0, y0, x0 + side - 1, y0 + side - 1);
    let at = |i: usize, j: usize| resp[j * side + i];

    let mut best: Option<(f64, f64, usize, usize)> = None;
    for j in 1..side - 1 {
        for i in 1..side - 1 {
            let r = at(i, j);
            let (px, py) = ((x0 + i) as f64, (y0 + j) as f64);
            let d = (px - nominal.x) * (px - nominal.x) + (py - nominal.y) * (py - nominal.y);
            let better = match best {
                None => true,
                Some((br, bd, _, _)) => r > br || (r == br && d < bd),
            };
            if better {
                best = Some((r, d, i, j));
            }
        }
    }
    let (r, _, i, j) = best.expect("window is non-empty");
    if r <= MIN_RESPONSE {
        return Ok(nominal);
    }
    let dx = parabola_offset(at(i - 1, j), r, at(i + 1, j));
    let dy = parabola_offset(at(i, j - 1), r, at(i, j + 1));
    let coarse = Point2::new((x0 + i) as f64 + dx, (y0 + j) as f64 + dy);
    // The response peak sits inside the corner's convex side; the gradient
    // fit removes that bias.
    let mut p = coarse;
    for _ in 0..3 {
        match gradient_fit(frame, p, 3) {
            Some(q) if q.distance(&coarse) <= 3.0 => p = q,
            _ => break,
        }
    }
    Ok(p)
}

/// Point minimizing the squared projections of `q - p` onto the image
/// gradient at every pixel `p` of a `(2 half + 1)^2` window: the corner
/// where edges through the window meet.
fn gradient_fit(img: &GrayImage, around: Point2, half: usize) -> Option<Point2> {
    let (cx, cy) = (math::round(around.x), math::round(around.y));
    let reach = (half + 1) as f64;
    if cx - reach < 0.0
        || cy - reach < 0.0
        || cx + reach > img.width() as f64 - 1.0
        || cy + reach > img.height() as f64 - 1.0
    {
        return None;
    }
    let (cx, cy) = (cx as usize, cy as usize);
    let v = |x: usize, y: usize| img.get(x, y) as f64;
    let (mut a, mut b, mut c, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for y in cy - half..=cy + half {
        for x in cx - half..=cx + half {
            let gx = (v(x + 1, y - 1) + 2.0 * v(x + 1, y) + v(x + 1, y + 1))
                - (v(x - 1, y - 1) + 2.0 * v(x - 1, y) + v(x - 1, y + 1));
            let gy = (v(x - 1, y + 1) + 2.0 * v(x, y + 1) + v(x + 1, y + 1))
                - (v(x - 1, y - 1) + 2.0 * v(x, y - 1) + v(x + 1, y - 1));
            let (xx, yy) = (x as f64, y as f64);
            a += gx * gx;
            b += gx * gy;
            c += gy * gy;
            bx += gx * gx * xx + gx * gy * yy;
            by += gx * gy * xx + gy * gy * yy;
        }
    }
    let det = a * c - b * b;
    let (lo, hi) = sym2_eigenvalues(a, b, c);
    if !(hi > 0.0) || lo < 1e-3 * hi {
        return None;
    }
    Some(Point2::new((c * bx - b * by) / det, (a * by - b * bx) / det))
}

/// A 2D line `n . p = c` with unit normal `n`.
#[derive(Debug, Clone, Copy)]
struct Line {
    n: Point2,
    c: f64,
}

fn fit_line(points: &[Point2]) -> Option<Line> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mean = points.iter().fold(Point2::new(0.0, 0.0), |a, p| a + *p) * (1.0 / k);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let (lo, hi) = sym2_eigenvalues(sxx, sxy, syy);
    if hi <= 0.0 {
        return None;
    }
    // Normal = eigenvector of the smallest eigenvalue.
    let (nx, ny) = if sxy.abs() > 1e-300 {
        (sxy, lo - sxx)
    } else if sxx <= syy {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let len = math::hypot(nx, ny);
    let n = Point2::new(nx / len, ny / len);
    Some(Line {
        n,
        c: n.x * mean.x + n.y * mean.y,
    })
}

fn intersect(a: Line, b: Line) -> Option<Point2> {
    let det = a.n.x * b.n.y - a.n.y * b.n.x;
    if det.abs() < 1e-9 {
        return None;
    }
    Some(Point2::new(
        (a.c * b.n.y - b.c * a.n.y) / det,
        (a.n.x * b.c - b.n.x * a.c) / det,
    ))
}

/// Sub-pixel crossings of one plate side, probed along its inward normal.
///
/// `from`/`to` run along the side; `inward` points into the plate. Each probe
/// locates the first half-way crossing between the darkest outside level and
/// the brightest level just inside.
fn edge_points(frame: &GrayImage, from: Point2, to: Point2, inward: Point2, span: (f64, f64)) -> Vec<Point2> {
    const REACH: f64 = 3.0;
    const STEP: f64 = 0.125;
    let d = to - from;
    let len = math::hypot(d.x, d.y);
    let probes = ((len * (span.1 - span.0)) / 0.5).max(2.0) as usize;
    let steps = (2.0 * REACH / STEP) as usize;
    let (w, h) = (frame.width() as f64, frame.height() as f64);
    let mut out = Vec::new();
    for k in 0..=probes {
        let t = span.0 + (span.1 - span.0) * k as f64 / probes as f64;
        let base = from + d * t;
        let start = base - inward * REACH;
        let end = base + inward * REACH;
        if start.x < 0.0 || start.y < 0.0 || start.x > w - 1.0 || start.y > h - 1.0 {
            continue;
        }
        if end.x < 0.0 || end.y < 0.0 || end.x > w - 1.0 || end.y > h - 1.0 {
            continue;
        }
        let profile: Vec<f64> = (0..=steps)
            .map(|s| {
                let p = start + inward * (s as f64 * STEP);
                frame.sample(p.x, p.y)
            })
            .collect();
        let half = steps / 2;
        let lo = profile[..half].iter().copied().fold(f64::INFINITY, f64::min);
        let hi = profile[half..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 40.0 {
            continue;
        }
        let level = 0.5 * (lo + hi);
        if let Some(s) = (0..steps).find(|&s| profile[s] < level && profile[s + 1] >= level) {
            let f = (level - profile[s]) / (profile[s + 1] - profile[s]);
            out.push(start + inward * ((s as f64 + f) * STEP));
        }
    }
    out
}

/// Measures the plate's top edge endpoints `[upper_left, upper_right]` with
/// sub-pixel accuracy by fitting lines to the top, left and right sides of a
/// bright plate on a darker surround. Returns `None` when a side cannot be
/// located.
pub fn measure_top_edge(frame: &GrayImage, rect: &OrientedRect) -> Option<[Point2; 2]> {
    let [ul, ur, lr, ll] = rect.vertices();
    let (u, v) = rect.axes();
    let top = edge_points(frame, ul, ur, v, (0.04, 0.96));
    let left = edge_points(frame, ul, ll, u, (0.15, 0.85));
    let right = edge_points(frame, ur, lr, u * -1.0, (0.15, 0.85));
    let min_pts = 3;
    if top.len() < min_pts || left.len() < min_pts || right.len() < min_pts {
        return None;
    }
    let (top, left, right) = (fit_line(&top)?, fit_line(&left)?, fit_line(&right)?);
    let a = intersect(top, left)?;
    let b = intersect(top, right)?;
    (a.distance(&ul) < 4.0 && b.distance(&ur) < 4.0).then_some([a, b])
}
