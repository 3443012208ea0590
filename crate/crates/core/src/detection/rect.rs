//! Convex hulls and minimum-area oriented rectangles.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::math;

/// Oriented rectangle. `width >= height`; `angle_deg` in `(-90, 90]` is the
/// direction of the width axis measured from +x towards +y (image down).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect {
    pub center: Point2,
    pub width: f64,
    pub height: f64,
    pub angle_deg: f64,
}

impl OrientedRect {
    /// Builds a rectangle from a center, two extents and the direction of the
    /// first extent, normalizing to the canonical convention.
    pub fn new(center: Point2, a: f64, b: f64, angle_a_deg: f64) -> Self {
        let (width, height, mut angle) = if a >= b {
            (a, b, angle_a_deg)
        } else {
            (b, a, angle_a_deg + 90.0)
        };
        while angle > 90.0 {
            angle -= 180.0;
        }
        while angle <= -90.0 {
            angle += 180.0;
        }
        Self {
            center,
            width,
            height,
            angle_deg: angle,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Unit vectors along the width and height axes.
    pub fn axes(&self) -> (Point2, Point2) {
        let t = math::to_radians(self.angle_deg);
        let (s, c) = (math::sin(t), math::cos(t));
        (Point2::new(c, s), Point2::new(-s, c))
    }

    /// Vertices in the order upper-left, upper-right, lower-right, lower-left.
    pub fn vertices(&self) -> [Point2; 4] {
        let (u, v) = self.axes();
        let (hu, hv) = (u * (self.width / 2.0), v * (self.height / 2.0));
        let c = self.center;
        [c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            center: Point2::new(self.center.x + dx, self.center.y + dy),
            ..*self
        }
    }

    /// Grows both extents by `2 * margin`.
    pub fn expanded(&self, margin: f64) -> Self {
        Self {
            width: self.width + 2.0 * margin,
            height: self.height + 2.0 * margin,
            ..*self
        }
    }
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull by monotone chain, counter-clockwise in a y-up frame, with
/// collinear points removed.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Minimum-area enclosing rectangle of a convex polygon by rotating calipers.
///
/// One rectangle side is flush with a hull edge; for each edge the three
/// supporting vertices (far along the edge, far along the normal, far
/// against the edge) advance monotonically, so the sweep is linear.
pub fn min_area_rect(hull: &[Point2]) -> Option<OrientedRect> {
    let n = hull.len();
    match n {
        0 => return None,
        1 => return Some(OrientedRect::new(hull[0], 0.0, 0.0, 0.0)),
        2 => {
            let d = hull[1] - hull[0];
            let c = (hull[0] + hull[1]) * 0.5;
            let ang = math::to_degrees(math::atan2(d.y, d.x));
            return Some(OrientedRect::new(c, math::hypot(d.x, d.y), 0.0, ang));
        }
        _ => {}
    }
    let dot = |a: Point2, b: Point2| a.x * b.x + a.y * b.y;
    let edge_dir = |i: usize| {
        let d = hull[(i + 1) % n] - hull[i];
        let len = math::hypot(d.x, d.y);
        d * (1.0 / len)
    };

    let mut best: Option<(f64, OrientedRect)> = None;
    let (mut j, mut k, mut m) = (1usize, 1usize, 1usize);
    for i in 0..n {
        let u = edge_dir(i);
        // Normal pointing into a counter-clockwise hull (y-up orientation).
        let v = Point2::new(-u.y, u.x);
        let origin = hull[i];
        let proj_u = |p: Point2| dot(p - origin, u);
        let proj_v = |p: Point2| dot(p - origin, v);
        if i == 0 {
            j = 0;
            k = 0;
        }
        while proj_u(hull[(j + 1) % n]) > proj_u(hull[j]) + 1e-12 {
            j = (j + 1) % n;
        }
        if i == 0 {
            k = j;
        }
        while proj_v(hull[(k + 1) % n]) > proj_v(hull[k]) + 1e-12 {
            k = (k + 1) % n;
        }
        if i == 0 {
            m = k;
        }
        while proj_u(hull[(m + 1) % n]) < proj_u(hull[m]) - 1e-12 {
            m = (m + 1) % n;
        }
        let (u_max, u_min) = (proj_u(hull[j]), proj_u(hull[m]).min(0.0));
        let v_max = proj_v(hull[k]);
        let (a, b) = (u_max - u_min, v_max);
        let area = a * b;
        if best.as_ref().is_none_or(|(ba, _)| area < *ba - 1e-9) {
            let c = origin + u * ((u_max + u_min) / 2.0) + v * (v_max / 2.0);
            let ang = math::to_degrees(math::atan2(u.y, u.x));
            best = Some((area, OrientedRect::new(c, a, b, ang)));
        }
    }
    best.map(|(_, r)| r)
}

/// Exhaustive check of every hull edge, kept as a test oracle.
#[cfg(test)]
pub(crate) fn min_area_rect_brute(hull: &[Point2]) -> Option<OrientedRect> {
    let n = hull.len();
    let mut best: Option<(f64, OrientedRect)> = None;
    for i in 0..n {
        let d = hull[(i + 1) % n] - hull[i];
        let len = math::hypot(d.x, d.y);
        let u = d * (1.0 / len);
        let v = Point2::new(-u.y, u.x);
        let (mut a0, mut a1, mut b0, mut b1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in hull {
            let q = *p - hull[i];
            let (a, b) = (q.x * u.x + q.y * u.y, q.x * v.x + q.y * v.y);
            a0 = a0.min(a);
            a1 = a1.max(a);
            b0 = b0.min(b);
            b1 = b1.max(b);
        }
        let area = (a1 - a0) * (b1 - b0);
        if best.as_ref().is_none_or(|(ba, _)| area < *ba - 1e-9) {
            let c = hull[i] + u * ((a0 + a1) / 2.0) + v * ((b0 + b1) / 2.0);
            let ang = math::to_degrees(math::atan2(u.y, u.x));
            best = Some((area, OrientedRect::new(c, a1 - a0, b1 - b0, ang)));
        }
    }
    best.map(|(_, r)| r)
}
