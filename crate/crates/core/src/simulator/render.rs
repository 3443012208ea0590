//! Raster rendering of scenarios with exact polygon area coverage, so edge
//! pixels carry sub-pixel position information.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{PlateGeometry, ScenarioSpec};
use crate::font::PlateLayout;
use crate::geometry::{Homography, Point2};
use crate::math::{self, Vec3};
use crate::raster::{GrayImage, RgbImage};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub road_color: [u8; 3],
    pub marker_color: [u8; 3],
    pub body_color: [u8; 3],
    pub ink_color: [u8; 3],
    /// Standard deviation of per-pixel sensor noise, in greylevels.
    pub sensor_noise: f64,
    /// Half-length of each marker cross arm.
    pub marker_arm_m: f64,
    pub marker_width_m: f64,
    /// Car body extents around the plate, within the plate plane.
    pub body_side_m: f64,
    pub body_above_m: f64,
    pub body_below_m: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            road_color: [104, 104, 108],
            marker_color: [235, 235, 235],
            body_color: [45, 50, 70],
            ink_color: [25, 25, 25],
            sensor_noise: 0.0,
            marker_arm_m: 0.35,
            marker_width_m: 0.08,
            body_side_m: 0.55,
            body_above_m: 0.35,
            body_below_m: 0.25,
        }
    }
}

struct Canvas {
    width: usize,
    height: usize,
    px: Vec<[f32; 3]>,
}

impl Canvas {
    fn blend(&mut self, x: usize, y: usize, color: [f64; 3], alpha: f64) {
        let p = &mut self.px[y * self.width + x];
        for c in 0..3 {
            p[c] = ((1.0 - alpha) * p[c] as f64 + alpha * color[c]) as f32;
        }
    }
}

fn rgb(c: [u8; 3]) -> [f64; 3] {
    [c[0] as f64, c[1] as f64, c[2] as f64]
}

/// Area of the intersection of a convex polygon with the unit pixel square
/// centered on `(x, y)`.
fn clipped_area(poly: &[Point2], x: f64, y: f64) -> f64 {
    let mut cur: Vec<Point2> = poly.to_vec();
    let bounds = [
        (0, x - 0.5, true),
        (0, x + 0.5, false),
        (1, y - 0.5, true),
        (1, y + 0.5, false),
    ];
    for &(axis, limit, keep_above) in &bounds {
        if cur.is_empty() {
            return 0.0;
        }
        let coord = |p: &Point2| if axis == 0 { p.x } else { p.y };
        let inside = |p: &Point2| {
            if keep_above {
                coord(p) >= limit
            } else {
                coord(p) <= limit
            }
        };
        let mut next = Vec::with_capacity(cur.len() + 2);
        for i in 0..cur.len() {
            let a = cur[i];
            let b = cur[(i + 1) % cur.len()];
            let (ia, ib) = (inside(&a), inside(&b));
            if ia {
                next.push(a);
            }
            if ia != ib {
                let t = (limit - coord(&a)) / (coord(&b) - coord(&a));
                next.push(a + (b - a) * t);
            }
        }
        cur = next;
    }
    let n = cur.len();
    let mut area = 0.0;
    for i in 0..n {
        let a = cur[i];
        let b = cur[(i + 1) % n];
        area += a.x * b.y - b.x * a.y;
    }
    (area * 0.5).abs()
}

/// Visits every pixel touched by a convex polygon with its coverage.
fn fill_convex(width: usize, height: usize, poly: &[Point2], mut visit: impl FnMut(usize, usize, f64)) {
    if poly.len() < 3 {
        return;
    }
    let signed: f64 = (0..poly.len())
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            a.x * b.y - b.x * a.y
        })
        .sum();
    if signed == 0.0 {
        return;
    }
    let orient = signed.signum();
    // Inward unit normals and offsets for the fast interior/exterior tests.
    let edges: Vec<(f64, f64, f64)> = (0..poly.len())
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len = math::hypot(dx, dy);
            let (nx, ny) = (-dy * orient / len, dx * orient / len);
            (nx, ny, -(nx * a.x + ny * a.y))
        })
        .collect();

    let min_x = poly.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let max_x = poly.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = poly.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_y = poly.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let x0 = math::floor(min_x).max(0.0) as usize;
    let y0 = math::floor(min_y).max(0.0) as usize;
    if max_x < 0.0 || max_y < 0.0 {
        return;
    }
    let x1 = (math::ceil(max_x) as usize).min(width.saturating_sub(1));
    let y1 = (math::ceil(max_y) as usize).min(height.saturating_sub(1));

    const HALF_DIAG: f64 = 0.7072;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (fx, fy) = (x as f64, y as f64);
            let mut min_d = f64::INFINITY;
            for &(nx, ny, c) in &edges {
                min_d = min_d.min(nx * fx + ny * fy + c);
            }
            let cov = if min_d >= HALF_DIAG {
                1.0
            } else if min_d <= -HALF_DIAG {
                0.0
            } else {
                clipped_area(poly, fx, fy)
            };
            if cov > 0.0 {
                visit(x, y, cov.min(1.0));
            }
        }
    }
}

fn project_polygon(spec: &ScenarioSpec, pts: &[Vec3]) -> Option<Vec<Point2>> {
    pts.iter().map(|p| spec.camera.project(*p).ok()).collect()
}

fn road_rect(cx: f64, cy: f64, half_x: f64, half_y: f64) -> [Vec3; 4] {
    [
        [cx - half_x, cy - half_y, 0.0],
        [cx + half_x, cy - half_y, 0.0],
        [cx + half_x, cy + half_y, 0.0],
        [cx - half_x, cy + half_y, 0.0],
    ]
}

fn draw_markers(spec: &ScenarioSpec, canvas: &mut Canvas) {
    let style = &spec.style;
    let (arm, half_w) = (style.marker_arm_m, style.marker_width_m / 2.0);
    let color = rgb(style.marker_color);
    for m in &spec.markers {
        let polys = [
            road_rect(m.x, m.y, arm, half_w),
            road_rect(m.x, m.y, half_w, arm),
            road_rect(m.x, m.y, half_w, half_w),
        ];
        let Some(projected) = polys
            .iter()
            .map(|p| project_polygon(spec, p))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        // Union coverage of the two arms: c1 + c2 - c(overlap).
        let (w, h) = (canvas.width, canvas.height);
        let mut cov = alloc::collections::BTreeMap::<(usize, usize), f64>::new();
        for (k, poly) in projected.iter().enumerate() {
            let sign = if k == 2 { -1.0 } else { 1.0 };
            fill_convex(w, h, poly, |x, y, c| *cov.entry((y, x)).or_insert(0.0) += sign * c);
        }
        for ((y, x), c) in cov {
            let c = c.clamp(0.0, 1.0);
            if c > 0.0 {
                canvas.blend(x, y, color, c);
            }
        }
    }
}

fn draw_vehicle(spec: &ScenarioSpec, canvas: &mut Canvas, plate: &PlateGeometry, layout: &PlateLayout) -> Result<()> {
    let style = &spec.style;
    let (l, vert) = (spec.plate_length_m, spec.plate_vertical_m);
    let bottom_height = plate.lower_left[2].min(plate.lower_right[2]);
    let below = style.body_below_m.min(bottom_height.max(0.0));
    let body_a = (-style.body_side_m / l, 1.0 + style.body_side_m / l);
    let body_b = (-style.body_above_m / vert, 1.0 + below / vert);
    let body = [
        plate.at(body_a.0, body_b.0),
        plate.at(body_a.1, body_b.0),
        plate.at(body_a.1, body_b.1),
        plate.at(body_a.0, body_b.1),
    ];
    let (w, h) = (canvas.width, canvas.height);
    if let Some(poly) = project_polygon(spec, &body) {
        let color = rgb(style.body_color);
        fill_convex(w, h, &poly, |x, y, c| canvas.blend(x, y, color, c));
    }

    let Some(poly) = project_polygon(spec, &plate.corners()) else {
        return Ok(());
    };
    let along = math::sub(plate.upper_right, plate.upper_left);
    let down = math::sub(plate.lower_left, plate.upper_left);
    let to_plate = spec.camera.plane_homography(plate.upper_left, along, down)?.invert()?;
    let plate_color = rgb(spec.plate_color);
    let ink = rgb(style.ink_color);
    let mut shaded = Vec::new();
    fill_convex(w, h, &poly, |x, y, c| {
        let frac = ink_fraction(&to_plate, layout, x as f64, y as f64);
        let mut color = [0.0; 3];
        for k in 0..3 {
            color[k] = plate_color[k] * (1.0 - frac) + ink[k] * frac;
        }
        shaded.push((x, y, color, c));
    });
    for (x, y, color, c) in shaded {
        canvas.blend(x, y, color, c);
    }
    Ok(())
}

/// Fraction of a 4x4 subsample grid inside pixel `(x, y)` that lands on ink.
fn ink_fraction(to_plate: &Homography, layout: &PlateLayout, x: f64, y: f64) -> f64 {
    let mut hits = 0;
    for j in 0..4 {
        for i in 0..4 {
            let sx = x + (i as f64 + 0.5) / 4.0 - 0.5;
            let sy = y + (j as f64 + 0.5) / 4.0 - 0.5;
            if let Ok(q) = to_plate.apply(Point2::new(sx, sy)) {
                if (0.0..1.0).contains(&q.x) && (0.0..1.0).contains(&q.y) && layout.ink_at(q.x, q.y) {
                    hits += 1;
                }
            }
        }
    }
    hits as f64 / 16.0
}

/// Renders frame `frame_idx` (lead-in frames show the empty road).
///
/// Deterministic in `(spec, frame_idx)`; sensor noise is drawn from an RNG
/// seeded by the scenario seed and the frame index.
pub fn render_frame(spec: &ScenarioSpec, frame_idx: usize) -> Result<RgbImage> {
    spec.validate()?;
    if frame_idx >= spec.frame_count() {
        return Err(Error::InvalidParameter(alloc::format!(
            "frame {frame_idx} outside scenario of {} frames",
            spec.frame_count()
        )));
    }
    let [width, height] = spec.camera.image_size;
    let road = rgb(spec.style.road_color);
    let mut canvas = Canvas {
        width,
        height,
        px: vec![[road[0] as f32, road[1] as f32, road[2] as f32]; width * height],
    };
    draw_markers(spec, &mut canvas);

    if frame_idx >= spec.lead_in_frames {
        let k = frame_idx - spec.lead_in_frames;
        let center = spec.camera.center();
        let mut plates: Vec<(f64, PlateGeometry, PlateLayout)> = spec
            .vehicles()
            .iter()
            .map(|v| {
                let g = spec.plate_geometry(v, k);
                let d = math::norm(math::sub(g.upper_right, center));
                (d, g, PlateLayout::new(&v.plate_text))
            })
            .collect();
        plates.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (_, plate, layout) in &plates {
            draw_vehicle(spec, &mut canvas, plate, layout)?;
        }
    }

    let noise = if spec.style.sensor_noise > 0.0 {
        Some(
            Normal::new(0.0, spec.style.sensor_noise)
                .map_err(|_| Error::InvalidParameter("sensor noise must be finite".into()))?,
        )
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (frame_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut data = Vec::with_capacity(width * height * 3);
    for p in &canvas.px {
        for c in p {
            let mut v = *c as f64;
            if let Some(n) = &noise {
                v += n.sample(&mut rng);
            }
            data.push(math::to_u8(v));
        }
    }
    RgbImage::from_raw(width, height, data)
}

/// Appearance of a directly rendered plate patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PatchStyle {
    pub rotation_deg: f64,
    /// Gaussian noise standard deviation in greylevels.
    pub noise_sigma: f64,
    /// Rendering resolution relative to the output; values below one render
    /// small and upsample bilinearly, mimicking distant plates.
    pub resolution: f64,
    pub plate_grey: u8,
    pub ink_grey: u8,
    pub border_grey: u8,
    pub seed: u64,
}

impl Default for PatchStyle {
    fn default() -> Self {
        Self {
            rotation_deg: 0.0,
            noise_sigma: 0.0,
            resolution: 1.0,
            plate_grey: 198,
            ink_grey: 25,
            border_grey: 51,
            seed: 0,
        }
    }
}

/// Renders plate `text` straight into a `width x height` greylevel patch
/// that spans the plate exactly, as a rotation-compensated crop would.
pub fn render_plate_patch(text: &str, width: usize, height: usize, style: &PatchStyle) -> GrayImage {
    let layout = PlateLayout::new(text);
    let res = style.resolution.clamp(0.05, 1.0);
    let rw = ((width as f64 * res) as usize).max(2);
    let rh = ((height as f64 * res) as usize).max(2);
    let theta = math::to_radians(style.rotation_deg);
    let (s, c) = (math::sin(theta), math::cos(theta));
    let mut small = vec![0.0f64; rw * rh];
    for r in 0..rh {
        for col in 0..rw {
            let mut acc = 0.0;
            for j in 0..4 {
                for i in 0..4 {
                    // Centered coordinates in output pixels.
                    let x = ((col as f64 + (i as f64 + 0.5) / 4.0) / rw as f64 - 0.5) * width as f64;
                    let y = ((r as f64 + (j as f64 + 0.5) / 4.0) / rh as f64 - 0.5) * height as f64;
                    let xr = c * x + s * y;
                    let yr = -s * x + c * y;
                    let a = xr / width as f64 + 0.5;
                    let b = yr / height as f64 + 0.5;
                    acc += if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) {
                        style.border_grey as f64
                    } else if layout.ink_at(a, b) {
                        style.ink_grey as f64
                    } else {
                        style.plate_grey as f64
                    };
                }
            }
            small[r * rw + col] = acc / 16.0;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(style.seed);
    let noise = Normal::new(0.0, style.noise_sigma.max(0.0)).ok();
    let mut out = Vec::with_capacity(width * height);
    for r in 0..height {
        for col in 0..width {
            // Bilinear upsampling with pixel-center alignment.
            let sx = ((col as f64 + 0.5) * rw as f64 / width as f64 - 0.5).clamp(0.0, (rw - 1) as f64);
            let sy = ((r as f64 + 0.5) * rh as f64 / height as f64 - 0.5).clamp(0.0, (rh - 1) as f64);
            let (x0, y0) = (math::floor(sx) as usize, math::floor(sy) as usize);
            let (x1, y1) = ((x0 + 1).min(rw - 1), (y0 + 1).min(rh - 1));
            let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
            let g = |xx: usize, yy: usize| small[yy * rw + xx];
            let mut v =
                (g(x0, y0) * (1.0 - fx) + g(x1, y0) * fx) * (1.0 - fy) + (g(x0, y1) * (1.0 - fx) + g(x1, y1) * fx) * fy;
            if style.noise_sigma > 0.0 {
                if let Some(n) = &noise {
                    v += n.sample(&mut rng);
                }
            }
            out.push(math::to_u8(v));
        }
    }
    GrayImage::from_raw(width, height, out).expect("patch buffer size")
}
