//! Projective plane algebra and homography estimation between the image
//! and the road reference plane.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{centered_singular_values_2d, jacobi_svd};
use crate::math::{self, Mat3};
use crate::{Error, Result};

/// Relative threshold on `|w|` below which a mapped point is at infinity.
pub const EPSILON_W: f64 = 1e-12;

/// Ratio of smallest to largest centered singular value under which a
/// point set counts as collinear.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn to_homogeneous(self) -> HomogeneousPoint2 {
        HomogeneousPoint2 {
            u: self.x,
            v: self.y,
            w: 1.0,
        }
    }
}

impl core::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl core::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl core::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousPoint2 {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl HomogeneousPoint2 {
    /// Euclidean form, or `PointAtInfinity` when `|w|` is negligible
    /// relative to the largest coordinate.
    pub fn to_euclidean(self) -> Result<Point2> {
        let scale = self.u.abs().max(self.v.abs()).max(self.w.abs());
        if scale == 0.0 || self.w.abs() <= EPSILON_W * scale {
            return Err(Error::PointAtInfinity);
        }
        Ok(Point2::new(self.u / self.w, self.v / self.w))
    }
}

/// A pixel paired with its measured location on the road plane (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub image: Point2,
    pub world: Point2,
}

impl Correspondence {
    pub fn new(image: Point2, world: Point2) -> Self {
        Self { image, world }
    }
}

/// Invertible 3x3 projective map, stored with unit Frobenius norm and its
/// largest-magnitude entry positive.
///
/// Serializes as a row-major array of nine numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Mat3,
}

impl Homography {
    pub fn identity() -> Self {
        Self::from_matrix(math::IDENTITY).expect("identity is invertible")
    }

    /// Canonicalizes `m`; fails if it is singular or not finite.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::degenerate("non-finite homography entry"));
        }
        let frob = math::sqrt(m.iter().flatten().map(|x| x * x).sum());
        if frob == 0.0 {
            return Err(Error::degenerate("zero matrix"));
        }
        // Hadamard ratio: |det| relative to the product of column norms.
        let col_norm = |j: usize| math::sqrt((0..3).map(|i| m[i][j] * m[i][j]).sum());
        let hadamard = col_norm(0) * col_norm(1) * col_norm(2);
        if hadamard == 0.0 || math::det(&m).abs() <= 1e-12 * hadamard {
            return Err(Error::degenerate("singular homography"));
        }
        let mut largest = 0.0f64;
        for x in m.iter().flatten() {
            if x.abs() > largest.abs() {
                largest = *x;
            }
        }
        let s = largest.signum() / frob;
        let mut out = m;
        out.iter_mut().flatten().for_each(|x| *x *= s);
        Ok(Self { m: out })
    }

    pub fn from_row_major(a: [f64; 9]) -> Result<Self> {
        Self::from_matrix([[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]])
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn apply_homogeneous(&self, p: HomogeneousPoint2) -> HomogeneousPoint2 {
        let r = math::mat_vec(&self.m, [p.u, p.v, p.w]);
        HomogeneousPoint2 {
            u: r[0],
            v: r[1],
            w: r[2],
        }
    }

    /// Maps `p` and divides out `w`.
    pub fn apply(&self, p: Point2) -> Result<Point2> {
        self.apply_homogeneous(p.to_homogeneous()).to_euclidean()
    }

    pub fn invert(&self) -> Result<Self> {
        Self::from_matrix(math::adjugate(&self.m))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Homography) -> Result<Self> {
        Self::from_matrix(math::mat_mul(&self.m, &other.m))
    }

    /// Largest absolute entry-wise difference between canonical forms.
    pub fn max_abs_diff(&self, other: &Homography) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Serialize for Homography {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Homography {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let a = <[f64; 9]>::deserialize(d)?;
        Homography::from_row_major(a).map_err(serde::de::Error::custom)
    }
}

/// Similarity-normalizes points to zero centroid and mean radius √2.
///
/// Returns the normalized points and the 3x3 transform that produced them.
pub fn normalize_points(points: &[Point2]) -> Result<(Vec<Point2>, Mat3)> {
    if points.is_empty() {
        return Err(Error::insufficient("no points to normalize"));
    }
    let n = points.len() as f64;
    let (cx, cy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x / n, sy + p.y / n));
    let mean_r = points.iter().map(|p| math::hypot(p.x - cx, p.y - cy)).sum::<f64>() / n;
    let spread = points.iter().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max);
    if mean_r == 0.0 || mean_r <= 1e-14 * spread {
        return Err(Error::degenerate("all points coincide"));
    }
    let s = core::f64::consts::SQRT_2 / mean_r;
    let t = [[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]];
    let out = points
        .iter()
        .map(|p| Point2::new(s * (p.x - cx), s * (p.y - cy)))
        .collect();
    Ok((out, t))
}

fn collinear(points: &[Point2]) -> bool {
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    let (lo, hi) = centered_singular_values_2d(&pts);
    hi == 0.0 || lo < COLLINEARITY_TOLERANCE * hi
}

/// Normalized DLT estimate of the world→image homography.
///
/// With four points the solution interpolates exactly; with more it
/// minimizes the algebraic residual in normalized coordinates.
pub fn estimate_homography(corr: &[Correspondence]) -> Result<Homography> {
    if corr.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 correspondences, got {}",
            corr.len()
        )));
    }
    if corr.iter().any(|c| !c.image.is_finite() || !c.world.is_finite()) {
        return Err(Error::InvalidGeometry("non-finite correspondence".into()));
    }
    let world: Vec<Point2> = corr.iter().map(|c| c.world).collect();
    let image: Vec<Point2> = corr.iter().map(|c| c.image).collect();
    if collinear(&world) {
        return Err(Error::degenerate("world points are collinear"));
    }
    if collinear(&image) {
        return Err(Error::degenerate("image points are collinear"));
    }
    let (wn, tw) = normalize_points(&world)?;
    let (im, ti) = normalize_points(&image)?;

    let rows = 2 * corr.len();
    let mut a = Vec::with_capacity(rows * 9);
    for (q, p) in wn.iter().zip(&im) {
        let (x, y) = (q.x, q.y);
        a.extend_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, p.y * x, p.y * y, p.y]);
        a.extend_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -p.x * x, -p.x * y, -p.x]);
    }
    let svd = jacobi_svd(&a, rows, 9);
    let order = svd.ascending();
    let smax = svd.singular_values[order[8]];
    if svd.singular_values[order[1]] <= 1e-9 * smax {
        return Err(Error::degenerate("design matrix is rank deficient"));
    }
    let h = svd.v_column(order[0]);
    let hn = [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], h[8]]];

    let ti_inv = math::adjugate(&ti);
    let m = math::mat_mul(&ti_inv, &math::mat_mul(&hn, &tw));
    Homography::from_matrix(m)
}

/// Per-correspondence reprojection distances `|H(world) - image|` in pixels.
pub fn reprojection_errors(h: &Homography, corr: &[Correspondence]) -> Result<Vec<f64>> {
    corr.iter()
        .map(|c| h.apply(c.world).map(|p| p.distance(&c.image)))
        .collect()
}

pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    math::sqrt(values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn square() -> [Point2; 4] {
        [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    /// World→image map of a random oblique pinhole view of the plane z=0.
    fn random_camera_homography(rng: &mut ChaCha8Rng) -> Homography {
        let f = rng.random_range(800.0..2000.0);
        let k = [[f, 0.0, 640.0], [0.0, f, 360.0], [0.0, 0.0, 1.0]];
        let center = [
            rng.random_range(-2.0..2.0),
            rng.random_range(-5.0..0.0),
            rng.random_range(4.0..8.0),
        ];
        let target = [rng.random_range(-1.0..1.0), rng.random_range(15.0..25.0), 0.0];
        let z = math::normalize(math::sub(target, center));
        let x = math::normalize(math::cross(z, [0.0, 0.0, 1.0]));
        let y = math::cross(z, x);
        let r = [x, y, z];
        let t = math::scale(math::mat_vec(&r, center), -1.0);
        let rt = [
            [r[0][0], r[0][1], t[0]],
            [r[1][0], r[1][1], t[1]],
            [r[2][0], r[2][1], t[2]],
        ];
        Homography::from_matrix(math::mat_mul(&k, &rt)).unwrap()
    }

    #[test]
    fn normalize_square() {
        let (pts, _) = normalize_points(&square()).unwrap();
        let cx: f64 = pts.iter().map(|p| p.x).sum::<f64>() / 4.0;
        let cy: f64 = pts.iter().map(|p| p.y).sum::<f64>() / 4.0;
        let r: f64 = pts.iter().map(|p| math::hypot(p.x, p.y)).sum::<f64>() / 4.0;
        assert!(cx.abs() < 1e-15 && cy.abs() < 1e-15);
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn normalize_identical_points_is_degenerate() {
        let pts = [Point2::new(5.0, 5.0), Point2::new(5.0, 5.0)];
        assert!(matches!(normalize_points(&pts), Err(Error::DegenerateConfiguration(_))));
    }

    #[test]
    fn normalize_random_points_mean_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point2> = (0..10)
            .map(|_| Point2::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect();
        let (out, t) = normalize_points(&pts).unwrap();
        let r: f64 = out.iter().map(|p| math::hypot(p.x, p.y)).sum::<f64>() / 10.0;
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-12);
        // T maps originals onto the outputs.
        for (p, q) in pts.iter().zip(&out) {
            let m = math::mat_vec(&t, [p.x, p.y, 1.0]);
            assert!((m[0] - q.x).abs() < 1e-12 && (m[1] - q.y).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_from_unit_square() {
        let corr: Vec<_> = square().iter().map(|&p| Correspondence::new(p, p)).collect();
        let h = estimate_homography(&corr).unwrap();
        assert!(h.max_abs_diff(&Homography::identity()) < 1e-12);
    }

    #[test]
    fn translated_square_gives_pure_translation() {
        let corr: Vec<_> = square()
            .iter()
            .map(|&p| Correspondence::new(p + Point2::new(3.0, 0.0), p))
            .collect();
        let h = estimate_homography(&corr).unwrap();
        let m = h.matrix();
        assert!(m[2][0].abs() < 1e-12 && m[2][1].abs() < 1e-12);
        assert!(m[0][1].abs() < 1e-12 && m[1][0].abs() < 1e-12);
        let expect = Homography::from_matrix([[1.0, 0.0, 3.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(h.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn noisy_eight_point_fit_reprojects_within_half_pixel() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.2).unwrap();
        let h_true = random_camera_homography(&mut rng);
        let corr: Vec<_> = (0..8)
            .map(|_| {
                let w = Point2::new(rng.random_range(-3.0..3.0), rng.random_range(10.0..30.0));
                let p = h_true.apply(w).unwrap();
                let p = Point2::new(p.x + noise.sample(&mut rng), p.y + noise.sample(&mut rng));
                Correspondence::new(p, w)
            })
            .collect();
        let h = estimate_homography(&corr).unwrap();
        let err = rms(&reprojection_errors(&h, &corr).unwrap());
        assert!(err <= 0.5, "rms {err}");
    }

    #[test]
    fn too_few_points() {
        let corr: Vec<_> = square()[..3].iter().map(|&p| Correspondence::new(p, p)).collect();
        assert!(matches!(estimate_homography(&corr), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn collinear_world_points_are_degenerate() {
        let corr: Vec<_> = (0..5)
            .map(|i| {
                let t = i as f64;
                Correspondence::new(Point2::new(t, t * t), Point2::new(t, 2.0 * t))
            })
            .collect();
        assert!(matches!(
            estimate_homography(&corr),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn apply_examples() {
        let id = Homography::identity();
        let p = id.apply(Point2::new(4.2, -1.0)).unwrap();
        assert!((p.x - 4.2).abs() < 1e-15 && (p.y + 1.0).abs() < 1e-15);

        let s = Homography::from_matrix([[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(s.apply(Point2::new(1.0, 1.0)).unwrap(), Point2::new(2.0, 2.0));

        let p = Homography::from_matrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.1, 0.0, 1.0]])
            .unwrap()
            .apply(Point2::new(10.0, 0.0))
            .unwrap();
        assert!((p.x - 5.0).abs() < 1e-12 && p.y.abs() < 1e-12);
    }

    #[test]
    fn apply_on_horizon_is_point_at_infinity() {
        let h = Homography::from_matrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.1, 0.0, 1.0]]).unwrap();
        assert_eq!(h.apply(Point2::new(-10.0, 3.0)), Err(Error::PointAtInfinity));
    }

    #[test]
    fn invert_examples() {
        assert!(
            Homography::identity()
                .invert()
                .unwrap()
                .max_abs_diff(&Homography::identity())
                < 1e-15
        );
        let s = Homography::from_matrix([[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let q = s
            .invert()
            .unwrap()
            .apply(s.apply(Point2::new(7.0, 3.0)).unwrap())
            .unwrap();
        assert!((q.x - 7.0).abs() < 1e-12 && (q.y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            Homography::from_matrix(m),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn compose_with_inverse_is_identity_for_random_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let h = random_camera_homography(&mut rng);
            let id = h.compose(&h.invert().unwrap()).unwrap();
            assert!(id.max_abs_diff(&Homography::identity()) <= 1e-9);
        }
    }

    #[test]
    fn canonical_scale_is_unit_frobenius_with_positive_peak() {
        let h = Homography::from_matrix([[-4.0, 0.0, 1.0], [0.0, -2.0, 0.0], [0.0, 0.0, -1.0]]).unwrap();
        let m = h.matrix();
        let f: f64 = m.iter().flatten().map(|x| x * x).sum();
        assert!((f - 1.0).abs() < 1e-15);
        assert!(m[0][0] > 0.0);
    }
}
