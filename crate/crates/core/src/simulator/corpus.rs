//! Labeled training corpora drawn from the simulator.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{render_frame, render_plate_patch, ObliqueScenario, PatchStyle, ScenarioSpec};
use crate::detection::{normalize_crop, segment_candidates, HsvThresholds, LabeledCrop, OrientedRect, PlateCrop};
use crate::font::DIGITS;
use crate::geometry::Point2;
use crate::math;
use crate::ocr::{segment_glyphs, GlyphBox};
use crate::raster::{GrayImage, RgbImage};
use crate::Result;

/// Random plate text of `len` characters from `alphabet`.
pub fn random_text(rng: &mut impl Rng, alphabet: &str, len: usize) -> String {
    let chars: Vec<char> = alphabet.chars().collect();
    (0..len).map(|_| chars[rng.random_range(0..chars.len())]).collect()
}

/// A randomized oblique roadside setup: camera height 4 to 8 m, plate
/// height 0.3 to 0.7 m, speed 20 to 100 km/h, with the camera offset across
/// the road and yawed slightly.
pub fn random_oblique(rng: &mut impl Rng) -> ObliqueScenario {
    ObliqueScenario {
        camera_height_m: rng.random_range(4.0..=8.0),
        plate_height_m: rng.random_range(0.3..=0.7),
        speed_mps: rng.random_range(20.0..=100.0) / 3.6,
        camera_lateral_m: rng.random_range(-1.5..=1.5),
        yaw_deg: rng.random_range(-2.0..=2.0),
        plate_text: random_text(rng, DIGITS, 7),
        seed: rng.random(),
        ..ObliqueScenario::default()
    }
}

/// Builds [`random_oblique`] setups until one yields at least `min_frames`.
pub fn random_scenario(rng: &mut impl Rng, min_frames: usize) -> ScenarioSpec {
    loop {
        if let Ok(spec) = random_oblique(rng).build() {
            if spec.n_frames >= min_frames {
                return spec;
            }
        }
    }
}

/// Plate-sized rectangle at a random place in the frame.
fn random_rect(rng: &mut impl Rng, w: usize, h: usize) -> OrientedRect {
    let width = rng.random_range(60.0..200.0);
    let height = width / rng.random_range(3.0..6.0);
    let reach = width / 2.0 + 2.0;
    let cx = rng.random_range(reach..(w as f64 - reach));
    let cy = rng.random_range(reach..(h as f64 - reach));
    OrientedRect::new(Point2::new(cx, cy), width, height, rng.random_range(-20.0..20.0))
}

fn overlaps(a: &OrientedRect, b: &OrientedRect) -> bool {
    let d = a.center.distance(&b.center);
    d < 0.5 * (math::hypot(a.width, a.height) + math::hypot(b.width, b.height))
}

/// Negative crops from one frame: rectangles near the vehicle (car body and
/// plate surroundings), on markers and anywhere else, none overlapping the
/// plate.
fn negatives(
    rng: &mut impl Rng,
    spec: &ScenarioSpec,
    gray: &GrayImage,
    plate: Option<&OrientedRect>,
    count: usize,
) -> Vec<PlateCrop> {
    let (w, h) = (gray.width(), gray.height());
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count {
        attempts += 1;
        let mut r = random_rect(rng, w, h);
        match (attempts % 3, plate) {
            (0, Some(p)) => {
                // Hug the plate: car body, plate border, bumper.
                let off = Point2::new(
                    rng.random_range(-1.5..1.5) * p.width,
                    rng.random_range(-3.0..3.0) * p.height,
                );
                r = OrientedRect::new(
                    p.center + off,
                    p.width * rng.random_range(0.8..1.3),
                    p.height * rng.random_range(0.8..1.3),
                    p.angle_deg,
                );
            }
            (1, _) if !spec.markers.is_empty() => {
                let m = spec.markers[rng.random_range(0..spec.markers.len())];
                if let Ok(c) = spec.camera.project([m.x, m.y, 0.0]) {
                    r.center = c + Point2::new(rng.random_range(-20.0..20.0), rng.random_range(-8.0..8.0));
                }
            }
            _ => {}
        }
        if plate.is_some_and(|p| overlaps(p, &r)) {
            continue;
        }
        if let Ok(c) = normalize_crop(gray, &r) {
            out.push(c);
        }
    }
    out
}

/// Plate and non-plate crops from rendered frames of random scenarios.
///
/// Positives are the crops the detector itself would produce: each frame is
/// segmented and the single plate-colored candidate normalized. Negatives are
/// cut from the same frames. Frames are rendered at a reduced size to keep
/// generation fast; plate sizes in pixels match full-size footage.
pub fn plate_corpus(n_positive: usize, n_negative: usize, seed: u64) -> Result<Vec<LabeledCrop>> {
    Ok(plate_crop_corpus(n_positive, n_negative, seed)?
        .into_iter()
        .map(|(crop, is_plate)| LabeledCrop {
            features: crop.equalized,
            is_plate,
        })
        .collect())
}

/// [`plate_corpus`] with the full crops, resampled patch included, paired
/// with their labels.
pub fn plate_crop_corpus(n_positive: usize, n_negative: usize, seed: u64) -> Result<Vec<(PlateCrop, bool)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    while pos.len() < n_positive || neg.len() < n_negative {
        let mut sc = random_oblique(&mut rng);
        sc.image_size = [640, 360];
        sc.min_plate_px = rng.random_range(60.0..90.0);
        sc.max_frames = 40;
        let Ok(mut spec) = sc.build() else { continue };
        if rng.random_bool(0.5) {
            spec.style.sensor_noise = rng.random_range(0.0..6.0);
        }
        let frames: Vec<usize> = (0..spec.n_frames).step_by(3).collect();
        for k in frames {
            if pos.len() >= n_positive && neg.len() >= n_negative {
                break;
            }
            let img = render_frame(&spec, spec.lead_in_frames + k)?;
            let gray = img.to_gray();
            let cands = segment_candidates(&img, &HsvThresholds::default(), 2);
            let plate = cands.first().map(|c| c.rect);
            if pos.len() < n_positive {
                if let Some(Ok(c)) = plate.map(|r| normalize_crop(&gray, &r)) {
                    pos.push(c);
                }
            }
            if neg.len() < n_negative {
                let want = (n_negative - neg.len()).min(2);
                neg.extend(negatives(&mut rng, &spec, &gray, plate.as_ref(), want));
            }
        }
    }
    pos.truncate(n_positive);
    neg.truncate(n_negative);
    // Interleave so any prefix/suffix split keeps both classes.
    let mut out = Vec::with_capacity(pos.len() + neg.len());
    let (mut p, mut n) = (pos.into_iter(), neg.into_iter());
    loop {
        match (p.next(), n.next()) {
            (None, None) => break,
            (a, b) => out.extend(a.map(|c| (c, true)).into_iter().chain(b.map(|c| (c, false)))),
        }
    }
    Ok(out)
}

/// Appearance ranges for glyph corpora.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlyphCorpusStyle {
    pub max_rotation_deg: f64,
    pub noise_sigma: f64,
    pub min_resolution: f64,
}

impl Default for GlyphCorpusStyle {
    fn default() -> Self {
        Self {
            max_rotation_deg: 2.0,
            noise_sigma: 8.0,
            min_resolution: 0.45,
        }
    }
}

/// Labeled glyphs from plates of random text rendered straight into crops.
/// Plates whose segmentation does not yield one box per character are
/// skipped, so labels are always aligned.
pub fn glyph_corpus(n_glyphs: usize, alphabet: &str, style: &GlyphCorpusStyle, seed: u64) -> Vec<(GlyphBox, char)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_glyphs);
    let mut attempts = 0;
    while out.len() < n_glyphs && attempts < 10 * n_glyphs + 100 {
        attempts += 1;
        let len = rng.random_range(6..=8);
        let text = random_text(&mut rng, alphabet, len);
        let patch_style = PatchStyle {
            rotation_deg: rng.random_range(-style.max_rotation_deg..=style.max_rotation_deg),
            noise_sigma: style.noise_sigma,
            resolution: rng.random_range(style.min_resolution..=1.0),
            seed: rng.random(),
            ..PatchStyle::default()
        };
        let patch = render_plate_patch(&text, 144, 33, &patch_style);
        let Ok(boxes) = segment_glyphs(&patch) else { continue };
        if boxes.len() != text.chars().count() {
            continue;
        }
        out.extend(boxes.into_iter().zip(text.chars()));
    }
    out.truncate(n_glyphs);
    out
}

/// Adds Gaussian noise of `sigma` greylevels to an image.
pub fn add_noise(img: &RgbImage, sigma: f64, seed: u64) -> RgbImage {
    let Ok(n) = Normal::new(0.0, sigma) else {
        return img.clone();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = img
        .as_raw()
        .iter()
        .map(|&v| math::to_u8(v as f64 + n.sample(&mut rng)))
        .collect();
    RgbImage::from_raw(img.width(), img.height(), data).expect("same dimensions")
}
