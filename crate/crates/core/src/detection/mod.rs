//! Per-frame plate detection and cross-frame association.
//!
//! A frame passes an activity gate, plate-colored pixels are isolated in HSV
//! space and cleaned up morphologically, each connected component gets a
//! minimum-area oriented rectangle, and the rectangle's interior is
//! normalized to a fixed-size crop for classification. Accepted plates get a
//! refined corner and measured top edge; these are then linked over time.

mod background;
mod components;
mod corner;
mod crop;
mod hsv;
mod morphology;
mod rect;
mod svm;
mod tracking;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::raster::{GrayImage, RgbImage};
use crate::Result;

pub use background::{is_active_frame, BackgroundModel, DIFF_LEVEL};
pub use components::{connected_components, Component};
pub use corner::{measure_top_edge, min_eigen_response, refine_corner, refine_point, Corner, SEARCH_RADIUS};
pub use crop::{equalize, normalize_crop, resample_rect, PlateCrop, CROP_COLS, CROP_LEN, CROP_ROWS};
pub use hsv::{rgb_to_hsv, HsvThresholds};
pub use morphology::{close, dilate, erode, open, BinaryMask};
pub use rect::{convex_hull, min_area_rect, OrientedRect};
pub use svm::{classify, evaluate, train_plate_classifier, LabeledCrop, LinearClassifier, SvmParams};
pub use tracking::{associate_tracks, FrameObservations, Observation, Track, TrackerParams};

/// Smallest component kept by segmentation, in pixels.
pub const MIN_COMPONENT_AREA: usize = 50;

/// A plate-colored region and its oriented bounding rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub component: Component,
    pub rect: OrientedRect,
}

/// Pixels inside the HSV window.
pub fn color_mask(frame: &RgbImage, thr: &HsvThresholds) -> BinaryMask {
    BinaryMask::from_fn(frame.width(), frame.height(), |x, y| thr.contains(frame.get(x, y)))
}

/// Rectangle around a set of pixels: the minimum-area rectangle of their
/// centers, grown by half a pixel so it covers the pixel squares.
pub fn component_rect(component: &Component) -> Option<OrientedRect> {
    let pts: Vec<Point2> = component
        .pixels
        .iter()
        .map(|&(x, y)| Point2::new(x as f64, y as f64))
        .collect();
    let hull = convex_hull(&pts);
    min_area_rect(&hull).map(|r| r.expanded(0.5))
}

/// Plate-colored regions, largest first.
pub fn segment_candidates(frame: &RgbImage, thr: &HsvThresholds, morph_radius: usize) -> Vec<Candidate> {
    segment_mask(&color_mask(frame, thr), morph_radius)
}

/// Segmentation after the color test: closing, opening, components, rects.
pub fn segment_mask(mask: &BinaryMask, morph_radius: usize) -> Vec<Candidate> {
    let cleaned = open(&close(mask, morph_radius), morph_radius);
    let mut out: Vec<Candidate> = connected_components(&cleaned, MIN_COMPONENT_AREA)
        .into_iter()
        .filter_map(|component| {
            let rect = component_rect(&component)?;
            (rect.area() > 0.0).then_some(Candidate { component, rect })
        })
        .collect();
    // Stable: equal areas keep raster order.
    out.sort_by_key(|c| core::cmp::Reverse(c.component.area()));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionParams {
    pub hsv: HsvThresholds,
    pub morph_radius: usize,
    pub corner: Corner,
    pub diff_threshold: f64,
    pub background_alpha: f64,
    pub tracker: TrackerParams,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            hsv: HsvThresholds::default(),
            morph_radius: 2,
            corner: Corner::UpperRight,
            diff_threshold: 0.002,
            background_alpha: 0.05,
            tracker: TrackerParams::default(),
        }
    }
}

/// An accepted plate in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateDetection {
    pub component: Component,
    pub rect: OrientedRect,
    pub corner: Point2,
    /// Top edge endpoints, when both could be measured.
    pub edge: Option<[Point2; 2]>,
    pub crop: PlateCrop,
    pub score: f64,
}

/// Runs segmentation, classification and corner refinement on one frame.
/// Without a classifier every candidate whose crop fits the frame is kept,
/// with score 0.
pub fn detect_plates(
    frame: &RgbImage,
    gray: &GrayImage,
    params: &DetectionParams,
    classifier: Option<&LinearClassifier>,
) -> Result<Vec<PlateDetection>> {
    let mut out = Vec::new();
    for cand in segment_candidates(frame, &params.hsv, params.morph_radius) {
        let Ok(crop) = normalize_crop(gray, &cand.rect) else {
            continue;
        };
        let score = match classifier {
            Some(clf) => {
                let (ok, margin) = classify(clf, &crop.equalized)?;
                if !ok {
                    continue;
                }
                margin
            }
            None => 0.0,
        };
        let Ok(corner) = refine_corner(gray, &cand.rect, params.corner) else {
            continue;
        };
        let edge = measure_top_edge(gray, &cand.rect);
        out.push(PlateDetection {
            component: cand.component,
            rect: cand.rect,
            corner,
            edge,
            crop,
            score,
        });
    }
    Ok(out)
}
