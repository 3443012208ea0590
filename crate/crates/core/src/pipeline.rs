//! End-to-end processing of a frame sequence: activity gate, plate
//! detection, reading, association, and one speed report per track.
//!
//! Work is split so callers can parallelize: [`Pipeline::observe`] is the
//! sequential per-frame step (background model, calibration refresh),
//! [`Pipeline::analyze`] is pure, and [`Pipeline::ingest`] records results
//! in frame order.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use serde::{Deserialize, Serialize};

use crate::detection::{
    associate_tracks, detect_plates, is_active_frame, BackgroundModel, DetectionParams, FrameObservations,
    LinearClassifier, Observation, OrientedRect,
};
use crate::geometry::{estimate_homography, Correspondence, Homography, Point2};
use crate::ocr::{read_plate, vote_plate_text, Mlp, PlateReading, UNKNOWN_PLATE};
use crate::raster::{GrayImage, RgbImage};
use crate::speed::{estimate_speed, SiteConfig, SpeedEstimate, TrackSequence};
use crate::{Error, Result};

fn default_min_track_frames() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub site: SiteConfig,
    #[serde(default)]
    pub detection: DetectionParams,
    /// Shorter tracks are treated as spurious and not reported.
    #[serde(default = "default_min_track_frames")]
    pub min_track_frames: usize,
    /// Re-locate the road markers and re-estimate the calibration every this
    /// many frames. Requires `markers`.
    #[serde(default)]
    pub homography_refresh_every_n_frames: Option<usize>,
    /// Road-plane marker positions used for calibration refresh.
    #[serde(default)]
    pub markers: Vec<Point2>,
}

impl PipelineConfig {
    pub fn new(site: SiteConfig) -> Self {
        Self {
            site,
            detection: DetectionParams::default(),
            min_track_frames: default_min_track_frames(),
            homography_refresh_every_n_frames: None,
            markers: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.site.validate()?;
        self.detection.hsv.validate()?;
        if self.homography_refresh_every_n_frames == Some(0) {
            return Err(Error::ConfigurationError("refresh cadence must be positive".into()));
        }
        if self.homography_refresh_every_n_frames.is_some() && self.markers.len() < 4 {
            return Err(Error::ConfigurationError(
                "calibration refresh needs at least four markers".into(),
            ));
        }
        Ok(())
    }
}

/// Detections and readings for one frame.
#[derive(Debug, Clone, Default)]
pub struct FrameAnalysis {
    pub detections: Vec<DetectionRecord>,
    pub readings: Vec<Option<PlateReading>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame: usize,
    pub corner: Point2,
    pub edge: Option<[Point2; 2]>,
    pub rect: OrientedRect,
    pub score: f64,
    /// Filled in once tracks are formed.
    pub track_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackReport {
    pub track_id: usize,
    pub plate_text: String,
    pub sequence: TrackSequence,
    pub homography: Homography,
    pub estimate: Option<SpeedEstimate>,
    pub flags: Vec<String>,
    pub readings: Vec<PlateReading>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineReport {
    pub tracks: Vec<TrackReport>,
    pub detections: Vec<DetectionRecord>,
    pub frames_seen: usize,
    pub frames_active: usize,
}

struct FrameEntry {
    frame: usize,
    homography: usize,
    analysis: FrameAnalysis,
}

pub struct Pipeline {
    config: PipelineConfig,
    classifier: Option<LinearClassifier>,
    ocr: Option<Mlp>,
    background: Option<BackgroundModel>,
    homographies: Vec<Homography>,
    entries: Vec<FrameEntry>,
    frames_seen: usize,
    frames_active: usize,
}

/// Image position of a white road marker near `predicted`: the centroid of
/// bright, unsaturated pixels in a square window, weighted by brightness
/// above the threshold.
pub fn locate_marker(frame: &RgbImage, predicted: Point2, half_window: usize) -> Option<Point2> {
    const LEVEL: f64 = 170.0;
    let (cx, cy) = (crate::math::round(predicted.x), crate::math::round(predicted.y));
    let r = half_window as f64;
    if !(cx - r >= 0.0 && cy - r >= 0.0 && cx + r < frame.width() as f64 && cy + r < frame.height() as f64) {
        return None;
    }
    let (cx, cy) = (cx as usize, cy as usize);
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    let mut count = 0;
    for y in cy - half_window..=cy + half_window {
        for x in cx - half_window..=cx + half_window {
            let p = frame.get(x, y);
            let lo = p.iter().copied().min().unwrap_or(0) as f64;
            if lo > LEVEL {
                let w = lo - LEVEL;
                sw += w;
                sx += w * x as f64;
                sy += w * y as f64;
                count += 1;
            }
        }
    }
    (count >= 6).then(|| Point2::new(sx / sw, sy / sw))
}

impl Pipeline {
    pub fn new(config: PipelineConfig, classifier: Option<LinearClassifier>, ocr: Option<Mlp>) -> Result<Self> {
        config.validate()?;
        if let Some(net) = &ocr {
            net.validate()?;
        }
        let h = config.site.homography;
        Ok(Self {
            config,
            classifier,
            ocr,
            background: None,
            homographies: vec![h],
            entries: Vec::new(),
            frames_seen: 0,
            frames_active: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Current world-to-image calibration.
    pub fn homography(&self) -> &Homography {
        self.homographies.last().expect("initial calibration")
    }

    fn refresh_calibration(&mut self, frame: &RgbImage) {
        let h = *self.homography();
        let corr: Vec<Correspondence> = self
            .config
            .markers
            .iter()
            .filter_map(|&m| {
                let predicted = h.apply(m).ok()?;
                locate_marker(frame, predicted, 15).map(|p| Correspondence::new(p, m))
            })
            .collect();
        if corr.len() < 4 {
            return;
        }
        if let Ok(new_h) = estimate_homography(&corr) {
            if new_h != h {
                self.homographies.push(new_h);
            }
        }
    }

    /// Sequential per-frame step. Returns whether the frame needs analysis.
    /// The first frame seeds the background and is always analyzed.
    pub fn observe(&mut self, frame: usize, rgb: &RgbImage, gray: &GrayImage) -> Result<bool> {
        self.frames_seen += 1;
        if let Some(n) = self.config.homography_refresh_every_n_frames {
            if frame.is_multiple_of(n) {
                self.refresh_calibration(rgb);
            }
        }
        let active = match &mut self.background {
            None => {
                self.background = Some(BackgroundModel::new(
                    gray,
                    self.config.detection.background_alpha,
                    self.config.detection.diff_threshold,
                )?);
                true
            }
            Some(bg) => is_active_frame(bg, gray)?,
        };
        if active {
            self.frames_active += 1;
        }
        Ok(active)
    }

    /// Detects and reads plates in one frame; no state is touched.
    pub fn analyze(&self, frame: usize, rgb: &RgbImage, gray: &GrayImage) -> Result<FrameAnalysis> {
        let dets = detect_plates(rgb, gray, &self.config.detection, self.classifier.as_ref())?;
        let mut analysis = FrameAnalysis::default();
        for d in dets {
            let reading = self.ocr.as_ref().and_then(|net| read_plate(&d.crop.patch, net).ok());
            analysis.readings.push(reading);
            analysis.detections.push(DetectionRecord {
                frame,
                corner: d.corner,
                edge: d.edge,
                rect: d.rect,
                score: d.score,
                track_id: None,
            });
        }
        Ok(analysis)
    }

    /// Records a frame's results. Frames must arrive in increasing order;
    /// inactive frames should be ingested with an empty analysis.
    pub fn ingest(&mut self, frame: usize, analysis: FrameAnalysis) -> Result<()> {
        if self.entries.last().is_some_and(|e| e.frame >= frame) {
            return Err(Error::InvalidParameter(format!("frame {frame} out of order")));
        }
        self.entries.push(FrameEntry {
            frame,
            homography: self.homographies.len() - 1,
            analysis,
        });
        Ok(())
    }

    /// Observe, analyze if active, and ingest.
    pub fn process(&mut self, frame: usize, rgb: &RgbImage) -> Result<()> {
        let gray = rgb.to_gray();
        let analysis = if self.observe(frame, rgb, &gray)? {
            self.analyze(frame, rgb, &gray)?
        } else {
            FrameAnalysis::default()
        };
        self.ingest(frame, analysis)
    }

    /// Links detections into tracks and estimates each track's speed.
    pub fn finish(self) -> PipelineReport {
        let fps = self.config.site.fps;
        let observations: Vec<FrameObservations> = self
            .entries
            .iter()
            .map(|e| FrameObservations {
                frame: e.frame,
                timestamp: e.frame as f64 / fps,
                observations: e
                    .analysis
                    .detections
                    .iter()
                    .map(|d| Observation {
                        corner: d.corner,
                        edge: d.edge,
                    })
                    .collect(),
            })
            .collect();
        let tracks = associate_tracks(&observations, &self.config.detection.tracker);

        let mut detections: Vec<Vec<DetectionRecord>> =
            self.entries.iter().map(|e| e.analysis.detections.clone()).collect();
        let mut reports = Vec::new();
        let mut next_id = 0;
        for t in tracks {
            if t.sequence.len() < self.config.min_track_frames.max(1) {
                continue;
            }
            let id = next_id;
            next_id += 1;
            let readings: Vec<PlateReading> = t
                .members
                .iter()
                .filter_map(|&(pos, oi)| self.entries[pos].analysis.readings[oi].clone())
                .collect();
            for &(pos, oi) in &t.members {
                detections[pos][oi].track_id = Some(id);
            }
            let text = vote_plate_text(&readings);
            let mut flags = Vec::new();
            if text.is_none() {
                flags.push("unknown_plate".to_string());
            }
            let first = t.members.first().map_or(0, |&(pos, _)| pos);
            let homography = self.homographies[self.entries[first].homography];
            let mut sequence = t.sequence;
            sequence.track_id = id;
            sequence.plate_text = text.clone();
            let mut site = self.config.site.clone();
            site.homography = homography;
            let estimate = match estimate_speed(&sequence, &site) {
                Ok(e) => {
                    if !e.excluded_frames.is_empty() {
                        flags.push(format!("excluded_frames={}", e.excluded_frames.len()));
                    }
                    if e.rho_m2.is_none() {
                        flags.push("no_edge".to_string());
                    }
                    Some(e)
                }
                Err(Error::InsufficientData(_)) => {
                    flags.push("insufficient_data".to_string());
                    None
                }
                Err(Error::ConfigurationError(_)) => {
                    flags.push("no_correction".to_string());
                    None
                }
                Err(e) => {
                    flags.push(format!("error:{e}"));
                    None
                }
            };
            reports.push(TrackReport {
                track_id: id,
                plate_text: text.unwrap_or_else(|| UNKNOWN_PLATE.to_string()),
                sequence,
                homography,
                estimate,
                flags,
                readings,
            });
        }
        PipelineReport {
            tracks: reports,
            detections: detections.into_iter().flatten().collect(),
            frames_seen: self.frames_seen,
            frames_active: self.frames_active,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{ground_truth_homography, render_frame, ObliqueScenario};
    use crate::speed::mps_to_kmh;

    fn site_for(spec: &crate::simulator::ScenarioSpec) -> SiteConfig {
        let mut site = SiteConfig::new(ground_truth_homography(spec).unwrap(), spec.fps);
        site.camera_height_m = Some(spec.camera_height());
        site.default_plate_height_m = Some(spec.plate_height_m);
        site
    }

    #[test]
    fn noiseless_scenario_end_to_end() {
        let spec = ObliqueScenario::default().build().unwrap();
        let mut p = Pipeline::new(PipelineConfig::new(site_for(&spec)), None, None).unwrap();
        for i in 0..spec.frame_count() {
            p.process(i, &render_frame(&spec, i).unwrap()).unwrap();
        }
        let r = p.finish();
        assert_eq!(r.tracks.len(), 1);
        let e = r.tracks[0].estimate.as_ref().unwrap();
        let truth = mps_to_kmh(spec.speed_mps);
        assert!((mps_to_kmh(e.v_m1.unwrap()) - truth).abs() < 0.005 * truth, "{e:?}");
        assert!((mps_to_kmh(e.v_m2.unwrap()) - truth).abs() < 0.005 * truth, "{e:?}");
        assert_eq!(r.tracks[0].plate_text, UNKNOWN_PLATE);
        assert!(r.frames_active < r.frames_seen);
    }

    #[test]
    fn empty_road_gives_no_tracks() {
        let spec = ObliqueScenario::default().build().unwrap();
        let mut p = Pipeline::new(PipelineConfig::new(site_for(&spec)), None, None).unwrap();
        for i in 0..spec.lead_in_frames {
            p.process(i, &render_frame(&spec, i).unwrap()).unwrap();
        }
        assert!(p.finish().tracks.is_empty());
    }

    #[test]
    fn out_of_order_frames_are_rejected() {
        let spec = ObliqueScenario::default().build().unwrap();
        let mut p = Pipeline::new(PipelineConfig::new(site_for(&spec)), None, None).unwrap();
        p.ingest(5, FrameAnalysis::default()).unwrap();
        assert!(p.ingest(5, FrameAnalysis::default()).is_err());
    }
}
