use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{camera_road_homography, CameraModel, RenderStyle, ScenarioSpec};
use crate::geometry::Point2;
use crate::math;
use crate::{Error, Result};

/// Roadside camera on a pole above the lane, pitched down the road, with a
/// single vehicle approaching it. [`ObliqueScenario::build`] aims the camera
/// so the plate enters at the top of the frame and counts frames until the
/// plate would leave the bottom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObliqueScenario {
    pub camera_height_m: f64,
    pub plate_height_m: f64,
    pub speed_mps: f64,
    pub fps: f64,
    pub focal_px: f64,
    pub image_size: [usize; 2],
    /// Camera offset across the road relative to the lane center.
    pub camera_lateral_m: f64,
    pub yaw_deg: f64,
    pub lane_x_m: f64,
    pub plate_length_m: f64,
    pub plate_vertical_m: f64,
    pub plate_tilt_deg: f64,
    pub plate_text: String,
    /// Plate width in pixels where the track begins.
    pub min_plate_px: f64,
    pub max_frames: usize,
    pub lead_in_frames: usize,
    pub noise_px: f64,
    pub seed: u64,
    /// Distance kept between the plate and the image border.
    pub margin_px: f64,
}

impl Default for ObliqueScenario {
    fn default() -> Self {
        Self {
            camera_height_m: 6.0,
            plate_height_m: 0.5,
            speed_mps: 50.0 / 3.6,
            fps: 25.0,
            focal_px: 3200.0,
            image_size: [1280, 720],
            camera_lateral_m: 0.0,
            yaw_deg: 0.0,
            lane_x_m: 0.0,
            plate_length_m: 0.52,
            plate_vertical_m: 0.11,
            plate_tilt_deg: 0.0,
            plate_text: "3159740".into(),
            min_plate_px: 72.0,
            max_frames: 60,
            lead_in_frames: 3,
            noise_px: 0.0,
            seed: 0,
            margin_px: 12.0,
        }
    }
}

impl ObliqueScenario {
    pub fn build(&self) -> Result<ScenarioSpec> {
        let hc = self.camera_height_m;
        let h = self.plate_height_m;
        if !(hc > h) || !(h >= 0.0) {
            return Err(Error::InvalidGeometry("need 0 <= plate height < camera height".into()));
        }
        let f = self.focal_px;
        let [w, ht] = self.image_size;
        let cy = (ht as f64 - 1.0) / 2.0;

        let range = f * self.plate_length_m / self.min_plate_px;
        let rise = hc - h;
        let y_far = math::sqrt((range * range - rise * rise).max(1.0));
        let depression_far = math::atan(rise / y_far);
        let y_top = self.margin_px + 4.0;
        let pitch = depression_far + math::atan((cy - y_top) / f);

        let yaw = math::to_radians(self.yaw_deg);
        let center = [self.lane_x_m + self.camera_lateral_m, 0.0, hc];
        let forward = [
            math::cos(pitch) * math::sin(yaw),
            math::cos(pitch) * math::cos(yaw),
            -math::sin(pitch),
        ];
        let camera = CameraModel::looking_at(center, math::add(center, forward), f, f, self.image_size)?;

        let road_to_image = camera_road_homography(&camera)?;
        let image_to_road = road_to_image.invert()?;
        let markers = [(0.12, 0.25), (0.88, 0.25), (0.88, 0.9), (0.12, 0.9)]
            .iter()
            .map(|&(fx, fy)| {
                let p = image_to_road.apply(Point2::new(fx * (w as f64 - 1.0), fy * (ht as f64 - 1.0)))?;
                // Surveyed to the centimetre.
                Ok(Point2::new(
                    math::round(p.x * 100.0) / 100.0,
                    math::round(p.y * 100.0) / 100.0,
                ))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut spec = ScenarioSpec {
            camera,
            markers,
            plate_height_m: h,
            plate_length_m: self.plate_length_m,
            plate_vertical_m: self.plate_vertical_m,
            plate_tilt_deg: self.plate_tilt_deg,
            path_start: Point2::new(self.lane_x_m + self.plate_length_m / 2.0, y_far),
            path_direction: Point2::new(0.0, -1.0),
            speed_mps: self.speed_mps,
            fps: self.fps,
            n_frames: 0,
            lead_in_frames: self.lead_in_frames,
            plate_color: [240, 210, 30],
            plate_text: self.plate_text.clone(),
            noise_px: self.noise_px,
            seed: self.seed,
            extra_vehicles: Vec::new(),
            style: RenderStyle::default(),
        };

        let visible = |spec: &ScenarioSpec, k: usize| {
            spec.plate_geometry(&spec.vehicles()[0], k).corners().iter().all(|c| {
                spec.camera
                    .project(*c)
                    .map(|p| spec.camera.in_image(p, self.margin_px))
                    .unwrap_or(false)
            })
        };
        // A rolled plate can poke out of the top of the frame at the planned
        // start; begin further along the path once it is fully in view.
        let mut k0 = 0;
        while !visible(&spec, k0) && self.speed_mps > 0.0 && k0 < self.max_frames {
            k0 += 1;
        }
        spec.path_start = spec.path_start + spec.path_direction * (k0 as f64 * self.speed_mps / self.fps);

        let mut n = 0;
        while n < self.max_frames {
            if !visible(&spec, n) {
                break;
            }
            n += 1;
            if self.speed_mps == 0.0 {
                n = self.max_frames;
            }
        }
        if n < 2 {
            return Err(Error::InvalidGeometry("plate is not visible along the path".into()));
        }
        spec.n_frames = n;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_tracks_plate_across_frame() {
        let spec = ObliqueScenario::default().build().unwrap();
        assert!(spec.n_frames >= 20, "{}", spec.n_frames);
        assert!((spec.camera_height() - 6.0).abs() < 1e-12);
        for m in &spec.markers {
            let p = spec.camera.project([m.x, m.y, 0.0]).unwrap();
            assert!(spec.camera.in_image(p, 20.0));
        }
    }

    #[test]
    fn fast_high_camera_still_yields_a_track() {
        let spec = ObliqueScenario {
            camera_height_m: 8.0,
            plate_height_m: 0.3,
            speed_mps: 100.0 / 3.6,
            ..Default::default()
        }
        .build()
        .unwrap();
        assert!(spec.n_frames >= 5, "{}", spec.n_frames);
    }

    #[test]
    fn rolled_plate_starts_once_fully_visible() {
        for tilt in [-5.0, 5.0] {
            let spec = ObliqueScenario {
                plate_tilt_deg: tilt,
                ..Default::default()
            }
            .build()
            .unwrap();
            assert!(spec.n_frames >= 15, "{tilt}: {}", spec.n_frames);
            let track = spec.generate_track_lossy().unwrap();
            assert!(!track.truncated);
        }
    }
}
