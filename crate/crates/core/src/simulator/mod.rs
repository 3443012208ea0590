//! Ground-truth generator: a pinhole camera above a flat road (z = 0) with
//! calibration markers and vehicles whose plates move at a known speed and
//! height.
//!
//! World frame: x and y span the road, z points up, meters throughout.
//! Camera frame: x right, y down, z along the optical axis.

mod builder;
pub mod corpus;
mod render;

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{Homography, Point2};
use crate::math::{self, Mat3, Vec3};
use crate::{Error, Result};

pub use builder::ObliqueScenario;
pub use render::{render_frame, render_plate_patch, PatchStyle, RenderStyle};

/// Pinhole camera with world→camera rotation `rotation` and translation
/// `translation`, so that `X_cam = R X_world + t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
    /// `[width, height]` in pixels.
    pub image_size: [usize; 2],
}

impl CameraModel {
    /// Camera at `center` whose optical axis passes through `target`, with
    /// no roll relative to the world z axis. The principal point sits at
    /// the image center.
    pub fn looking_at(center: Vec3, target: Vec3, fx: f64, fy: f64, image_size: [usize; 2]) -> Result<Self> {
        let forward = math::sub(target, center);
        if math::norm(forward) == 0.0 {
            return Err(Error::InvalidGeometry("camera target equals center".into()));
        }
        let z = math::normalize(forward);
        let side = math::cross(z, [0.0, 0.0, 1.0]);
        let x = if math::norm(side) < 1e-12 {
            [1.0, 0.0, 0.0]
        } else {
            math::normalize(side)
        };
        let y = math::cross(z, x);
        let rotation = [x, y, z];
        let translation = math::scale(math::mat_vec(&rotation, center), -1.0);
        let cam = Self {
            fx,
            fy,
            cx: (image_size[0] as f64 - 1.0) / 2.0,
            cy: (image_size[1] as f64 - 1.0) / 2.0,
            rotation,
            translation,
            image_size,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidGeometry("focal lengths must be positive".into()));
        }
        if self.image_size[0] == 0 || self.image_size[1] == 0 {
            return Err(Error::InvalidGeometry("empty image size".into()));
        }
        let r = &self.rotation;
        let rtr = math::mat_mul(&math::transpose(r), r);
        for (i, row) in rtr.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (v - expect).abs() > 1e-9 {
                    return Err(Error::InvalidGeometry("rotation is not orthonormal".into()));
                }
            }
        }
        if (math::det(r) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidGeometry("rotation has det != 1".into()));
        }
        if self.height() <= 0.0 {
            return Err(Error::InvalidGeometry("camera must be above the road".into()));
        }
        Ok(())
    }

    /// Optical center in world coordinates, `-Rᵀ t`.
    pub fn center(&self) -> Vec3 {
        math::scale(math::mat_vec(&math::transpose(&self.rotation), self.translation), -1.0)
    }

    /// Height of the optical center above the road.
    pub fn height(&self) -> f64 {
        self.center()[2]
    }

    pub fn intrinsics(&self) -> Mat3 {
        [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
    }

    pub fn to_camera(&self, world: Vec3) -> Vec3 {
        math::add(math::mat_vec(&self.rotation, world), self.translation)
    }

    /// Pinhole projection with Euclidean division.
    pub fn project(&self, world: Vec3) -> Result<Point2> {
        let c = self.to_camera(world);
        if c[2] <= 1e-9 {
            return Err(Error::BehindCamera);
        }
        Ok(Point2::new(
            self.fx * c[0] / c[2] + self.cx,
            self.fy * c[1] / c[2] + self.cy,
        ))
    }

    /// Homography from a plane parametrized as `origin + a·u + b·v` to the
    /// image.
    pub fn plane_homography(&self, origin: Vec3, u: Vec3, v: Vec3) -> Result<Homography> {
        let k = self.intrinsics();
        let ru = math::mat_vec(&self.rotation, u);
        let rv = math::mat_vec(&self.rotation, v);
        let ro = self.to_camera(origin);
        let cols = [ru, rv, ro];
        let mut m = [[0.0; 3]; 3];
        for (j, col) in cols.iter().enumerate() {
            let kc = math::mat_vec(&k, *col);
            for i in 0..3 {
                m[i][j] = kc[i];
            }
        }
        Homography::from_matrix(m)
    }

    pub fn in_image(&self, p: Point2, margin: f64) -> bool {
        p.x >= margin
            && p.y >= margin
            && p.x <= self.image_size[0] as f64 - 1.0 - margin
            && p.y <= self.image_size[1] as f64 - 1.0 - margin
    }
}

/// Projects a world point; free-function form of [`CameraModel::project`].
pub fn project(camera: &CameraModel, world: Vec3) -> Result<Point2> {
    camera.project(world)
}

/// Projected speed a plate point at height `h` shows on the road plane when
/// it truly moves at `v`, seen from a camera at height `camera_height`.
pub fn expected_projected_speed(v: f64, camera_height: f64, h: f64) -> Result<f64> {
    if !(camera_height > 0.0) || !(h >= 0.0) || h >= camera_height {
        return Err(Error::InvalidGeometry(alloc::format!(
            "need 0 <= h < H_c, got h={h}, H_c={camera_height}"
        )));
    }
    Ok(v * camera_height / (camera_height - h))
}

/// One vehicle moving in a straight line at constant speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    /// Height of the tracked (upper-right) plate corner above the road.
    pub plate_height_m: f64,
    /// Road position of the tracked corner at the first vehicle frame.
    pub path_start: Point2,
    pub path_direction: Point2,
    pub speed_mps: f64,
    #[serde(default)]
    pub plate_tilt_deg: f64,
    #[serde(default = "default_plate_text")]
    pub plate_text: String,
}

fn default_plate_text() -> String {
    "3159740".into()
}

fn default_plate_vertical() -> f64 {
    0.11
}

fn default_plate_color() -> [u8; 3] {
    [240, 210, 30]
}

fn default_lead_in() -> usize {
    3
}

/// Full description of a synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub camera: CameraModel,
    /// Surveyed calibration marker positions on the road.
    pub markers: Vec<Point2>,
    /// Height `h` of the tracked plate corner above the road.
    pub plate_height_m: f64,
    /// Standard plate length `l` (its horizontal edge).
    pub plate_length_m: f64,
    #[serde(default = "default_plate_vertical")]
    pub plate_vertical_m: f64,
    /// Mounting roll of the plate within its own plane, about the tracked
    /// corner.
    #[serde(default)]
    pub plate_tilt_deg: f64,
    pub path_start: Point2,
    pub path_direction: Point2,
    pub speed_mps: f64,
    pub fps: f64,
    pub n_frames: usize,
    /// Empty-road frames rendered before the vehicle appears.
    #[serde(default = "default_lead_in")]
    pub lead_in_frames: usize,
    #[serde(default = "default_plate_color")]
    pub plate_color: [u8; 3],
    #[serde(default = "default_plate_text")]
    pub plate_text: String,
    /// Standard deviation of the Gaussian corner-localization noise (px).
    #[serde(default)]
    pub noise_px: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub extra_vehicles: Vec<VehicleSpec>,
    #[serde(default)]
    pub style: RenderStyle,
}

/// Plate corners of one vehicle at one instant, in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateGeometry {
    pub upper_left: Vec3,
    pub upper_right: Vec3,
    pub lower_right: Vec3,
    pub lower_left: Vec3,
}

impl PlateGeometry {
    pub fn corners(&self) -> [Vec3; 4] {
        [self.upper_left, self.upper_right, self.lower_right, self.lower_left]
    }

    /// World point at normalized plate coordinates `(a, b)`; `a` runs left
    /// to right along the top edge, `b` top to bottom.
    pub fn at(&self, a: f64, b: f64) -> Vec3 {
        let along = math::sub(self.upper_right, self.upper_left);
        let down = math::sub(self.lower_left, self.upper_left);
        math::add(self.upper_left, math::add(math::scale(along, a), math::scale(down, b)))
    }
}

/// Per-frame ground truth for the tracked corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackFrame {
    pub frame: usize,
    pub timestamp: f64,
    pub world: Vec3,
    pub pixel: Point2,
    /// Pixel endpoints (left, right) of the plate's top edge.
    pub edge: [Point2; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTrack {
    pub frames: Vec<TrackFrame>,
    pub truncated: bool,
}

impl ScenarioSpec {
    pub fn vehicles(&self) -> Vec<VehicleSpec> {
        let mut out = Vec::with_capacity(1 + self.extra_vehicles.len());
        out.push(VehicleSpec {
            plate_height_m: self.plate_height_m,
            path_start: self.path_start,
            path_direction: self.path_direction,
            speed_mps: self.speed_mps,
            plate_tilt_deg: self.plate_tilt_deg,
            plate_text: self.plate_text.clone(),
        });
        out.extend(self.extra_vehicles.iter().cloned());
        out
    }

    pub fn frame_count(&self) -> usize {
        self.lead_in_frames + self.n_frames
    }

    pub fn camera_height(&self) -> f64 {
        self.camera.height()
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        let hc = self.camera_height();
        if !(self.plate_length_m > 0.0) || !(self.plate_vertical_m > 0.0) {
            return Err(Error::InvalidGeometry("plate dimensions must be positive".into()));
        }
        if !(self.fps > 0.0) {
            return Err(Error::InvalidGeometry("fps must be positive".into()));
        }
        for v in self.vehicles() {
            if !(v.plate_height_m >= 0.0) || v.plate_height_m >= hc {
                return Err(Error::InvalidGeometry(alloc::format!(
                    "plate height {} outside [0, {hc})",
                    v.plate_height_m
                )));
            }
            if !(v.speed_mps >= 0.0) {
                return Err(Error::InvalidGeometry("speed must be non-negative".into()));
            }
            let d = v.path_direction;
            if !(math::hypot(d.x, d.y) > 0.0) {
                return Err(Error::InvalidGeometry("path direction must be non-zero".into()));
            }
        }
        Ok(())
    }

    /// Tracked-corner world position of `vehicle` at vehicle frame `k`.
    pub fn corner_position(&self, vehicle: &VehicleSpec, k: usize) -> Vec3 {
        let d = vehicle.path_direction;
        let n = math::hypot(d.x, d.y);
        let step = vehicle.speed_mps * k as f64 / self.fps;
        [
            vehicle.path_start.x + d.x / n * step,
            vehicle.path_start.y + d.y / n * step,
            vehicle.plate_height_m,
        ]
    }

    /// Plate rectangle at vehicle frame `k`. The plate stands perpendicular
    /// to the road, facing along (or against) the direction of travel,
    /// whichever side the camera is on.
    pub fn plate_geometry(&self, vehicle: &VehicleSpec, k: usize) -> PlateGeometry {
        let ur = self.corner_position(vehicle, k);
        let d = vehicle.path_direction;
        let n = math::hypot(d.x, d.y);
        let mut normal = [d.x / n, d.y / n, 0.0];
        let c = self.camera.center();
        if math::dot(normal, math::sub(c, ur)) < 0.0 {
            normal = math::scale(normal, -1.0);
        }
        // Right-hand side of a viewer looking at the plate face.
        let right = [-normal[1], normal[0], 0.0];
        let up = [0.0, 0.0, 1.0];
        let tilt = math::to_radians(vehicle.plate_tilt_deg);
        let (s, co) = (math::sin(tilt), math::cos(tilt));
        let along = math::add(math::scale(right, co), math::scale(up, s));
        let plate_up = math::add(math::scale(right, -s), math::scale(up, co));
        let ul = math::sub(ur, math::scale(along, self.plate_length_m));
        let drop = math::scale(plate_up, self.plate_vertical_m);
        PlateGeometry {
            upper_left: ul,
            upper_right: ur,
            lower_right: math::sub(ur, drop),
            lower_left: math::sub(ul, drop),
        }
    }

    fn vehicle_track(&self, vehicle: &VehicleSpec, seed: u64) -> Result<SyntheticTrack> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = if self.noise_px > 0.0 {
            Some(
                Normal::new(0.0, self.noise_px)
                    .map_err(|_| Error::InvalidParameter("noise_px must be finite".into()))?,
            )
        } else {
            None
        };
        let mut jitter = |p: Point2| match &noise {
            Some(n) => Point2::new(p.x + n.sample(&mut rng), p.y + n.sample(&mut rng)),
            None => p,
        };
        let mut frames = Vec::with_capacity(self.n_frames);
        let mut truncated = false;
        for k in 0..self.n_frames {
            let plate = self.plate_geometry(vehicle, k);
            let corner = match self.camera.project(plate.upper_right) {
                Ok(p) if self.camera.in_image(p, 0.0) => p,
                _ => {
                    truncated = true;
                    break;
                }
            };
            let left = self.camera.project(plate.upper_left)?;
            let pixel = jitter(corner);
            let left = jitter(left);
            let frame = self.lead_in_frames + k;
            frames.push(TrackFrame {
                frame,
                timestamp: frame as f64 / self.fps,
                world: plate.upper_right,
                pixel,
                edge: [left, pixel],
            });
        }
        Ok(SyntheticTrack { frames, truncated })
    }

    /// Track of the primary vehicle, keeping the frames generated before
    /// the corner left the image.
    pub fn generate_track_lossy(&self) -> Result<SyntheticTrack> {
        let v = self.vehicles().remove(0);
        self.vehicle_track(&v, self.seed)
    }

    /// Track of vehicle `index` (0 is the primary vehicle).
    pub fn generate_vehicle_track(&self, index: usize) -> Result<SyntheticTrack> {
        let v = self
            .vehicles()
            .get(index)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("no vehicle {index}")))?;
        self.vehicle_track(&v, self.seed.wrapping_add(index as u64))
    }
}

/// Analytic track of the primary vehicle.
///
/// Fails with `TrackTruncated` when the corner leaves the image; use
/// [`ScenarioSpec::generate_track_lossy`] to keep the partial track.
pub fn generate_track(spec: &ScenarioSpec) -> Result<SyntheticTrack> {
    let track = spec.generate_track_lossy()?;
    if track.truncated {
        return Err(Error::TrackTruncated {
            generated: track.frames.len(),
        });
    }
    Ok(track)
}

/// Road-plane (z = 0) restriction of the camera: `K [r1 r2 t]`.
pub fn ground_truth_homography(spec: &ScenarioSpec) -> Result<Homography> {
    camera_road_homography(&spec.camera)
}

pub fn camera_road_homography(camera: &CameraModel) -> Result<Homography> {
    if camera.height().abs() < 1e-12 {
        return Err(Error::degenerate("optical center lies on the road plane"));
    }
    camera
        .plane_homography([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
        .map_err(|_| Error::degenerate("camera views the road plane edge-on"))
}
