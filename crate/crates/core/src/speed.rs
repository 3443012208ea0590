//! Ground speed from a pixel track: road-plane projection, pairwise speeds,
//! median, and the plate-height correction.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Homography, Point2};
use crate::math;
use crate::{Error, Result};

/// Projected edge lengths at or below this are ignored.
pub const EPSILON_L: f64 = 1e-6;

/// One observation of a tracked plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub frame: usize,
    pub timestamp: f64,
    pub corner: Point2,
    /// Endpoints of the plate's top edge, when measured.
    pub edge: Option<[Point2; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSequence {
    pub track_id: usize,
    pub samples: Vec<TrackSample>,
    pub plate_text: Option<String>,
}

impl TrackSequence {
    pub fn new(track_id: usize, samples: Vec<TrackSample>) -> Self {
        Self {
            track_id,
            samples,
            plate_text: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::insufficient("a track needs at least two frames"));
        }
        for w in self.samples.windows(2) {
            if !(w[1].timestamp > w[0].timestamp) {
                return Err(Error::InvalidParameter(
                    "track timestamps must increase strictly".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Which frame pairs contribute speeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Every unordered pair.
    #[default]
    AllPairs,
    /// Only neighbors in time.
    Consecutive,
}

/// Which part of the projected top edge is compared with the standard
/// plate length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMeasure {
    /// Component across the direction of travel. For a level plate facing
    /// the direction of travel this is the full length; for a plate
    /// mounted with a roll it drops the along-road stretch that the height
    /// difference between the two ends produces.
    #[default]
    AcrossTrack,
    /// Full road-plane length of the projected edge.
    Full,
}

fn default_plate_length() -> f64 {
    0.52
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteConfig {
    #[serde(rename = "H_world_to_image")]
    pub homography: Homography,
    #[serde(default)]
    pub camera_height_m: Option<f64>,
    #[serde(default = "default_plate_length")]
    pub plate_standard_length_m: f64,
    /// Known plate mounting heights by plate text.
    #[serde(default)]
    pub plate_height_db: BTreeMap<String, f64>,
    /// Height used when the plate text is not in the database.
    #[serde(default)]
    pub default_plate_height_m: Option<f64>,
    pub fps: f64,
    #[serde(default)]
    pub pair_mode: PairMode,
    #[serde(default)]
    pub edge_measure: EdgeMeasure,
}

impl SiteConfig {
    pub fn new(homography: Homography, fps: f64) -> Self {
        Self {
            homography,
            camera_height_m: None,
            plate_standard_length_m: default_plate_length(),
            plate_height_db: BTreeMap::new(),
            default_plate_height_m: None,
            fps,
            pair_mode: PairMode::AllPairs,
            edge_measure: EdgeMeasure::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.plate_standard_length_m > 0.0) {
            return Err(Error::ConfigurationError("plate length must be positive".into()));
        }
        if !(self.fps > 0.0) {
            return Err(Error::ConfigurationError("fps must be positive".into()));
        }
        if let Some(hc) = self.camera_height_m {
            if !(hc > 0.0) {
                return Err(Error::ConfigurationError("camera height must be positive".into()));
            }
            let heights = self.plate_height_db.values().chain(self.default_plate_height_m.iter());
            for &h in heights {
                if !(0.0..hc).contains(&h) {
                    return Err(Error::ConfigurationError(alloc::format!(
                        "plate height {h} outside [0, {hc})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Mounting height for a plate, from the database or the site default.
    pub fn plate_height(&self, plate_text: Option<&str>) -> Option<f64> {
        plate_text
            .and_then(|t| self.plate_height_db.get(t).copied())
            .or(self.default_plate_height_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub s_projected: f64,
    pub rho_m1: Option<f64>,
    pub rho_m2: Option<f64>,
    pub v_m1: Option<f64>,
    pub v_m2: Option<f64>,
    pub n_pairs: usize,
    pub n_frames: usize,
    pub plate_text: Option<String>,
    /// Frames dropped because they mapped to infinity.
    pub excluded_frames: Vec<usize>,
}

pub fn mps_to_kmh(v: f64) -> f64 {
    v * 3.6
}

pub fn kmh_to_mps(v: f64) -> f64 {
    v / 3.6
}

/// Maps every sample's corner to the road plane, dropping (and listing)
/// frames at infinity.
fn project_corners(track: &TrackSequence, to_road: &Homography) -> (Vec<(f64, Point2)>, Vec<usize>) {
    let mut pts = Vec::with_capacity(track.samples.len());
    let mut excluded = Vec::new();
    for s in &track.samples {
        match to_road.apply(s.corner) {
            Ok(p) => pts.push((s.timestamp, p)),
            Err(_) => excluded.push(s.frame),
        }
    }
    (pts, excluded)
}

fn speeds_between(pts: &[(f64, Point2)], mode: PairMode) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..pts.len() {
        let js = match mode {
            PairMode::AllPairs => (i + 1)..pts.len(),
            PairMode::Consecutive => (i + 1)..(i + 2).min(pts.len()),
        };
        for j in js {
            let (ti, pi) = pts[i];
            let (tj, pj) = pts[j];
            out.push(pi.distance(&pj) / (tj - ti).abs());
        }
    }
    out
}

/// Road-plane speed for every unordered pair of frames (or neighbors only,
/// per `config.pair_mode`).
pub fn pairwise_projected_speeds(track: &TrackSequence, h: &Homography, config: &SiteConfig) -> Result<Vec<f64>> {
    Ok(pairwise_with_exclusions(track, h, config.pair_mode)?.0)
}

fn pairwise_with_exclusions(track: &TrackSequence, h: &Homography, mode: PairMode) -> Result<(Vec<f64>, Vec<usize>)> {
    if track.samples.len() < 2 {
        return Err(Error::insufficient("a track needs at least two frames"));
    }
    let to_road = h.invert()?;
    let (mut pts, excluded) = project_corners(track, &to_road);
    if pts.len() < 2 {
        return Err(Error::insufficient("fewer than two frames project onto the road"));
    }
    // Pair order does not matter, but consecutive mode needs time order.
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.windows(2).any(|w| w[1].0 == w[0].0) {
        return Err(Error::InvalidParameter("duplicate timestamps in track".into()));
    }
    Ok((speeds_between(&pts, mode), excluded))
}

/// Median; an even count averages the two middle values.
pub fn robust_median(values: &[f64]) -> Result<f64> {
    math::median(values).ok_or_else(|| Error::insufficient("median of an empty set"))
}

/// Correction factor from camera height and plate height.
pub fn rho_from_height(camera_height: f64, h: f64) -> Result<f64> {
    if !(camera_height > 0.0) {
        return Err(Error::InvalidGeometry("camera height must be positive".into()));
    }
    if !(0.0..camera_height).contains(&h) {
        return Err(Error::InvalidGeometry(alloc::format!(
            "plate height {h} outside [0, {camera_height})"
        )));
    }
    Ok((camera_height - h) / camera_height)
}

/// Correction factor from the foreshortening of the plate's top edge: the
/// median over frames of `l_standard / L`, where `L` is the road-plane
/// length of the projected edge.
pub fn rho_from_plate_length(track: &TrackSequence, h: &Homography, l_standard: f64) -> Result<f64> {
    rho_from_edges(track, h, l_standard, |e| math::hypot(e.x, e.y))
}

/// As [`rho_from_plate_length`], with `L` the component of the projected
/// edge perpendicular to the unit road-plane `direction` of travel.
pub fn rho_from_plate_length_across_track(
    track: &TrackSequence,
    h: &Homography,
    l_standard: f64,
    direction: Point2,
) -> Result<f64> {
    rho_from_edges(track, h, l_standard, |e| (direction.x * e.y - direction.y * e.x).abs())
}

fn rho_from_edges(
    track: &TrackSequence,
    h: &Homography,
    l_standard: f64,
    length: impl Fn(Point2) -> f64,
) -> Result<f64> {
    if !(l_standard > 0.0) {
        return Err(Error::InvalidParameter("plate length must be positive".into()));
    }
    let to_road = h.invert()?;
    let ratios: Vec<f64> = track
        .samples
        .iter()
        .filter_map(|s| {
            let [a, b] = s.edge?;
            let pa = to_road.apply(a).ok()?;
            let pb = to_road.apply(b).ok()?;
            let l = length(pb - pa);
            (l.is_finite() && l > EPSILON_L).then(|| l_standard / l)
        })
        .collect();
    robust_median(&ratios).map_err(|_| Error::insufficient("no frame has a usable plate edge"))
}

/// Unit direction of travel on the road plane: the principal axis of the
/// projected corner positions. `None` when the corner does not move.
pub fn travel_direction(track: &TrackSequence, h: &Homography) -> Result<Option<Point2>> {
    let (pts, _) = project_corners(track, &h.invert()?);
    if pts.len() < 2 {
        return Ok(None);
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(x, y), (_, p)| (x + p.x / n, y + p.y / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (_, p) in &pts {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx + syy > 1e-12 * n) {
        return Ok(None);
    }
    let angle = 0.5 * math::atan2(2.0 * sxy, sxx - syy);
    Ok(Some(Point2::new(math::cos(angle), math::sin(angle))))
}

/// Median projected speed corrected by each available method.
pub fn estimate_speed(track: &TrackSequence, config: &SiteConfig) -> Result<SpeedEstimate> {
    config.validate()?;
    let (speeds, excluded) = pairwise_with_exclusions(track, &config.homography, config.pair_mode)?;
    let s = robust_median(&speeds)?;

    let height = config.plate_height(track.plate_text.as_deref());
    let rho_m1 = match (config.camera_height_m, height) {
        (Some(hc), Some(h)) => Some(rho_from_height(hc, h)?),
        _ => None,
    };
    let has_edges = track.samples.iter().any(|s| s.edge.is_some());
    let rho_m2 = if has_edges {
        let direction = match config.edge_measure {
            EdgeMeasure::AcrossTrack => travel_direction(track, &config.homography)?,
            EdgeMeasure::Full => None,
        };
        let l = config.plate_standard_length_m;
        let rho = match direction {
            Some(d) => rho_from_plate_length_across_track(track, &config.homography, l, d),
            None => rho_from_plate_length(track, &config.homography, l),
        };
        match rho {
            Ok(r) => Some(r),
            Err(Error::InsufficientData(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    if rho_m1.is_none() && rho_m2.is_none() {
        return Err(Error::ConfigurationError(
            "neither camera and plate heights nor plate edges are available".into(),
        ));
    }
    Ok(SpeedEstimate {
        s_projected: s,
        rho_m1,
        rho_m2,
        v_m1: rho_m1.map(|r| r * s),
        v_m2: rho_m2.map(|r| r * s),
        n_pairs: speeds.len(),
        n_frames: track.samples.len(),
        plate_text: track.plate_text.clone(),
        excluded_frames: excluded,
    })
}
