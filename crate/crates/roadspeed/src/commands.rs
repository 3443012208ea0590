//! The four subcommands as library functions. Each writes its files and
//! returns a summary; printing is left to the binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use roadspeed_core::detection::{
    equalize, evaluate, train_plate_classifier, LabeledCrop, LinearClassifier, SvmParams, CROP_COLS, CROP_ROWS,
};
use roadspeed_core::font::DIGITS;
use roadspeed_core::geometry::{estimate_homography, reprojection_errors, rms, Correspondence, Point2};
use roadspeed_core::ocr::{argmax, mlp_forward, mlp_train, GlyphBox, Mlp, TrainParams, GLYPH_COLS, GLYPH_ROWS};
use roadspeed_core::pipeline::Pipeline;
use roadspeed_core::simulator::corpus::{glyph_corpus, plate_crop_corpus, GlyphCorpusStyle};
use roadspeed_core::simulator::{ground_truth_homography, render_frame, ObliqueScenario, ScenarioSpec};
use roadspeed_core::speed::mps_to_kmh;
use roadspeed_core::{Error as CoreError, GrayImage, Homography};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::failure::{Failure, Result};
use crate::formats::{
    read_json, write_csv, write_json, Calibration, CalibrationInput, DetectionRow, MarkerPair, MarkerResidual,
    ReportRow, TrackRow, DETECTIONS_HEADER, REPORT_HEADER, RESIDUAL_WARNING_PX, TRACK_HEADER,
};
use crate::imageio::{collect_frames, read_gray, read_rgb, write_gray_png, write_png, write_ppm};

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Failure::io(path, e))
}

/// Estimates the road-to-image homography from surveyed markers and
/// writes it with per-marker residuals.
pub fn calibrate(markers_path: &Path, out: &Path) -> Result<Calibration> {
    let input: CalibrationInput = read_json(markers_path)?;
    if input.markers.len() < 4 {
        return Err(Failure::new(
            "insufficient correspondences",
            format!("need at least 4 markers, got {}", input.markers.len()),
        ));
    }
    let corr: Vec<Correspondence> = input
        .markers
        .iter()
        .map(|m| Correspondence::new(Point2::new(m.image[0], m.image[1]), Point2::new(m.world[0], m.world[1])))
        .collect();
    let h = estimate_homography(&corr).map_err(|e| match e {
        CoreError::InsufficientData(m) => Failure::new("insufficient correspondences", m),
        other => other.into(),
    })?;
    let residuals = reprojection_errors(&h, &corr)?;
    let rms_px = rms(&residuals);
    let cal = Calibration {
        homography: h,
        camera_height_m: input.camera_height_m,
        markers: input
            .markers
            .iter()
            .zip(&residuals)
            .map(|(m, &r)| MarkerResidual {
                image: m.image,
                world: m.world,
                residual_px: r,
            })
            .collect(),
        rms_px,
        warning: rms_px > RESIDUAL_WARNING_PX,
    };
    write_json(out, &cal)?;
    Ok(cal)
}

/// Scenario file: either a full scene description (it has a `camera`) or
/// the parameters of an oblique roadside setup.
pub fn load_scenario(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioSpec> {
    let Some(path) = path else {
        let mut sc = ObliqueScenario::default();
        sc.seed = seed.unwrap_or(sc.seed);
        return Ok(sc.build()?);
    };
    let value: serde_json::Value = read_json(path)?;
    let mut spec = if value.get("camera").is_some() {
        serde_json::from_value::<ScenarioSpec>(value).map_err(|e| Failure::invalid_input(path, e))?
    } else {
        let mut sc: ObliqueScenario = serde_json::from_value(value).map_err(|e| Failure::invalid_input(path, e))?;
        sc.seed = seed.unwrap_or(sc.seed);
        sc.build()?
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTruth {
    pub plate_text: String,
    pub speed_mps: f64,
    pub speed_kmh: f64,
    pub plate_height_m: f64,
    /// `(H_c - h) / H_c`.
    pub rho: f64,
    pub projected_speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub speed_mps: f64,
    pub speed_kmh: f64,
    pub plate_text: String,
    pub camera_height_m: f64,
    pub plate_height_m: f64,
    pub plate_length_m: f64,
    pub fps: f64,
    /// Frames written, empty lead-in included.
    pub frame_count: usize,
    pub lead_in_frames: usize,
    /// Rows in `track.csv`.
    pub track_frames: usize,
    /// The tracked corner left the image before the last frame.
    pub truncated: bool,
    #[serde(rename = "H_world_to_image")]
    pub homography: Homography,
    pub vehicles: Vec<VehicleTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub frames: usize,
    pub track_rows: usize,
    pub truth: GroundTruth,
    pub warnings: Vec<String>,
}

/// Renders a scenario into `out`: `frames/frame_NNNNN.ppm` (and `.png`
/// when asked), `track.csv`, `ground_truth.json`, `scenario.json`, the
/// marker file for `calibrate`, a plate height map and a `run.json` that
/// wires them together.
pub fn simulate(spec: &ScenarioSpec, out: &Path, png: bool) -> Result<SimulationSummary> {
    let frames_dir = out.join("frames");
    create_dir(&frames_dir)?;
    let mut warnings = Vec::new();

    let n = spec.frame_count();
    for i in 0..n {
        let img = render_frame(spec, i)?;
        write_ppm(&frames_dir.join(format!("frame_{i:05}.ppm")), &img)?;
        if png {
            write_png(&frames_dir.join(format!("frame_{i:05}.png")), &img)?;
        }
    }

    let track = spec.generate_track_lossy()?;
    if track.truncated {
        warnings.push(format!("track truncated after {} frames", track.frames.len()));
    }
    let rows = TrackRow::rows(&track);
    write_csv(&out.join("track.csv"), &TRACK_HEADER, &rows)?;

    let hc = spec.camera_height();
    let vehicles: Vec<VehicleTruth> = spec
        .vehicles()
        .iter()
        .map(|v| {
            let rho = (hc - v.plate_height_m) / hc;
            VehicleTruth {
                plate_text: v.plate_text.clone(),
                speed_mps: v.speed_mps,
                speed_kmh: mps_to_kmh(v.speed_mps),
                plate_height_m: v.plate_height_m,
                rho,
                projected_speed_mps: v.speed_mps / rho,
            }
        })
        .collect();
    let truth = GroundTruth {
        speed_mps: spec.speed_mps,
        speed_kmh: mps_to_kmh(spec.speed_mps),
        plate_text: spec.plate_text.clone(),
        camera_height_m: hc,
        plate_height_m: spec.plate_height_m,
        plate_length_m: spec.plate_length_m,
        fps: spec.fps,
        frame_count: n,
        lead_in_frames: spec.lead_in_frames,
        track_frames: rows.len(),
        truncated: track.truncated,
        homography: ground_truth_homography(spec)?,
        vehicles,
    };
    write_json(&out.join("ground_truth.json"), &truth)?;
    write_json(&out.join("scenario.json"), spec)?;

    let markers = spec
        .markers
        .iter()
        .map(|m| {
            let p = spec.camera.project([m.x, m.y, 0.0])?;
            Ok(MarkerPair {
                image: [p.x, p.y],
                world: [m.x, m.y],
            })
        })
        .collect::<std::result::Result<Vec<_>, CoreError>>()?;
    write_json(
        &out.join("markers.json"),
        &CalibrationInput {
            markers,
            camera_height_m: Some(hc),
        },
    )?;
    let heights: BTreeMap<&str, f64> = truth
        .vehicles
        .iter()
        .map(|v| (v.plate_text.as_str(), v.plate_height_m))
        .collect();
    write_json(&out.join("plate_heights.json"), &heights)?;
    let run = RunConfig {
        calibration: Some("homography.json".into()),
        fps: spec.fps,
        plate_heights: Some("plate_heights.json".into()),
        frames: Some("frames".into()),
        ..RunConfig::default()
    };
    write_json(&out.join("run.json"), &run)?;

    Ok(SimulationSummary {
        frames: n,
        track_rows: rows.len(),
        truth,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    Plate,
    Glyph,
}

/// Label used for non-plate crops in plate corpora.
pub const NON_PLATE_LABEL: &str = "other";
pub const PLATE_LABEL: &str = "plate";

/// Writes a labeled training corpus. Plate corpora hold `count` plate and
/// `count` non-plate crops (`plate_N.png`, `other_N.png`, 144x33 grey);
/// glyph corpora hold `count` digit bitmaps (`<digit>_N.png`, 12x16, dark
/// ink on white). Returns the number of files written.
pub fn simulate_corpus(kind: CorpusKind, count: usize, seed: u64, out: &Path) -> Result<usize> {
    create_dir(out)?;
    match kind {
        CorpusKind::Plate => {
            let crops = plate_crop_corpus(count, count, seed)?;
            let mut n = [0usize; 2];
            for (crop, is_plate) in &crops {
                let (label, k) = if *is_plate {
                    (PLATE_LABEL, 0)
                } else {
                    (NON_PLATE_LABEL, 1)
                };
                write_gray_png(&out.join(format!("{label}_{:05}.png", n[k])), &crop.patch)?;
                n[k] += 1;
            }
            Ok(crops.len())
        }
        CorpusKind::Glyph => {
            let glyphs = glyph_corpus(count, DIGITS, &GlyphCorpusStyle::default(), seed);
            for (i, (g, c)) in glyphs.iter().enumerate() {
                let ink: Vec<u8> = g.bitmap.iter().map(|&v| 255 - v).collect();
                let img = GrayImage::from_raw(GLYPH_COLS, GLYPH_ROWS, ink)?;
                write_gray_png(&out.join(format!("{c}_{i:05}.png")), &img)?;
            }
            Ok(glyphs.len())
        }
    }
}

/// Labeled images of a corpus directory in file-name order.
fn corpus_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| ["png", "ppm", "pgm", "pnm"].contains(&e.to_ascii_lowercase().as_str()));
        if !path.is_file() || !is_image {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let label = stem
            .rsplit_once('_')
            .map(|(l, _)| l.to_string())
            .ok_or_else(|| Failure::new("invalid corpus", format!("{} is not named <label>_<n>", path.display())))?;
        files.push((label, path));
    }
    if files.is_empty() {
        return Err(Failure::new("empty corpus", dir.display().to_string()));
    }
    files.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(files)
}

/// Every fifth sample in file-name order is held out for evaluation.
const HOLDOUT_EVERY: usize = 5;

fn split<T>(items: Vec<T>) -> (Vec<T>, Vec<T>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, x) in items.into_iter().enumerate() {
        if i % HOLDOUT_EVERY == HOLDOUT_EVERY - 1 {
            test.push(x);
        } else {
            train.push(x);
        }
    }
    (train, test)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateTrainingSummary {
    pub n_train: usize,
    pub n_test: usize,
    /// Held-out plates rejected by the classifier.
    pub miss_rate: f64,
    /// Held-out crops of either class misclassified.
    pub error_rate: f64,
}

/// Trains the plate/non-plate classifier on a directory of `plate_N` and
/// `other_N` crops and writes it as JSON.
pub fn train_plate(corpus: &Path, params: &SvmParams, out: &Path) -> Result<PlateTrainingSummary> {
    let mut crops = Vec::new();
    for (label, path) in corpus_files(corpus)? {
        let is_plate = match label.as_str() {
            PLATE_LABEL => true,
            NON_PLATE_LABEL => false,
            _ => {
                return Err(Failure::new(
                    "invalid corpus",
                    format!(
                        "{}: label must be `{PLATE_LABEL}` or `{NON_PLATE_LABEL}`",
                        path.display()
                    ),
                ))
            }
        };
        let img = read_gray(&path)?;
        if (img.width(), img.height()) != (CROP_COLS, CROP_ROWS) {
            return Err(Failure::new(
                "invalid corpus",
                format!("{}: crops must be {CROP_COLS}x{CROP_ROWS}", path.display()),
            ));
        }
        crops.push(LabeledCrop {
            features: equalize(&img),
            is_plate,
        });
    }
    for (want, name) in [(true, PLATE_LABEL), (false, NON_PLATE_LABEL)] {
        if !crops.iter().any(|c| c.is_plate == want) {
            return Err(Failure::new("missing class", name));
        }
    }
    let (train, test) = split(crops);
    let model = train_plate_classifier(&train, params)?;
    let (miss_rate, error_rate) = if test.is_empty() {
        (0.0, 0.0)
    } else {
        evaluate(&model, &test)?
    };
    write_json(out, &model)?;
    Ok(PlateTrainingSummary {
        n_train: train.len(),
        n_test: test.len(),
        miss_rate,
        error_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcrTrainingSummary {
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
}

/// Trains the character network on `<char>_N` glyph bitmaps (12x16, dark
/// ink on white) and writes it as JSON. Every character of `alphabet` must
/// occur in the corpus.
pub fn train_ocr(corpus: &Path, alphabet: &str, params: &TrainParams, out: &Path) -> Result<OcrTrainingSummary> {
    let mut samples = Vec::new();
    for (label, path) in corpus_files(corpus)? {
        let mut chars = label.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(Failure::new(
                "invalid corpus",
                format!("{}: label must be one character", path.display()),
            ));
        };
        let class = alphabet.chars().position(|a| a == c).ok_or_else(|| {
            Failure::new(
                "invalid corpus",
                format!("{}: `{c}` is not in the alphabet", path.display()),
            )
        })?;
        let img = read_gray(&path)?;
        if (img.width(), img.height()) != (GLYPH_COLS, GLYPH_ROWS) {
            return Err(Failure::new(
                "invalid corpus",
                format!("{}: glyphs must be {GLYPH_COLS}x{GLYPH_ROWS}", path.display()),
            ));
        }
        let glyph = GlyphBox {
            x0: 0,
            x1: GLYPH_COLS - 1,
            y0: 0,
            y1: GLYPH_ROWS - 1,
            bitmap: img.as_raw().iter().map(|&v| 255 - v).collect(),
        };
        samples.push((glyph.features(), class));
    }
    for (k, c) in alphabet.chars().enumerate() {
        if !samples.iter().any(|s| s.1 == k) {
            return Err(Failure::new("missing class", c.to_string()));
        }
    }
    let (train, test) = split(samples);
    let net = mlp_train(&train, alphabet, params)?;
    let mut correct = 0;
    for (x, class) in &test {
        if argmax(&mlp_forward(&net, x)?).0 == *class {
            correct += 1;
        }
    }
    let accuracy = if test.is_empty() {
        1.0
    } else {
        correct as f64 / test.len() as f64
    };
    write_json(out, &net)?;
    Ok(OcrTrainingSummary {
        n_train: train.len(),
        n_test: test.len(),
        accuracy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tracks: usize,
    pub frames_read: usize,
    pub frames_skipped: usize,
    pub frames_active: usize,
    pub warnings: Vec<String>,
}

/// Runs the full pipeline over a frame sequence and writes `report.csv`,
/// `detections.csv` and `debug/` (one JSON per track plus a summary).
/// `frames` overrides the configured frame directory when non-empty.
pub fn run(cfg: &RunConfig, frames: &[PathBuf], out: &Path) -> Result<RunSummary> {
    let pipeline_cfg = cfg.pipeline_config()?;
    let classifier: Option<LinearClassifier> = cfg.plate_model.as_deref().map(read_json).transpose()?;
    let ocr: Option<Mlp> = cfg.ocr_model.as_deref().map(read_json).transpose()?;

    let inputs: Vec<PathBuf> = if frames.is_empty() {
        cfg.frames.iter().cloned().collect()
    } else {
        frames.to_vec()
    };
    if inputs.is_empty() {
        return Err(Failure::new("missing frames", "no frames given and none configured"));
    }
    let files = collect_frames(&inputs)?;

    let mut pipeline = Pipeline::new(pipeline_cfg, classifier, ocr)?;
    let mut warnings = Vec::new();
    let mut skipped = 0;
    for f in &files {
        let result = read_rgb(&f.path).and_then(|img| Ok(pipeline.process(f.index, &img)?));
        if let Err(e) = result {
            warnings.push(format!("skipping frame {}: {e}", f.path.display()));
            skipped += 1;
        }
    }
    let report = pipeline.finish();

    create_dir(out)?;
    let rows: Vec<ReportRow> = report.tracks.iter().map(ReportRow::from).collect();
    write_csv(&out.join("report.csv"), &REPORT_HEADER, &rows)?;
    let dets: Vec<DetectionRow> = report.detections.iter().map(DetectionRow::from).collect();
    write_csv(&out.join("detections.csv"), &DETECTIONS_HEADER, &dets)?;

    let debug = out.join("debug");
    create_dir(&debug)?;
    for entry in fs::read_dir(&debug).map_err(|e| Failure::io(&debug, e))? {
        let p = entry.map_err(|e| Failure::io(&debug, e))?.path();
        let stale = p
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("track_") && n.ends_with(".json"));
        if stale {
            fs::remove_file(&p).map_err(|e| Failure::io(&p, e))?;
        }
    }
    for t in &report.tracks {
        write_json(&debug.join(format!("track_{:04}.json", t.track_id)), t)?;
    }
    let summary = RunSummary {
        tracks: report.tracks.len(),
        frames_read: files.len() - skipped,
        frames_skipped: skipped,
        frames_active: report.frames_active,
        warnings,
    };
    write_json(&debug.join("summary.json"), &summary)?;
    Ok(summary)
}
