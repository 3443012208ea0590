//! Raster files (PPM/PGM/PNG) and frame-sequence discovery.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};
use roadspeed_core::{GrayImage, RgbImage};

use crate::failure::{Failure, Result};

const FRAME_EXTENSIONS: [&str; 5] = ["ppm", "pnm", "png", "pgm", "pbm"];

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path)
        .map_err(|e| Failure::invalid_input(path, e))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(RgbImage::from_raw(w, h, img.into_raw())?)
}

pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path)
        .map_err(|e| Failure::invalid_input(path, e))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(GrayImage::from_raw(w, h, img.into_raw())?)
}

fn save(path: &Path, data: &[u8], w: usize, h: usize, color: ExtendedColorType, format: ImageFormat) -> Result<()> {
    image::save_buffer_with_format(path, data, w as u32, h as u32, color, format).map_err(|e| Failure::io(path, e))
}

/// Binary PPM (P6). The generic PNM writer would emit PAM (P7).
pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Failure::io(path, e))?;
    PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
        .write_image(
            img.as_raw(),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::Rgb8,
        )
        .map_err(|e| Failure::io(path, e))
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    save(
        path,
        img.as_raw(),
        img.width(),
        img.height(),
        ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
}

pub fn write_gray_png(path: &Path, img: &GrayImage) -> Result<()> {
    save(
        path,
        img.as_raw(),
        img.width(),
        img.height(),
        ExtendedColorType::L8,
        ImageFormat::Png,
    )
}

/// Last run of ASCII digits in the file stem, e.g. `frame_00042` -> 42.
pub fn frame_number(path: &Path) -> Option<usize> {
    let stem = path.file_stem()?.to_str()?;
    let end = stem.rfind(|c: char| c.is_ascii_digit())? + 1;
    let start = stem[..end].rfind(|c: char| !c.is_ascii_digit()).map_or(0, |i| i + 1);
    stem[start..end].parse().ok()
}

fn is_frame_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// A frame file together with its index in the sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameFile {
    pub index: usize,
    pub path: PathBuf,
}

/// Expands directories into their raster files and orders the result by
/// the number in each file name. When some name carries no number, all
/// frames are indexed by position in name order instead.
pub fn collect_frames(inputs: &[PathBuf]) -> Result<Vec<FrameFile>> {
    let mut paths = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = fs::read_dir(input).map_err(|e| Failure::io(input, e))?;
            for entry in entries {
                let p = entry.map_err(|e| Failure::io(input, e))?.path();
                if p.is_file() && is_frame_file(&p) {
                    paths.push(p);
                }
            }
        } else {
            paths.push(input.clone());
        }
    }
    let numbered: Option<Vec<usize>> = paths.iter().map(|p| frame_number(p)).collect();
    let mut frames: Vec<FrameFile> = match numbered {
        Some(nums) => nums
            .into_iter()
            .zip(paths)
            .map(|(index, path)| FrameFile { index, path })
            .collect(),
        None => {
            paths.sort();
            paths
                .into_iter()
                .enumerate()
                .map(|(index, path)| FrameFile { index, path })
                .collect()
        }
    };
    frames.sort_by(|a, b| a.index.cmp(&b.index).then_with(|| a.path.cmp(&b.path)));
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_numbers_come_from_the_last_digit_run() {
        assert_eq!(frame_number(Path::new("cam2/frame_00042.ppm")), Some(42));
        assert_eq!(frame_number(Path::new("7.png")), Some(7));
        assert_eq!(frame_number(Path::new("cam2_take3_010.png")), Some(10));
        assert_eq!(frame_number(Path::new("still.png")), None);
    }

    #[test]
    fn ppm_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = RgbImage::new(5, 3, [10, 20, 30]);
        img.put(4, 2, [255, 0, 7]);
        let p = dir.path().join("a.ppm");
        write_ppm(&p, &img).unwrap();
        assert!(fs::read(&p).unwrap().starts_with(b"P6"));
        assert_eq!(read_rgb(&p).unwrap(), img);
        let q = dir.path().join("a.png");
        write_png(&q, &img).unwrap();
        assert_eq!(read_rgb(&q).unwrap(), img);
    }

    #[test]
    fn frames_sort_numerically() {
        let dir = tempfile::tempdir().unwrap();
        for n in [10, 2, 1] {
            write_ppm(&dir.path().join(format!("f_{n}.ppm")), &RgbImage::new(2, 2, [0; 3])).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let idx: Vec<usize> = collect_frames(&[dir.path().to_path_buf()])
            .unwrap()
            .iter()
            .map(|f| f.index)
            .collect();
        assert_eq!(idx, [1, 2, 10]);
    }
}
