use alloc::format;
use alloc::vec::Vec;

use crate::raster::GrayImage;
use crate::{Error, Result};

/// Greylevel difference above which a pixel counts as changed.
pub const DIFF_LEVEL: f64 = 25.0;

/// Running-average background used to skip frames with nothing in them.
#[derive(Debug, Clone)]
pub struct BackgroundModel {
    width: usize,
    height: usize,
    reference: Vec<f32>,
    pub alpha: f64,
    pub diff_threshold: f64,
}

impl BackgroundModel {
    pub fn new(reference: &GrayImage, alpha: f64, diff_threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&diff_threshold) {
            return Err(Error::InvalidParameter(
                "alpha and diff_threshold must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            width: reference.width(),
            height: reference.height(),
            reference: reference.as_raw().iter().map(|&v| v as f32).collect(),
            alpha,
            diff_threshold,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn reference(&self) -> GrayImage {
        let data = self.reference.iter().map(|&v| crate::math::to_u8(v as f64)).collect();
        GrayImage::from_raw(self.width, self.height, data).expect("reference buffer size")
    }

    /// Fraction of pixels whose greylevel differs from the reference by more
    /// than [`DIFF_LEVEL`].
    pub fn changed_fraction(&self, frame: &GrayImage) -> Result<f64> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(Error::shape(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", frame.width(), frame.height()),
            ));
        }
        let changed = frame
            .as_raw()
            .iter()
            .zip(&self.reference)
            .filter(|(&f, &r)| (f as f64 - r as f64).abs() > DIFF_LEVEL)
            .count();
        Ok(changed as f64 / (self.width * self.height) as f64)
    }
}

/// Reports whether `frame` differs enough from the background to be worth
/// processing. Inactive frames are blended into the reference.
pub fn is_active_frame(model: &mut BackgroundModel, frame: &GrayImage) -> Result<bool> {
    let active = model.changed_fraction(frame)? >= model.diff_threshold;
    if !active {
        let a = model.alpha as f32;
        for (r, &f) in model.reference.iter_mut().zip(frame.as_raw()) {
            *r = (1.0 - a) * *r + a * f as f32;
        }
    }
    Ok(active)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_frame_is_inactive() {
        let img = GrayImage::new(8, 8, 90);
        let mut m = BackgroundModel::new(&img, 0.1, 0.01).unwrap();
        assert!(!is_active_frame(&mut m, &img).unwrap());
    }

    #[test]
    fn full_change_is_active_at_any_threshold() {
        let black = GrayImage::new(8, 8, 0);
        let white = GrayImage::new(8, 8, 255);
        for thr in [0.0, 0.5, 1.0] {
            let mut m = BackgroundModel::new(&black, 0.1, thr).unwrap();
            assert!(is_active_frame(&mut m, &white).unwrap());
        }
    }

    #[test]
    fn reference_updates_only_when_inactive() {
        let base = GrayImage::new(4, 4, 100);
        let mut m = BackgroundModel::new(&base, 0.5, 0.5).unwrap();
        let slight = GrayImage::new(4, 4, 110);
        assert!(!is_active_frame(&mut m, &slight).unwrap());
        assert_eq!(m.reference().get(0, 0), 105);
        let big = GrayImage::new(4, 4, 250);
        assert!(is_active_frame(&mut m, &big).unwrap());
        assert_eq!(m.reference().get(0, 0), 105);
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let mut m = BackgroundModel::new(&GrayImage::new(4, 4, 0), 0.1, 0.1).unwrap();
        let err = is_active_frame(&mut m, &GrayImage::new(5, 4, 0)).unwrap_err();
        assert!(matches!(err, Error::ShapeError { .. }));
    }
}
