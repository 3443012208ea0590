use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hexcone HSV: hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
/// Achromatic pixels report hue 0.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = rgb.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return (0.0, s, v);
    }
    let h = if max == r {
        60.0 * ((g - b) / delta)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let h = if h < 0.0 { h + 360.0 } else { h };
    (if h >= 360.0 { h - 360.0 } else { h }, s, v)
}

/// Color window for plate pixels. `hue_lo > hue_hi` wraps through 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvThresholds {
    pub hue_lo: f64,
    pub hue_hi: f64,
    pub sat_lo: f64,
    pub val_lo: f64,
}

impl Default for HsvThresholds {
    fn default() -> Self {
        Self {
            hue_lo: 45.0,
            hue_hi: 75.0,
            sat_lo: 0.5,
            val_lo: 0.4,
        }
    }
}

impl HsvThresholds {
    pub fn validate(&self) -> Result<()> {
        let hue_ok = |h: f64| (0.0..360.0).contains(&h);
        if !hue_ok(self.hue_lo)
            || !hue_ok(self.hue_hi)
            || !(0.0..=1.0).contains(&self.sat_lo)
            || !(0.0..=1.0).contains(&self.val_lo)
        {
            return Err(Error::InvalidParameter(
                "hue bounds must lie in [0, 360), saturation and value in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn contains(&self, rgb: [u8; 3]) -> bool {
        // Cheap rejection of dark or grey pixels before the hue computation.
        let max = rgb[0].max(rgb[1]).max(rgb[2]) as f64;
        let min = rgb[0].min(rgb[1]).min(rgb[2]) as f64;
        if max < self.val_lo * 255.0 || max - min < self.sat_lo * max {
            return false;
        }
        let (h, s, v) = rgb_to_hsv(rgb);
        if s < self.sat_lo || v < self.val_lo {
            return false;
        }
        if self.hue_lo <= self.hue_hi {
            (self.hue_lo..=self.hue_hi).contains(&h)
        } else {
            h >= self.hue_lo || h <= self.hue_hi
        }
    }
}
