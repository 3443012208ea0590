//! Plate reading: character segmentation and a sigmoid multilayer
//! perceptron over fixed-size glyph bitmaps.

mod mlp;
mod segment;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::raster::GrayImage;
use crate::{Error, Result};

pub use mlp::{
    argmax, loss_and_gradients, mlp_forward, mlp_train, sigmoid, train_network, Gradients, Mlp, TrainParams,
};
pub use segment::{
    otsu_threshold, segment_glyphs, GlyphBox, GLYPH_COLS, GLYPH_LEN, GLYPH_ROWS, MIN_GLYPH_INK, VALLEY_FRACTION,
};

/// Text reported when a plate cannot be read.
pub const UNKNOWN_PLATE: &str = "UNKNOWN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateReading {
    pub text: String,
    /// Output activation of the chosen class, per character.
    pub confidences: Vec<f64>,
}

/// Classifies one glyph: `(character, confidence)`.
pub fn read_glyph(glyph: &GlyphBox, net: &Mlp) -> Result<(char, f64)> {
    let out = mlp_forward(net, &glyph.features())?;
    let (k, conf) = argmax(&out);
    let ch = net
        .alphabet
        .chars()
        .nth(k)
        .ok_or_else(|| Error::ConfigurationError("network has no alphabet".into()))?;
    Ok((ch, conf))
}

/// Reads every character of a plate patch in order.
pub fn read_plate(crop: &GrayImage, net: &Mlp) -> Result<PlateReading> {
    let glyphs = segment_glyphs(crop)?;
    let mut text = String::new();
    let mut confidences = Vec::with_capacity(glyphs.len());
    for g in &glyphs {
        let (c, conf) = read_glyph(g, net)?;
        text.push(c);
        confidences.push(conf);
    }
    Ok(PlateReading { text, confidences })
}

/// Most frequent reading across frames; ties go to the higher summed mean
/// confidence, then to the lexicographically smaller text. `None` when
/// nothing was read.
pub fn vote_plate_text<'a>(readings: impl IntoIterator<Item = &'a PlateReading>) -> Option<String> {
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for r in readings {
        if r.text.is_empty() {
            continue;
        }
        let mean = r.confidences.iter().sum::<f64>() / r.confidences.len().max(1) as f64;
        let e = tally.entry(r.text.as_str()).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += mean;
    }
    let mut best: Option<(&str, usize, f64)> = None;
    for (text, (n, conf)) in tally {
        let better = match best {
            None => true,
            Some((_, bn, bc)) => n > bn || (n == bn && conf > bc),
        };
        if better {
            best = Some((text, n, conf));
        }
    }
    best.map(|(t, _, _)| t.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn reading(t: &str, c: f64) -> PlateReading {
        PlateReading {
            text: t.into(),
            confidences: vec![c; t.len()],
        }
    }

    #[test]
    fn vote_prefers_majority() {
        let r = [reading("123", 0.9), reading("128", 0.99), reading("123", 0.8)];
        assert_eq!(vote_plate_text(&r).as_deref(), Some("123"));
    }

    #[test]
    fn vote_of_nothing_is_none() {
        assert_eq!(vote_plate_text(&[]), None);
    }

    #[test]
    fn blank_plate_propagates_empty_plate() {
        let net = Mlp::zeros(&[GLYPH_LEN, 4, 10]).unwrap();
        let img = GrayImage::new(144, 33, 180);
        assert_eq!(read_plate(&img, &net).unwrap_err(), Error::EmptyPlate);
    }
}
