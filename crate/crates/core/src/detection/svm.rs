//! Linear maximum-margin classifier trained by stochastic subgradient
//! descent on the regularized hinge loss.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 200,
            seed: 0,
        }
    }
}

/// A labeled feature vector; greylevels are scaled to `[0, 1]` internally.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCrop {
    pub features: Vec<u8>,
    pub is_plate: bool,
}

fn feature(v: u8) -> f64 {
    v as f64 / 255.0
}

/// Trains with the Pegasos schedule (step `1 / (lambda t)`), treating the
/// bias as one more weight on a constant feature.
pub fn train_plate_classifier(samples: &[LabeledCrop], params: &SvmParams) -> Result<LinearClassifier> {
    let pos = samples.iter().filter(|s| s.is_plate).count();
    if pos == 0 || pos == samples.len() {
        return Err(Error::insufficient("training needs samples of both classes"));
    }
    if !(params.lambda > 0.0) || params.epochs == 0 {
        return Err(Error::InvalidParameter(
            "lambda must be positive and epochs nonzero".into(),
        ));
    }
    let dim = samples[0].features.len();
    if let Some(bad) = samples.iter().find(|s| s.features.len() != dim) {
        return Err(Error::shape(format!("{dim}"), format!("{}", bad.features.len())));
    }

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (params.lambda * t as f64);
            let s = &samples[i];
            let y = if s.is_plate { 1.0 } else { -1.0 };
            let margin = y * (b + s.features.iter().zip(&w).map(|(&x, w)| feature(x) * w).sum::<f64>());
            let shrink = 1.0 - eta * params.lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            b *= shrink;
            if margin < 1.0 {
                for (wj, &x) in w.iter_mut().zip(&s.features) {
                    *wj += eta * y * feature(x);
                }
                b += eta * y;
            }
        }
    }
    Ok(LinearClassifier { weights: w, bias: b })
}

impl LinearClassifier {
    pub fn decision(&self, features: &[u8]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::shape(
                format!("{}", self.weights.len()),
                format!("{}", features.len()),
            ));
        }
        Ok(self.bias
            + features
                .iter()
                .zip(&self.weights)
                .map(|(&x, w)| feature(x) * w)
                .sum::<f64>())
    }
}

/// Returns `(is_plate, margin)` where `margin` is the signed decision value.
pub fn classify(clf: &LinearClassifier, features: &[u8]) -> Result<(bool, f64)> {
    let m = clf.decision(features)?;
    Ok((m > 0.0, m))
}

/// Fraction of plates rejected and fraction of all samples misclassified.
pub fn evaluate(clf: &LinearClassifier, samples: &[LabeledCrop]) -> Result<(f64, f64)> {
    let mut missed = 0usize;
    let mut plates = 0usize;
    let mut wrong = 0usize;
    for s in samples {
        let (p, _) = classify(clf, &s.features)?;
        if s.is_plate {
            plates += 1;
            if !p {
                missed += 1;
            }
        }
        if p != s.is_plate {
            wrong += 1;
        }
    }
    let miss = if plates == 0 {
        0.0
    } else {
        missed as f64 / plates as f64
    };
    let err = if samples.is_empty() {
        0.0
    } else {
        wrong as f64 / samples.len() as f64
    };
    Ok((miss, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crop(v: &[u8], is_plate: bool) -> LabeledCrop {
        LabeledCrop {
            features: v.to_vec(),
            is_plate,
        }
    }

    #[test]
    fn separable_pair() {
        let s = [crop(&[255, 0], true), crop(&[0, 255], false)];
        let clf = train_plate_classifier(&s, &SvmParams::default()).unwrap();
        let (a, ma) = classify(&clf, &[255, 0]).unwrap();
        let (b, mb) = classify(&clf, &[0, 255]).unwrap();
        assert!(a && !b);
        assert!(ma > 0.0 && mb < 0.0);
    }

    #[test]
    fn single_class_is_rejected() {
        let s = [crop(&[1, 2], true), crop(&[3, 4], true)];
        assert!(matches!(
            train_plate_classifier(&s, &SvmParams::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn conflicting_duplicates_do_not_crash() {
        let s = [crop(&[100, 100], true), crop(&[100, 100], false), crop(&[0, 0], false)];
        let clf = train_plate_classifier(&s, &SvmParams::default()).unwrap();
        assert!(clf.weights.iter().all(|w| w.is_finite()) && clf.bias.is_finite());
        assert!(classify(&clf, &[100, 100]).unwrap().1.is_finite());
    }

    #[test]
    fn training_is_deterministic() {
        let s = [
            crop(&[200, 10, 30], true),
            crop(&[20, 190, 40], false),
            crop(&[180, 40, 90], true),
        ];
        let a = train_plate_classifier(&s, &SvmParams::default()).unwrap();
        let b = train_plate_classifier(&s, &SvmParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_length_is_shape_error() {
        let clf = LinearClassifier {
            weights: vec![0.0; 3],
            bias: 0.0,
        };
        assert!(matches!(classify(&clf, &[1, 2]), Err(Error::ShapeError { .. })));
    }
}
