//! Synthetic dataset generators: overlapping Gaussian classes, Gabor
//! patch images, and pixel noise.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{LabeledDataset, Split};
use crate::{Error, Result};

/// Two-class Gaussian classification data: class 0 is drawn from
/// N(0, I) and class 1 from N(mean_shift * 1, I), both in `dim`
/// dimensions. Train and test use independent substreams of `seed`, so
/// the train split does not depend on the test counts.
pub fn gen_gaussian(
    dim: usize,
    mean_shift: f64,
    n_train_per_class: usize,
    n_test_per_class: usize,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !mean_shift.is_finite() {
        return Err(Error::NonFinite("mean_shift".into()));
    }
    if dim == 0 || n_train_per_class == 0 || n_test_per_class == 0 {
        return Err(Error::InvalidConfig(
            "gen_gaussian requires dim >= 1 and per-class counts >= 1".into(),
        ));
    }
    let provenance = |split: Split| {
        format!("gaussian(dim={dim},shift={mean_shift},seed={seed},split={split})")
    };
    let sample = |stream: u64, per_class: usize, split: Split| -> Result<LabeledDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let m = 2 * per_class;
        let mut features = Array2::<f64>::zeros((m, dim));
        let mut labels = vec![0u16; m];
        for class in 0..2usize {
            let shift = if class == 0 { 0.0 } else { mean_shift };
            for row in class * per_class..(class + 1) * per_class {
                labels[row] = class as u16;
                for col in 0..dim {
                    let z: f64 = rng.sample(StandardNormal);
                    features[[row, col]] = z + shift;
                }
            }
        }
        LabeledDataset::new(features, labels, 2, split, provenance(split))
    };
    Ok((
        sample(0, n_train_per_class, Split::Train)?,
        sample(1, n_test_per_class, Split::Test)?,
    ))
}

/// Base orientations of the four Gabor orientation groups, in degrees.
pub const GABOR_BASE_ORIENTATIONS_DEG: [f64; 4] = [45.0, 90.0, 135.0, 180.0];

/// Parameters of the Gabor patch generator. The defaults produce
/// 32x32x3 images: a Gaussian-windowed grating written into a single
/// RGB channel, with per-image orientation jitter, patch size and
/// location drawn uniformly.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct GaborConfig {
    pub img_size: usize,
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub sigma_range: (f64, f64),
    pub center_range: (f64, f64),
    pub orientation_jitter_deg: f64,
}

impl Default for GaborConfig {
    fn default() -> Self {
        GaborConfig {
            img_size: 32,
            n_train_per_class: 100,
            n_test_per_class: 20,
            sigma_range: (2.0, 6.0),
            center_range: (8.0, 24.0),
            orientation_jitter_deg: 30.0,
        }
    }
}

impl GaborConfig {
    pub fn num_classes() -> u16 {
        (3 * GABOR_BASE_ORIENTATIONS_DEG.len()) as u16
    }

    fn validate(&self) -> Result<()> {
        if self.img_size == 0 || self.n_train_per_class == 0 || self.n_test_per_class == 0 {
            return Err(Error::InvalidConfig(
                "gabor: img_size and per-class counts must be >= 1".into(),
            ));
        }
        let (slo, shi) = self.sigma_range;
        if !(slo > 0.0 && shi >= slo && shi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "gabor: bad sigma_range ({slo}, {shi})"
            )));
        }
        let (clo, chi) = self.center_range;
        if !(clo >= 0.0 && chi >= clo && chi <= self.img_size as f64) {
            return Err(Error::InvalidConfig(format!(
                "gabor: bad center_range ({clo}, {chi})"
            )));
        }
        if !(self.orientation_jitter_deg >= 0.0 && self.orientation_jitter_deg.is_finite()) {
            return Err(Error::InvalidConfig(
                "gabor: bad orientation_jitter_deg".into(),
            ));
        }
        Ok(())
    }
}

/// How one of the 12 Gabor classes is parameterized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborClassInfo {
    /// Which RGB channel the grating is written into.
    pub channel: usize,
    /// Base orientation in degrees; per-image orientation is jittered
    /// around it.
    pub base_orientation_deg: f64,
}

/// Class layout: class = channel * 4 + orientation index.
pub fn gabor_class_info(class: u16) -> GaborClassInfo {
    let n_orient = GABOR_BASE_ORIENTATIONS_DEG.len();
    assert!((class as usize) < 3 * n_orient, "gabor class out of range");
    GaborClassInfo {
        channel: class as usize / n_orient,
        base_orientation_deg: GABOR_BASE_ORIENTATIONS_DEG[class as usize % n_orient],
    }
}

/// 12-class Gabor patch images (3 channels x 4 base orientations),
/// flattened channel-major to d = 3 * img_size^2.
pub fn gen_gabor(config: &GaborConfig, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    config.validate()?;
    let k = GaborConfig::num_classes();
    let size = config.img_size;
    let dim = 3 * size * size;
    let render = |stream: u64, per_class: usize, split: Split| -> Result<LabeledDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let m = k as usize * per_class;
        let mut features = Array2::<f64>::zeros((m, dim));
        let mut labels = vec![0u16; m];
        let mut row = 0usize;
        for class in 0..k {
            let info = gabor_class_info(class);
            let base = info.base_orientation_deg;
            for _ in 0..per_class {
                let jitter = rng.gen_range(
                    -config.orientation_jitter_deg..=config.orientation_jitter_deg,
                );
                let theta = (base + jitter).to_radians();
                let sigma = rng.gen_range(config.sigma_range.0..=config.sigma_range.1);
                let lambda = 2.0 * sigma;
                let cx = rng.gen_range(config.center_range.0..=config.center_range.1);
                let cy = rng.gen_range(config.center_range.0..=config.center_range.1);
                let plane = info.channel * size * size;
                let (sin_t, cos_t) = theta.sin_cos();
                for y in 0..size {
                    for x in 0..size {
                        let dx = x as f64 - cx;
                        let dy = y as f64 - cy;
                        let xr = dx * cos_t + dy * sin_t;
                        let yr = -dx * sin_t + dy * cos_t;
                        let envelope = (-(xr * xr + yr * yr) / (2.0 * sigma * sigma)).exp();
                        let grating = (2.0 * std::f64::consts::PI * xr / lambda).cos();
                        let v = (envelope * grating).clamp(-1.0, 1.0);
                        features[[row, plane + y * size + x]] = v;
                    }
                }
                labels[row] = class;
                row += 1;
            }
        }
        LabeledDataset::new(
            features,
            labels,
            k,
            split,
            format!("gabor(size={size},seed={seed},split={split})"),
        )
    };
    Ok((
        render(0, config.n_train_per_class, Split::Train)?,
        render(1, config.n_test_per_class, Split::Test)?,
    ))
}

/// I.i.d. standard-normal feature vectors with placeholder labels,
/// for out-of-sample agreement runs.
pub fn gen_noise(count: usize, dim: usize, seed: u64) -> Result<LabeledDataset> {
    if count == 0 || dim == 0 {
        return Err(Error::InvalidConfig(
            "gen_noise requires count >= 1 and dim >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Array2::<f64>::zeros((count, dim));
    for v in features.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    LabeledDataset::new(
        features,
        vec![0u16; count],
        1,
        Split::Test,
        format!("noise(dim={dim},seed={seed})"),
    )
}
