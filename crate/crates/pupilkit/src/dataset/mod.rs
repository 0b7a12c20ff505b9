//! Dataset ingestion, preparation, splitting, batching, and the synthetic
//! eye generator used for desk-scale verification.

mod annotation;
mod prepare;
mod synth;

pub use annotation::load_annotation;
pub use prepare::{
    load_prepared, prepare_dataset, prepare_sample, save_prepared, PrepareReport,
};
pub use synth::{synth_dataset, synth_eye, ReflectionSpot, SynthEyeSpec};

use ndarray::Array4;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::augment::{augment_sample, AugmentationConfig};
use crate::geometry::{normalize_params, rasterize_ellipse, Ellipse, GeometryError, NormalizedEllipse};
use crate::{Mask, RgbImage};

/// Minimum Dice overlap between a sample's mask and the rasterization of its
/// ellipse for the sample to be accepted at ingestion.
pub const CONSISTENCY_DSC_GATE: f64 = 0.9;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("annotation contains unknown label {value}")]
    UnknownLabel { value: u8 },
    #[error("annotation has no {region} pixels")]
    MissingRegion { region: &'static str },
    #[error("need at least 2 samples to split, got {got}")]
    TooFewSamples { got: usize },
    #[error("synthetic eye geometry violation: {0}")]
    GeometryViolation(String),
    #[error("sample {id}: spatial shapes disagree")]
    ShapeMismatch { id: String },
    #[error("sample {id}: pupil mask leaves the iris region")]
    PupilOutsideIris { id: String },
    #[error("sample {id}: ellipse/mask Dice {dsc:.3} below the {gate} consistency gate")]
    InconsistentEllipse { id: String, dsc: f64, gate: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

/// One training record: RGB image, binary pupil and iris masks, and the
/// ground-truth pupil ellipse, all at the same spatial size.
#[derive(Debug, Clone)]
pub struct Sample {
    pub id: String,
    pub image: RgbImage,
    pub pupil_mask: Mask,
    pub iris_mask: Mask,
    pub ellipse: Ellipse,
}

impl Sample {
    pub fn height(&self) -> usize {
        self.image.dim().0
    }

    pub fn width(&self) -> usize {
        self.image.dim().1
    }

    /// Checks the ingestion invariants: equal spatial shapes, pupil region
    /// contained in the iris region, and Dice(rasterize(ellipse), pupil_mask)
    /// at or above the consistency gate.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let (h, w, _) = self.image.dim();
        if self.pupil_mask.dim() != (h, w) || self.iris_mask.dim() != (h, w) {
            return Err(DatasetError::ShapeMismatch {
                id: self.id.clone(),
            });
        }
        if ndarray::Zip::from(&self.pupil_mask)
            .and(&self.iris_mask)
            .any(|&p, &i| p != 0 && i == 0)
        {
            return Err(DatasetError::PupilOutsideIris {
                id: self.id.clone(),
            });
        }
        let rendered = rasterize_ellipse(&self.ellipse, h, w);
        let dsc = binary_dice(&rendered, &self.pupil_mask);
        if dsc < CONSISTENCY_DSC_GATE {
            return Err(DatasetError::InconsistentEllipse {
                id: self.id.clone(),
                dsc,
                gate: CONSISTENCY_DSC_GATE,
            });
        }
        Ok(())
    }
}

/// Dice coefficient between two binary masks from exact integer counts.
pub(crate) fn binary_dice(a: &Mask, b: &Mask) -> f64 {
    let mut inter = 0usize;
    let mut total = 0usize;
    ndarray::Zip::from(a).and(b).for_each(|&x, &y| {
        let (x, y) = (x != 0, y != 0);
        inter += usize::from(x && y);
        total += usize::from(x) + usize::from(y);
    });
    if total == 0 {
        1.0
    } else {
        2.0 * inter as f64 / total as f64
    }
}

/// A mini-batch: images scaled to `[0, 1]`, masks in `{0, 1}`, and the
/// normalized ellipse targets. Tensors are `N x H x W x C`.
#[derive(Debug, Clone)]
pub struct Batch {
    pub images: Array4<f64>,
    pub masks: Array4<f64>,
    pub targets: Vec<NormalizedEllipse>,
    pub ids: Vec<String>,
}

/// Splits samples into disjoint, exhaustive train/validation sets after a
/// seeded shuffle; the train set gets `floor(train_fraction * n)` samples.
pub fn split(
    samples: Vec<Sample>,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>), DatasetError> {
    if samples.len() < 2 {
        return Err(DatasetError::TooFewSamples {
            got: samples.len(),
        });
    }
    let mut samples = samples;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    samples.shuffle(&mut rng);
    let n_train = (train_fraction * samples.len() as f64).floor() as usize;
    let val = samples.split_off(n_train);
    Ok((samples, val))
}

/// Ordered, seeded stream of mini-batches over a sample set. Each epoch
/// covers every sample exactly once; augmentation, when configured, is
/// applied on the fly with a per-sample rng derived from `(seed, epoch,
/// sample index)` so the result does not depend on traversal order.
pub struct BatchStream<'a> {
    samples: &'a [Sample],
    batch_size: usize,
    shuffle: bool,
    augmentation: Option<AugmentationConfig>,
    seed: u64,
}

impl<'a> BatchStream<'a> {
    pub fn new(
        samples: &'a [Sample],
        batch_size: usize,
        shuffle: bool,
        augmentation: Option<AugmentationConfig>,
        seed: u64,
    ) -> Self {
        assert!(!samples.is_empty(), "batch stream needs samples");
        assert!(batch_size > 0, "batch size must be positive");
        Self {
            samples,
            batch_size,
            shuffle,
            augmentation,
            seed,
        }
    }

    /// Batches per epoch: `ceil(n / batch_size)`.
    pub fn batches_per_epoch(&self) -> usize {
        self.samples.len().div_ceil(self.batch_size)
    }

    /// The batches of one epoch, in delivery order.
    pub fn epoch(&self, epoch: u64) -> impl Iterator<Item = Batch> + '_ {
        let mut order: Vec<usize> = (0..self.samples.len()).collect();
        if self.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, epoch, u64::MAX));
            order.shuffle(&mut rng);
        }
        let batch_size = self.batch_size;
        (0..self.batches_per_epoch()).map(move |b| {
            let lo = b * batch_size;
            let hi = (lo + batch_size).min(order.len());
            self.build_batch(&order[lo..hi], epoch)
        })
    }

    fn build_batch(&self, indices: &[usize], epoch: u64) -> Batch {
        let n = indices.len();
        let (h, w) = (self.samples[indices[0]].height(), self.samples[indices[0]].width());
        let mut images = Array4::<f64>::zeros((n, h, w, 3));
        let mut masks = Array4::<f64>::zeros((n, h, w, 1));
        let mut targets = Vec::with_capacity(n);
        let mut ids = Vec::with_capacity(n);

        for (slot, &idx) in indices.iter().enumerate() {
            let sample = &self.samples[idx];
            let augmented;
            let sample = match &self.augmentation {
                Some(cfg) => {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed ^ self.seed, epoch, idx as u64));
                    augmented = augment_sample(sample, cfg, &mut rng)
                        .expect("augmentation failed on a validated sample");
                    &augmented
                }
                None => sample,
            };
            assert_eq!(
                (sample.height(), sample.width()),
                (h, w),
                "all samples in a batch must share dimensions"
            );
            for r in 0..h {
                for c in 0..w {
                    for ch in 0..3 {
                        images[(slot, r, c, ch)] = sample.image[(r, c, ch)] as f64 / 255.0;
                    }
                    masks[(slot, r, c, 0)] = sample.pupil_mask[(r, c)] as f64;
                }
            }
            let target = normalize_params(&sample.ellipse, sample.width(), sample.height())
                .expect("validated sample has a normalizable ellipse");
            targets.push(target);
            ids.push(sample.id.clone());
        }

        Batch {
            images,
            masks,
            targets,
            ids,
        }
    }
}

/// SplitMix64-style mixing of (seed, epoch, index) into one rng seed.
fn mix_seed(seed: u64, epoch: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(epoch.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
