//! Image-mixing augmentations with exact soft-label allocation.
//!
//! The crate is organised bottom-up:
//!
//! - [`imgcore`]: 8-bit pixel buffers, heatmaps, resampling, crops and PNG I/O.
//! - [`region`]: half-open rectangles, saliency coordinate sets and region sampling.
//! - [`mixers`]: paste, CutMix, ResizeMix, Mixup, the obtain × paste matrix and label mixing.
//! - [`pipeline`]: dataset manifests, deterministic batch runs, statistics and contact sheets.
//!
//! Every random decision is drawn from a caller-owned RNG, so identical inputs and
//! seeds always produce identical bytes.

pub mod error;
pub mod imgcore;
pub mod mixers;
pub mod pipeline;
pub mod region;

pub use error::{Error, Result};
pub use imgcore::{Filter, Heatmap, Image};
pub use mixers::{
    cutmix, mix_labels, mix_matrix, mixup, paste, resizemix, AreaLaw, HalfResMode, MixConfig,
    MixResult, MixedLabel, Obtain, PasteTo,
};
pub use region::{CenterStrategy, Coord, Region, SaliencySets};

/// The RNG used for every seeded stream in the crate.
pub type MixRng = rand_chacha::ChaCha8Rng;

/// Creates the RNG stream for a seed.
pub fn seeded_rng(seed: u64) -> MixRng {
    use rand::SeedableRng;
    MixRng::seed_from_u64(seed)
}
