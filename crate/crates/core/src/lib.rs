//! Transfer of real rain structure from an exemplar image onto rain-free
//! targets.
//!
//! Rain patches are sampled from masked regions of an exemplar, reduced to
//! zero-mean residuals, and quilted over a target in raster order with
//! minimum-error boundary cuts. A blend-free mode emits aligned
//! clean/rain patch pairs for supervised training.

pub mod error;
pub mod extraction;
pub mod fixtures;
pub mod image;
pub mod quilting;
pub mod rng;
pub mod synthesis;

pub use error::{Error, Result};
pub use extraction::{
    enumerate_valid_positions, patch_coverage, residual_of, sample_rain_patches, PatchBank,
    ResidualPatch,
};
pub use image::{load_image, load_mask, save_image, ImageBuffer, Patch, PatchRef, RainMask};
pub use quilting::{
    blend, min_cut_horizontal, min_cut_vertical, overlap_error_surface, seam_to_mask, BlendMask,
    ErrorMatrix, SeamPath,
};
pub use rng::RainRng;
pub use synthesis::{
    compose_patch, generate_pairs, plan_grid, transfer, transfer_traced, PairRecord, TransferConfig,
};
