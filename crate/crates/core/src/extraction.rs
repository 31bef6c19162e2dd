//! Mask-guided sampling of rain patches and their zero-mean residuals.

use crate::error::{Error, Result};
use crate::image::{ImageBuffer, Patch, PatchRef, RainMask};
use crate::rng::RainRng;

/// Spacing of the fixed-point grid residual values are rounded to.
///
/// Keeping every residual (and every committed canvas value) on this grid
/// makes `target + residual` exact in `f64` for codec-derived targets, so
/// differences taken on synthetic pixels equal differences taken on
/// residuals bit for bit.
pub const RESIDUAL_QUANTUM: f64 = 1.0 / (1u64 << 32) as f64;

/// Rounds `v` to the nearest multiple of [`RESIDUAL_QUANTUM`].
#[inline]
pub fn snap_residual(v: f64) -> f64 {
    (v / RESIDUAL_QUANTUM).round() * RESIDUAL_QUANTUM
}

/// A patch with each channel's mean removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPatch(Patch);

impl ResidualPatch {
    pub fn as_patch(&self) -> &Patch {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.height()
    }

    pub fn channels(&self) -> usize {
        self.0.channels()
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }

    pub fn is_zero(&self) -> bool {
        self.0.data().iter().all(|&v| v == 0.0)
    }

    /// Per-channel sums; all near zero by construction.
    pub fn channel_sums(&self) -> Vec<f64> {
        channel_means_and_sums(&self.0).1
    }
}

fn channel_means_and_sums(patch: &Patch) -> (Vec<f64>, Vec<f64>) {
    let ch = patch.channels();
    let mut sums = vec![0.0f64; ch];
    for px in patch.data().chunks_exact(ch) {
        for (s, &v) in sums.iter_mut().zip(px) {
            *s += v;
        }
    }
    let n = (patch.height() * patch.width()) as f64;
    (sums.iter().map(|s| s / n).collect(), sums)
}

/// Per-channel arithmetic means over the patch window.
pub fn channel_means(patch: &Patch) -> Vec<f64> {
    channel_means_and_sums(patch).0
}

/// Subtracts each channel's window mean from that channel.
pub fn residual_of(patch: &Patch) -> ResidualPatch {
    let means = channel_means(patch);
    let mut out = patch.clone();
    for px in out.data_mut().chunks_exact_mut(means.len()) {
        for (v, m) in px.iter_mut().zip(&means) {
            *v = snap_residual(*v - m);
        }
    }
    ResidualPatch(out)
}

/// Residual patches sampled from an exemplar together with where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchBank {
    patches: Vec<ResidualPatch>,
    source_refs: Vec<PatchRef>,
}

impl PatchBank {
    pub fn new(patches: Vec<ResidualPatch>, source_refs: Vec<PatchRef>) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::Extraction("patch bank is empty".into()));
        }
        if patches.len() != source_refs.len() {
            return Err(Error::dimension(format!(
                "{} patches but {} source refs",
                patches.len(),
                source_refs.len()
            )));
        }
        let first = patches[0].as_patch();
        if first.height() != first.width() {
            return Err(Error::dimension("bank patches must be square"));
        }
        if let Some(bad) = patches.iter().find(|p| !p.as_patch().same_shape(first)) {
            return Err(Error::dimension(format!(
                "bank patches disagree in shape: {} vs {}",
                first.shape_str(),
                bad.as_patch().shape_str()
            )));
        }
        Ok(PatchBank {
            patches,
            source_refs,
        })
    }

    pub fn patches(&self) -> &[ResidualPatch] {
        &self.patches
    }

    pub fn source_refs(&self) -> &[PatchRef] {
        &self.source_refs
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn patch_size(&self) -> usize {
        self.patches[0].size()
    }

    pub fn channels(&self) -> usize {
        self.patches[0].channels()
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "coverage threshold must be in (0, 1], got {threshold}"
        )))
    }
}

/// Fraction of rain pixels inside the window.
pub fn patch_coverage(mask: &RainMask, r: PatchRef) -> Result<f64> {
    r.check(mask.height(), mask.width())?;
    let mut count = 0usize;
    for row in r.row..r.row + r.size {
        count += (r.col..r.col + r.size)
            .filter(|&c| mask.get(row, c))
            .count();
    }
    Ok(count as f64 / (r.size * r.size) as f64)
}

/// Every stride-1 window (row-major) whose rain coverage reaches `threshold`.
pub fn enumerate_valid_positions(
    mask: &RainMask,
    size: usize,
    threshold: f64,
) -> Result<Vec<PatchRef>> {
    check_threshold(threshold)?;
    let (h, w) = (mask.height(), mask.width());
    if size == 0 || size > h || size > w {
        return Err(Error::dimension(format!(
            "patch size {size} does not fit a {h}x{w} mask"
        )));
    }

    // Summed-area table with a zero border row/column.
    let stride = w + 1;
    let mut sat = vec![0u32; (h + 1) * stride];
    for r in 0..h {
        let mut run = 0u32;
        for c in 0..w {
            run += mask.get(r, c) as u32;
            sat[(r + 1) * stride + c + 1] = sat[r * stride + c + 1] + run;
        }
    }

    let area = (size * size) as f64;
    let mut out = Vec::new();
    for r in 0..=h - size {
        for c in 0..=w - size {
            let count = sat[(r + size) * stride + c + size] + sat[r * stride + c]
                - sat[r * stride + c + size]
                - sat[(r + size) * stride + c];
            if count as f64 / area >= threshold {
                out.push(PatchRef::new(r, c, size));
            }
        }
    }
    Ok(out)
}

/// Draws `count` windows uniformly, with replacement, from the valid positions
/// and converts each to its residual.
pub fn sample_rain_patches(
    exemplar: &ImageBuffer,
    mask: &RainMask,
    size: usize,
    threshold: f64,
    count: usize,
    rng: &mut RainRng,
) -> Result<PatchBank> {
    if exemplar.height() != mask.height() || exemplar.width() != mask.width() {
        return Err(Error::dimension(format!(
            "exemplar is {}x{} but mask is {}x{}",
            exemplar.height(),
            exemplar.width(),
            mask.height(),
            mask.width()
        )));
    }
    if count == 0 {
        return Err(Error::Config("patch count must be positive".into()));
    }
    let valid = enumerate_valid_positions(mask, size, threshold)?;
    if valid.is_empty() {
        return Err(Error::Extraction(format!(
            "no {size}x{size} window reaches rain coverage {threshold}; \
             lower the coverage threshold or use a denser mask"
        )));
    }
    let mut patches = Vec::with_capacity(count);
    let mut refs = Vec::with_capacity(count);
    for _ in 0..count {
        let r = valid[rng.index(valid.len())];
        patches.push(residual_of(&exemplar.get_patch(r)?));
        refs.push(r);
    }
    PatchBank::new(patches, refs)
}
