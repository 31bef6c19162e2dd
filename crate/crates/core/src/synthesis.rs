//! Raster-scan rain transfer and blend-free training pair generation.
//!
//! Transfer keeps a signed residual canvas the size of the target. Blocks
//! are visited in raster order; each draws one residual from the bank,
//! cuts the overlap with the already committed canvas along minimum-error
//! seams, and is blended in. The synthetic image is `clamp(target + canvas)`
//! evaluated once at the end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{snap_residual, PatchBank, ResidualPatch};
use crate::image::{ImageBuffer, Patch, PatchRef};
use crate::quilting::{
    blend, min_cut_horizontal, min_cut_vertical, overlap_error_surface, seam_to_mask, ErrorMatrix,
    SeamPath,
};
use crate::rng::RainRng;

/// Overlap used when only the patch size is given: `round(patch / 6)`, at least 2.
pub fn default_overlap(patch_size: usize) -> usize {
    ((patch_size as f64 / 6.0).round() as usize).max(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    pub patch_size: usize,
    pub overlap: usize,
    pub coverage_threshold: f64,
    pub bank_count: usize,
    pub feather: usize,
    pub seed: u64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            patch_size: 32,
            overlap: default_overlap(32),
            coverage_threshold: 0.6,
            bank_count: 2000,
            feather: 1,
            seed: 0,
        }
    }
}

impl TransferConfig {
    /// Sets the patch size and resets the overlap to its derived default.
    pub fn with_patch_size(mut self, patch_size: usize) -> Self {
        self.patch_size = patch_size;
        self.overlap = default_overlap(patch_size);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.overlap == 0 || self.overlap >= self.patch_size {
            return Err(Error::Config(format!(
                "overlap must satisfy 0 < overlap < patch size, got overlap {} with patch {}",
                self.overlap, self.patch_size
            )));
        }
        if !(self.coverage_threshold > 0.0 && self.coverage_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "coverage threshold must be in (0, 1], got {}",
                self.coverage_threshold
            )));
        }
        if self.bank_count == 0 {
            return Err(Error::Config("bank count must be positive".into()));
        }
        Ok(())
    }
}

/// `clamp(target + residual)` per pixel.
pub fn compose_patch(residual: &ResidualPatch, target_patch: &Patch) -> Result<Patch> {
    let r = residual.as_patch();
    if !r.same_shape(target_patch) {
        return Err(Error::dimension(format!(
            "residual is {} but target patch is {}",
            r.shape_str(),
            target_patch.shape_str()
        )));
    }
    let mut out = target_patch.clone();
    for (v, d) in out.data_mut().iter_mut().zip(r.data()) {
        *v = (*v + d).clamp(0.0, 1.0);
    }
    Ok(out)
}

fn axis_positions(len: usize, patch: usize, step: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 0;
    loop {
        if p + patch >= len {
            out.push(len - patch);
            return out;
        }
        out.push(p);
        p += step;
    }
}

/// Block positions in raster order, stepping by `patch - overlap`; the last
/// block of each row and column is pulled back to end flush with the edge.
pub fn plan_grid(height: usize, width: usize, cfg: &TransferConfig) -> Result<Vec<PatchRef>> {
    cfg.validate()?;
    let p = cfg.patch_size;
    if height < p || width < p {
        return Err(Error::dimension(format!(
            "target {height}x{width} is smaller than patch size {p}"
        )));
    }
    let step = p - cfg.overlap;
    let rows = axis_positions(height, p, step);
    let cols = axis_positions(width, p, step);
    Ok(rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| PatchRef::new(r, c, p)))
        .collect())
}

/// What happened at one grid block during transfer.
#[derive(Debug, Clone)]
pub struct BlockRecord {
    pub position: PatchRef,
    pub residual_index: usize,
    pub left_overlap: usize,
    pub top_overlap: usize,
    pub vseam: Option<SeamPath>,
    pub hseam: Option<SeamPath>,
    /// Canvas content under the block before it was committed.
    pub canvas_before: Patch,
    /// The same window right after commit.
    pub canvas_after: Patch,
}

/// The residual canvas plus the per-block history that produced it.
#[derive(Debug, Clone)]
pub struct TransferTrace {
    pub canvas: Patch,
    pub blocks: Vec<BlockRecord>,
}

fn check_bank(bank: &PatchBank, cfg: &TransferConfig, channels: usize) -> Result<()> {
    if bank.is_empty() {
        return Err(Error::Extraction("patch bank is empty".into()));
    }
    if bank.patch_size() != cfg.patch_size {
        return Err(Error::dimension(format!(
            "bank patches are {} px but config patch size is {}",
            bank.patch_size(),
            cfg.patch_size
        )));
    }
    if bank.channels() != channels {
        return Err(Error::dimension(format!(
            "bank has {} channels but target has {}",
            bank.channels(),
            channels
        )));
    }
    Ok(())
}

fn quilt_canvas(
    target: &ImageBuffer,
    bank: &PatchBank,
    cfg: &TransferConfig,
    rng: &mut RainRng,
    mut trace: Option<&mut Vec<BlockRecord>>,
) -> Result<Patch> {
    cfg.validate()?;
    check_bank(bank, cfg, target.channels())?;
    let grid = plan_grid(target.height(), target.width(), cfg)?;
    let p = cfg.patch_size;
    let mut canvas = Patch::zeros(target.height(), target.width(), target.channels());

    // Blocks come row by row; remember where the previous row and column ended.
    let mut prev_row_start: Option<usize> = None;
    let mut current_row = usize::MAX;
    let mut prev_col: Option<usize> = None;

    for pos in grid {
        if pos.row != current_row {
            if current_row != usize::MAX {
                prev_row_start = Some(current_row);
            }
            current_row = pos.row;
            prev_col = None;
        }
        let left_overlap = prev_col.map_or(0, |c| c + p - pos.col);
        let top_overlap = prev_row_start.map_or(0, |r| r + p - pos.row);
        prev_col = Some(pos.col);

        let residual_index = rng.index(bank.len());
        let incoming = bank.patches()[residual_index].as_patch();
        let existing = canvas.crop(pos.row, pos.col, p, p)?;

        let vseam = if left_overlap > 0 {
            let e = overlap_error_surface(
                &existing.crop(0, 0, p, left_overlap)?,
                &incoming.crop(0, 0, p, left_overlap)?,
            )?;
            Some(min_cut_vertical(&e))
        } else {
            None
        };
        let hseam = if top_overlap > 0 {
            let e = overlap_error_surface(
                &existing.crop(0, 0, top_overlap, p)?,
                &incoming.crop(0, 0, top_overlap, p)?,
            )?;
            Some(min_cut_horizontal(&e))
        } else {
            None
        };

        let mask = seam_to_mask(p, left_overlap, top_overlap, vseam.as_ref(), hseam.as_ref())?;
        let mut merged = blend(&existing, incoming, &mask, cfg.feather)?;
        merged
            .data_mut()
            .iter_mut()
            .for_each(|v| *v = snap_residual(*v));
        canvas.paste(pos.row, pos.col, &merged)?;

        if let Some(t) = trace.as_deref_mut() {
            let canvas_after = merged;
            t.push(BlockRecord {
                position: pos,
                residual_index,
                left_overlap,
                top_overlap,
                vseam,
                hseam,
                canvas_before: existing,
                canvas_after,
            });
        }
    }
    Ok(canvas)
}

/// `clamp(target + canvas)` per pixel.
pub fn apply_rain_layer(target: &ImageBuffer, canvas: &Patch) -> Result<ImageBuffer> {
    if canvas.height() != target.height()
        || canvas.width() != target.width()
        || canvas.channels() != target.channels()
    {
        return Err(Error::dimension(format!(
            "rain layer is {} but target is {}x{}x{}",
            canvas.shape_str(),
            target.height(),
            target.width(),
            target.channels()
        )));
    }
    ImageBuffer::from_f64_clamped(
        target.height(),
        target.width(),
        target.channels(),
        target
            .data()
            .iter()
            .zip(canvas.data())
            .map(|(&t, &c)| t as f64 + c),
    )
}

/// Quilts bank residuals over the target and returns the synthetic rain image.
pub fn transfer(
    target: &ImageBuffer,
    bank: &PatchBank,
    cfg: &TransferConfig,
    rng: &mut RainRng,
) -> Result<ImageBuffer> {
    let canvas = quilt_canvas(target, bank, cfg, rng, None)?;
    apply_rain_layer(target, &canvas)
}

/// Same as [`transfer`] but returns the residual canvas and per-block history.
pub fn transfer_traced(
    target: &ImageBuffer,
    bank: &PatchBank,
    cfg: &TransferConfig,
    rng: &mut RainRng,
) -> Result<(ImageBuffer, TransferTrace)> {
    let mut blocks = Vec::new();
    let canvas = quilt_canvas(target, bank, cfg, rng, Some(&mut blocks))?;
    let img = apply_rain_layer(target, &canvas)?;
    Ok((img, TransferTrace { canvas, blocks }))
}

/// Overlap error measured between unclamped synthetic candidates
/// `target + existing` and `target + incoming`.
///
/// For residual values on the fixed-point grid and codec-derived targets
/// this is bit-identical to `overlap_error_surface(existing, incoming)`.
pub fn synthetic_error_surface(
    target: &Patch,
    existing: &Patch,
    incoming: &Patch,
) -> Result<ErrorMatrix> {
    if !target.same_shape(existing) {
        return Err(Error::dimension(format!(
            "target region is {} but residual region is {}",
            target.shape_str(),
            existing.shape_str()
        )));
    }
    let lift = |r: &Patch| -> Result<Patch> {
        let data = target
            .data()
            .iter()
            .zip(r.data())
            .map(|(t, d)| t + d)
            .collect();
        Patch::new(r.height(), r.width(), r.channels(), data)
    };
    overlap_error_surface(&lift(existing)?, &lift(incoming)?)
}

/// An aligned clean/rain patch couple.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub target_index: usize,
    pub target_ref: PatchRef,
    pub residual_index: usize,
    pub target_patch: Patch,
    pub synthetic_patch: Patch,
}

/// Draws `pair_count` random (target, position, residual) triples and
/// composes each pair independently, with no quilting or blending.
///
/// Per record the draws are: target index, row, column, residual index.
pub fn generate_pairs(
    targets: &[ImageBuffer],
    bank: &PatchBank,
    pair_count: usize,
    cfg: &TransferConfig,
    rng: &mut RainRng,
) -> Result<Vec<PairRecord>> {
    let p = cfg.patch_size;
    for (i, t) in targets.iter().enumerate() {
        if t.height() < p || t.width() < p {
            return Err(Error::dimension(format!(
                "target {i} is {}x{}, smaller than patch size {p}",
                t.height(),
                t.width()
            )));
        }
        check_bank(bank, cfg, t.channels())?;
    }
    if pair_count == 0 {
        return Ok(Vec::new());
    }
    if targets.is_empty() {
        return Err(Error::dimension("no targets to draw pairs from"));
    }

    let mut out = Vec::with_capacity(pair_count);
    for _ in 0..pair_count {
        let target_index = rng.index(targets.len());
        let t = &targets[target_index];
        let row = rng.index(t.height() - p + 1);
        let col = rng.index(t.width() - p + 1);
        let residual_index = rng.index(bank.len());
        let target_ref = PatchRef::new(row, col, p);
        let target_patch = t.get_patch(target_ref)?;
        let synthetic_patch = compose_patch(&bank.patches()[residual_index], &target_patch)?;
        out.push(PairRecord {
            target_index,
            target_ref,
            residual_index,
            target_patch,
            synthetic_patch,
        });
    }
    Ok(out)
}
