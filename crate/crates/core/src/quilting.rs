//! Overlap error surfaces, minimum-error boundary cuts and seam blending.
//!
//! A vertical cut runs top to bottom through a left overlap strip; the
//! cumulative cost is
//!
//! ```text
//! C[0, j] = E[0, j]
//! C[i, j] = E[i, j] + min(C[i-1, j-1], C[i-1, j], C[i-1, j+1])
//! ```
//!
//! with out-of-range neighbours ignored. The seam is recovered by
//! backtracking from the cheapest cell of the last row. Every argmin
//! prefers the smallest column index. Horizontal cuts are vertical cuts of
//! the transposed surface.

use crate::error::{Error, Result};
use crate::image::Patch;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ErrorMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::dimension(format!(
                "error matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::dimension(format!(
                "error matrix entries must be nonnegative, found {v}"
            )));
        }
        Ok(ErrorMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dimension("ragged error matrix rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn transpose(&self) -> ErrorMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        ErrorMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn scaled(&self, k: f64) -> ErrorMatrix {
        ErrorMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }
}

/// A connected minimum-error cut.
///
/// For a vertical cut `indices[i]` is the column crossed in row `i`; for a
/// horizontal cut it is the row crossed in column `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeamPath {
    pub indices: Vec<usize>,
    pub cost: f64,
}

impl SeamPath {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        self.indices.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1)
    }
}

/// Per-pixel channel-summed squared difference between two equally shaped regions.
pub fn overlap_error_surface(existing: &Patch, incoming: &Patch) -> Result<ErrorMatrix> {
    if !existing.same_shape(incoming) {
        return Err(Error::dimension(format!(
            "overlap regions differ: {} vs {}",
            existing.shape_str(),
            incoming.shape_str()
        )));
    }
    let ch = existing.channels();
    let data = existing
        .data()
        .chunks_exact(ch)
        .zip(incoming.data().chunks_exact(ch))
        .map(|(a, b)| {
            a.iter().zip(b).fold(0.0, |acc, (x, y)| {
                let d = x - y;
                acc + d * d
            })
        })
        .collect();
    ErrorMatrix::new(existing.height(), existing.width(), data)
}

/// Cheapest connected top-to-bottom path through `e`.
pub fn min_cut_vertical(e: &ErrorMatrix) -> SeamPath {
    let (rows, cols) = (e.rows, e.cols);
    let mut cum = e.data.clone();
    for i in 1..rows {
        for j in 0..cols {
            let above = &cum[(i - 1) * cols..i * cols];
            let lo = j.saturating_sub(1);
            let hi = (j + 1).min(cols - 1);
            let best = above[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
            cum[i * cols + j] = e.get(i, j) + best;
        }
    }

    let mut indices = vec![0usize; rows];
    indices[rows - 1] = argmin_first(&cum[(rows - 1) * cols..], 0, cols - 1);
    for i in (1..rows).rev() {
        let j = indices[i];
        indices[i - 1] = argmin_first(
            &cum[(i - 1) * cols..i * cols],
            j.saturating_sub(1),
            (j + 1).min(cols - 1),
        );
    }
    let cost = indices
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, &j)| acc + e.get(i, j));
    SeamPath { indices, cost }
}

fn argmin_first(row: &[f64], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for j in lo + 1..=hi {
        if row[j] < row[best] {
            best = j;
        }
    }
    best
}

/// Cheapest connected left-to-right path; one row index per column.
pub fn min_cut_horizontal(e: &ErrorMatrix) -> SeamPath {
    min_cut_vertical(&e.transpose())
}

/// Per-pixel weight of the incoming block over a square block.
///
/// The strip widths are kept so that feathering can be confined to the
/// overlap regions.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendMask {
    size: usize,
    left_overlap: usize,
    top_overlap: usize,
    data: Vec<f64>,
}

impl BlendMask {
    pub fn ones(size: usize) -> Self {
        BlendMask {
            size,
            left_overlap: 0,
            top_overlap: 0,
            data: vec![1.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    fn in_overlap(&self, row: usize, col: usize) -> bool {
        col < self.left_overlap || row < self.top_overlap
    }

    /// Weights after feathering: the hard mask box-averaged over a
    /// `(2 * feather + 1)` window in each direction (edge windows are
    /// truncated), applied only inside the overlap strips.
    pub fn weights(&self, feather: usize) -> Vec<f64> {
        if feather == 0 {
            return self.data.clone();
        }
        let n = self.size;
        let horizontal = box_pass(&self.data, n, feather, |r, c| r * n + c);
        let smooth = box_pass(&horizontal, n, feather, |r, c| c * n + r);
        let mut out = self.data.clone();
        for r in 0..n {
            for c in 0..n {
                if self.in_overlap(r, c) {
                    out[r * n + c] = smooth[r * n + c].clamp(0.0, 1.0);
                }
            }
        }
        out
    }
}

// Averages along the second index of `at(line, pos)` for every line.
fn box_pass(src: &[f64], n: usize, radius: usize, at: impl Fn(usize, usize) -> usize) -> Vec<f64> {
    let mut out = vec![0.0; src.len()];
    for line in 0..n {
        for pos in 0..n {
            let lo = pos.saturating_sub(radius);
            let hi = (pos + radius).min(n - 1);
            let sum: f64 = (lo..=hi).map(|k| src[at(line, k)]).sum();
            out[at(line, pos)] = sum / (hi - lo + 1) as f64;
        }
    }
    out
}

/// Hard-cut mask from the left (vertical) and top (horizontal) seams.
///
/// Left strip pixels go to the incoming block at or right of the vertical
/// seam; top strip pixels at or below the horizontal seam. The corner where
/// both strips meet requires both grants.
pub fn seam_to_mask(
    block_size: usize,
    left_overlap: usize,
    top_overlap: usize,
    vseam: Option<&SeamPath>,
    hseam: Option<&SeamPath>,
) -> Result<BlendMask> {
    let check = |seam: &SeamPath, width: usize, name: &str| -> Result<()> {
        if width == 0 || width >= block_size {
            return Err(Error::dimension(format!(
                "{name} overlap {width} must be in 1..{block_size}"
            )));
        }
        if seam.len() != block_size {
            return Err(Error::dimension(format!(
                "{name} seam has {} entries, block size is {block_size}",
                seam.len()
            )));
        }
        if let Some(&bad) = seam.indices.iter().find(|&&k| k >= width) {
            return Err(Error::dimension(format!(
                "{name} seam index {bad} falls outside the {width}-pixel strip"
            )));
        }
        Ok(())
    };
    if let Some(s) = vseam {
        check(s, left_overlap, "vertical")?;
    }
    if let Some(s) = hseam {
        check(s, top_overlap, "horizontal")?;
    }

    let mut data = vec![1.0; block_size * block_size];
    for r in 0..block_size {
        for c in 0..block_size {
            let left_ok = vseam.is_none_or(|s| c >= s.indices[r]);
            let top_ok = hseam.is_none_or(|s| r >= s.indices[c]);
            if !(left_ok && top_ok) {
                data[r * block_size + c] = 0.0;
            }
        }
    }
    Ok(BlendMask {
        size: block_size,
        left_overlap: if vseam.is_some() { left_overlap } else { 0 },
        top_overlap: if hseam.is_some() { top_overlap } else { 0 },
        data,
    })
}

/// Mixes `incoming` over `canvas` with the (optionally feathered) mask weights.
pub fn blend(canvas: &Patch, incoming: &Patch, mask: &BlendMask, feather: usize) -> Result<Patch> {
    if !canvas.same_shape(incoming) {
        return Err(Error::dimension(format!(
            "blend regions differ: {} vs {}",
            canvas.shape_str(),
            incoming.shape_str()
        )));
    }
    if canvas.height() != mask.size || canvas.width() != mask.size {
        return Err(Error::dimension(format!(
            "blend mask is {0}x{0} but regions are {1}",
            mask.size,
            canvas.shape_str()
        )));
    }
    let weights = mask.weights(feather);
    let ch = canvas.channels();
    let mut out = canvas.clone();
    for ((px, inc), &w) in out
        .data_mut()
        .chunks_exact_mut(ch)
        .zip(incoming.data().chunks_exact(ch))
        .zip(&weights)
    {
        for (v, &x) in px.iter_mut().zip(inc) {
            *v = mix(*v, x, w);
        }
    }
    Ok(out)
}

#[inline]
fn mix(old: f64, new: f64, w: f64) -> f64 {
    if w >= 1.0 {
        new
    } else if w <= 0.0 {
        old
    } else {
        (old + w * (new - old)).clamp(old.min(new), old.max(new))
    }
}
