//! Image and mask buffers, 8-bit PNG codec, and patch access.
//!
//! Pixel values live in the unit interval as `f32` so that every 8-bit code
//! `k` maps to `k / 255` and back without loss. Patches copied out of an
//! image are widened to `f64`, which keeps patch arithmetic (residuals,
//! sums with target content) exact for codec-derived values.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Seek, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Top-left corner and side length of a square patch window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatchRef {
    pub row: usize,
    pub col: usize,
    pub size: usize,
}

impl PatchRef {
    pub fn new(row: usize, col: usize, size: usize) -> Self {
        PatchRef { row, col, size }
    }

    pub fn fits(&self, height: usize, width: usize) -> bool {
        self.size >= 1 && self.row + self.size <= height && self.col + self.size <= width
    }

    pub(crate) fn check(&self, height: usize, width: usize) -> Result<()> {
        if self.fits(height, width) {
            Ok(())
        } else {
            Err(Error::Bounds {
                row: self.row,
                col: self.col,
                size: self.size,
                height,
                width,
            })
        }
    }
}

/// Row-major `height x width x channels` image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::dimension(format!(
                "image must be at least 1x1, got {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::dimension(format!(
                "image must have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::dimension(format!(
                "expected {} values for a {height}x{width}x{channels} image, got {}",
                height * width * channels,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Format(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(ImageBuffer {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds an image by evaluating `f(row, col, channel)`; results are clamped to `[0, 1]`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..channels {
                    data.push(f(r, c, ch).clamp(0.0, 1.0));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Result<Self> {
        Self::from_fn(height, width, channels, |_, _, _| value)
    }

    /// Builds an image from 8-bit codes, `v = code / 255`.
    pub fn from_codes(height: usize, width: usize, channels: usize, codes: &[u8]) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            codes.iter().map(|&k| decode_code(k)).collect(),
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    /// Quantizes every value to its 8-bit code.
    pub fn to_codes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| encode_value(v as f64)).collect()
    }

    /// Copies the square window described by `r`.
    pub fn get_patch(&self, r: PatchRef) -> Result<Patch> {
        r.check(self.height, self.width)?;
        let mut data = Vec::with_capacity(r.size * r.size * self.channels);
        for row in r.row..r.row + r.size {
            let start = (row * self.width + r.col) * self.channels;
            let end = start + r.size * self.channels;
            data.extend(self.data[start..end].iter().map(|&v| v as f64));
        }
        Ok(Patch {
            height: r.size,
            width: r.size,
            channels: self.channels,
            data,
        })
    }

    pub(crate) fn from_f64_clamped(
        height: usize,
        width: usize,
        channels: usize,
        values: impl Iterator<Item = f64>,
    ) -> Result<Self> {
        let data = values.map(|v| v.clamp(0.0, 1.0) as f32).collect();
        Self::new(height, width, channels, data)
    }
}

/// A rectangular block of real values, row-major with interleaved channels.
///
/// Used for image patches, residual layers, and canvas regions; values are
/// not range-restricted.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub(crate) height: usize,
    pub(crate) width: usize,
    pub(crate) channels: usize,
    pub(crate) data: Vec<f64>,
}

impl Patch {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::dimension(format!(
                "patch must be non-empty, got {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::dimension(format!(
                "expected {} values for a {height}x{width}x{channels} patch, got {}",
                height * width * channels,
                data.len()
            )));
        }
        Ok(Patch {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Patch {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    pub fn set(&mut self, row: usize, col: usize, channel: usize, v: f64) {
        self.data[(row * self.width + col) * self.channels + channel] = v;
    }

    pub fn same_shape(&self, other: &Patch) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub(crate) fn shape_str(&self) -> String {
        format!("{}x{}x{}", self.height, self.width, self.channels)
    }

    /// Copies the `rows x cols` sub-block starting at (`row`, `col`).
    pub fn crop(&self, row: usize, col: usize, rows: usize, cols: usize) -> Result<Patch> {
        if rows == 0 || cols == 0 || row + rows > self.height || col + cols > self.width {
            return Err(Error::dimension(format!(
                "crop {rows}x{cols} at ({row}, {col}) exceeds {} patch",
                self.shape_str()
            )));
        }
        let mut data = Vec::with_capacity(rows * cols * self.channels);
        for r in row..row + rows {
            let start = (r * self.width + col) * self.channels;
            data.extend_from_slice(&self.data[start..start + cols * self.channels]);
        }
        Ok(Patch {
            height: rows,
            width: cols,
            channels: self.channels,
            data,
        })
    }

    /// Writes `src` into this block with its top-left at (`row`, `col`).
    pub fn paste(&mut self, row: usize, col: usize, src: &Patch) -> Result<()> {
        if src.channels != self.channels
            || row + src.height > self.height
            || col + src.width > self.width
        {
            return Err(Error::dimension(format!(
                "cannot paste {} patch at ({row}, {col}) into {}",
                src.shape_str(),
                self.shape_str()
            )));
        }
        for r in 0..src.height {
            let dst = ((row + r) * self.width + col) * self.channels;
            let s = r * src.width * src.channels;
            self.data[dst..dst + src.width * src.channels]
                .copy_from_slice(&src.data[s..s + src.width * src.channels]);
        }
        Ok(())
    }

    /// Converts to an image, clamping every value into `[0, 1]`.
    pub fn to_image(&self) -> Result<ImageBuffer> {
        ImageBuffer::from_f64_clamped(
            self.height,
            self.width,
            self.channels,
            self.data.iter().copied(),
        )
    }
}

/// Boolean rain map over an exemplar (`true` = rain).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RainMask {
    height: usize,
    width: usize,
    data: Vec<bool>,
}

impl RainMask {
    pub fn new(height: usize, width: usize, data: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::dimension(format!(
                "mask {height}x{width} needs {} entries, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(RainMask {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Fraction of rain pixels over the whole mask.
    pub fn coverage(&self) -> f64 {
        self.count_true() as f64 / self.data.len() as f64
    }
}

pub fn decode_code(code: u8) -> f32 {
    code as f32 / 255.0
}

/// Quantizes a unit-interval value to 8 bits, rounding halves up.
pub fn encode_value(v: f64) -> u8 {
    let scaled = (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor();
    scaled.min(255.0) as u8
}

struct DecodedPng {
    height: usize,
    width: usize,
    channels: usize,
    codes: Vec<u8>,
}

fn invalid_data(e: impl std::fmt::Display) -> Error {
    Error::Io(io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
}

fn decode_png<R: BufRead + Seek>(reader: R) -> Result<DecodedPng> {
    let decoder = png::Decoder::new(reader);
    let mut reader = decoder.read_info().map_err(|e| match e {
        png::DecodingError::IoError(io) => Error::Io(io),
        other => invalid_data(other),
    })?;
    let (color, depth) = reader.output_color_type();
    if depth != png::BitDepth::Eight {
        return Err(Error::Format(format!(
            "bit depth {} is not supported (need 8)",
            depth as u8
        )));
    }
    let (src_channels, keep) = match color {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => {
            return Err(Error::Format(
                "color type indexed is not supported (need grayscale or RGB)".into(),
            ))
        }
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| match e {
        png::DecodingError::IoError(io) => Error::Io(io),
        other => invalid_data(other),
    })?;
    let (width, height) = (info.width as usize, info.height as usize);
    let mut codes = Vec::with_capacity(width * height * keep);
    for row in 0..height {
        let line = &buf[row * info.line_size..row * info.line_size + width * src_channels];
        for px in line.chunks_exact(src_channels) {
            codes.extend_from_slice(&px[..keep]);
        }
    }
    Ok(DecodedPng {
        height,
        width,
        channels: keep,
        codes,
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

/// Loads an 8-bit grayscale or RGB PNG; alpha is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let png = decode_png(open(path.as_ref())?)?;
    ImageBuffer::from_codes(png.height, png.width, png.channels, &png.codes)
}

/// Decodes an in-memory PNG with the same rules as [`load_image`].
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    let png = decode_png(io::Cursor::new(bytes))?;
    ImageBuffer::from_codes(png.height, png.width, png.channels, &png.codes)
}

/// A pixel is rain when its largest channel code exceeds 127.
pub fn load_mask(path: impl AsRef<Path>) -> Result<RainMask> {
    let png = decode_png(open(path.as_ref())?)?;
    let data = png
        .codes
        .chunks_exact(png.channels)
        .map(|px| px.iter().copied().max().unwrap_or(0) > 127)
        .collect();
    RainMask::new(png.height, png.width, data)
}

pub fn encode_png<W: Write>(img: &ImageBuffer, w: W) -> Result<()> {
    let mut encoder = png::Encoder::new(w, img.width as u32, img.height as u32);
    encoder.set_color(if img.channels == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(encoding_error)?;
    writer
        .write_image_data(&img.to_codes())
        .map_err(encoding_error)?;
    writer.finish().map_err(encoding_error)
}

fn encoding_error(e: png::EncodingError) -> Error {
    match e {
        png::EncodingError::IoError(io) => Error::Io(io),
        other => Error::Io(io::Error::other(other.to_string())),
    }
}

/// Writes an 8-bit PNG with `code = round_half_up(v * 255)`.
pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    encode_png(img, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Mask rendered as a white-on-black grayscale image.
pub fn mask_to_image(mask: &RainMask) -> ImageBuffer {
    let data = mask
        .data
        .iter()
        .map(|&b| if b { 1.0 } else { 0.0 })
        .collect();
    ImageBuffer::new(mask.height, mask.width, 1, data).expect("mask dimensions are valid")
}
