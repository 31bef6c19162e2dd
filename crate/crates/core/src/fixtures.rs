//! Procedural stand-ins for exemplar photographs, used by tests, benches and demos.

use crate::error::Result;
use crate::image::{ImageBuffer, RainMask};
use crate::rng::RainRng;

/// A dim scene crossed by slanted bright streaks, plus a mask brushed over
/// the rectangle `[h/8, 7h/8) x [w/8, 7w/8)` where the streaks are densest.
pub fn rain_exemplar(
    height: usize,
    width: usize,
    channels: usize,
    seed: u64,
) -> Result<(ImageBuffer, RainMask)> {
    let mut rng = RainRng::new(seed);
    let mut streak = vec![0.0f32; height * width];
    let n = (height * width / 60).max(1);
    for _ in 0..n {
        let r0 = rng.index(height) as f64;
        let c0 = rng.index(width) as f64;
        let len = 6.0 + 14.0 * rng.unit_f64();
        let strength = 0.25 + 0.5 * rng.unit_f64() as f32;
        // Mostly vertical, leaning right.
        let (dr, dc) = (1.0, 0.25 + 0.1 * rng.unit_f64());
        let steps = len as usize;
        for s in 0..steps {
            let r = (r0 + dr * s as f64) as usize;
            let c = (c0 + dc * s as f64) as usize;
            if r < height && c < width {
                let v = &mut streak[r * width + c];
                *v = (*v + strength).min(0.8);
            }
        }
    }
    let img = ImageBuffer::from_fn(height, width, channels, |r, c, ch| {
        let base = 0.15 + 0.25 * (r as f32 / height as f32) + 0.05 * ch as f32;
        base + streak[r * width + c]
    })?;
    let mask = RainMask::from_fn(height, width, |r, c| {
        r >= height / 8 && r < height - height / 8 && c >= width / 8 && c < width - width / 8
    })?;
    Ok((img, mask))
}

/// A smooth rain-free scene: gradients with a few flat rectangles.
pub fn clear_scene(height: usize, width: usize, channels: usize, seed: u64) -> Result<ImageBuffer> {
    let mut rng = RainRng::new(seed);
    let rects: Vec<(usize, usize, usize, usize, f32)> = (0..4)
        .map(|_| {
            let r = rng.index(height);
            let c = rng.index(width);
            let h = 1 + rng.index(height / 2 + 1);
            let w = 1 + rng.index(width / 2 + 1);
            (r, c, h, w, rng.unit_f64() as f32)
        })
        .collect();
    ImageBuffer::from_fn(height, width, channels, |r, c, ch| {
        let mut v = 0.2 + 0.5 * (c as f32 / width as f32) + 0.1 * ch as f32;
        for &(r0, c0, h, w, level) in &rects {
            if r >= r0 && r < r0 + h && c >= c0 && c < c0 + w {
                v = 0.5 * v + 0.5 * level;
            }
        }
        // Snap to the 8-bit grid so saved fixtures reload bit-identically.
        (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
    })
}
