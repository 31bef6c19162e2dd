//! Writes a synthetic exemplar, its mask and a target scene as PNGs.
//!
//! cargo run -p rainweave --example make_fixtures -- <dir>

use std::path::PathBuf;

use rainweave::fixtures::{clear_scene, rain_exemplar};
use rainweave::image::mask_to_image;
use rainweave::save_image;

fn main() -> rainweave::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let (exemplar, mask) = rain_exemplar(192, 192, 3, 1)?;
    save_image(&exemplar, dir.join("exemplar.png"))?;
    save_image(&mask_to_image(&mask), dir.join("mask.png"))?;
    save_image(&clear_scene(256, 384, 3, 2)?, dir.join("target.png"))?;
    println!("fixtures written to {}", dir.display());
    Ok(())
}
