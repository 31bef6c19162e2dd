#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rainweave::fixtures::{clear_scene, rain_exemplar};
use rainweave::image::mask_to_image;
use rainweave::{save_image, ImageBuffer, RainMask};
use rainweave_cli::commands::SourceArgs;
use rainweave_cli::config::ConfigLayer;

pub struct Inputs {
    pub exemplar: PathBuf,
    pub mask: PathBuf,
    pub targets: Vec<PathBuf>,
}

/// Writes a rain exemplar (`ex_size` square), its mask and `n_targets`
/// clear scenes of `target_h x target_w` into `dir`.
pub fn write_inputs(
    dir: &Path,
    ex_size: usize,
    target_h: usize,
    target_w: usize,
    n_targets: usize,
) -> Inputs {
    let (ex, mask) = rain_exemplar(ex_size, ex_size, 3, 11).unwrap();
    let exemplar = dir.join("exemplar.png");
    let mask_path = dir.join("mask.png");
    save_image(&ex, &exemplar).unwrap();
    save_image(&mask_to_image(&mask), &mask_path).unwrap();
    let targets = (0..n_targets)
        .map(|i| {
            let p = dir.join(format!("scene{i}.png"));
            save_image(
                &clear_scene(target_h, target_w, 3, 100 + i as u64).unwrap(),
                &p,
            )
            .unwrap();
            p
        })
        .collect();
    Inputs {
        exemplar,
        mask: mask_path,
        targets,
    }
}

pub fn write_mask(path: &Path, mask: &RainMask) {
    save_image(&mask_to_image(mask), path).unwrap();
}

pub fn write_image(path: &Path, img: &ImageBuffer) {
    save_image(img, path).unwrap();
}

pub fn source(inputs: &Inputs, layer: ConfigLayer) -> SourceArgs {
    SourceArgs {
        exemplar: inputs.exemplar.clone(),
        mask: inputs.mask.clone(),
        config: None,
        layer,
    }
}

pub fn small_layer(seed: u64) -> ConfigLayer {
    ConfigLayer {
        patch_size: Some(16),
        overlap: Some(3),
        bank_count: Some(100),
        seed: Some(seed),
        ..Default::default()
    }
}

pub fn list_dir(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}
