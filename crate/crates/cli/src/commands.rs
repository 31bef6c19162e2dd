use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use rainweave::extraction::enumerate_valid_positions;
use rainweave::image::encode_png;
use rainweave::{
    generate_pairs, load_image, load_mask, sample_rain_patches, transfer, Error, ImageBuffer,
    Patch, PatchBank, RainMask, RainRng, TransferConfig,
};
use serde::Serialize;

use crate::config::{self, ConfigLayer};
use crate::manifest::{
    sha256_file, InputFile, PairEntry, PairsFile, Position, RunManifest, Timing, MANIFEST_FILE,
    PAIRS_DIR, PAIRS_FILE,
};
use crate::staging::Staging;
use crate::CliError;

/// RNG stream used for sampling the patch bank.
pub const BANK_STREAM: u64 = 0;

/// RNG stream for target `i` in `transfer`, or for pair draws in `pairs`.
pub fn target_stream(i: usize) -> u64 {
    i as u64 + 1
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Exemplar rain image (8-bit PNG)
    #[arg(long)]
    pub exemplar: PathBuf,
    /// Rain mask for the exemplar; pixels brighter than 127 mark rain
    #[arg(long)]
    pub mask: PathBuf,
    /// Flat JSON config file with TransferConfig field names
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub layer: ConfigLayer,
}

#[derive(Debug, Clone, Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Rain-free target image(s)
    #[arg(long, required = true, num_args = 1..)]
    pub target: Vec<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PairsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Rain-free target image(s) the clean patches are cut from
    #[arg(long, required = true, num_args = 1..)]
    pub target: Vec<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Number of clean/rain pairs to emit
    #[arg(long)]
    pub count: usize,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Write a montage of sampled residual patches to this PNG
    #[arg(long)]
    pub montage: Option<PathBuf>,
    /// Print the report as JSON
    #[arg(long)]
    pub json: bool,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

fn input(role: &str, path: &Path) -> Result<InputFile, CliError> {
    Ok(InputFile {
        role: role.to_string(),
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

fn load_sources(src: &SourceArgs) -> Result<(TransferConfig, ImageBuffer, RainMask), CliError> {
    let cfg = config::load(&src.layer, src.config.as_deref())?;
    let exemplar = load_image(&src.exemplar)?;
    let mask = load_mask(&src.mask)?;
    if (exemplar.height(), exemplar.width()) != (mask.height(), mask.width()) {
        return Err(Error::Dimension(format!(
            "exemplar {} is {}x{} but mask {} is {}x{}",
            src.exemplar.display(),
            exemplar.height(),
            exemplar.width(),
            src.mask.display(),
            mask.height(),
            mask.width()
        ))
        .into());
    }
    Ok((cfg, exemplar, mask))
}

fn build_bank(
    cfg: &TransferConfig,
    exemplar: &ImageBuffer,
    mask: &RainMask,
) -> Result<PatchBank, CliError> {
    let mut rng = RainRng::stream(cfg.seed, BANK_STREAM);
    Ok(sample_rain_patches(
        exemplar,
        mask,
        cfg.patch_size,
        cfg.coverage_threshold,
        cfg.bank_count,
        &mut rng,
    )?)
}

/// Rebuilds the patch bank a run used from its manifest config and inputs.
pub fn rebuild_bank(
    cfg: &TransferConfig,
    exemplar: &Path,
    mask: &Path,
) -> Result<PatchBank, CliError> {
    build_bank(cfg, &load_image(exemplar)?, &load_mask(mask)?)
}

fn output_name(target: &Path) -> String {
    let stem = target
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "target".into());
    format!("{stem}_rain.png")
}

/// Synthesizes `<stem>_rain.png` for every target plus `manifest.json`.
pub fn cmd_transfer(args: &TransferArgs) -> Result<RunManifest, CliError> {
    let t0 = Instant::now();
    let (cfg, exemplar, mask) = load_sources(&args.source)?;
    let targets = args
        .target
        .iter()
        .map(load_image)
        .collect::<Result<Vec<_>, _>>()?;
    let mut names = HashSet::new();
    for t in &args.target {
        if !names.insert(output_name(t)) {
            return Err(CliError::Config(format!(
                "two targets would both write {}",
                output_name(t)
            )));
        }
    }
    let mut timing = Timing {
        load_ms: ms_since(t0),
        ..Timing::default()
    };

    let t1 = Instant::now();
    let bank = build_bank(&cfg, &exemplar, &mask)?;
    timing.extract_ms = ms_since(t1);

    let t2 = Instant::now();
    let rendered = targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            transfer(
                t,
                &bank,
                &cfg,
                &mut RainRng::stream(cfg.seed, target_stream(i)),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    timing.synthesize_ms = ms_since(t2);

    let t3 = Instant::now();
    let mut inputs = vec![
        input("exemplar", &args.source.exemplar)?,
        input("mask", &args.source.mask)?,
    ];
    for t in &args.target {
        inputs.push(input("target", t)?);
    }
    let mut staging = Staging::new(&args.out)?;
    let mut outputs = Vec::new();
    for (path, img) in args.target.iter().zip(&rendered) {
        outputs.push(staging.write_png(&output_name(path), img)?);
    }
    timing.write_ms = ms_since(t3);

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "transfer".into(),
        seed: cfg.seed,
        config: cfg,
        inputs,
        outputs,
        timing,
    };
    staging.write_json(MANIFEST_FILE, &manifest)?;
    staging.commit()?;
    Ok(manifest)
}

/// Emits `pairs/<k>_clean.png`, `pairs/<k>_rain.png`, `pairs.json` and `manifest.json`.
pub fn cmd_pairs(args: &PairsArgs) -> Result<RunManifest, CliError> {
    let t0 = Instant::now();
    let (cfg, exemplar, mask) = load_sources(&args.source)?;
    let targets = args
        .target
        .iter()
        .map(load_image)
        .collect::<Result<Vec<_>, _>>()?;
    let mut timing = Timing {
        load_ms: ms_since(t0),
        ..Timing::default()
    };

    let t1 = Instant::now();
    let bank = build_bank(&cfg, &exemplar, &mask)?;
    timing.extract_ms = ms_since(t1);

    let t2 = Instant::now();
    let mut rng = RainRng::stream(cfg.seed, target_stream(0));
    let records = generate_pairs(&targets, &bank, args.count, &cfg, &mut rng)?;
    timing.synthesize_ms = ms_since(t2);

    let t3 = Instant::now();
    let mut inputs = vec![
        input("exemplar", &args.source.exemplar)?,
        input("mask", &args.source.mask)?,
    ];
    for t in &args.target {
        inputs.push(input("target", t)?);
    }
    let mut staging = Staging::new(&args.out)?;
    staging.ensure_dir(PAIRS_DIR)?;
    let mut outputs = Vec::with_capacity(2 * records.len());
    let mut entries = Vec::with_capacity(records.len());
    for (k, rec) in records.iter().enumerate() {
        let clean = staging.write_png(
            &format!("{PAIRS_DIR}/{k}_clean.png"),
            &rec.target_patch.to_image()?,
        )?;
        let rain = staging.write_png(
            &format!("{PAIRS_DIR}/{k}_rain.png"),
            &rec.synthetic_patch.to_image()?,
        )?;
        outputs.push(clean.clone());
        outputs.push(rain.clone());
        let src = bank.source_refs()[rec.residual_index];
        entries.push(PairEntry {
            index: k,
            target: args.target[rec.target_index].display().to_string(),
            position: Position {
                row: rec.target_ref.row,
                col: rec.target_ref.col,
            },
            size: rec.target_ref.size,
            residual_index: rec.residual_index,
            residual_source: Position {
                row: src.row,
                col: src.col,
            },
            clean,
            rain,
        });
    }
    staging.write_json(PAIRS_FILE, &PairsFile { records: entries })?;
    timing.write_ms = ms_since(t3);

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "pairs".into(),
        seed: cfg.seed,
        config: cfg,
        inputs,
        outputs,
        timing,
    };
    staging.write_json(MANIFEST_FILE, &manifest)?;
    staging.commit()?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelStats {
    pub min: f64,
    pub max: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InspectReport {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub patch_size: usize,
    pub coverage_threshold: f64,
    pub valid_positions: usize,
    pub mask_coverage: f64,
    /// Number of residual patches the statistics were computed over.
    pub sample_size: usize,
    pub residual_stats: Vec<ChannelStats>,
}

impl fmt::Display for InspectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "exemplar:         {}x{}x{}",
            self.height, self.width, self.channels
        )?;
        writeln!(f, "mask coverage:    {:.4}", self.mask_coverage)?;
        writeln!(
            f,
            "valid positions:  {} (patch {}, threshold {})",
            self.valid_positions, self.patch_size, self.coverage_threshold
        )?;
        writeln!(f, "residual sample:  {} patches", self.sample_size)?;
        for (c, s) in self.residual_stats.iter().enumerate() {
            writeln!(
                f,
                "  channel {c}: min {:+.4}  max {:+.4}  stddev {:.4}",
                s.min, s.max, s.stddev
            )?;
        }
        Ok(())
    }
}

fn residual_stats(bank: &PatchBank) -> Vec<ChannelStats> {
    let ch = bank.channels();
    let mut min = vec![f64::INFINITY; ch];
    let mut max = vec![f64::NEG_INFINITY; ch];
    let mut sum = vec![0.0; ch];
    let mut sum_sq = vec![0.0; ch];
    let mut n = 0usize;
    for p in bank.patches() {
        for px in p.data().chunks_exact(ch) {
            for (c, &v) in px.iter().enumerate() {
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
                sum[c] += v;
                sum_sq[c] += v * v;
            }
            n += 1;
        }
    }
    (0..ch)
        .map(|c| {
            let mean = sum[c] / n as f64;
            let var = (sum_sq[c] / n as f64 - mean * mean).max(0.0);
            ChannelStats {
                min: min[c],
                max: max[c],
                stddev: var.sqrt(),
            }
        })
        .collect()
}

const MONTAGE_COLUMNS: usize = 8;
const MONTAGE_MAX: usize = 64;

/// Residual patches tiled on a black background, each shown as `0.5 + r`.
pub fn montage(bank: &PatchBank) -> Result<ImageBuffer, CliError> {
    let n = bank.len().min(MONTAGE_MAX);
    let p = bank.patch_size();
    let cols = n.min(MONTAGE_COLUMNS);
    let rows = n.div_ceil(MONTAGE_COLUMNS);
    let (h, w) = (rows * (p + 1) + 1, cols * (p + 1) + 1);
    let mut sheet = Patch::zeros(h, w, bank.channels());
    for (k, residual) in bank.patches().iter().take(n).enumerate() {
        let mut tile = residual.as_patch().clone();
        tile.data_mut().iter_mut().for_each(|v| *v += 0.5);
        sheet.paste(
            1 + (k / MONTAGE_COLUMNS) * (p + 1),
            1 + (k % MONTAGE_COLUMNS) * (p + 1),
            &tile,
        )?;
    }
    Ok(sheet.to_image()?)
}

/// Reports how much usable rain the exemplar/mask pair offers.
pub fn cmd_inspect(args: &InspectArgs) -> Result<InspectReport, CliError> {
    let (cfg, exemplar, mask) = load_sources(&args.source)?;
    let valid = enumerate_valid_positions(&mask, cfg.patch_size, cfg.coverage_threshold)?;
    let mut report = InspectReport {
        height: exemplar.height(),
        width: exemplar.width(),
        channels: exemplar.channels(),
        patch_size: cfg.patch_size,
        coverage_threshold: cfg.coverage_threshold,
        valid_positions: valid.len(),
        mask_coverage: mask.coverage(),
        sample_size: 0,
        residual_stats: Vec::new(),
    };
    if valid.is_empty() {
        return Ok(report);
    }
    let bank = build_bank(&cfg, &exemplar, &mask)?;
    report.sample_size = bank.len();
    report.residual_stats = residual_stats(&bank);
    if let Some(path) = &args.montage {
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        encode_png(&montage(&bank)?, &mut tmp)?;
        tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    }
    Ok(report)
}
