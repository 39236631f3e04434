mod config;
mod curate;
mod eval;
mod ingest;
mod out;
mod pair;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hypercurate_core::{Error, Result};

use config::RunConfig;

/// Curates non-overlapping multi-temporal hyperspectral patches and builds
/// downstream benchmarks from them.
#[derive(Debug, Parser)]
#[command(name = "hypercurate", version)]
struct Cli {
    /// Flat TOML configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairTask {
    Multilabel,
    Segmentation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalTask {
    Multilabel,
    Segmentation,
    Regression,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a tile manifest and write a normalized catalog.
    Ingest {
        manifest: PathBuf,
        /// Open every raster and check it against its entry.
        #[arg(long)]
        check_rasters: bool,
    },
    /// Extract non-overlapping patch locations from a catalog.
    Curate {
        catalog: PathBuf,
        /// Positive integer or "inf".
        #[arg(long)]
        beam: Option<String>,
        #[arg(long)]
        patch_px: Option<u32>,
        /// Also write masked patch cubes under `<out>/patches`.
        #[arg(long)]
        export: bool,
    },
    /// Pair curated locations with a land-cover raster.
    Pair {
        manifest: PathBuf,
        labels: PathBuf,
        #[arg(long, value_enum)]
        task: PairTask,
        /// Class aggregation table (TOML).
        #[arg(long)]
        classes: Option<PathBuf>,
        #[arg(long)]
        min_fraction: Option<f64>,
        /// nearest or majority.
        #[arg(long)]
        resampling: Option<String>,
        #[arg(long)]
        rebalance: Option<usize>,
    },
    /// Score predictions against targets.
    Eval {
        #[arg(long, value_enum)]
        task: EvalTask,
        /// JSON lines (multilabel, regression) or a mask directory.
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        /// Class aggregation table; sets the class count.
        #[arg(long)]
        classes: Option<PathBuf>,
        #[arg(long, conflicts_with = "classes")]
        n_classes: Option<usize>,
        /// macro or micro.
        #[arg(long)]
        f1_mode: Option<String>,
        /// pooled or per-image.
        #[arg(long)]
        miou_mode: Option<String>,
        /// Per-parameter training-set means, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        baseline_means: Option<Vec<f64>>,
    },
    /// Dataset statistics of a patch manifest.
    Stats { manifest: PathBuf },
    /// Certify a manifest: pairwise non-overlap and, given the catalog,
    /// member containment.
    Verify {
        manifest: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Write a synthetic tile manifest, optionally with rasters and labels.
    Synth {
        #[arg(long, default_value_t = 100)]
        tiles: usize,
        #[arg(long, default_value_t = 8)]
        bands: u32,
        /// Tile side range in pixels, as MIN,MAX.
        #[arg(long, value_delimiter = ',', default_values_t = [150, 300])]
        tile_px: Vec<u32>,
        #[arg(long, default_value_t = 30_000.0)]
        region_m: f64,
        /// Write an HSRC raster per tile under `<out>/tiles`.
        #[arg(long)]
        rasters: bool,
        /// Write `<out>/labels.hsrc` using codes from this aggregation table.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}

/// Progress messages on stderr.
#[derive(Debug, Clone, Copy)]
pub struct Reporter {
    quiet: bool,
}

impl Reporter {
    pub fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.curation.worker_count = w;
    }
    let rep = Reporter { quiet: cli.quiet };
    let out = cli.out;
    match cli.command {
        Command::Ingest { manifest, check_rasters } => {
            cfg.check_rasters |= check_rasters;
            cfg.validate()?;
            ingest::run(&manifest, &cfg, &out, rep)
        }
        Command::Curate { catalog, beam, patch_px, export } => {
            if let Some(b) = beam {
                cfg.curation.beam = config::parse_beam(&b)?;
            }
            if let Some(p) = patch_px {
                cfg.curation.patch_px = p;
            }
            cfg.validate()?;
            curate::curate(&catalog, &cfg, export, &out, rep)
        }
        Command::Pair { manifest, labels, task, classes, min_fraction, resampling, rebalance } => {
            if classes.is_some() {
                cfg.pair.classes = classes;
            }
            if let Some(f) = min_fraction {
                cfg.pair.min_fraction = f;
            }
            if let Some(r) = resampling {
                cfg.pair.resampling = config::parse_resampling(&r)?;
            }
            if rebalance.is_some() {
                cfg.pair.rebalance_count = rebalance;
            }
            cfg.validate()?;
            pair::run(&manifest, &labels, task, &cfg, &out, rep)
        }
        Command::Eval { task, predictions, targets, classes, n_classes, f1_mode, miou_mode, baseline_means } => {
            if let Some(m) = f1_mode {
                cfg.eval.f1_mode = config::parse_f1_mode(&m)?;
            }
            if let Some(m) = miou_mode {
                cfg.eval.miou_mode = config::parse_miou_mode(&m)?;
            }
            if baseline_means.is_some() {
                cfg.eval.baseline_means = baseline_means;
            }
            if classes.is_some() {
                cfg.pair.classes = classes;
            }
            cfg.validate()?;
            eval::run(task, &predictions, &targets, n_classes, &cfg, &out, rep)
        }
        Command::Stats { manifest } => curate::stats(&manifest, &out, rep),
        Command::Verify { manifest, catalog } => curate::verify(&manifest, catalog.as_deref(), &out, rep),
        Command::Synth { tiles, bands, tile_px, region_m, rasters, labels } => {
            let [lo, hi] = tile_px[..] else {
                return Err(Error::Validation(format!("--tile-px takes MIN,MAX, got {tile_px:?}")));
            };
            let params = synth::SynthParams { tiles, bands, tile_px: (lo, hi), region_m, rasters, labels };
            synth::run(&params, &cfg, &out, rep)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
