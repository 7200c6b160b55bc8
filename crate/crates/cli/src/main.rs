//! Command line front end for the synthetic thermal image pipeline.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error, 3 I/O error.
//! `validate` additionally exits 2 when the scanned dataset has invalid
//! label lines. Progress and counters go to standard error; stdout carries
//! only the requested report output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermoforge::Error;
use thermoforge::config::parse_config;
use thermoforge::metrics::{evaluate, format_report};
use thermoforge::pipeline::{GenerationOptions, preview, run_generation, validate_dataset};

#[derive(Parser)]
#[command(
    name = "thermoforge",
    version,
    about = "Generate synthetic thermal aerial images over real backgrounds, \
             with automatic annotations and detection metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full generation pipeline from a config file.
    Generate {
        /// Pipeline config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip images whose manifest row and output files already exist.
        #[arg(long)]
        resume: bool,
        /// Write sampled scene configurations as JSON lines to this path.
        #[arg(long, value_name = "PATH")]
        dump_configs: Option<PathBuf>,
        /// Also write per-image binary mask PNGs.
        #[arg(long)]
        mask_png: bool,
        /// Log per-image failures and keep generating instead of aborting.
        #[arg(long)]
        keep_going: bool,
        /// Worker threads (default: one per core).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Scan an images/labels tree pair and report hygiene problems.
    Validate {
        images_dir: PathBuf,
        labels_dir: PathBuf,
        /// Emit the report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate predictions against ground truth labels (mAP50, mAP50-95).
    Eval {
        gt_dir: PathBuf,
        pred_dir: PathBuf,
        /// IoU threshold for the P/R/mAP columns.
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Emit the report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Generate one composite plus per-channel debug dumps for a background.
    Preview {
        /// Pipeline config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Background id (relative image path without extension).
        #[arg(long)]
        background: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 1,
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn load_config(
    path: &PathBuf,
    seed: Option<u64>,
) -> Result<thermoforge::config::PipelineConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Generate {
            config,
            seed,
            resume,
            dump_configs,
            mask_png,
            keep_going,
            threads,
        } => {
            let config = load_config(&config, seed)?;
            let options = GenerationOptions {
                resume,
                write_masks: mask_png,
                dump_configs,
                threads,
                keep_going,
            };
            run_generation(&config, &options)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            images_dir,
            labels_dir,
            json,
        } => {
            let report = validate_dataset(&images_dir, &labels_dir)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                println!(
                    "images: {}  labels: {}  orphan labels: {}  orphan images: {}  invalid lines: {}",
                    report.images_scanned,
                    report.labels_scanned,
                    report.orphan_labels.len(),
                    report.orphan_images.len(),
                    report.invalid_lines.len()
                );
                for orphan in &report.orphan_labels {
                    println!("orphan label: {orphan}");
                }
                for orphan in &report.orphan_images {
                    println!("orphan image: {orphan}");
                }
                for line in &report.invalid_lines {
                    println!("invalid: {line}");
                }
                print!("classes:");
                for (class, count) in &report.class_histogram {
                    print!(" {class}={count}");
                }
                println!();
                if let Some(stats) = &report.bbox_area_stats {
                    println!(
                        "bbox area (normalized): count={} min={:.6} mean={:.6} max={:.6}",
                        stats.count, stats.min, stats.mean, stats.max
                    );
                }
            }
            if report.is_clean() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Eval {
            gt_dir,
            pred_dir,
            iou,
            json,
        } => {
            let report = evaluate(&gt_dir, &pred_dir, iou)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                print!("{}", format_report(&report));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Preview { config, background } => {
            let config = load_config(&config, None)?;
            let out = preview(&config, &background)?;
            eprintln!("preview written to {}", out.directory.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
