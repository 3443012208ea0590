use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roadspeed::commands::{self, CorpusKind};
use roadspeed::formats::read_json;
use roadspeed::{Failure, RunConfig, EXIT_FAILURE};
use roadspeed_core::detection::SvmParams;
use roadspeed_core::font::DIGITS;
use roadspeed_core::ocr::TrainParams;
use serde::Deserialize;

/// Vehicle speed from a single calibrated roadside camera.
#[derive(Parser)]
#[command(name = "roadspeed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Command input: marker file, scenario, run configuration or
    /// training parameters.
    #[arg(long, env = "ROADSPEED_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for anything random; commands that are deterministic anyway
    /// accept and ignore it.
    #[arg(long, env = "ROADSPEED_SEED")]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, env = "ROADSPEED_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the road-to-image homography to surveyed markers.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Marker file; alternative to --config.
        markers: Option<PathBuf>,
    },
    /// Render a synthetic scene, or a labeled training corpus.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write PNG copies of the frames.
        #[arg(long)]
        png: bool,
        /// Write a training corpus instead of a scene.
        #[arg(long, value_enum)]
        corpus: Option<CorpusArg>,
        /// Samples per class for plate corpora, glyphs for glyph corpora.
        #[arg(long, default_value_t = 500)]
        count: usize,
    },
    /// Estimate speeds over a frame sequence.
    Run {
        #[command(flatten)]
        common: Common,
        /// Frame files or directories; default is the configured `frames`.
        frames: Vec<PathBuf>,
    },
    /// Train the plate classifier or the character network.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        kind: ModelArg,
        /// Corpus directory of `<label>_<n>` images.
        #[arg(long, env = "ROADSPEED_CORPUS")]
        corpus: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusArg {
    Plate,
    Glyph,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Plate,
    Ocr,
}

/// Optional `train --config` file.
#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct TrainConfig {
    svm: SvmParams,
    mlp: TrainParams,
    alphabet: Option<String>,
}

fn out_or(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Calibrate { common, markers } => {
            let input = markers
                .or(common.config.clone())
                .ok_or_else(|| Failure::new("missing input", "give a marker file or --config"))?;
            let out = out_or(&common, "homography.json");
            let cal = commands::calibrate(&input, &out)?;
            if cal.warning {
                eprintln!("warning: marker residual RMS {:.3} px exceeds 2 px", cal.rms_px);
            }
            println!(
                "calibration={} markers={} rms_px={:.6e}",
                out.display(),
                cal.markers.len(),
                cal.rms_px
            );
        }
        Command::Simulate {
            common,
            png,
            corpus,
            count,
        } => {
            let out = out_or(&common, "sim");
            if let Some(kind) = corpus {
                let kind = match kind {
                    CorpusArg::Plate => CorpusKind::Plate,
                    CorpusArg::Glyph => CorpusKind::Glyph,
                };
                let n = commands::simulate_corpus(kind, count, common.seed.unwrap_or(0), &out)?;
                println!("corpus={} files={n}", out.display());
            } else {
                let spec = commands::load_scenario(common.config.as_deref(), common.seed)?;
                let s = commands::simulate(&spec, &out, png)?;
                for w in &s.warnings {
                    eprintln!("warning: {w}");
                }
                println!(
                    "scenario={} frames={} track_rows={} speed_kmh={}",
                    out.display(),
                    s.frames,
                    s.track_rows,
                    s.truth.speed_kmh
                );
            }
        }
        Command::Run { common, frames } => {
            let cfg = match &common.config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            let out = out_or(&common, "out");
            let s = commands::run(&cfg, &frames, &out)?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "report={} tracks={} frames_read={} frames_skipped={}",
                out.join("report.csv").display(),
                s.tracks,
                s.frames_read,
                s.frames_skipped
            );
        }
        Command::Train { common, kind, corpus } => {
            let mut tc: TrainConfig = match &common.config {
                Some(p) => read_json(p)?,
                None => TrainConfig::default(),
            };
            if let Some(seed) = common.seed {
                tc.svm.seed = seed;
                tc.mlp.seed = seed;
            }
            match kind {
                ModelArg::Plate => {
                    let out = out_or(&common, "plate_model.json");
                    let s = commands::train_plate(&corpus, &tc.svm, &out)?;
                    println!(
                        "model={} n_train={} n_test={} miss_rate={:.4} error_rate={:.4}",
                        out.display(),
                        s.n_train,
                        s.n_test,
                        s.miss_rate,
                        s.error_rate
                    );
                }
                ModelArg::Ocr => {
                    let out = out_or(&common, "ocr_model.json");
                    let alphabet = tc.alphabet.as_deref().unwrap_or(DIGITS);
                    let s = commands::train_ocr(&corpus, alphabet, &tc.mlp, &out)?;
                    println!(
                        "model={} n_train={} n_test={} accuracy={:.4}",
                        out.display(),
                        s.n_train,
                        s.n_test,
                        s.accuracy
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(EXIT_FAILURE as u8)
        }
    }
}
