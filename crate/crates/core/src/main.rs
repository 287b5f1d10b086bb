use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use isptune::tuner::cli::{
    run_calibrate, run_evaluate, run_make_ref, run_repeat, run_smoothness, run_synth, run_tune,
    FlatInput, TuneMode,
};
use isptune::tuner::{Manifest, SessionConfig, TuningLadder};

#[derive(Parser)]
#[command(
    name = "isptune",
    version,
    about = "Automatic parameter tuning for a simulated camera ISP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Session config JSON; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's out_dir, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the session seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<(SessionConfig, PathBuf)> {
        let mut cfg = match &self.config {
            Some(p) => {
                SessionConfig::load(p).with_context(|| format!("loading {}", p.display()))?
            }
            None => SessionConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render the test chart and its flat-region mask.
    Synth(Common),
    /// Fit the noise model from flat fields (simulated unless --flat is given).
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Flat capture as PATH=LEVEL (PGM-16 mosaic); repeat per frame.
        #[arg(long = "flat")]
        flats: Vec<String>,
        /// Levels of simulated flats.
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.4,0.8")]
        levels: Vec<f64>,
        /// Frames per simulated flat level.
        #[arg(long, default_value_t = 8)]
        frames: usize,
        /// Gain (index into the config's gain list) of simulated flats.
        #[arg(long, default_value_t = 0)]
        gain_index: usize,
    },
    /// Write the capture, fused burst and per-block references.
    MakeRef {
        #[command(flatten)]
        common: Common,
        /// Ladder whose tuning at this gain drives the upstream blocks.
        #[arg(long)]
        ladder: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        gain_index: usize,
    },
    /// Tune one gain or the whole gain ladder.
    Tune {
        #[command(flatten)]
        common: Common,
        /// Tune every configured gain.
        #[arg(long)]
        ladder: bool,
        /// Warm-start each gain from the gain below, skipping the global stage.
        #[arg(long)]
        regularize: bool,
        /// Like --regularize but keep a shortened global stage.
        #[arg(long)]
        regularize_with_global: bool,
        /// Gain index for single-gain tuning.
        #[arg(long, default_value_t = 0)]
        gain_index: usize,
        /// Overrides the evaluation budget of every block.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Compare passthrough, hand-proxy and automatic tunings per block.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ladder: PathBuf,
    },
    /// Repeat Bayer NR tuning under three optimizer flows.
    Repeat {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Parameter jumps between adjacent gains of a ladder.
    Smoothness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ladder: PathBuf,
    },
}

fn parse_flat(s: &str) -> Result<FlatInput> {
    let Some((path, level)) = s.rsplit_once('=') else {
        bail!("--flat expects PATH=LEVEL, got '{s}'");
    };
    Ok(FlatInput {
        path: PathBuf::from(path),
        level: level
            .parse()
            .with_context(|| format!("bad level in '{s}'"))?,
    })
}

fn load_ladder(path: &Path) -> Result<TuningLadder> {
    TuningLadder::load(path).with_context(|| format!("loading ladder {}", path.display()))
}

fn run(cli: Cli) -> Result<Manifest> {
    Ok(match cli.command {
        Command::Synth(common) => {
            let (cfg, out) = common.load()?;
            run_synth(&cfg, &out)?
        }
        Command::Calibrate {
            common,
            flats,
            levels,
            frames,
            gain_index,
        } => {
            let (cfg, out) = common.load()?;
            let flats = flats
                .iter()
                .map(|s| parse_flat(s))
                .collect::<Result<Vec<_>>>()?;
            run_calibrate(&cfg, &out, &flats, &levels, frames, gain_index)?
        }
        Command::MakeRef {
            common,
            ladder,
            gain_index,
        } => {
            let (cfg, out) = common.load()?;
            let tuning = match ladder {
                Some(p) => {
                    let ladder = load_ladder(&p)?;
                    let gain = *cfg
                        .gains
                        .get(gain_index)
                        .context("gain index out of range")?;
                    let g = ladder
                        .gains
                        .into_iter()
                        .find(|g| g.gain == gain)
                        .with_context(|| format!("ladder has no tuning for gain {gain}"))?;
                    Some(g.tuning)
                }
                None => None,
            };
            run_make_ref(&cfg, &out, tuning.as_ref(), gain_index)?
        }
        Command::Tune {
            common,
            ladder,
            regularize,
            regularize_with_global,
            gain_index,
            budget,
        } => {
            let (mut cfg, out) = common.load()?;
            cfg.regularize |= regularize || regularize_with_global;
            cfg.regularize_with_global |= regularize_with_global;
            if let Some(b) = budget {
                cfg.optim.set_budget(b);
            }
            if cfg.regularize && !ladder {
                bail!("--regularize needs --ladder");
            }
            let mode = if ladder {
                TuneMode::Ladder
            } else {
                TuneMode::Single(gain_index)
            };
            run_tune(&cfg, &out, mode)?.1
        }
        Command::Evaluate { common, ladder } => {
            let (cfg, out) = common.load()?;
            run_evaluate(&cfg, &out, &load_ladder(&ladder)?)?
        }
        Command::Repeat {
            common,
            runs,
            budget,
        } => {
            let (mut cfg, out) = common.load()?;
            if let Some(r) = runs {
                cfg.repeat.runs = r;
            }
            if let Some(b) = budget {
                cfg.repeat.budget = b;
            }
            run_repeat(&cfg, &out)?
        }
        Command::Smoothness { common, ladder } => {
            let (_, out) = common.load()?;
            run_smoothness(&out, &load_ladder(&ladder)?)?
        }
    })
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let manifest = run(Cli::parse())?;
    for a in &manifest.artifacts {
        println!("{}", a.path);
    }
    Ok(())
}
