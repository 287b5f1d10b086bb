use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use super::experiments::{
    evaluate_tuning, repeatability_experiment, write_crops, write_repeat_csv,
};
use super::ladder::{transition_smoothness, tune_ladder, TuningLadder};
use super::session::{derive_seed, tune_pipeline, GainData};
use super::SessionConfig;
use crate::fitness::write_report_csv;
use crate::imaging::{io, yuv_to_rgb, BayerMosaic, ColorDomain, PlanarImage};
use crate::isp::{BlockData, BlockId, PipelineTuning};
use crate::refgen::{calibrate_noise_model, simulate_capture, Burst, NoiseModel};
use crate::{Error, Result};

/// One file written by a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub path: String,
    pub kind: String,
    pub seed: u64,
}

/// Index of everything a command wrote, saved as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub artifacts: Vec<Artifact>,
}

struct Output<'a> {
    dir: &'a Path,
    manifest: Manifest,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path, command: &str, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir,
            manifest: Manifest {
                command: command.to_string(),
                seed,
                artifacts: Vec::new(),
            },
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str, kind: &str, seed: u64) {
        info!("wrote {}", self.dir.join(name).display());
        self.manifest.artifacts.push(Artifact {
            path: name.to_string(),
            kind: kind.to_string(),
            seed,
        });
    }

    fn csv(
        &mut self,
        name: &str,
        kind: &str,
        seed: u64,
        f: impl FnOnce(BufWriter<File>) -> Result<()>,
    ) -> Result<()> {
        f(BufWriter::new(File::create(self.path(name))?))?;
        self.record(name, kind, seed);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, kind: &str, seed: u64, value: &T) -> Result<()> {
        std::fs::write(self.path(name), serde_json::to_string_pretty(value)? + "\n")?;
        self.record(name, kind, seed);
        Ok(())
    }

    fn image(&mut self, name: &str, kind: &str, seed: u64, img: &PlanarImage) -> Result<()> {
        io::write_image(&self.path(name), img)?;
        self.record(name, kind, seed);
        Ok(())
    }

    fn mosaic(&mut self, name: &str, kind: &str, seed: u64, m: &BayerMosaic) -> Result<()> {
        io::write_mosaic(&self.path(name), m)?;
        self.record(name, kind, seed);
        Ok(())
    }

    fn finish(self) -> Result<Manifest> {
        std::fs::write(
            self.dir.join("manifest.json"),
            serde_json::to_string_pretty(&self.manifest)? + "\n",
        )?;
        Ok(self.manifest)
    }
}

fn gain_seed(cfg: &SessionConfig, index: usize) -> u64 {
    derive_seed(cfg.seed, &[1, index as u64])
}

/// Writes the scene, its flat mask and the scene spec.
pub fn run_synth(cfg: &SessionConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let data_spec = cfg.scene_spec()?;
    let (scene, flat) = crate::refgen::synthesize_scene(&data_spec, cfg.seed)?;
    let mut o = Output::new(out, "synth", cfg.seed)?;
    o.image("scene.ppm", "scene", cfg.seed, &scene)?;
    io::write_mask(
        &o.path("flat_mask.pgm"),
        flat.width(),
        flat.height(),
        flat.data(),
    )?;
    o.record("flat_mask.pgm", "flat_mask", cfg.seed);
    o.json("scene.json", "scene_spec", cfg.seed, &data_spec)?;
    o.finish()
}

/// A flat-field capture on disk with its known mean level.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatInput {
    pub path: PathBuf,
    pub level: f64,
}

#[derive(Serialize)]
struct CalibrationOutput {
    fitted: NoiseModel,
    /// Model the flats were simulated from, when they were simulated.
    simulated_from: Option<NoiseModel>,
    levels: Vec<f64>,
}

/// Fits the noise model from flat captures. Without `flats`, flat bursts at
/// `levels` are simulated from the configured model at gain `gain_index`.
pub fn run_calibrate(
    cfg: &SessionConfig,
    out: &Path,
    flats: &[FlatInput],
    levels: &[f64],
    frames: usize,
    gain_index: usize,
) -> Result<Manifest> {
    cfg.validate()?;
    let mut o = Output::new(out, "calibrate", cfg.seed)?;
    let (pairs, truth) = if flats.is_empty() {
        let gain = *cfg
            .gains
            .get(gain_index)
            .ok_or_else(|| Error::InvalidConfig(format!("gain index {gain_index} out of range")))?;
        let truth = NoiseModel::new(cfg.noise.a, cfg.noise.b)?.at_gain(gain)?;
        let size = cfg.scene_size;
        let pairs = levels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let clean = PlanarImage::filled(size, size, ColorDomain::LinearRgb, l);
                let seed = derive_seed(cfg.seed, &[4, i as u64]);
                simulate_capture(&clean, &truth, cfg.pattern, frames.max(1), seed).map(|b| (b, l))
            })
            .collect::<Result<Vec<_>>>()?;
        (pairs, Some(truth))
    } else {
        let mut groups: Vec<(f64, Vec<BayerMosaic>)> = Vec::new();
        for f in flats {
            let m = io::read_mosaic(&f.path)?;
            match groups.iter_mut().find(|(l, _)| *l == f.level) {
                Some((_, v)) => v.push(m),
                None => groups.push((f.level, vec![m])),
            }
        }
        let pairs = groups
            .into_iter()
            .map(|(l, frames)| Burst::new(frames).map(|b| (b, l)))
            .collect::<Result<Vec<_>>>()?;
        (pairs, None)
    };
    let fitted = calibrate_noise_model(&pairs)?;
    let result = CalibrationOutput {
        fitted: match truth {
            Some(t) => NoiseModel {
                a: fitted.a / t.gain,
                b: fitted.b / (t.gain * t.gain),
                gain: t.gain,
            },
            None => fitted,
        },
        simulated_from: truth,
        levels: pairs.iter().map(|p| p.1).collect(),
    };
    o.json("noise_model.json", "noise_model", cfg.seed, &result)?;
    o.finish()
}

fn yuv_as_rgb(d: &BlockData) -> Result<PlanarImage> {
    match d {
        BlockData::Image(img) if img.domain() == ColorDomain::Yuv => {
            yuv_to_rgb(img).map(|i| clamp_image(&i))
        }
        BlockData::Image(img) => Ok(img.clone()),
        BlockData::Bayer(m) => Ok(m.to_plane()),
    }
}

fn clamp_image(img: &PlanarImage) -> PlanarImage {
    img.map(|v| v.clamp(0.0, 1.0))
}

/// Writes the capture, the fused burst and every block reference for one
/// gain. Later references use `upstream` (passthrough when absent) for the
/// blocks before them.
pub fn run_make_ref(
    cfg: &SessionConfig,
    out: &Path,
    upstream: Option<&PipelineTuning>,
    gain_index: usize,
) -> Result<Manifest> {
    cfg.validate()?;
    let data = GainData::new(cfg, gain_index)?;
    let seed = gain_seed(cfg, gain_index);
    let tuning = upstream
        .cloned()
        .unwrap_or_else(PipelineTuning::passthrough);
    let mut o = Output::new(out, "make-ref", cfg.seed)?;
    o.mosaic("frame.pgm", "capture", seed, data.frame())?;
    o.mosaic("fused.pgm", "fused_burst", seed, &data.fused)?;
    for block in BlockId::ALL {
        let reference = data.reference(block, tuning.blocks(), cfg)?;
        match (&reference, block) {
            (BlockData::Bayer(m), _) => o.mosaic("ref_bayer_nr.pgm", "reference", seed, m)?,
            (BlockData::Image(img), BlockId::Sharpen) => {
                o.image("ref_sharpen.pgm", "reference", seed, &clamp_image(img))?
            }
            (_, b) => {
                let name = format!("ref_{}.ppm", b.key());
                o.image(&name, "reference", seed, &yuv_as_rgb(&reference)?)?
            }
        }
    }
    io::write_mask(
        &o.path("flat_mask.pgm"),
        data.flat.width(),
        data.flat.height(),
        data.flat.data(),
    )?;
    o.record("flat_mask.pgm", "flat_mask", cfg.seed);
    o.finish()
}

/// What `tune` covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TuneMode {
    /// One gain, by index.
    Single(usize),
    /// Every configured gain.
    Ladder,
}

/// Tunes and writes `ladder.json`, `fitness.csv` and `traces.csv`.
pub fn run_tune(
    cfg: &SessionConfig,
    out: &Path,
    mode: TuneMode,
) -> Result<(TuningLadder, Manifest)> {
    cfg.validate()?;
    let ladder = match mode {
        TuneMode::Ladder => tune_ladder(cfg)?,
        TuneMode::Single(index) => {
            let data = GainData::new(cfg, index)?;
            TuningLadder {
                regularized: false,
                seed: cfg.seed,
                gains: vec![tune_pipeline(&data, cfg, None)?],
            }
        }
    };
    let mut o = Output::new(out, "tune", cfg.seed)?;
    ladder.save(&o.path("ladder.json"))?;
    o.record("ladder.json", "ladder", cfg.seed);
    o.csv("fitness.csv", "fitness", cfg.seed, |w| {
        ladder.write_fitness_csv(w)
    })?;
    o.csv("traces.csv", "traces", cfg.seed, |w| {
        ladder.write_trace_csv(w)
    })?;
    if ladder.gains.len() >= 2 {
        let table = transition_smoothness(&ladder)?;
        o.csv("smoothness.csv", "smoothness", cfg.seed, |w| {
            table.write_csv(w)
        })?;
    }
    Ok((ladder, o.finish()?))
}

/// Writes the evaluation table and comparison crops for one gain of a
/// ladder (the configured evaluation gain, else the highest).
pub fn run_evaluate(cfg: &SessionConfig, out: &Path, ladder: &TuningLadder) -> Result<Manifest> {
    cfg.validate()?;
    let index = cfg.evaluate_gain_index.unwrap_or(cfg.gains.len() - 1);
    let gain = cfg.gains[index];
    let tuned = ladder
        .gains
        .iter()
        .find(|g| g.gain == gain)
        .ok_or_else(|| Error::InvalidConfig(format!("ladder has no tuning for gain {gain}")))?;
    let data = GainData::new(cfg, index)?;
    let eval = evaluate_tuning(&tuned.tuning, &data, cfg)?;
    let seed = gain_seed(cfg, index);
    let mut o = Output::new(out, "evaluate", cfg.seed)?;
    o.csv("table1.csv", "evaluation_table", seed, |w| {
        write_report_csv(w, &eval.reports)
    })?;
    for p in write_crops(&eval, out, 64)? {
        let name = p
            .file_name()
            .expect("crop file name")
            .to_string_lossy()
            .into_owned();
        o.record(&name, "crops", seed);
    }
    o.finish()
}

/// Runs the repeatability experiment; writes `table2.csv` and the per-run
/// values in `repeat_runs.csv`.
pub fn run_repeat(cfg: &SessionConfig, out: &Path) -> Result<Manifest> {
    let rows = repeatability_experiment(cfg)?;
    let mut o = Output::new(out, "repeat", cfg.seed)?;
    o.csv("table2.csv", "repeatability_table", cfg.seed, |w| {
        write_repeat_csv(w, &rows)
    })?;
    o.csv("repeat_runs.csv", "repeatability_runs", cfg.seed, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["flow", "run", "mad"])?;
        for r in &rows {
            for (i, v) in r.runs.iter().enumerate() {
                c.write_record([r.flow.name(), &i.to_string(), &v.to_string()])?;
            }
        }
        c.flush()?;
        Ok(())
    })?;
    o.finish()
}

/// Writes adjacent-gain parameter jumps and per-block means of a ladder.
pub fn run_smoothness(out: &Path, ladder: &TuningLadder) -> Result<Manifest> {
    let table = transition_smoothness(ladder)?;
    let mut o = Output::new(out, "smoothness", ladder.seed)?;
    o.csv("smoothness.csv", "smoothness", ladder.seed, |w| {
        table.write_csv(w)
    })?;
    o.csv(
        "smoothness_summary.csv",
        "smoothness_summary",
        ladder.seed,
        |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["block", "mean_jump"])?;
            for b in BlockId::ALL {
                c.write_record([b.key(), &table.block_mean(b).to_string()])?;
            }
            c.write_record(["all", &table.mean().to_string()])?;
            c.flush()?;
            Ok(())
        },
    )?;
    o.finish()
}
