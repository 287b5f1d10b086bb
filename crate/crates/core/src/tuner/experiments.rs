use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::apply_priors;
use super::session::{derive_seed, tune_block, GainData, Start};
use super::SessionConfig;
use crate::fitness::{mad_8bit, FitnessReport, ReportRow};
use crate::imaging::{io, yuv_to_rgb, ColorDomain, PlanarImage};
use crate::isp::{block_input, run_block, BlockData, BlockId, BlockParams, PipelineTuning};
use crate::optim::OptimConfig;
use crate::Result;

const HAND_PROXY: &str = include_str!("../../data/hand_proxy.json");

/// The fixed manual tuning shipped with the crate, used as the hand-tuned
/// baseline in evaluation tables.
pub fn hand_proxy() -> PipelineTuning {
    serde_json::from_str(HAND_PROXY).expect("bundled hand proxy tuning is valid")
}

/// Optimizer flows compared by the repeatability experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flow {
    Global,
    GlobalLocal,
    GlobalLocalPrior,
}

impl Flow {
    pub const ALL: [Flow; 3] = [Flow::Global, Flow::GlobalLocal, Flow::GlobalLocalPrior];

    pub fn name(self) -> &'static str {
        match self {
            Flow::Global => "Global",
            Flow::GlobalLocal => "Global->Local",
            Flow::GlobalLocalPrior => "Global->Local w/ Prior",
        }
    }
}

/// Spread of the final Bayer NR MAD over repeated runs of one flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRow {
    pub flow: Flow,
    pub ave: f64,
    pub std: f64,
    pub runs: Vec<f64>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Tunes Bayer NR `cfg.repeat.runs` times per flow with distinct optimizer
/// seeds and equal budgets, reporting the mean and sample standard deviation
/// of the final MAD against the reference.
pub fn repeatability_experiment(cfg: &SessionConfig) -> Result<Vec<RepeatRow>> {
    cfg.validate()?;
    let rc = &cfg.repeat;
    let index = rc.gain_index.unwrap_or(cfg.gains.len() - 1);
    let data = GainData::new(cfg, index)?;
    let block = BlockId::BayerNr;
    let reference = data.reference(block, &[], cfg)?;
    let BlockData::Bayer(ref_mosaic) = &reference else {
        unreachable!("Bayer NR reference is a mosaic")
    };
    let base_space = cfg.space(block)?;
    let prior_space = apply_priors(base_space.clone(), &rc.prior)?;
    let mut rows = Vec::with_capacity(3);
    for flow in Flow::ALL {
        let mut runs = Vec::with_capacity(rc.runs);
        for run in 0..rc.runs {
            let seed = derive_seed(cfg.seed, &[3, if rc.same_seed { 0 } else { run as u64 }]);
            let optim = OptimConfig {
                budget: rc.budget,
                seed,
                ..cfg.optim.bayer_nr.clone()
            };
            let (space, start) = match flow {
                Flow::Global => (&base_space, Start::GlobalOnly),
                Flow::GlobalLocal => (&base_space, Start::TwoStage),
                Flow::GlobalLocalPrior => (&prior_space, Start::TwoStage),
            };
            let bt = tune_block(
                block,
                data.frame(),
                &reference,
                &[],
                &data.noise,
                space,
                &optim,
                &start,
            )?;
            let out = crate::isp::bayer_nr(data.frame(), &bt.params, &data.noise)?;
            runs.push(mad_8bit(&out, ref_mosaic)?);
        }
        let (ave, std) = mean_std(&runs);
        rows.push(RepeatRow {
            flow,
            ave,
            std,
            runs,
        });
    }
    Ok(rows)
}

/// `flow,ave,std` rows.
pub fn write_repeat_csv<W: Write>(out: W, rows: &[RepeatRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["flow", "ave", "std"])?;
    for r in rows {
        w.write_record([r.flow.name(), &r.ave.to_string(), &r.std.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Block outputs for the three tunings compared in an evaluation.
#[derive(Debug, Clone)]
pub struct BlockComparison {
    pub block: BlockId,
    pub reference: BlockData,
    /// `(label, output)` for Not, Hand-proxy and Auto.
    pub outputs: Vec<(String, BlockData)>,
}

/// Evaluation of one gain: metric rows and the compared outputs.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub label: String,
    pub reports: Vec<FitnessReport>,
    pub comparisons: Vec<BlockComparison>,
}

impl Evaluation {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.reports.iter().map(FitnessReport::row).collect()
    }

    pub fn report(&self, block: BlockId, label: &str) -> Option<&FitnessReport> {
        self.reports
            .iter()
            .find(|r| r.block == block && r.label == label)
    }
}

pub const NOT_TUNED: &str = "Not";
pub const HAND_TUNED: &str = "Hand-proxy";
pub const AUTO_TUNED: &str = "Auto";

/// Compares each block's output against its reference under passthrough
/// ("Not"), the hand proxy and `auto`. Every block is evaluated in
/// isolation: its input and reference come from the `auto` upstream blocks.
pub fn evaluate_tuning(
    auto: &PipelineTuning,
    data: &GainData,
    cfg: &SessionConfig,
) -> Result<Evaluation> {
    let hand = hand_proxy();
    let upstream = auto.blocks();
    let mut reports = Vec::new();
    let mut comparisons = Vec::new();
    for block in BlockId::ALL {
        let input = block_input(block, data.frame(), upstream, &data.noise)?;
        let reference = data.reference(block, upstream, cfg)?;
        let mut outputs = Vec::new();
        for (label, params) in [
            (NOT_TUNED, BlockParams::passthrough(block)),
            (HAND_TUNED, hand.get(block).clone()),
            (AUTO_TUNED, auto.get(block).clone()),
        ] {
            let out = run_block(&input, &params, &data.noise)?;
            reports.push(FitnessReport::compute(block, label, &out, &reference)?);
            outputs.push((label.to_string(), out));
        }
        comparisons.push(BlockComparison {
            block,
            reference,
            outputs,
        });
    }
    Ok(Evaluation {
        label: data.label.clone(),
        reports,
        comparisons,
    })
}

fn displayable(d: &BlockData, block: BlockId) -> Result<PlanarImage> {
    match d {
        BlockData::Bayer(m) => Ok(m.to_plane()),
        BlockData::Image(img) => match (img.domain(), block) {
            (ColorDomain::Yuv, BlockId::Sharpen) => Ok(img.extract_channel(0)),
            (ColorDomain::Yuv, _) => yuv_to_rgb(img),
            _ => Ok(img.clone()),
        },
    }
}

/// Writes, per block, a strip of equal crops: reference, Not, Hand-proxy,
/// Auto. Returns the written paths.
pub fn write_crops(eval: &Evaluation, dir: &Path, crop: usize) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for c in &eval.comparisons {
        let images = std::iter::once(&c.reference)
            .chain(c.outputs.iter().map(|(_, o)| o))
            .map(|d| displayable(d, c.block))
            .collect::<Result<Vec<_>>>()?;
        let (w, h) = (images[0].width(), images[0].height());
        let size = crop.min(w).min(h);
        let (x0, y0) = ((w - size) / 2, (h - size) / 2);
        let strip = PlanarImage::hstack(
            &images
                .iter()
                .map(|i| i.crop(x0, y0, size, size).map(|v| v.clamp(0.0, 1.0)))
                .collect::<Vec<_>>(),
        )?;
        let ext = if strip.channels() == 1 { "pgm" } else { "ppm" };
        let path = dir.join(format!("crops_{}.{ext}", c.block.key()));
        io::write_image(&path, &strip)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Checks an ordering the evaluation table is expected to show and returns a
/// description of the first violation.
pub fn auto_beats_not(eval: &Evaluation, ssim_tol: f64) -> std::result::Result<(), String> {
    for block in BlockId::ALL {
        let (Some(not), Some(auto)) = (
            eval.report(block, NOT_TUNED),
            eval.report(block, AUTO_TUNED),
        ) else {
            return Err(format!("{block}: missing rows"));
        };
        if !(auto.mad_8bit < not.mad_8bit) {
            return Err(format!(
                "{block}: MAD auto {} vs not {}",
                auto.mad_8bit, not.mad_8bit
            ));
        }
        if auto.ssim + ssim_tol < not.ssim || auto.ms_ssim + ssim_tol < not.ms_ssim {
            return Err(format!(
                "{block}: SSIM auto {}/{} vs not {}/{}",
                auto.ssim, auto.ms_ssim, not.ssim, not.ms_ssim
            ));
        }
    }
    Ok(())
}
