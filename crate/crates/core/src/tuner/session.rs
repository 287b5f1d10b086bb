use log::info;
use serde::{Deserialize, Serialize};

use super::SessionConfig;
use crate::fitness::block_output_fitness;
use crate::imaging::{rgb_to_yuv, BayerMosaic, PlanarImage};
use crate::isp::{
    bayer_nr, block_input, demosaic, run_block, BlockData, BlockId, BlockParams, PipelineTuning,
};
use crate::optim::{
    abc_optimize_seeded, chain, warm_start_local, OptimConfig, OptimResult, ParamKind, ParamSpace,
    TuningVector,
};
use crate::refgen::{
    blend_references, sharpening_reference, simulate_capture, synthesize_scene, temporal_fusion,
    Burst, FlatMask, NoiseModel,
};
use crate::{Error, Result};

/// SplitMix64 finalizer over `seed` and a list of stream indices.
pub fn derive_seed(seed: u64, streams: &[u64]) -> u64 {
    let mut z = seed;
    for &s in streams {
        z = z
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(s.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Simulated captures and fixed references of one sensor gain.
#[derive(Debug, Clone)]
pub struct GainData {
    pub index: usize,
    pub gain: f64,
    pub label: String,
    pub noise: NoiseModel,
    pub scene: PlanarImage,
    pub flat: FlatMask,
    pub burst: Burst,
    /// Fused burst blended per the configured weight: the Bayer NR reference.
    pub bayer_ref: BayerMosaic,
    /// Plain average of the whole burst.
    pub fused: BayerMosaic,
}

impl GainData {
    /// Synthesizes the scene and the burst of gain `index`. The scene depends
    /// only on the session seed; the noise differs per gain.
    pub fn new(cfg: &SessionConfig, index: usize) -> Result<Self> {
        let gain = *cfg
            .gains
            .get(index)
            .ok_or_else(|| Error::InvalidConfig(format!("gain index {index} out of range")))?;
        let (scene, flat) = synthesize_scene(&cfg.scene_spec()?, cfg.seed)?;
        let noise = NoiseModel::new(cfg.noise.a, cfg.noise.b)?.at_gain(gain)?;
        let burst = simulate_capture(
            &scene,
            &noise,
            cfg.pattern,
            cfg.burst_frames,
            derive_seed(cfg.seed, &[1, index as u64]),
        )?;
        let fused = temporal_fusion(&burst)?;
        let bayer_ref = if cfg.blend_weight < 1.0 {
            let fewer = temporal_fusion(&burst.truncated(burst.len() - 1)?)?;
            blend_references(&fused, &fewer, cfg.blend_weight)?
        } else {
            fused.clone()
        };
        Ok(Self {
            index,
            gain,
            label: cfg.gain_label(index),
            noise,
            scene,
            flat,
            burst,
            bayer_ref,
            fused,
        })
    }

    /// The capture every block is tuned on.
    pub fn frame(&self) -> &BayerMosaic {
        self.burst.first()
    }

    /// Noise of the fused burst.
    pub fn fused_noise(&self) -> NoiseModel {
        self.noise.averaged(self.burst.len())
    }

    /// Fused burst through the tuned Bayer NR and demosaic, in YUV.
    fn fused_yuv(&self, upstream: &[BlockParams]) -> Result<PlanarImage> {
        let need = |b: BlockId| {
            upstream
                .get(b.index())
                .filter(|p| p.block() == b)
                .ok_or_else(|| Error::MissingUpstream(format!("reference needs a tuned {b}")))
        };
        let nr = bayer_nr(&self.fused, need(BlockId::BayerNr)?, &self.fused_noise())?;
        rgb_to_yuv(&demosaic(&nr, need(BlockId::Demosaic)?)?)
    }

    /// Reference image of `block`. Later blocks need the tunings of the
    /// blocks before them (`upstream[i]` for block `i`).
    pub fn reference(
        &self,
        block: BlockId,
        upstream: &[BlockParams],
        cfg: &SessionConfig,
    ) -> Result<BlockData> {
        Ok(match block {
            BlockId::BayerNr => BlockData::Bayer(self.bayer_ref.clone()),
            BlockId::Demosaic => BlockData::Image(self.scene.clone()),
            BlockId::YuvNr => BlockData::Image(self.fused_yuv(upstream)?),
            BlockId::Sharpen => {
                let y = self.fused_yuv(upstream)?.extract_channel(0);
                BlockData::Image(sharpening_reference(&y, &cfg.sharpen_ref, &self.flat)?)
            }
        })
    }
}

/// How the optimizer is started for one block.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// Bee colony then local search.
    TwoStage,
    /// Bee colony only.
    GlobalOnly,
    /// Local search from the given point.
    Warm(TuningVector),
    /// Shortened bee colony seeded with the point, then local search.
    WarmGlobal(TuningVector, f64),
}

/// Tuned parameters of one block with the optimizer record.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTuning {
    pub params: BlockParams,
    pub fitness: f64,
    pub result: OptimResult,
}

/// Seed points placed in every fresh colony: passthrough and mid-range
/// settings, so the tuned result is never worse than either.
fn default_points(block: BlockId, space: &ParamSpace) -> Result<Vec<TuningVector>> {
    [
        BlockParams::passthrough(block),
        BlockParams::mid_range(block),
    ]
    .iter()
    .map(|p| space.encode_clamped(p.values()))
    .collect()
}

/// Local stage after `prior`: moves every integer parameter one step each
/// way from the incumbent, then runs the local search from the best point
/// with what is left of `cfg.budget`.
fn refine<F: FnMut(&[f64]) -> f64>(
    objective: &mut F,
    space: &ParamSpace,
    prior: OptimResult,
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    let mut best = prior.best.clone();
    let mut best_f = prior.best_f;
    let mut evals = 0;
    let mut trace = Vec::new();
    let physical = space.decode(&prior.best)?;
    for (i, spec) in space.specs().iter().enumerate() {
        if spec.kind != ParamKind::Integer {
            continue;
        }
        for step in [-1.0, 1.0] {
            let v = physical[i] + step;
            if v < spec.prior_min.ceil() || v > spec.prior_max.floor() || evals + 1 >= cfg.budget {
                continue;
            }
            let mut x = best.as_slice().to_vec();
            x[i] = spec.normalize(v)?;
            let f = objective(&x);
            evals += 1;
            if f < best_f {
                best_f = f;
                best = TuningVector::projected(x);
                trace.push((evals, f));
            }
        }
    }
    if trace.last().map(|t| t.0) != Some(evals) && evals > 0 {
        trace.push((evals, best_f));
    }
    let probe = OptimResult {
        best: best.clone(),
        best_f,
        evals_used: evals,
        trace,
    };
    let local_cfg = OptimConfig {
        budget: cfg.budget - evals,
        ..cfg.clone()
    };
    let local = warm_start_local(objective, &best, &local_cfg)?;
    Ok(chain(chain(prior, probe), local))
}

fn decode(block: BlockId, space: &ParamSpace, x: &TuningVector) -> Result<BlockParams> {
    let v = space.decode(x)?;
    BlockParams::new(block, [v[0], v[1], v[2], v[3]])
}

/// Tunes `block` on `mosaic` against `reference` with the upstream blocks
/// frozen at `upstream`.
#[allow(clippy::too_many_arguments)]
pub fn tune_block(
    block: BlockId,
    mosaic: &BayerMosaic,
    reference: &BlockData,
    upstream: &[BlockParams],
    nm: &NoiseModel,
    space: &ParamSpace,
    cfg: &OptimConfig,
    start: &Start,
) -> Result<BlockTuning> {
    if space.dim() != 4 {
        return Err(Error::InvalidConfig(format!(
            "{block} space must have 4 parameters"
        )));
    }
    let input = block_input(block, mosaic, upstream, nm)?;
    let mut objective = |x: &[f64]| -> f64 {
        let run = || -> Result<f64> {
            let params = decode(block, space, &TuningVector::projected(x.to_vec()))?;
            block_output_fitness(block, &run_block(&input, &params, nm)?, reference)
        };
        run().unwrap_or(f64::INFINITY)
    };
    let result = match start {
        Start::TwoStage => {
            let global = abc_optimize_seeded(
                &mut objective,
                4,
                &cfg.global_stage(),
                &default_points(block, space)?,
            )?;
            refine(&mut objective, space, global, &cfg.local_stage())?
        }
        Start::GlobalOnly => {
            abc_optimize_seeded(&mut objective, 4, cfg, &default_points(block, space)?)?
        }
        Start::Warm(x) => {
            let f = objective(x.as_slice());
            let start = OptimResult {
                best: x.clone(),
                best_f: f,
                evals_used: 1,
                trace: vec![(1, f)],
            };
            let local = OptimConfig {
                budget: cfg.budget.saturating_sub(1).max(1),
                ..cfg.clone()
            };
            refine(&mut objective, space, start, &local)?
        }
        Start::WarmGlobal(x, fraction) => {
            let global_cfg = OptimConfig {
                budget: ((cfg.global_evals() as f64 * fraction).round() as usize)
                    .max(cfg.abc.population),
                ..cfg.clone()
            };
            let global =
                abc_optimize_seeded(&mut objective, 4, &global_cfg, std::slice::from_ref(x))?;
            refine(&mut objective, space, global, &cfg.local_stage())?
        }
    };
    if !result.best_f.is_finite() {
        return Err(Error::Experiment(format!(
            "{block}: no finite fitness found"
        )));
    }
    Ok(BlockTuning {
        params: decode(block, space, &result.best)?,
        fitness: result.best_f,
        result,
    })
}

/// Per-block outcome stored in a ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block: BlockId,
    pub fitness: f64,
    pub evals: usize,
    pub trace: Vec<(usize, f64)>,
}

/// Tuning of every block at one gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainTuning {
    pub gain: f64,
    pub label: String,
    pub tuning: PipelineTuning,
    pub blocks: Vec<BlockRecord>,
}

/// Tunes the four blocks of one gain in pipeline order. With `warm_start`
/// every block starts from the corresponding block of that tuning.
pub fn tune_pipeline(
    data: &GainData,
    cfg: &SessionConfig,
    warm_start: Option<&PipelineTuning>,
) -> Result<GainTuning> {
    let mut tuned: Vec<BlockParams> = Vec::with_capacity(4);
    let mut records = Vec::with_capacity(4);
    for block in BlockId::ALL {
        let space = cfg.space(block)?;
        let base = cfg.optim.get(block);
        let optim = OptimConfig {
            seed: derive_seed(
                base.seed ^ cfg.seed,
                &[2, data.index as u64, block.index() as u64],
            ),
            ..base.clone()
        };
        let (start, optim) = match warm_start {
            None => (Start::TwoStage, optim),
            Some(prev) => {
                let x = space.encode_clamped(prev.get(block).values())?;
                if cfg.regularize_with_global {
                    (Start::WarmGlobal(x, cfg.regularize_global_fraction), optim)
                } else {
                    let local = optim.local_stage();
                    (Start::Warm(x), local)
                }
            }
        };
        let reference = data.reference(block, &tuned, cfg)?;
        let bt = tune_block(
            block,
            data.frame(),
            &reference,
            &tuned,
            &data.noise,
            &space,
            &optim,
            &start,
        )?;
        info!(
            "{} {}: fitness {:.4} after {} evals",
            data.label, block, bt.fitness, bt.result.evals_used
        );
        records.push(BlockRecord {
            block,
            fitness: bt.fitness,
            evals: bt.result.evals_used,
            trace: bt.result.trace,
        });
        tuned.push(bt.params);
    }
    Ok(GainTuning {
        gain: data.gain,
        label: data.label.clone(),
        tuning: PipelineTuning::new(tuned)?,
        blocks: records,
    })
}
