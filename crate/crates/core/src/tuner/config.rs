use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::imaging::CfaPattern;
use crate::isp::BlockId;
use crate::optim::{OptimConfig, ParamSpace};
use crate::refgen::{NoiseModel, SceneSpec, SharpenRefConfig};
use crate::{Error, Result};

/// `block → param → [lo, hi]` prior bounds in physical units.
pub type PriorTable = BTreeMap<String, BTreeMap<String, [f64; 2]>>;

/// Optimizer settings for each block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct BlockOptim {
    pub bayer_nr: OptimConfig,
    pub demosaic: OptimConfig,
    pub yuv_nr: OptimConfig,
    pub sharpen: OptimConfig,
}

impl BlockOptim {
    pub fn get(&self, block: BlockId) -> &OptimConfig {
        match block {
            BlockId::BayerNr => &self.bayer_nr,
            BlockId::Demosaic => &self.demosaic,
            BlockId::YuvNr => &self.yuv_nr,
            BlockId::Sharpen => &self.sharpen,
        }
    }

    pub fn get_mut(&mut self, block: BlockId) -> &mut OptimConfig {
        match block {
            BlockId::BayerNr => &mut self.bayer_nr,
            BlockId::Demosaic => &mut self.demosaic,
            BlockId::YuvNr => &mut self.yuv_nr,
            BlockId::Sharpen => &mut self.sharpen,
        }
    }

    /// Same budget for every block.
    pub fn set_budget(&mut self, budget: usize) {
        for b in BlockId::ALL {
            self.get_mut(b).budget = budget;
        }
    }
}

/// Settings of the Bayer NR repeatability experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepeatConfig {
    pub runs: usize,
    /// Evaluations per run, identical for every flow.
    pub budget: usize,
    /// Index into the gain list of the data used.
    pub gain_index: Option<usize>,
    /// Prior bounds of the "with prior" flow, Bayer NR parameters only.
    pub prior: BTreeMap<String, [f64; 2]>,
    /// Reuse one optimizer seed for every run.
    pub same_seed: bool,
}

impl Default for RepeatConfig {
    fn default() -> Self {
        let prior = [
            ("sigma_s", [2.0, 3.0]),
            ("k_r", [1.2, 2.4]),
            ("radius", [2.0, 3.0]),
            ("strength", [0.8, 1.0]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            runs: 10,
            budget: 200,
            gain_index: None,
            prior,
            same_seed: false,
        }
    }
}

fn default_gains() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

/// Everything a tuning session needs. All fields have defaults, so a config
/// file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    /// Scene spec JSON; the built-in chart of `scene_size` when absent.
    /// Relative paths resolve against the config file's directory.
    pub scene: Option<PathBuf>,
    pub scene_size: usize,
    pub pattern: CfaPattern,
    /// Noise at unit gain.
    pub noise: NoiseModel,
    pub gains: Vec<f64>,
    /// One label per gain; `ISO{50·g}` when absent.
    pub gain_labels: Option<Vec<String>>,
    pub burst_frames: usize,
    /// Weight of the full-burst average against the average of one frame
    /// fewer in the Bayer NR reference.
    pub blend_weight: f64,
    pub sharpen_ref: SharpenRefConfig,
    pub optim: BlockOptim,
    /// Prior bounds applied to every tuning run.
    pub priors: PriorTable,
    /// Warm-start every gain above the lowest from the gain below.
    pub regularize: bool,
    /// With `regularize`, keep a shortened global stage seeded with the
    /// lower-gain tuning.
    pub regularize_with_global: bool,
    /// Share of the normal global budget used by that shortened stage.
    pub regularize_global_fraction: f64,
    /// Gain index for the evaluation table; the highest gain when absent.
    pub evaluate_gain_index: Option<usize>,
    pub repeat: RepeatConfig,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            scene: None,
            scene_size: 128,
            pattern: CfaPattern::Rggb,
            noise: NoiseModel {
                a: 3e-4,
                b: 2e-6,
                gain: 1.0,
            },
            gains: default_gains(),
            gain_labels: None,
            burst_frames: 10,
            blend_weight: 1.0,
            sharpen_ref: SharpenRefConfig::default(),
            optim: BlockOptim::default(),
            priors: PriorTable::new(),
            regularize: false,
            regularize_with_global: false,
            regularize_global_fraction: 0.25,
            evaluate_gain_index: None,
            repeat: RepeatConfig::default(),
            out_dir: None,
            seed: 0,
        }
    }
}

impl SessionConfig {
    /// Reads a JSON config; relative scene paths become relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: SessionConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if let (Some(scene), Some(dir)) = (&cfg.scene, path.parent()) {
            if scene.is_relative() {
                cfg.scene = Some(dir.join(scene));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gains.is_empty() {
            return Err(Error::InvalidConfig("at least one gain is required".into()));
        }
        if self.gains.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "gains must be strictly increasing".into(),
            ));
        }
        if self.gains[0] < 1.0 {
            return Err(Error::InvalidConfig("gains must be >= 1".into()));
        }
        if let Some(labels) = &self.gain_labels {
            if labels.len() != self.gains.len() {
                return Err(Error::InvalidConfig(
                    "one label per gain is required".into(),
                ));
            }
        }
        if self.burst_frames == 0 {
            return Err(Error::InvalidConfig(
                "burst_frames must be at least 1".into(),
            ));
        }
        if self.burst_frames == 1 && self.blend_weight < 1.0 {
            return Err(Error::InvalidConfig(
                "blending needs at least 2 frames".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.blend_weight) {
            return Err(Error::InvalidConfig(
                "blend_weight must lie in [0, 1]".into(),
            ));
        }
        if !(self.regularize_global_fraction > 0.0 && self.regularize_global_fraction <= 1.0) {
            return Err(Error::InvalidConfig(
                "regularize_global_fraction must lie in (0, 1]".into(),
            ));
        }
        NoiseModel::new(self.noise.a, self.noise.b)?;
        self.sharpen_ref.validate()?;
        for b in BlockId::ALL {
            self.optim.get(b).validate()?;
            self.space(b)?;
        }
        if self.repeat.runs < 2 {
            return Err(Error::InvalidConfig(
                "repeatability needs at least 2 runs".into(),
            ));
        }
        apply_priors(BlockId::BayerNr.space(), &self.repeat.prior)?;
        for i in [self.evaluate_gain_index, self.repeat.gain_index]
            .into_iter()
            .flatten()
        {
            if i >= self.gains.len() {
                return Err(Error::InvalidConfig(format!("gain index {i} out of range")));
            }
        }
        Ok(())
    }

    pub fn gain_label(&self, index: usize) -> String {
        match &self.gain_labels {
            Some(l) => l[index].clone(),
            None => format!("ISO{}", (50.0 * self.gains[index]).round() as i64),
        }
    }

    pub fn scene_spec(&self) -> Result<SceneSpec> {
        match &self.scene {
            Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
            None => Ok(SceneSpec::chart(self.scene_size, self.scene_size)),
        }
    }

    /// Search space of `block` with the configured priors.
    pub fn space(&self, block: BlockId) -> Result<ParamSpace> {
        if let Some(k) = self.priors.keys().find(|k| BlockId::from_key(k).is_err()) {
            return Err(Error::InvalidConfig(format!(
                "priors for unknown block '{k}'"
            )));
        }
        match self.priors.get(block.key()) {
            Some(p) => apply_priors(block.space(), p),
            None => Ok(block.space()),
        }
    }
}

pub(crate) fn apply_priors(
    mut space: ParamSpace,
    priors: &BTreeMap<String, [f64; 2]>,
) -> Result<ParamSpace> {
    for (name, [lo, hi]) in priors {
        space.set_prior(name, *lo, *hi)?;
    }
    Ok(space)
}
