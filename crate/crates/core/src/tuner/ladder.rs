use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::session::{tune_pipeline, GainData, GainTuning};
use super::SessionConfig;
use crate::isp::BlockId;
use crate::{Error, Result};

/// Tunings for a list of increasing sensor gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningLadder {
    pub regularized: bool,
    pub seed: u64,
    pub gains: Vec<GainTuning>,
}

impl TuningLadder {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Total objective evaluations at every gain above the lowest.
    pub fn evals_above_lowest(&self) -> usize {
        self.gains
            .iter()
            .skip(1)
            .flat_map(|g| &g.blocks)
            .map(|b| b.evals)
            .sum()
    }

    /// `gain,label,block,fitness,evals` rows.
    pub fn write_fitness_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gain", "label", "block", "fitness", "evals"])?;
        for g in &self.gains {
            for b in &g.blocks {
                w.write_record([
                    g.gain.to_string(),
                    g.label.clone(),
                    b.block.key().to_string(),
                    b.fitness.to_string(),
                    b.evals.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Convergence traces as `label,block,eval_index,best_f` rows.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "block", "eval_index", "best_f"])?;
        for g in &self.gains {
            for b in &g.blocks {
                for (i, f) in &b.trace {
                    w.write_record([
                        g.label.clone(),
                        b.block.key().to_string(),
                        i.to_string(),
                        f.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Tunes every configured gain in ascending order. With `cfg.regularize`
/// each gain above the lowest starts from the tuning of the gain below.
pub fn tune_ladder(cfg: &SessionConfig) -> Result<TuningLadder> {
    cfg.validate()?;
    let mut gains: Vec<GainTuning> = Vec::with_capacity(cfg.gains.len());
    for index in 0..cfg.gains.len() {
        let data = GainData::new(cfg, index)?;
        let warm = if cfg.regularize {
            gains.last().map(|g| &g.tuning)
        } else {
            None
        };
        gains.push(tune_pipeline(&data, cfg, warm)?);
    }
    Ok(TuningLadder {
        regularized: cfg.regularize,
        seed: cfg.seed,
        gains,
    })
}

/// Absolute normalized parameter change between adjacent gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    /// `block.param` names.
    pub params: Vec<String>,
    /// `(lower label, higher label)` of each adjacent pair.
    pub pairs: Vec<(String, String)>,
    /// `jumps[pair][param]`.
    pub jumps: Vec<Vec<f64>>,
}

impl TransitionTable {
    /// Mean jump over every pair and parameter.
    pub fn mean(&self) -> f64 {
        let all: Vec<f64> = self.jumps.iter().flatten().copied().collect();
        all.iter().sum::<f64>() / all.len() as f64
    }

    /// Mean jump over every pair and the parameters of one block.
    pub fn block_mean(&self, block: BlockId) -> f64 {
        let prefix = format!("{}.", block.key());
        let cols: Vec<usize> = (0..self.params.len())
            .filter(|&i| self.params[i].starts_with(&prefix))
            .collect();
        let total: f64 = self
            .jumps
            .iter()
            .flat_map(|row| cols.iter().map(|&c| row[c]))
            .sum();
        total / (cols.len() * self.jumps.len()) as f64
    }

    /// `from,to,param,jump` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from", "to", "param", "jump"])?;
        for (pair, row) in self.pairs.iter().zip(&self.jumps) {
            for (p, j) in self.params.iter().zip(row) {
                w.write_record([pair.0.as_str(), pair.1.as_str(), p, &j.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Parameter jumps between adjacent gains, each parameter normalized by its
/// physical range.
pub fn transition_smoothness(ladder: &TuningLadder) -> Result<TransitionTable> {
    if ladder.gains.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "smoothness needs at least 2 gains, got {}",
            ladder.gains.len()
        )));
    }
    let mut params = Vec::new();
    let mut ranges = Vec::new();
    for b in BlockId::ALL {
        for s in b.param_specs() {
            params.push(format!("{}.{}", b.key(), s.name));
            ranges.push((s.physical_min, s.physical_max));
        }
    }
    let normalized = |g: &super::GainTuning| -> Vec<f64> {
        g.tuning
            .blocks()
            .iter()
            .flat_map(|p| p.values().to_vec())
            .zip(&ranges)
            .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
            .collect()
    };
    let mut pairs = Vec::new();
    let mut jumps = Vec::new();
    for w in ladder.gains.windows(2) {
        let (a, b) = (normalized(&w[0]), normalized(&w[1]));
        pairs.push((w[0].label.clone(), w[1].label.clone()));
        jumps.push(a.iter().zip(&b).map(|(x, y)| (y - x).abs()).collect());
    }
    Ok(TransitionTable {
        params,
        pairs,
        jumps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isp::{BlockParams, PipelineTuning};

    fn small_cfg() -> SessionConfig {
        let mut cfg = SessionConfig {
            scene_size: 32,
            gains: vec![1.0, 2.0, 4.0],
            burst_frames: 4,
            ..SessionConfig::default()
        };
        cfg.optim.set_budget(120);
        cfg
    }

    fn flat_ladder(values: &[f64]) -> TuningLadder {
        let gains = values
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut tuning = PipelineTuning::passthrough();
                tuning.set(BlockParams::new(BlockId::BayerNr, [s, 2.0, 1.0, 0.5]).unwrap());
                GainTuning {
                    gain: (1 << i) as f64,
                    label: format!("G{i}"),
                    tuning,
                    blocks: Vec::new(),
                }
            })
            .collect();
        TuningLadder {
            regularized: false,
            seed: 0,
            gains,
        }
    }

    #[test]
    fn single_gain_ladder_matches_pipeline() {
        let mut cfg = small_cfg();
        cfg.gains = vec![2.0];
        let ladder = tune_ladder(&cfg).unwrap();
        let direct = tune_pipeline(&GainData::new(&cfg, 0).unwrap(), &cfg, None).unwrap();
        assert_eq!(ladder.gains, vec![direct]);
    }

    #[test]
    fn json_round_trip_is_byte_exact() {
        let ladder = tune_ladder(&small_cfg()).unwrap();
        let text = ladder.to_json().unwrap();
        let back = TuningLadder::from_json(&text).unwrap();
        assert_eq!(back, ladder);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn regularized_ladder_spends_fewer_evaluations() {
        let cfg = small_cfg();
        let plain = tune_ladder(&cfg).unwrap();
        let reg = tune_ladder(&SessionConfig {
            regularize: true,
            ..cfg.clone()
        })
        .unwrap();
        assert!(reg.regularized);
        assert!(reg.evals_above_lowest() < plain.evals_above_lowest());
        assert_eq!(reg.gains[0], plain.gains[0]);
    }

    #[test]
    fn smoothness_of_constant_ladder_is_zero() {
        let t = transition_smoothness(&flat_ladder(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(t.pairs.len(), 2);
        assert_eq!(t.params.len(), 16);
        assert_eq!(t.mean(), 0.0);
    }

    #[test]
    fn smoothness_normalizes_by_range() {
        // sigma_s spans [0.5, 3]: a change of 1.25 is half the range.
        let t = transition_smoothness(&flat_ladder(&[1.0, 2.25])).unwrap();
        let col = t
            .params
            .iter()
            .position(|p| p == "bayer_nr.sigma_s")
            .unwrap();
        assert!((t.jumps[0][col] - 0.5).abs() < 1e-12);
        assert!((t.block_mean(BlockId::BayerNr) - 0.125).abs() < 1e-12);
        assert_eq!(t.block_mean(BlockId::Sharpen), 0.0);
    }

    #[test]
    fn smoothness_needs_two_gains() {
        assert!(transition_smoothness(&flat_ladder(&[1.0])).is_err());
    }

    #[test]
    fn csv_outputs_have_one_row_per_block() {
        let ladder = tune_ladder(&small_cfg()).unwrap();
        let mut buf = Vec::new();
        ladder.write_fitness_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 * 4);
        let mut buf = Vec::new();
        ladder.write_trace_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().count() > 12);
    }
}
