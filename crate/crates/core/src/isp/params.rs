use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::optim::{ParamKind, ParamSpace, ParamSpec};
use crate::{Error, Result};

/// A pipeline stage. Declaration order is pipeline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockId {
    BayerNr,
    Demosaic,
    YuvNr,
    Sharpen,
}

/// `(name, min, max, kind, passthrough value)`.
type Row = (&'static str, f64, f64, ParamKind, f64);

const C: ParamKind = ParamKind::Continuous;
const I: ParamKind = ParamKind::Integer;

const BAYER_NR: [Row; 4] = [
    ("sigma_s", 0.5, 3.0, C, 1.0),
    ("k_r", 0.0, 8.0, C, 2.0),
    ("radius", 1.0, 3.0, I, 1.0),
    ("strength", 0.0, 1.0, C, 0.0),
];
const DEMOSAIC: [Row; 4] = [
    ("t_g", 0.0, 0.5, C, 0.0),
    ("fc_window", 0.0, 2.0, I, 0.0),
    ("fc_strength", 0.0, 1.0, C, 0.0),
    ("zipper", 0.0, 1.0, C, 0.0),
];
const YUV_NR: [Row; 4] = [
    ("sigma_y", 0.0, 0.2, C, 0.0),
    ("sigma_c", 0.0, 0.3, C, 0.0),
    ("sigma_s", 0.5, 4.0, C, 1.0),
    ("strength", 0.0, 1.0, C, 0.0),
];
const SHARPEN: [Row; 4] = [
    ("sigma_u", 0.5, 3.0, C, 1.0),
    ("coring", 0.0, 0.05, C, 0.0),
    ("gain", 0.0, 4.0, C, 0.0),
    ("overshoot", 0.0, 0.5, C, 0.0),
];

impl BlockId {
    pub const ALL: [BlockId; 4] = [
        BlockId::BayerNr,
        BlockId::Demosaic,
        BlockId::YuvNr,
        BlockId::Sharpen,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Stable identifier used in files.
    pub fn key(self) -> &'static str {
        match self {
            BlockId::BayerNr => "bayer_nr",
            BlockId::Demosaic => "demosaic",
            BlockId::YuvNr => "yuv_nr",
            BlockId::Sharpen => "sharpen",
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.key() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown block '{key}'")))
    }

    fn rows(self) -> &'static [Row; 4] {
        match self {
            BlockId::BayerNr => &BAYER_NR,
            BlockId::Demosaic => &DEMOSAIC,
            BlockId::YuvNr => &YUV_NR,
            BlockId::Sharpen => &SHARPEN,
        }
    }

    pub fn param_names(self) -> [&'static str; 4] {
        self.rows().map(|r| r.0)
    }

    /// Physical ranges of the block parameters, with priors equal to them.
    pub fn param_specs(self) -> Vec<ParamSpec> {
        self.rows()
            .iter()
            .map(|&(name, lo, hi, kind, _)| {
                ParamSpec::new(name, lo, hi, kind).expect("static table")
            })
            .collect()
    }

    pub fn space(self) -> ParamSpace {
        ParamSpace::new(self.param_specs())
    }

    /// Blocks that must be tuned before this one.
    pub fn upstream(self) -> &'static [BlockId] {
        &Self::ALL[..self.index()]
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockId::BayerNr => "BayerNR",
            BlockId::Demosaic => "Demosaic",
            BlockId::YuvNr => "YuvNR",
            BlockId::Sharpen => "Sharpen",
        })
    }
}

/// Physical parameter values of one block, in table order.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    block: BlockId,
    values: [f64; 4],
}

impl BlockParams {
    /// Checks every value against its physical range.
    pub fn new(block: BlockId, values: [f64; 4]) -> Result<Self> {
        for (&v, &(name, lo, hi, _, _)) in values.iter().zip(block.rows()) {
            if !(v >= lo && v <= hi) {
                return Err(Error::OutOfBounds {
                    name: format!("{}.{name}", block.key()),
                    value: v,
                    min: lo,
                    max: hi,
                });
            }
        }
        Ok(Self { block, values })
    }

    /// Settings under which the block returns its input unchanged.
    pub fn passthrough(block: BlockId) -> Self {
        Self {
            block,
            values: block.rows().map(|r| r.4),
        }
    }

    /// Centre of every physical range, integers rounded.
    pub fn mid_range(block: BlockId) -> Self {
        Self {
            block,
            values: block.rows().map(|(_, lo, hi, kind, _)| {
                let m = 0.5 * (lo + hi);
                if kind == ParamKind::Integer {
                    m.round()
                } else {
                    m
                }
            }),
        }
    }

    /// Builds from `name → value`; every name must be present exactly once.
    pub fn from_map(block: BlockId, map: &BTreeMap<String, f64>) -> Result<Self> {
        if map.len() != 4 {
            return Err(Error::InvalidParameter(format!(
                "{} expects 4 parameters, got {}",
                block.key(),
                map.len()
            )));
        }
        let mut values = [0.0; 4];
        for (slot, name) in values.iter_mut().zip(block.param_names()) {
            *slot = *map.get(name).ok_or_else(|| {
                Error::InvalidParameter(format!("{}: missing '{name}'", block.key()))
            })?;
        }
        Self::new(block, values)
    }

    pub fn block(&self) -> BlockId {
        self.block
    }

    pub fn values(&self) -> &[f64; 4] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.block
            .param_names()
            .iter()
            .position(|&n| n == name)
            .map(|i| self.values[i])
    }

    pub(crate) fn require(&self, block: BlockId) -> Result<()> {
        if self.block != block {
            return Err(Error::WrongBlock {
                expected: block.to_string(),
                got: self.block.to_string(),
            });
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.block.param_names().into_iter().zip(self.values)
    }
}

impl Serialize for BlockParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        for (k, v) in self.iter() {
            m.serialize_entry(k, &v)?;
        }
        m.end()
    }
}

/// Parameters for all four blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineTuning {
    blocks: [BlockParams; 4],
}

impl PipelineTuning {
    /// Requires one entry per block, in any order.
    pub fn new(blocks: Vec<BlockParams>) -> Result<Self> {
        let mut slots: [Option<BlockParams>; 4] = Default::default();
        for p in blocks {
            let i = p.block().index();
            if slots[i].replace(p).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate block {}",
                    BlockId::ALL[i]
                )));
            }
        }
        let mut out = Vec::with_capacity(4);
        for (slot, id) in slots.into_iter().zip(BlockId::ALL) {
            out.push(
                slot.ok_or_else(|| Error::InvalidParameter(format!("tuning lacks block {id}")))?,
            );
        }
        Ok(Self {
            blocks: out.try_into().expect("four blocks"),
        })
    }

    pub fn passthrough() -> Self {
        Self {
            blocks: BlockId::ALL.map(BlockParams::passthrough),
        }
    }

    pub fn get(&self, block: BlockId) -> &BlockParams {
        &self.blocks[block.index()]
    }

    pub fn set(&mut self, params: BlockParams) {
        let i = params.block().index();
        self.blocks[i] = params;
    }

    pub fn blocks(&self) -> &[BlockParams; 4] {
        &self.blocks
    }
}

impl Serialize for PipelineTuning {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        for p in &self.blocks {
            m.serialize_entry(p.block().key(), p)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for PipelineTuning {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, BTreeMap<String, f64>>::deserialize(d)?;
        let blocks = raw
            .iter()
            .map(|(k, v)| BlockId::from_key(k).and_then(|b| BlockParams::from_map(b, v)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        PipelineTuning::new(blocks).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipeline_order() {
        assert!(BlockId::BayerNr < BlockId::Demosaic);
        assert!(BlockId::Demosaic < BlockId::YuvNr);
        assert!(BlockId::YuvNr < BlockId::Sharpen);
        assert_eq!(BlockId::Sharpen.upstream().len(), 3);
        assert!(BlockId::BayerNr.upstream().is_empty());
    }

    #[test]
    fn defaults_in_range() {
        for b in BlockId::ALL {
            let specs = b.param_specs();
            assert_eq!(specs.len(), 4);
            for p in [BlockParams::passthrough(b), BlockParams::mid_range(b)] {
                for (v, s) in p.values().iter().zip(&specs) {
                    assert!(s.in_physical_range(*v));
                }
            }
        }
        assert_eq!(
            BlockParams::mid_range(BlockId::BayerNr).get("radius"),
            Some(2.0)
        );
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(
            BlockParams::new(BlockId::Sharpen, [1.0, 0.0, 5.0, 0.0]),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn json_layout_and_round_trip() {
        let mut t = PipelineTuning::passthrough();
        t.set(BlockParams::new(BlockId::Sharpen, [1.3, 0.01, 0.7, 0.1]).unwrap());
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.starts_with(r#"{"bayer_nr":{"sigma_s":1.0,"k_r":2.0,"#));
        let back: PipelineTuning = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn incomplete_tuning_rejected() {
        let text = r#"{"bayer_nr":{"sigma_s":1.0,"k_r":2.0,"radius":1.0,"strength":0.0}}"#;
        assert!(serde_json::from_str::<PipelineTuning>(text).is_err());
        assert!(PipelineTuning::new(vec![BlockParams::passthrough(BlockId::YuvNr)]).is_err());
    }

    #[test]
    fn wrong_block_detected() {
        assert!(BlockParams::passthrough(BlockId::Demosaic)
            .require(BlockId::Sharpen)
            .is_err());
    }
}
