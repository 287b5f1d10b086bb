use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{mad_8bit, ms_ssim, sad, ssim, Samples};
use crate::imaging::{BayerMosaic, ColorDomain, PlanarImage};
use crate::isp::{BlockData, BlockId, PipelineTaps};
use crate::{Error, Result};

/// Output of `block` among the pipeline taps.
pub fn tap_for(block: BlockId, taps: &PipelineTaps) -> BlockData {
    match block {
        BlockId::BayerNr => BlockData::Bayer(taps.bayer_nr.clone()),
        BlockId::Demosaic => BlockData::Image(taps.demosaic.clone()),
        BlockId::YuvNr => BlockData::Image(taps.yuv_nr.clone()),
        BlockId::Sharpen => BlockData::Image(taps.sharpen.clone()),
    }
}

/// The compared pair in the block's fitness domain: the mosaic for Bayer NR,
/// linear RGB for demosaic, YUV for YUV NR and the Y plane for sharpening.
/// A sharpening reference may be given either as YUV or as a Y plane.
enum Pair<'a> {
    Bayer(&'a BayerMosaic, &'a BayerMosaic),
    Image(PlanarImage, PlanarImage),
}

fn domain_pair<'a>(
    block: BlockId,
    output: &'a BlockData,
    reference: &'a BlockData,
) -> Result<Pair<'a>> {
    let mismatch = |expected: &'static str, found: &BlockData| Error::WrongDomain {
        expected,
        found: match found {
            BlockData::Bayer(_) => "Bayer",
            BlockData::Image(img) => img.domain().name(),
        },
    };
    let image = |d: &'a BlockData, domain: ColorDomain, name: &'static str| match d {
        BlockData::Image(img) if img.domain() == domain => Ok(img),
        other => Err(mismatch(name, other)),
    };
    match block {
        BlockId::BayerNr => match (output, reference) {
            (BlockData::Bayer(a), BlockData::Bayer(b)) => Ok(Pair::Bayer(a, b)),
            (BlockData::Bayer(_), other) | (other, _) => Err(mismatch("Bayer", other)),
        },
        BlockId::Demosaic => Ok(Pair::Image(
            image(output, ColorDomain::LinearRgb, "linear RGB")?.clone(),
            image(reference, ColorDomain::LinearRgb, "linear RGB")?.clone(),
        )),
        BlockId::YuvNr => Ok(Pair::Image(
            image(output, ColorDomain::Yuv, "YUV")?.clone(),
            image(reference, ColorDomain::Yuv, "YUV")?.clone(),
        )),
        BlockId::Sharpen => {
            let out = image(output, ColorDomain::Yuv, "YUV")?.extract_channel(0);
            let reference = match reference {
                BlockData::Image(img) if img.domain() == ColorDomain::Plane => img.clone(),
                BlockData::Image(img) if img.domain() == ColorDomain::Yuv => img.extract_channel(0),
                other => return Err(mismatch("Y plane", other)),
            };
            Ok(Pair::Image(out, reference))
        }
    }
}

/// SAD between a block output and its reference in the block's domain.
pub fn block_output_fitness(
    block: BlockId,
    output: &BlockData,
    reference: &BlockData,
) -> Result<f64> {
    match domain_pair(block, output, reference)? {
        Pair::Bayer(a, b) => sad(a, b),
        Pair::Image(a, b) => sad(&a, &b),
    }
}

/// SAD between the block's tap and its reference; the optimizer objective.
pub fn block_fitness(block: BlockId, taps: &PipelineTaps, reference: &BlockData) -> Result<f64> {
    block_output_fitness(block, &tap_for(block, taps), reference)
}

/// All metrics of one block output against its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessReport {
    pub block: BlockId,
    pub label: String,
    pub sad: f64,
    pub mad_8bit: f64,
    pub ssim: f64,
    pub ms_ssim: f64,
    pub domain: &'static str,
    pub pixel_count: usize,
}

impl FitnessReport {
    pub fn compute(
        block: BlockId,
        label: &str,
        output: &BlockData,
        reference: &BlockData,
    ) -> Result<Self> {
        let (a, b, domain) = match domain_pair(block, output, reference)? {
            Pair::Bayer(a, b) => (a.to_plane(), b.to_plane(), "Bayer"),
            Pair::Image(a, b) => {
                let d = if block == BlockId::Sharpen {
                    "Y"
                } else {
                    a.domain().name()
                };
                (a, b, d)
            }
        };
        Ok(Self {
            block,
            label: label.to_string(),
            sad: sad(&a, &b)?,
            mad_8bit: mad_8bit(&a, &b)?,
            ssim: ssim(&a, &b)?,
            ms_ssim: ms_ssim(&a, &b)?,
            domain,
            pixel_count: a.samples().len(),
        })
    }

    pub fn row(&self) -> ReportRow {
        ReportRow {
            block: self.block.to_string(),
            tuning: self.label.clone(),
            mad: self.mad_8bit,
            ssim: self.ssim,
            ms_ssim: self.ms_ssim,
        }
    }
}

/// One line of the evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub block: String,
    pub tuning: String,
    pub mad: f64,
    pub ssim: f64,
    pub ms_ssim: f64,
}

/// Writes `block,tuning,mad,ssim,ms_ssim` rows with a header.
pub fn write_report_csv<W: Write>(out: W, reports: &[FitnessReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r.row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
