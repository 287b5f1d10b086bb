use super::{bayer_nr, demosaic, sharpen, yuv_nr, BlockId, BlockParams, PipelineTuning};
use crate::imaging::{rgb_to_yuv, yuv_to_rgb, BayerMosaic, PlanarImage};
use crate::refgen::NoiseModel;
use crate::{Error, Result};

/// Data flowing between blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockData {
    Bayer(BayerMosaic),
    Image(PlanarImage),
}

impl BlockData {
    fn as_bayer(&self) -> Result<&BayerMosaic> {
        match self {
            BlockData::Bayer(m) => Ok(m),
            BlockData::Image(img) => Err(Error::WrongDomain {
                expected: "Bayer",
                found: img.domain().name(),
            }),
        }
    }

    fn as_image(&self) -> Result<&PlanarImage> {
        match self {
            BlockData::Image(img) => Ok(img),
            BlockData::Bayer(_) => Err(Error::WrongDomain {
                expected: "YUV",
                found: "Bayer",
            }),
        }
    }
}

/// Output of every block of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineTaps {
    pub bayer_nr: BayerMosaic,
    pub demosaic: PlanarImage,
    pub yuv_nr: PlanarImage,
    pub sharpen: PlanarImage,
    /// Final linear RGB, clamped to `[0, 1]`.
    pub output: PlanarImage,
}

/// Runs one block on the data produced by the block before it. The YUV
/// conversion between demosaic and YUV NR belongs to the YUV NR stage.
pub fn run_block(input: &BlockData, params: &BlockParams, nm: &NoiseModel) -> Result<BlockData> {
    Ok(match params.block() {
        BlockId::BayerNr => BlockData::Bayer(bayer_nr(input.as_bayer()?, params, nm)?),
        BlockId::Demosaic => BlockData::Image(demosaic(input.as_bayer()?, params)?),
        BlockId::YuvNr => BlockData::Image(yuv_nr(&rgb_to_yuv(input.as_image()?)?, params)?),
        BlockId::Sharpen => BlockData::Image(sharpen(input.as_image()?, params)?),
    })
}

/// Input of `block` given the raw mosaic and tunings for all blocks before
/// it (`upstream[i]` for block `i`; later entries are ignored).
pub fn block_input(
    block: BlockId,
    mosaic: &BayerMosaic,
    upstream: &[BlockParams],
    nm: &NoiseModel,
) -> Result<BlockData> {
    let mut data = BlockData::Bayer(mosaic.clone());
    for &up in block.upstream() {
        let params = upstream
            .get(up.index())
            .filter(|p| p.block() == up)
            .ok_or_else(|| Error::MissingUpstream(format!("{block} needs a tuned {up}")))?;
        data = run_block(&data, params, nm)?;
    }
    Ok(data)
}

/// Full pipeline with every intermediate result.
pub fn run_pipeline(m: &BayerMosaic, t: &PipelineTuning, nm: &NoiseModel) -> Result<PipelineTaps> {
    let nr = bayer_nr(m, t.get(BlockId::BayerNr), nm)?;
    let rgb = demosaic(&nr, t.get(BlockId::Demosaic))?;
    let yuv = yuv_nr(&rgb_to_yuv(&rgb)?, t.get(BlockId::YuvNr))?;
    let sharp = sharpen(&yuv, t.get(BlockId::Sharpen))?;
    let out = yuv_to_rgb(&sharp)?.map(|v| v.clamp(0.0, 1.0));
    Ok(PipelineTaps {
        bayer_nr: nr,
        demosaic: rgb,
        yuv_nr: yuv,
        sharpen: sharp,
        output: out,
    })
}
