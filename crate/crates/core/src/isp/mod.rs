//! The tunable four-block pipeline: Bayer NR, demosaic, YUV NR and
//! sharpening, in that order.
//!
//! Every block reads its parameters from a [`BlockParams`] in physical units
//! and has passthrough settings that leave its input unchanged.

mod bayer_nr;
mod demosaic;
mod params;
mod pipeline;
mod sharpen;
mod yuv_nr;

pub use bayer_nr::bayer_nr;
pub use demosaic::demosaic;
pub use params::{BlockId, BlockParams, PipelineTuning};
pub use pipeline::{block_input, run_block, run_pipeline, BlockData, PipelineTaps};
pub use sharpen::sharpen;
pub use yuv_nr::yuv_nr;
