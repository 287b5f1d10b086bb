//! Image containers and the low-level image operations shared by every
//! other module.

mod bayer;
mod color;
pub mod io;
mod kernel;
mod planar;

pub use bayer::{bayer_subsample, BayerMosaic, CfaChannel, CfaPattern};
pub use color::{luma, rgb_to_yuv, yuv_to_rgb};
pub use kernel::{
    box_kernel, convolve2d, gaussian_kernel, gaussian_taps, scharr_gradients, Kernel2D,
};
pub(crate) use kernel::{clamp_index, convolve_separable};
pub use planar::{ColorDomain, PlanarImage};
