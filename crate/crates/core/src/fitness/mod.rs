//! Fitness between a block output and its reference.
//!
//! The optimizer minimizes [`sad`] in the block's own domain; [`mad_8bit`],
//! [`ssim`] and [`ms_ssim`] are reporting metrics.

mod report;
mod ssim;

pub use report::{
    block_fitness, block_output_fitness, read_report_csv, tap_for, write_report_csv, FitnessReport,
    ReportRow,
};
pub use ssim::{ms_ssim, ssim, MS_SSIM_WEIGHTS};

use crate::imaging::{BayerMosaic, PlanarImage};
use crate::{Error, Result};

/// Anything with a flat sample buffer and a comparable shape.
pub trait Samples {
    fn samples(&self) -> &[f64];
    /// `(width, height, channels)`.
    fn shape(&self) -> (usize, usize, usize);
}

impl Samples for PlanarImage {
    fn samples(&self) -> &[f64] {
        self.data()
    }

    fn shape(&self) -> (usize, usize, usize) {
        (self.width(), self.height(), self.channels())
    }
}

impl Samples for BayerMosaic {
    fn samples(&self) -> &[f64] {
        self.data()
    }

    fn shape(&self) -> (usize, usize, usize) {
        (self.width(), self.height(), 1)
    }
}

fn check_shapes<A: Samples + ?Sized, B: Samples + ?Sized>(a: &A, b: &B) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Sum of absolute differences over all samples.
pub fn sad<A: Samples + ?Sized, B: Samples + ?Sized>(a: &A, b: &B) -> Result<f64> {
    check_shapes(a, b)?;
    Ok(a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).abs())
        .sum())
}

/// Mean absolute difference on a 0–255 scale.
pub fn mad_8bit<A: Samples + ?Sized, B: Samples + ?Sized>(a: &A, b: &B) -> Result<f64> {
    Ok(255.0 * sad(a, b)? / a.samples().len() as f64)
}
