//! Reference generation and the sensor simulator.
//!
//! Noise references come from averaging static bursts, the demosaic
//! reference is the clean synthetic scene, and the sharpening reference is an
//! edge-directed unsharp mask of the fused luma.

mod burst;
mod noise;
mod scene;
mod sharpen_ref;

pub use burst::{blend_references, simulate_capture, temporal_fusion, Burst};
pub use noise::{calibrate_noise_model, NoiseModel};
pub use scene::{synthesize_scene, FlatMask, SceneElement, SceneSpec};
pub use sharpen_ref::{
    flat_mask_from_gradients, sharpening_fields, sharpening_reference, SharpenFields,
    SharpenRefConfig,
};
