use super::{global_and_local, local_output, project_qkv, AttentionWeights, SequenceFeature};
use crate::error::{Error, Result};
use crate::spectral::{spectral_blend, LowPassFilter};
use crate::tensor::VideoFeature;

/// Local window half-width used by default.
pub const DEFAULT_ALPHA: usize = 8;
/// Last denoising step (1-based) that still blends in the global path.
pub const DEFAULT_TAU: usize = 25;

/// Whether denoising step `step` (1-based) uses the spectral blend.
pub fn blend_active(step: usize, tau: usize) -> bool {
    step <= tau
}

/// Temporal attention layer that fuses the low-frequency part of full-sequence
/// attention with the high-frequency part of windowed attention.
///
/// Both paths share one Q/K/V projection. For `step <= tau` the result is
/// `spectral_blend(Z_global, Z_local, filter)`; afterwards it is `Z_local`
/// with no transform applied.
pub fn spectralblend_ta(
    z_in: &VideoFeature,
    w: &AttentionWeights,
    alpha: usize,
    filter: &LowPassFilter,
    step: usize,
    tau: usize,
) -> Result<VideoFeature> {
    let shape = z_in.shape();
    if shape.channels != w.dim() {
        return Err(Error::Dimension(format!(
            "feature has {} channels but weights expect {}",
            shape.channels,
            w.dim()
        )));
    }
    if filter.dims() != [shape.frames, shape.height, shape.width] {
        return Err(Error::Dimension(format!(
            "filter dims {:?} do not match feature {}",
            filter.dims(),
            shape
        )));
    }
    let seq = SequenceFeature::from_video(z_in);
    let (q, k, v) = project_qkv(&seq, w)?;
    if !blend_active(step, tau) {
        return local_output(&q, &k, &v, alpha, w.heads())?.to_video(shape.height, shape.width);
    }
    let (global, local) = global_and_local(&q, &k, &v, alpha, w.heads())?;
    let global = global.to_video(shape.height, shape.width)?;
    let local = local.to_video(shape.height, shape.width)?;
    spectral_blend(&global, &local, filter)
}
