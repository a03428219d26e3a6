use super::{fft3, ifft3, LowPassFilter, Spectrum};
use crate::error::{Error, Result};
use crate::tensor::{VideoFeature, VideoShape};

fn check_filter(shape: VideoShape, filter: &LowPassFilter) -> Result<()> {
    let expected = [shape.frames, shape.height, shape.width];
    if filter.dims() != expected {
        return Err(Error::Dimension(format!(
            "filter dims {:?} do not match feature (N, h, w) = {expected:?}",
            filter.dims()
        )));
    }
    Ok(())
}

/// `P * global + (1 - P) * local`, bin by bin, with `P` broadcast over channels.
pub fn blend_spectra(global: &Spectrum, local: &Spectrum, filter: &LowPassFilter) -> Result<Spectrum> {
    if global.shape() != local.shape() {
        return Err(Error::Dimension(format!(
            "global spectrum {} and local spectrum {} differ",
            global.shape(),
            local.shape()
        )));
    }
    let shape = global.shape();
    check_filter(shape, filter)?;
    let p = filter.data();
    let vol = shape.volume();
    let data = global
        .data()
        .iter()
        .zip(local.data())
        .enumerate()
        .map(|(i, (&g, &l))| {
            let w = p[i % vol];
            g * w + l * (1.0 - w)
        })
        .collect();
    Spectrum::new(shape, data)
}

/// Keeps the low-frequency content of `z_global` and the high-frequency
/// content of `z_local`:
///
/// ```text
/// Z' = ifft3( fft3(z_global) * P + fft3(z_local) * (1 - P) )
/// ```
pub fn spectral_blend(z_global: &VideoFeature, z_local: &VideoFeature, filter: &LowPassFilter) -> Result<VideoFeature> {
    if z_global.shape() != z_local.shape() {
        return Err(Error::Dimension(format!(
            "global feature {} and local feature {} differ",
            z_global.shape(),
            z_local.shape()
        )));
    }
    check_filter(z_global.shape(), filter)?;
    let (g, l) = rayon::join(|| fft3(z_global), || fft3(z_local));
    ifft3(&blend_spectra(&g, &l, filter)?)
}
