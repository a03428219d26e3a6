use num_complex::Complex32;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::{Tensor, TensorData, VideoFeature, VideoShape};

/// Relative bound on the imaginary part left over by [`ifft3`].
pub const IMAG_RESIDUE_TOLERANCE: f32 = 1e-3;

/// Complex spectrum of a `[C, N, h, w]` feature, unshifted (DC at index 0 of
/// each transformed axis).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    shape: VideoShape,
    data: Vec<Complex32>,
}

impl Spectrum {
    pub fn new(shape: VideoShape, data: Vec<Complex32>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::InvalidDims {
                dims: shape.dims().to_vec(),
                reason: format!("expected {} bins, got {}", shape.len(), data.len()),
            });
        }
        Ok(Spectrum { shape, data })
    }

    pub fn shape(&self) -> VideoShape {
        self.shape
    }

    pub fn data(&self) -> &[Complex32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex32> {
        self.data
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::complex64(self.shape.dims().to_vec(), self.data.clone()).expect("validated shape")
    }

    pub fn from_tensor(t: Tensor) -> Result<Self> {
        let dims = t.dims().to_vec();
        if dims.len() != 4 {
            return Err(Error::Dimension(format!("spectrum needs 4 dims, got {dims:?}")));
        }
        let shape = VideoShape::new(dims[0], dims[1], dims[2], dims[3])?;
        match t.into_parts().1 {
            TensorData::Complex64(v) => Self::new(shape, v),
            other => Err(Error::Dimension(format!("spectrum must be complex64, got {:?}", other.dtype()))),
        }
    }

    pub fn max_abs_diff(&self, other: &Spectrum) -> f32 {
        assert_eq!(self.shape, other.shape);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f32::max)
    }
}

/// Unnormalized in-place DFT of a row-major buffer along each axis in `axes`.
///
/// Strided axes are transposed into contiguous lines, transformed as a batch,
/// and transposed back.
pub(crate) fn fft_axes(data: &mut [Complex32], dims: &[usize], axes: &[usize], direction: FftDirection) {
    debug_assert_eq!(data.len(), dims.iter().product::<usize>());
    let mut planner = FftPlanner::<f32>::new();
    for &axis in axes {
        let len = dims[axis];
        if len == 1 {
            continue;
        }
        let stride: usize = dims[axis + 1..].iter().product();
        let fft = planner.plan_fft(len, direction);
        let mut scratch = vec![Complex32::default(); fft.get_inplace_scratch_len()];
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = len * stride;
        let mut lines = vec![Complex32::default(); block];
        for chunk in data.chunks_exact_mut(block) {
            for k in 0..len {
                for i in 0..stride {
                    lines[i * len + k] = chunk[k * stride + i];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for k in 0..len {
                for i in 0..stride {
                    chunk[k * stride + i] = lines[i * len + k];
                }
            }
        }
    }
}

/// Per-channel 3-D DFT over `(N, h, w)`, unnormalized.
pub fn fft3(z: &VideoFeature) -> Spectrum {
    let shape = z.shape();
    let mut data: Vec<Complex32> = z.data().iter().map(|&v| Complex32::new(v, 0.0)).collect();
    transform_channels(&mut data, shape, FftDirection::Forward);
    Spectrum { shape, data }
}

/// Inverse of [`fft3`] with `1 / (N h w)` normalization, keeping the complex result.
pub fn ifft3_complex(s: &Spectrum) -> Vec<Complex32> {
    let shape = s.shape;
    let mut data = s.data.clone();
    transform_channels(&mut data, shape, FftDirection::Inverse);
    let scale = 1.0 / shape.volume() as f32;
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// Inverse transform back to a real feature.
///
/// The imaginary part is discarded after checking that its largest magnitude
/// is at most `1e-3 * (max |re| + 1e-12)`. A spectrum that fails the check
/// was not conjugate-symmetric and yields a numerical error.
pub fn ifft3(s: &Spectrum) -> Result<VideoFeature> {
    let data = ifft3_complex(s);
    let max_re = data.iter().map(|v| v.re.abs()).fold(0.0f32, f32::max);
    let max_im = data.iter().map(|v| v.im.abs()).fold(0.0f32, f32::max);
    if max_im > IMAG_RESIDUE_TOLERANCE * (max_re + 1e-12) {
        return Err(Error::Numerical(format!(
            "inverse transform left imaginary residue {max_im:e} against real peak {max_re:e}; spectrum is not conjugate-symmetric"
        )));
    }
    VideoFeature::new(s.shape, data.into_iter().map(|v| v.re).collect())
}

fn transform_channels(data: &mut [Complex32], shape: VideoShape, direction: FftDirection) {
    let dims = [shape.frames, shape.height, shape.width];
    data.par_chunks_mut(shape.volume())
        .for_each(|channel| fft_axes(channel, &dims, &[0, 1, 2], direction));
}
