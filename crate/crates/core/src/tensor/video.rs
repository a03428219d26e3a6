use serde::Serialize;

use super::Tensor;
use crate::error::{Error, Result};

/// Extent of a `[C, N, h, w]` latent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct VideoShape {
    pub channels: usize,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
}

impl VideoShape {
    pub fn new(channels: usize, frames: usize, height: usize, width: usize) -> Result<Self> {
        let shape = VideoShape { channels, frames, height, width };
        if shape.dims().contains(&0) {
            return Err(Error::InvalidDims { dims: shape.dims().to_vec(), reason: "every dim must be >= 1".into() });
        }
        Ok(shape)
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.channels, self.frames, self.height, self.width]
    }

    pub fn len(&self) -> usize {
        self.channels * self.frames * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spatial positions per frame (`h * w`).
    pub fn spatial(&self) -> usize {
        self.height * self.width
    }

    /// Bins of one channel's spatiotemporal volume (`N * h * w`).
    pub fn volume(&self) -> usize {
        self.frames * self.spatial()
    }

    #[inline]
    pub fn index(&self, c: usize, n: usize, y: usize, x: usize) -> usize {
        ((c * self.frames + n) * self.height + y) * self.width + x
    }
}

impl std::fmt::Display for VideoShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.channels, self.frames, self.height, self.width)
    }
}

/// Real latent `Z` of shape `[C, N, h, w]`, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoFeature {
    shape: VideoShape,
    data: Vec<f32>,
}

impl VideoFeature {
    pub fn new(shape: VideoShape, data: Vec<f32>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::InvalidDims {
                dims: shape.dims().to_vec(),
                reason: format!("expected {} values, got {}", shape.len(), data.len()),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite value {} at flat index {i}", data[i])));
        }
        Ok(VideoFeature { shape, data })
    }

    pub fn zeros(shape: VideoShape) -> Self {
        VideoFeature { shape, data: vec![0.0; shape.len()] }
    }

    pub fn from_fn(shape: VideoShape, mut f: impl FnMut(usize, usize, usize, usize) -> f32) -> Result<Self> {
        let mut data = Vec::with_capacity(shape.len());
        for c in 0..shape.channels {
            for n in 0..shape.frames {
                for y in 0..shape.height {
                    for x in 0..shape.width {
                        data.push(f(c, n, y, x));
                    }
                }
            }
        }
        Self::new(shape, data)
    }

    pub fn from_tensor(t: Tensor) -> Result<Self> {
        let dims = t.dims().to_vec();
        if dims.len() != 4 {
            return Err(Error::Dimension(format!("video feature needs 4 dims [C, N, h, w], got {dims:?}")));
        }
        let shape = VideoShape::new(dims[0], dims[1], dims[2], dims[3])?;
        match t.into_parts().1 {
            super::TensorData::Real32(v) => Self::new(shape, v),
            other => Err(Error::Dimension(format!("video feature must be real32, got {:?}", other.dtype()))),
        }
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::real32(self.shape.dims().to_vec(), self.data.clone()).expect("shape validated on construction")
    }

    pub fn shape(&self) -> VideoShape {
        self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn at(&self, c: usize, n: usize, y: usize, x: usize) -> f32 {
        self.data[self.shape.index(c, n, y, x)]
    }

    /// Frames `[start, start + len)` of every channel.
    pub fn frames(&self, start: usize, len: usize) -> Result<VideoFeature> {
        let s = self.shape;
        if len == 0 || start + len > s.frames {
            return Err(Error::Dimension(format!("frame range {start}..{} outside 0..{}", start + len, s.frames)));
        }
        let frame = s.spatial();
        let mut data = Vec::with_capacity(s.channels * len * frame);
        for c in 0..s.channels {
            let base = s.index(c, start, 0, 0);
            data.extend_from_slice(&self.data[base..base + len * frame]);
        }
        Ok(VideoFeature { shape: VideoShape { frames: len, ..s }, data })
    }

    pub fn max_abs_diff(&self, other: &VideoFeature) -> f32 {
        assert_eq!(self.shape, other.shape, "max_abs_diff on mismatched shapes");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f32::max)
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }
}
