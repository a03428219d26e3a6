use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{Tensor, VideoFeature, VideoShape};

/// `[S, N, d]` token sequences: `S` spatial positions, `N` frames, `d` channels.
///
/// A `[d, N, h, w]` video maps to `S = h * w` sequences with
/// `seq[y * w + x][n][c] = video[c][n][y][x]`; [`SequenceFeature::to_video`]
/// is the exact inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFeature {
    seqs: usize,
    frames: usize,
    dim: usize,
    data: Vec<f32>,
}

impl SequenceFeature {
    pub fn new(seqs: usize, frames: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if seqs == 0 || frames == 0 || dim == 0 {
            return Err(Error::InvalidDims { dims: vec![seqs, frames, dim], reason: "every dim must be >= 1".into() });
        }
        if data.len() != seqs * frames * dim {
            return Err(Error::InvalidDims {
                dims: vec![seqs, frames, dim],
                reason: format!("expected {} values, got {}", seqs * frames * dim, data.len()),
            });
        }
        Ok(SequenceFeature { seqs, frames, dim, data })
    }

    pub(crate) fn zeros(seqs: usize, frames: usize, dim: usize) -> Self {
        SequenceFeature { seqs, frames, dim, data: vec![0.0; seqs * frames * dim] }
    }

    pub fn from_video(z: &VideoFeature) -> Self {
        let s = z.shape();
        let (seqs, frames, dim) = (s.spatial(), s.frames, s.channels);
        let mut data = vec![0.0f32; seqs * frames * dim];
        let src = z.data();
        data.par_chunks_mut(frames * dim).enumerate().for_each(|(pos, seq)| {
            for n in 0..frames {
                for c in 0..dim {
                    seq[n * dim + c] = src[(c * frames + n) * seqs + pos];
                }
            }
        });
        SequenceFeature { seqs, frames, dim, data }
    }

    pub fn to_video(&self, height: usize, width: usize) -> Result<VideoFeature> {
        if height * width != self.seqs {
            return Err(Error::Dimension(format!("{height}x{width} grid does not hold {} sequences", self.seqs)));
        }
        let shape = VideoShape::new(self.dim, self.frames, height, width)?;
        let (seqs, frames, dim) = (self.seqs, self.frames, self.dim);
        let mut data = vec![0.0f32; shape.len()];
        data.par_chunks_mut(frames * seqs).enumerate().for_each(|(c, chan)| {
            for n in 0..frames {
                for pos in 0..seqs {
                    chan[n * seqs + pos] = self.data[(pos * frames + n) * dim + c];
                }
            }
        });
        VideoFeature::new(shape, data)
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::real32(vec![self.seqs, self.frames, self.dim], self.data.clone()).expect("validated dims")
    }

    pub fn seqs(&self) -> usize {
        self.seqs
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// `[N, d]` block of sequence `s`.
    pub fn sequence(&self, s: usize) -> &[f32] {
        let len = self.frames * self.dim;
        &self.data[s * len..(s + 1) * len]
    }

    pub fn same_shape(&self, other: &SequenceFeature) -> bool {
        (self.seqs, self.frames, self.dim) == (other.seqs, other.frames, other.dim)
    }

    pub fn shape_string(&self) -> String {
        format!("[{}, {}, {}]", self.seqs, self.frames, self.dim)
    }

    /// Frames `[start, start + len)` of every sequence.
    pub fn frame_range(&self, start: usize, len: usize) -> Result<SequenceFeature> {
        if len == 0 || start + len > self.frames {
            return Err(Error::Dimension(format!("frame range {start}..{} outside 0..{}", start + len, self.frames)));
        }
        let mut data = Vec::with_capacity(self.seqs * len * self.dim);
        for s in 0..self.seqs {
            let seq = self.sequence(s);
            data.extend_from_slice(&seq[start * self.dim..(start + len) * self.dim]);
        }
        Ok(SequenceFeature { seqs: self.seqs, frames: len, dim: self.dim, data })
    }

    /// Reorders frames: output frame `i` is input frame `perm[i]`.
    pub fn permute_frames(&self, perm: &[usize]) -> SequenceFeature {
        assert_eq!(perm.len(), self.frames);
        let mut out = Self::zeros(self.seqs, self.frames, self.dim);
        let d = self.dim;
        for s in 0..self.seqs {
            let src = self.sequence(s);
            let base = s * self.frames * d;
            for (i, &p) in perm.iter().enumerate() {
                out.data[base + i * d..base + (i + 1) * d].copy_from_slice(&src[p * d..(p + 1) * d]);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &SequenceFeature) -> f32 {
        assert!(self.same_shape(other));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f32::max)
    }
}
