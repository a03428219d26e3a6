use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::SequenceFeature;
use crate::error::{Error, Result};
use crate::tensor::RngSpec;

/// Query/key/value projections, each `d x d` row-major, applied as `z * W`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    dim: usize,
    heads: usize,
    w_q: Vec<f32>,
    w_k: Vec<f32>,
    w_v: Vec<f32>,
}

impl AttentionWeights {
    pub fn new(dim: usize, heads: usize, w_q: Vec<f32>, w_k: Vec<f32>, w_v: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("attention dim must be >= 1".into()));
        }
        if heads == 0 || !dim.is_multiple_of(heads) {
            return Err(Error::Parameter(format!("{heads} heads do not divide dim {dim}")));
        }
        for (name, m) in [("W_q", &w_q), ("W_k", &w_k), ("W_v", &w_v)] {
            if m.len() != dim * dim {
                return Err(Error::Dimension(format!("{name} has {} entries, expected {}", m.len(), dim * dim)));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("{name} contains non-finite entries")));
            }
        }
        Ok(AttentionWeights { dim, heads, w_q, w_k, w_v })
    }

    pub fn identity(dim: usize, heads: usize) -> Result<Self> {
        let mut eye = vec![0.0; dim * dim];
        (0..dim).for_each(|i| eye[i * dim + i] = 1.0);
        Self::new(dim, heads, eye.clone(), eye.clone(), eye)
    }

    pub fn zeros(dim: usize, heads: usize) -> Result<Self> {
        let z = vec![0.0; dim * dim];
        Self::new(dim, heads, z.clone(), z.clone(), z)
    }

    /// Entries drawn i.i.d. from `N(0, 1/d)` on three separate streams of `rng`.
    pub fn random(dim: usize, heads: usize, rng: &RngSpec) -> Result<Self> {
        let scale = 1.0 / (dim as f32).sqrt();
        let draw = |stream: u64| {
            let mut gen = rng.stream(stream);
            (0..dim * dim).map(|_| { let x: f32 = StandardNormal.sample(&mut gen); scale * x }).collect::<Vec<f32>>()
        };
        Self::new(dim, heads, draw(1), draw(2), draw(3))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn head_dim(&self) -> usize {
        self.dim / self.heads
    }

    pub fn w_q(&self) -> &[f32] {
        &self.w_q
    }

    pub fn w_k(&self) -> &[f32] {
        &self.w_k
    }

    pub fn w_v(&self) -> &[f32] {
        &self.w_v
    }
}

/// `Q = z W_q`, `K = z W_k`, `V = z W_v` for every (sequence, frame) row.
pub fn project_qkv(
    z: &SequenceFeature,
    w: &AttentionWeights,
) -> Result<(SequenceFeature, SequenceFeature, SequenceFeature)> {
    if z.dim() != w.dim {
        return Err(Error::Dimension(format!("feature dim {} does not match weight dim {}", z.dim(), w.dim)));
    }
    let d = w.dim;
    let project = |m: &[f32]| {
        let mut out = SequenceFeature::zeros(z.seqs(), z.frames(), d);
        out.data_mut()
            .par_chunks_mut(d * z.frames())
            .zip(z.data().par_chunks(d * z.frames()))
            .for_each(|(dst, src)| {
                for (o, row) in dst.chunks_exact_mut(d).zip(src.chunks_exact(d)) {
                    for (i, &x) in row.iter().enumerate() {
                        let wrow = &m[i * d..(i + 1) * d];
                        o.iter_mut().zip(wrow).for_each(|(acc, &wv)| *acc += x * wv);
                    }
                }
            });
        out
    };
    Ok((project(&w.w_q), project(&w.w_k), project(&w.w_v)))
}
