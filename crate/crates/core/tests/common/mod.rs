#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectralblend::attention::{AttentionWeights, SequenceFeature};
use spectralblend::tensor::{VideoFeature, VideoShape};

pub fn shape(c: usize, n: usize, h: usize, w: usize) -> VideoShape {
    VideoShape::new(c, n, h, w).unwrap()
}

/// Uniform values in [-1, 1).
pub fn uniform_video(s: VideoShape, seed: u64) -> VideoFeature {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..s.len()).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    VideoFeature::new(s, data).unwrap()
}

pub fn uniform_sequence(seqs: usize, frames: usize, dim: usize, seed: u64) -> SequenceFeature {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..seqs * frames * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    SequenceFeature::new(seqs, frames, dim, data).unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f32 {
    // Box-Muller; fixtures only need a cheap, seedable normal.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    ((-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()) as f32
}

/// A frame-to-frame smooth clip: a per-channel spatial texture modulated by a
/// slow cosine, plus a little independent jitter so every band has energy.
pub fn smooth_clip(s: VideoShape, seed: u64) -> VideoFeature {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let texture: Vec<f32> = (0..s.channels * s.spatial()).map(|_| gaussian(&mut rng)).collect();
    let phase: Vec<f32> = (0..s.channels).map(|_| rng.random_range(0.0..std::f32::consts::TAU)).collect();
    let jitter: Vec<f32> = (0..s.len()).map(|_| 0.05 * gaussian(&mut rng)).collect();
    let n = s.frames as f32;
    VideoFeature::from_fn(s, |c, t, y, x| {
        let slow = 1.0 + 0.5 * (std::f32::consts::TAU * t as f32 / n + phase[c]).cos();
        slow * texture[c * s.spatial() + y * s.width + x] + jitter[s.index(c, t, y, x)]
    })
    .unwrap()
}

/// `base` plus independent N(0, sigma^2) noise on every element.
pub fn add_frame_noise(base: &VideoFeature, sigma: f32, seed: u64) -> VideoFeature {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let data = base.data().iter().map(|&v| v + sigma * gaussian(&mut rng)).collect();
    VideoFeature::new(base.shape(), data).unwrap()
}

/// 3x3 mean filter on each frame, edges replicated.
pub fn box_blur(v: &VideoFeature) -> VideoFeature {
    let s = v.shape();
    VideoFeature::from_fn(s, |c, t, y, x| {
        let mut acc = 0.0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let yy = (y as i64 + dy).clamp(0, s.height as i64 - 1) as usize;
                let xx = (x as i64 + dx).clamp(0, s.width as i64 - 1) as usize;
                acc += v.at(c, t, yy, xx);
            }
        }
        acc / 9.0
    })
    .unwrap()
}

/// `z W` row by row in f64.
pub fn matmul_oracle(z: &SequenceFeature, w: &[f32]) -> Vec<f64> {
    let d = z.dim();
    let mut out = vec![0.0; z.data().len()];
    for (r, row) in z.data().chunks(d).enumerate() {
        for j in 0..d {
            out[r * d + j] = (0..d).map(|i| row[i] as f64 * w[i * d + j] as f64).sum();
        }
    }
    out
}

/// Masked softmax attention in f64 for a single head. `alpha = None` is full.
pub fn attention_oracle(q: &SequenceFeature, k: &SequenceFeature, v: &SequenceFeature, alpha: Option<usize>) -> Vec<f64> {
    let (n, d) = (q.frames(), q.dim());
    let mut out = Vec::with_capacity(q.data().len());
    for s in 0..q.seqs() {
        let (qs, ks, vs) = (q.sequence(s), k.sequence(s), v.sequence(s));
        for i in 0..n {
            let allowed = |j: usize| alpha.is_none_or(|a| i.abs_diff(j) <= a);
            let logits: Vec<f64> = (0..n)
                .map(|j| {
                    if !allowed(j) {
                        return f64::NEG_INFINITY;
                    }
                    let dot: f64 = (0..d).map(|c| qs[i * d + c] as f64 * ks[j * d + c] as f64).sum();
                    dot / (d as f64).sqrt()
                })
                .collect();
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
            let z: f64 = e.iter().sum();
            for c in 0..d {
                out.push((0..n).map(|j| e[j] / z * vs[j * d + c] as f64).sum());
            }
        }
    }
    out
}

pub fn max_abs_diff_f64(a: &[f32], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| (x as f64 - y).abs()).fold(0.0, f64::max)
}

pub fn flicker_oracle(v: &VideoFeature) -> f64 {
    let s = v.shape();
    let mut sum = 0.0;
    for c in 0..s.channels {
        for t in 1..s.frames {
            for y in 0..s.height {
                for x in 0..s.width {
                    sum += (v.at(c, t, y, x) as f64 - v.at(c, t - 1, y, x) as f64).abs();
                }
            }
        }
    }
    sum / (s.channels * (s.frames - 1) * s.spatial()) as f64
}

pub fn single_head(dim: usize, seed: u64) -> AttentionWeights {
    AttentionWeights::random(dim, 1, &spectralblend::tensor::RngSpec::new(seed)).unwrap()
}
