use rayon::prelude::*;

use super::SequenceFeature;
use crate::error::{Error, Result};

/// How windowed attention suppresses out-of-window frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalMaskMode {
    /// Out-of-window logits become `-inf` before the softmax; rows stay stochastic.
    #[default]
    Renormalized,
    /// Full-row softmax, then out-of-window weights are zeroed. Rows no longer
    /// sum to one.
    PostSoftmaxZero,
}

/// One head's `N x N` attention weights for one sequence, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMap {
    n: usize,
    data: Vec<f32>,
}

impl AttentionMap {
    pub fn new(n: usize, data: Vec<f32>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::InvalidDims { dims: vec![n, n], reason: format!("{} entries", data.len()) });
        }
        Ok(AttentionMap { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        (0..n).for_each(|i| data[i * n + i] = 1.0);
        AttentionMap { n, data }
    }

    pub fn uniform(n: usize) -> Self {
        AttentionMap { n, data: vec![1.0 / n as f32; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn at(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.n + j]
    }
}

/// Output rows plus, when captured, one map per `(sequence, head)` at index
/// `s * heads + h`.
#[derive(Debug, Clone)]
pub struct AttentionOutput {
    pub output: SequenceFeature,
    pub maps: Vec<AttentionMap>,
}

#[derive(Debug, Clone, Copy)]
enum Band {
    Full,
    Window(usize, LocalMaskMode),
}

impl Band {
    fn range(self, i: usize, n: usize) -> (usize, usize) {
        match self {
            Band::Full | Band::Window(_, LocalMaskMode::PostSoftmaxZero) => (0, n - 1),
            Band::Window(alpha, LocalMaskMode::Renormalized) => (i.saturating_sub(alpha), (i + alpha).min(n - 1)),
        }
    }
}

fn check_qkv(q: &SequenceFeature, k: &SequenceFeature, v: &SequenceFeature, heads: usize) -> Result<()> {
    if !q.same_shape(k) || !q.same_shape(v) {
        return Err(Error::Dimension(format!(
            "Q {}, K {}, V {} must share a shape",
            q.shape_string(),
            k.shape_string(),
            v.shape_string()
        )));
    }
    if heads == 0 || !q.dim().is_multiple_of(heads) {
        return Err(Error::Parameter(format!("{heads} heads do not divide dim {}", q.dim())));
    }
    Ok(())
}

#[inline]
fn softmax_in_place(x: &mut [f32]) {
    let max = x.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0f32;
    for v in x.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in x.iter_mut() {
        *v /= sum;
    }
}

/// `out[c] = sum_j probs[j] * v[first + j][c]` over one head's channel slice.
#[inline]
fn weighted_sum(out: &mut [f32], probs: &[f32], v: &[f32], first: usize, dim: usize, offset: usize) {
    let dh = out.len();
    out.iter_mut().for_each(|o| *o = 0.0);
    for (j, &p) in probs.iter().enumerate() {
        let row = &v[(first + j) * dim + offset..(first + j) * dim + offset + dh];
        out.iter_mut().zip(row).for_each(|(o, &x)| *o += p * x);
    }
}

/// One head's keys transposed to `[d_head, N]`, so logits accumulate as
/// contiguous axpys over `j`.
fn transpose_keys(dst: &mut Vec<f32>, k: &[f32], n: usize, dim: usize, off: usize, dh: usize) {
    dst.clear();
    dst.resize(dh * n, 0.0);
    for j in 0..n {
        for c in 0..dh {
            dst[c * n + j] = k[j * dim + off + c];
        }
    }
}

/// Logits `q_i . k_j / sqrt(d_head)` for `j in lo..=hi`.
///
/// Each logit is summed over channels in ascending order whatever the range,
/// so a windowed call reproduces the same bits as a full-row call.
#[inline]
fn logits(dst: &mut Vec<f32>, qi: &[f32], kt: &[f32], n: usize, lo: usize, hi: usize, scale: f32) {
    dst.clear();
    dst.resize(hi - lo + 1, 0.0);
    for (c, &qc) in qi.iter().enumerate() {
        let krow = &kt[c * n + lo..=c * n + hi];
        dst.iter_mut().zip(krow).for_each(|(acc, &kv)| *acc += qc * kv);
    }
    dst.iter_mut().for_each(|x| *x *= scale);
}

fn attend(
    q: &SequenceFeature,
    k: &SequenceFeature,
    v: &SequenceFeature,
    heads: usize,
    band: Band,
    capture: bool,
) -> Result<AttentionOutput> {
    check_qkv(q, k, v, heads)?;
    let (n, dim) = (q.frames(), q.dim());
    let dh = dim / heads;
    let scale = 1.0 / (dh as f32).sqrt();
    let mut output = SequenceFeature::zeros(q.seqs(), n, dim);

    let per_seq: Vec<Vec<AttentionMap>> = output
        .data_mut()
        .par_chunks_mut(n * dim)
        .enumerate()
        .map(|(s, out)| {
            let (qs, ks, vs) = (q.sequence(s), k.sequence(s), v.sequence(s));
            let mut maps = Vec::new();
            let mut row = Vec::with_capacity(n);
            let mut kt = Vec::with_capacity(dh * n);
            for h in 0..heads {
                let off = h * dh;
                transpose_keys(&mut kt, ks, n, dim, off, dh);
                let mut map = if capture { vec![0.0f32; n * n] } else { Vec::new() };
                for i in 0..n {
                    let (lo, hi) = band.range(i, n);
                    logits(&mut row, &qs[i * dim + off..i * dim + off + dh], &kt, n, lo, hi, scale);
                    softmax_in_place(&mut row);
                    if let Band::Window(alpha, LocalMaskMode::PostSoftmaxZero) = band {
                        for (j, p) in row.iter_mut().enumerate() {
                            if j.abs_diff(i) > alpha {
                                *p = 0.0;
                            }
                        }
                    }
                    weighted_sum(&mut out[i * dim + off..i * dim + off + dh], &row, vs, lo, dim, off);
                    if capture {
                        map[i * n + lo..=i * n + hi].copy_from_slice(&row);
                    }
                }
                if capture {
                    maps.push(AttentionMap { n, data: map });
                }
            }
            maps
        })
        .collect();

    Ok(AttentionOutput { output, maps: per_seq.into_iter().flatten().collect() })
}

/// Full temporal attention: `A = softmax(Q K^T / sqrt(d_head))`, `Z = A V`,
/// heads concatenated along channels.
pub fn global_attention(q: &SequenceFeature, k: &SequenceFeature, v: &SequenceFeature, heads: usize) -> Result<AttentionOutput> {
    attend(q, k, v, heads, Band::Full, true)
}

/// Windowed attention where frame `i` sees frames `j` with `|i - j| <= alpha`.
pub fn local_attention(
    q: &SequenceFeature,
    k: &SequenceFeature,
    v: &SequenceFeature,
    alpha: usize,
    heads: usize,
) -> Result<AttentionOutput> {
    local_attention_with(q, k, v, alpha, heads, LocalMaskMode::Renormalized)
}

pub fn local_attention_with(
    q: &SequenceFeature,
    k: &SequenceFeature,
    v: &SequenceFeature,
    alpha: usize,
    heads: usize,
    mode: LocalMaskMode,
) -> Result<AttentionOutput> {
    attend(q, k, v, heads, Band::Window(alpha, mode), true)
}

/// [`global_attention`] without map capture.
pub(crate) fn global_output(q: &SequenceFeature, k: &SequenceFeature, v: &SequenceFeature, heads: usize) -> Result<SequenceFeature> {
    Ok(attend(q, k, v, heads, Band::Full, false)?.output)
}

/// [`local_attention`] without map capture.
pub(crate) fn local_output(
    q: &SequenceFeature,
    k: &SequenceFeature,
    v: &SequenceFeature,
    alpha: usize,
    heads: usize,
) -> Result<SequenceFeature> {
    Ok(attend(q, k, v, heads, Band::Window(alpha, LocalMaskMode::Renormalized), false)?.output)
}

/// Global and (renormalized) local outputs from one pass over the logits.
///
/// Both results are bit-identical to [`global_attention`] and
/// [`local_attention`]: the shared logits are computed by the same routine and
/// each softmax runs over the same slice.
pub fn global_and_local(
    q: &SequenceFeature,
    k: &SequenceFeature,
    v: &SequenceFeature,
    alpha: usize,
    heads: usize,
) -> Result<(SequenceFeature, SequenceFeature)> {
    check_qkv(q, k, v, heads)?;
    let (n, dim) = (q.frames(), q.dim());
    let dh = dim / heads;
    let scale = 1.0 / (dh as f32).sqrt();
    let mut global = SequenceFeature::zeros(q.seqs(), n, dim);
    let mut local = SequenceFeature::zeros(q.seqs(), n, dim);

    global
        .data_mut()
        .par_chunks_mut(n * dim)
        .zip(local.data_mut().par_chunks_mut(n * dim))
        .enumerate()
        .for_each(|(s, (g_out, l_out))| {
            let (qs, ks, vs) = (q.sequence(s), k.sequence(s), v.sequence(s));
            let mut full = Vec::with_capacity(n);
            let mut window = Vec::with_capacity(2 * alpha.min(n) + 1);
            let mut kt = Vec::with_capacity(dh * n);
            for h in 0..heads {
                let off = h * dh;
                transpose_keys(&mut kt, ks, n, dim, off, dh);
                for i in 0..n {
                    logits(&mut full, &qs[i * dim + off..i * dim + off + dh], &kt, n, 0, n - 1, scale);
                    let (lo, hi) = (i.saturating_sub(alpha), (i + alpha).min(n - 1));
                    window.clear();
                    window.extend_from_slice(&full[lo..=hi]);
                    softmax_in_place(&mut full);
                    softmax_in_place(&mut window);
                    weighted_sum(&mut g_out[i * dim + off..i * dim + off + dh], &full, vs, 0, dim, off);
                    weighted_sum(&mut l_out[i * dim + off..i * dim + off + dh], &window, vs, lo, dim, off);
                }
            }
        });
    Ok((global, local))
}

/// Window start offsets `0, stride, 2*stride, ...`, plus a final window
/// ending exactly at `frames` when the stride would leave a tail uncovered.
pub fn sliding_windows(frames: usize, window: usize, stride: usize) -> Result<Vec<usize>> {
    if window == 0 || window > frames {
        return Err(Error::Parameter(format!("window {window} must lie in 1..={frames}")));
    }
    if stride == 0 {
        return Err(Error::Parameter("stride must be >= 1".into()));
    }
    let mut offsets: Vec<usize> = (0..=frames - window).step_by(stride).collect();
    let last = *offsets.last().expect("offset 0 always fits");
    if last + window < frames {
        offsets.push(frames - window);
    }
    Ok(offsets)
}

#[derive(Debug, Clone)]
pub struct SlidingOutput {
    pub output: SequenceFeature,
    pub windows: usize,
}

/// Full attention inside each window; frames covered by several windows get
/// the mean of their per-window outputs.
pub fn sliding_window_attention(
    q: &SequenceFeature,
    k: &SequenceFeature,
    v: &SequenceFeature,
    window: usize,
    stride: usize,
    heads: usize,
) -> Result<SlidingOutput> {
    check_qkv(q, k, v, heads)?;
    let offsets = sliding_windows(q.frames(), window, stride)?;
    let (n, dim) = (q.frames(), q.dim());
    let mut sum = SequenceFeature::zeros(q.seqs(), n, dim);
    let mut counts = vec![0u32; n];
    for &o in &offsets {
        let out = attend(
            &q.frame_range(o, window)?,
            &k.frame_range(o, window)?,
            &v.frame_range(o, window)?,
            heads,
            Band::Full,
            false,
        )?
        .output;
        accumulate_window(&mut sum, &out, o);
        counts[o..o + window].iter_mut().for_each(|c| *c += 1);
    }
    average_windows(&mut sum, &counts);
    Ok(SlidingOutput { output: sum, windows: offsets.len() })
}

pub(crate) fn accumulate_window(sum: &mut SequenceFeature, part: &SequenceFeature, offset: usize) {
    let (n, dim, w) = (sum.frames(), sum.dim(), part.frames());
    sum.data_mut()
        .par_chunks_mut(n * dim)
        .zip(part.data().par_chunks(w * dim))
        .for_each(|(dst, src)| {
            dst[offset * dim..(offset + w) * dim].iter_mut().zip(src).for_each(|(d, &s)| *d += s);
        });
}

pub(crate) fn average_windows(sum: &mut SequenceFeature, counts: &[u32]) {
    let (n, dim) = (sum.frames(), sum.dim());
    sum.data_mut().par_chunks_mut(n * dim).for_each(|seq| {
        for (f, &c) in counts.iter().enumerate() {
            if c > 1 {
                let inv = c as f32;
                seq[f * dim..(f + 1) * dim].iter_mut().for_each(|x| *x /= inv);
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{sample_gaussian, RngSpec};

    fn random(s: usize, n: usize, d: usize, seed: u64) -> SequenceFeature {
        let t = sample_gaussian(&[s, n, d], &RngSpec::new(seed)).unwrap();
        SequenceFeature::new(s, n, d, t.as_real32().unwrap().to_vec()).unwrap()
    }

    #[test]
    fn window_counts() {
        assert_eq!(sliding_windows(128, 16, 8).unwrap().len(), 15);
        assert_eq!(sliding_windows(16, 16, 8).unwrap(), vec![0]);
        assert_eq!(sliding_windows(20, 16, 8).unwrap(), vec![0, 4]);
        assert_eq!(sliding_windows(32, 16, 16).unwrap(), vec![0, 16]);
        assert_eq!(sliding_windows(10, 4, 3).unwrap(), vec![0, 3, 6]);
        assert_eq!(sliding_windows(11, 4, 3).unwrap(), vec![0, 3, 6, 7]);
        assert!(sliding_windows(8, 16, 8).is_err());
        assert!(sliding_windows(8, 4, 0).is_err());
    }

    #[test]
    fn zero_alpha_is_identity_map() {
        let (q, k, v) = (random(2, 6, 4, 1), random(2, 6, 4, 2), random(2, 6, 4, 3));
        let out = local_attention(&q, &k, &v, 0, 2).unwrap();
        assert_eq!(out.output, v);
        assert!(out.maps.iter().all(|m| *m == AttentionMap::identity(6)));
    }

    #[test]
    fn single_frame() {
        let (q, k, v) = (random(3, 1, 4, 1), random(3, 1, 4, 2), random(3, 1, 4, 3));
        let out = global_attention(&q, &k, &v, 1).unwrap();
        assert_eq!(out.output, v);
        assert_eq!(out.maps[0].data(), &[1.0]);
    }

    #[test]
    fn post_softmax_variant_zeroes_without_renormalizing() {
        let (q, k, v) = (random(1, 8, 4, 4), random(1, 8, 4, 5), random(1, 8, 4, 6));
        let global = global_attention(&q, &k, &v, 1).unwrap();
        let lit = local_attention_with(&q, &k, &v, 1, 1, LocalMaskMode::PostSoftmaxZero).unwrap();
        let (g, m) = (&global.maps[0], &lit.maps[0]);
        for i in 0..8usize {
            for j in 0..8 {
                let expected = if i.abs_diff(j) <= 1 { g.at(i, j) } else { 0.0 };
                assert_eq!(m.at(i, j), expected);
            }
            assert!(m.row(i).iter().sum::<f32>() < 1.0);
        }
    }

    #[test]
    fn fused_matches_separate_kernels_bitwise() {
        let (q, k, v) = (random(3, 20, 8, 7), random(3, 20, 8, 8), random(3, 20, 8, 9));
        let (g, l) = global_and_local(&q, &k, &v, 3, 2).unwrap();
        assert_eq!(g, global_attention(&q, &k, &v, 2).unwrap().output);
        assert_eq!(l, local_attention(&q, &k, &v, 3, 2).unwrap().output);
    }

    #[test]
    fn shape_errors() {
        let (q, k) = (random(1, 4, 4, 1), random(1, 5, 4, 2));
        assert!(matches!(global_attention(&q, &k, &q, 1), Err(Error::Dimension(_))));
        assert!(matches!(global_attention(&q, &q, &q, 3), Err(Error::Parameter(_))));
    }
}
