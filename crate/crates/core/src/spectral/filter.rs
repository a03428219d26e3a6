use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const DEFAULT_D0: f64 = 0.25;

/// Signed normalized frequency of bin `k` on an axis of length `len`.
///
/// `2k/len` for `k <= len/2`, else `2(k - len)/len`; the result lies in
/// `(-1, 1]` with Nyquist at `+1`.
pub fn normalized_frequency(k: usize, len: usize) -> f64 {
    if 2 * k <= len {
        2.0 * k as f64 / len as f64
    } else {
        2.0 * (k as f64 - len as f64) / len as f64
    }
}

/// Spatiotemporal weights `P` over `[N, h, w]`, broadcast across channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LowPassFilter {
    dims: [usize; 3],
    d0: Option<f64>,
    data: Vec<f32>,
}

impl LowPassFilter {
    /// Arbitrary weights in `[0, 1]`. Only [`gaussian_lpf`] guarantees a unit
    /// DC value and radial monotonicity.
    pub fn from_weights(dims: [usize; 3], data: Vec<f32>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidDims { dims: dims.to_vec(), reason: "every dim must be >= 1".into() });
        }
        let count = dims.iter().product::<usize>();
        if data.len() != count {
            return Err(Error::InvalidDims {
                dims: dims.to_vec(),
                reason: format!("expected {count} weights, got {}", data.len()),
            });
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Parameter(format!("filter weight {v} outside [0, 1]")));
        }
        Ok(LowPassFilter { dims, d0: None, data })
    }

    pub fn constant(dims: [usize; 3], value: f32) -> Result<Self> {
        Self::from_weights(dims, vec![value; dims.iter().product()])
    }

    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let dims: [usize; 3] = t
            .dims()
            .try_into()
            .map_err(|_| Error::Dimension(format!("filter needs 3 dims [N, h, w], got {:?}", t.dims())))?;
        let data = t
            .as_real32()
            .ok_or_else(|| Error::Dimension(format!("filter must be real32, got {:?}", t.dtype())))?;
        Self::from_weights(dims, data.to_vec())
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::real32(self.dims.to_vec(), self.data.clone()).expect("validated dims")
    }

    /// `[N, h, w]`.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn d0(&self) -> Option<f64> {
        self.d0
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn at(&self, t: usize, y: usize, x: usize) -> f32 {
        self.data[(t * self.dims[1] + y) * self.dims[2] + x]
    }
}

/// Gaussian low-pass filter `exp(-d^2 / (2 d0^2))` with
/// `d^2 = f_t^2 + f_h^2 + f_w^2` in unshifted bin order.
pub fn gaussian_lpf(frames: usize, height: usize, width: usize, d0: f64) -> Result<LowPassFilter> {
    if !d0.is_finite() || d0 <= 0.0 {
        return Err(Error::Parameter(format!("stop frequency d0 must be positive and finite, got {d0}")));
    }
    let dims = [frames, height, width];
    if dims.contains(&0) {
        return Err(Error::InvalidDims { dims: dims.to_vec(), reason: "every dim must be >= 1".into() });
    }
    let denom = 2.0 * d0 * d0;
    let mut data = Vec::with_capacity(frames * height * width);
    for kt in 0..frames {
        let ft = normalized_frequency(kt, frames);
        for kh in 0..height {
            let fh = normalized_frequency(kh, height);
            for kw in 0..width {
                let fw = normalized_frequency(kw, width);
                let d2 = ft * ft + fh * fh + fw * fw;
                data.push((-d2 / denom).exp() as f32);
            }
        }
    }
    Ok(LowPassFilter { dims, d0: Some(d0), data })
}
