//! Typed row-major tensors, the VLT1 on-disk format, and seeded sampling.

pub(crate) mod io;
mod rng;
mod video;

pub use io::{decode_tensor, encode_tensor, read_tensor, write_tensor, MAGIC};
pub use rng::{sample_gaussian, RngSpec, RNG_ALGORITHM};
pub use video::{VideoFeature, VideoShape};

use num_complex::Complex32;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    Real32,
    Real64,
    /// Interleaved `(re, im)` pairs of `f32`.
    Complex64,
}

impl DType {
    pub fn code(self) -> u8 {
        match self {
            DType::Real32 => 0,
            DType::Real64 => 1,
            DType::Complex64 => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(DType::Real32),
            1 => Ok(DType::Real64),
            2 => Ok(DType::Complex64),
            other => Err(Error::UnsupportedDtype(other)),
        }
    }

    /// Bytes per element on disk.
    pub fn element_size(self) -> usize {
        match self {
            DType::Real32 => 4,
            DType::Real64 | DType::Complex64 => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    Real32(Vec<f32>),
    Real64(Vec<f64>),
    Complex64(Vec<Complex32>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::Real32(v) => v.len(),
            TensorData::Real64(v) => v.len(),
            TensorData::Complex64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> DType {
        match self {
            TensorData::Real32(_) => DType::Real32,
            TensorData::Real64(_) => DType::Real64,
            TensorData::Complex64(_) => DType::Complex64,
        }
    }
}

/// A dense row-major tensor (last axis fastest-varying).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: TensorData,
}

pub(crate) fn validate_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims { dims: dims.to_vec(), reason: "empty dims list".into() });
    }
    if dims.len() > u8::MAX as usize {
        return Err(Error::InvalidDims { dims: dims.to_vec(), reason: "more than 255 axes".into() });
    }
    if dims.contains(&0) {
        return Err(Error::InvalidDims { dims: dims.to_vec(), reason: "every dim must be >= 1".into() });
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidDims { dims: dims.to_vec(), reason: "element count overflows".into() })
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: TensorData) -> Result<Self> {
        let count = validate_dims(&dims)?;
        if count != data.len() {
            return Err(Error::InvalidDims {
                dims,
                reason: format!("product of dims is {count} but data holds {} elements", data.len()),
            });
        }
        Ok(Tensor { dims, data })
    }

    pub fn real32(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        Self::new(dims, TensorData::Real32(data))
    }

    pub fn real64(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        Self::new(dims, TensorData::Real64(data))
    }

    pub fn complex64(dims: Vec<usize>, data: Vec<Complex32>) -> Result<Self> {
        Self::new(dims, TensorData::Complex64(data))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_real32(&self) -> Option<&[f32]> {
        match &self.data {
            TensorData::Real32(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_complex64(&self) -> Option<&[Complex32]> {
        match &self.data {
            TensorData::Complex64(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_parts(self) -> (Vec<usize>, TensorData) {
        (self.dims, self.data)
    }

    /// Equality of dims, dtype, and every payload bit (NaN-safe, distinguishes -0.0).
    pub fn bit_eq(&self, other: &Tensor) -> bool {
        if self.dims != other.dims {
            return false;
        }
        match (&self.data, &other.data) {
            (TensorData::Real32(a), TensorData::Real32(b)) => {
                a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (TensorData::Real64(a), TensorData::Real64(b)) => {
                a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (TensorData::Complex64(a), TensorData::Complex64(b)) => a.iter().zip(b).all(|(x, y)| {
                x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
            }),
            _ => false,
        }
    }
}
