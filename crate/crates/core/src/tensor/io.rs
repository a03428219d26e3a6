//! VLT1 binary format.
//!
//! ```text
//! "VLT1"            4 bytes magic
//! dtype             u8 (0 = real32, 1 = real64, 2 = complex64)
//! ndim              u8
//! dims              ndim x u64, little-endian
//! payload           row-major little-endian elements; complex64 is (re, im) f32 pairs
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex32;

use super::{validate_dims, DType, Tensor, TensorData};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VLT1";

pub fn encode_tensor(t: &Tensor) -> Vec<u8> {
    let dims = t.dims();
    let mut out = Vec::with_capacity(6 + 8 * dims.len() + t.len() * t.dtype().element_size());
    out.extend_from_slice(MAGIC);
    out.push(t.dtype().code());
    out.push(dims.len() as u8);
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    match t.data() {
        TensorData::Real32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TensorData::Real64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TensorData::Complex64(v) => v.iter().for_each(|z| {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }),
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < 6 {
        let mut found = [0u8; 4];
        let n = bytes.len().min(4);
        found[..n].copy_from_slice(&bytes[..n]);
        if &found != MAGIC {
            return Err(Error::BadMagic { found });
        }
        return Err(Error::LengthMismatch { expected: 6, found: bytes.len() });
    }
    let found: [u8; 4] = bytes[..4].try_into().unwrap();
    if &found != MAGIC {
        return Err(Error::BadMagic { found });
    }
    let dtype = DType::from_code(bytes[4])?;
    let ndim = bytes[5] as usize;
    let header_len = 6 + 8 * ndim;
    if bytes.len() < header_len {
        return Err(Error::LengthMismatch { expected: header_len, found: bytes.len() });
    }
    let dims: Vec<usize> = bytes[6..header_len]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    let count = validate_dims(&dims)?;
    let payload = &bytes[header_len..];
    let expected = count
        .checked_mul(dtype.element_size())
        .ok_or_else(|| Error::InvalidDims { dims: dims.clone(), reason: "payload size overflows".into() })?;
    if payload.len() != expected {
        return Err(Error::LengthMismatch { expected, found: payload.len() });
    }
    let data = match dtype {
        DType::Real32 => TensorData::Real32(
            payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect(),
        ),
        DType::Real64 => TensorData::Real64(
            payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect(),
        ),
        DType::Complex64 => TensorData::Complex64(
            payload
                .chunks_exact(8)
                .map(|c| {
                    Complex32::new(
                        f32::from_le_bytes(c[..4].try_into().unwrap()),
                        f32::from_le_bytes(c[4..].try_into().unwrap()),
                    )
                })
                .collect(),
        ),
    };
    Tensor::new(dims, data)
}

/// Writes `t` to `path`. The bytes go to a sibling temp file first and are
/// renamed into place, so a failed write never leaves a partial tensor.
pub fn write_tensor(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_tensor(t))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);

    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_file_layout() {
        let t = Tensor::real32(vec![1], vec![0.0]).unwrap();
        let bytes = encode_tensor(&t);
        assert_eq!(bytes.len(), 18);
        assert_eq!(&bytes[..4], b"VLT1");
        assert_eq!(bytes[4], 0);
        assert_eq!(bytes[5], 1);
        assert_eq!(&bytes[6..14], &1u64.to_le_bytes());
        assert_eq!(&bytes[14..], &0f32.to_le_bytes());
    }

    #[test]
    fn complex_payload_is_interleaved() {
        let t = Tensor::complex64(
            vec![2, 2],
            vec![
                Complex32::new(1.0, 2.0),
                Complex32::new(3.0, 4.0),
                Complex32::new(5.0, 6.0),
                Complex32::new(7.0, 8.0),
            ],
        )
        .unwrap();
        let bytes = encode_tensor(&t);
        let payload = &bytes[6 + 16..];
        assert_eq!(payload.len(), 2 * 2 * 8);
        assert_eq!(&payload[..4], &1f32.to_le_bytes());
        assert_eq!(&payload[4..8], &2f32.to_le_bytes());
        assert_eq!(&payload[8..12], &3f32.to_le_bytes());
    }

    #[test]
    fn wrong_magic() {
        let mut bytes = encode_tensor(&Tensor::real32(vec![1], vec![1.0]).unwrap());
        bytes[..4].copy_from_slice(b"XXXX");
        let err = decode_tensor(&bytes).unwrap_err();
        assert!(matches!(err, Error::BadMagic { .. }));
        assert!(err.to_string().contains("VLT1"));
    }

    #[test]
    fn truncated_payload() {
        let t = Tensor::real32(vec![10], vec![1.0; 10]).unwrap();
        let bytes = encode_tensor(&t);
        let err = decode_tensor(&bytes[..bytes.len() - 4]).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { expected: 40, found: 36 }));
    }

    #[test]
    fn unknown_dtype() {
        let mut bytes = encode_tensor(&Tensor::real32(vec![1], vec![1.0]).unwrap());
        bytes[4] = 9;
        assert!(matches!(decode_tensor(&bytes), Err(Error::UnsupportedDtype(9))));
    }

    #[test]
    fn write_to_missing_dir_is_io_error() {
        let t = Tensor::real32(vec![1], vec![1.0]).unwrap();
        let err = write_tensor(&t, "/nonexistent-dir/x.vlt").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
