use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};

use super::Spectrum;
use crate::error::{Error, Result};
use crate::tensor::VideoFeature;

/// Largest `N * h * w` the direct-summation oracle accepts.
pub const ORACLE_MAX_BINS: usize = 4096;

/// Direct triple-sum DFT over `(N, h, w)` per channel, accumulated in f64.
///
/// Quadratic in the bin count; only meant for verifying [`super::fft3`].
pub fn dft3_oracle(z: &VideoFeature) -> Result<Spectrum> {
    let shape = z.shape();
    let (nt, nh, nw) = (shape.frames, shape.height, shape.width);
    let vol = shape.volume();
    if vol > ORACLE_MAX_BINS {
        return Err(Error::Refused(format!(
            "oracle DFT over {vol} bins exceeds the {ORACLE_MAX_BINS}-bin guard"
        )));
    }

    let mut out = Vec::with_capacity(shape.len());
    for c in 0..shape.channels {
        let x = &z.data()[c * vol..(c + 1) * vol];
        for kt in 0..nt {
            for kh in 0..nh {
                for kw in 0..nw {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for t in 0..nt {
                        for y in 0..nh {
                            for xx in 0..nw {
                                // reduce the phase before scaling so large index products stay exact
                                let turns = ((kt * t) % nt) as f64 / nt as f64
                                    + ((kh * y) % nh) as f64 / nh as f64
                                    + ((kw * xx) % nw) as f64 / nw as f64;
                                let v = x[(t * nh + y) * nw + xx] as f64;
                                acc += Complex64::from_polar(v, -2.0 * PI * turns);
                            }
                        }
                    }
                    out.push(Complex32::new(acc.re as f32, acc.im as f32));
                }
            }
        }
    }
    Spectrum::new(shape, out)
}
