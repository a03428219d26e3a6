use num_complex::Complex32;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::{fft_axes, normalized_frequency};
use crate::error::{Error, Result};
use crate::tensor::{Tensor, VideoFeature, VideoShape};

/// Default low/high split in normalized frequency (`0.25` of Nyquist).
pub const DEFAULT_SPLIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Spatial,
    Temporal,
    Spatiotemporal,
}

impl Domain {
    /// Report order.
    pub const ALL: [Domain; 3] = [Domain::Spatial, Domain::Temporal, Domain::Spatiotemporal];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Spatial => "spatial",
            Domain::Temporal => "temporal",
            Domain::Spatiotemporal => "spatiotemporal",
        }
    }

    /// Transformed axes of a `[C, N, h, w]` feature.
    fn axes(self) -> &'static [usize] {
        match self {
            Domain::Spatial => &[2, 3],
            Domain::Temporal => &[1],
            Domain::Spatiotemporal => &[1, 2, 3],
        }
    }

    /// Frequency-bin dims this domain uses for a given feature shape.
    pub fn bin_dims(self, shape: VideoShape) -> Vec<usize> {
        match self {
            Domain::Spatial => vec![shape.height, shape.width],
            Domain::Temporal => vec![shape.frames],
            Domain::Spatiotemporal => vec![shape.frames, shape.height, shape.width],
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spatial" => Ok(Domain::Spatial),
            "temporal" => Ok(Domain::Temporal),
            "spatiotemporal" => Ok(Domain::Spatiotemporal),
            other => Err(Error::Parameter(format!(
                "unknown domain {other:?} (expected spatial, temporal, or spatiotemporal)"
            ))),
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Boolean selection over a domain's frequency bins (unshifted order).
#[derive(Debug, Clone, PartialEq)]
pub struct BandMask {
    domain: Domain,
    dims: Vec<usize>,
    split: f64,
    bins: Vec<bool>,
}

impl BandMask {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn split(&self) -> f64 {
        self.split
    }

    pub fn bins(&self) -> &[bool] {
        &self.bins
    }

    pub fn count(&self) -> usize {
        self.bins.iter().filter(|&&b| b).count()
    }

    /// 0/1 real32 tensor, for VLT1 export.
    pub fn to_tensor(&self) -> Tensor {
        Tensor::real32(self.dims.clone(), self.bins.iter().map(|&b| b as u8 as f32).collect()).expect("validated dims")
    }
}

fn check_split(split: f64) -> Result<()> {
    if split > 0.0 && split < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("band split must lie in (0, 1), got {split}")))
    }
}

/// Radial coordinate `sqrt(mean f_a^2)` of every bin, in `[0, 1]`.
fn radial(dims: &[usize]) -> Vec<f64> {
    let count: usize = dims.iter().product();
    let mut out = Vec::with_capacity(count);
    for flat in 0..count {
        let mut rem = flat;
        let mut sum = 0.0;
        for &len in dims.iter().rev() {
            let f = normalized_frequency(rem % len, len);
            sum += f * f;
            rem /= len;
        }
        out.push((sum / dims.len() as f64).sqrt());
    }
    out
}

/// Complementary low (`r <= split`) and high masks over a domain's bins.
pub fn band_mask(domain: Domain, dims: &[usize], split: f64) -> Result<(BandMask, BandMask)> {
    check_split(split)?;
    let expected_rank = domain.axes().len();
    if dims.len() != expected_rank || dims.contains(&0) {
        return Err(Error::InvalidDims {
            dims: dims.to_vec(),
            reason: format!("{domain} mask needs {expected_rank} positive dims"),
        });
    }
    let low: Vec<bool> = radial(dims).into_iter().map(|r| r <= split).collect();
    let high = low.iter().map(|b| !b).collect();
    let make = |bins| BandMask { domain, dims: dims.to_vec(), split, bins };
    Ok((make(low), make(high)))
}

/// Per-bin energy `|X|^2` summed over the non-transformed axes, indexed like
/// the domain's mask.
fn pooled_energy(z: &VideoFeature, domain: Domain) -> Vec<f64> {
    let shape = z.shape();
    let mut buf: Vec<Complex32> = z.data().iter().map(|&v| Complex32::new(v, 0.0)).collect();
    fft_axes(&mut buf, &shape.dims(), domain.axes(), FftDirection::Forward);

    let bins: usize = domain.bin_dims(shape).iter().product();
    let mut energy = vec![0.0f64; bins];
    let (nh, nw) = (shape.height, shape.width);
    for c in 0..shape.channels {
        for n in 0..shape.frames {
            for y in 0..nh {
                for x in 0..nw {
                    let bin = match domain {
                        Domain::Temporal => n,
                        Domain::Spatial => y * nw + x,
                        Domain::Spatiotemporal => (n * nh + y) * nw + x,
                    };
                    energy[bin] += buf[shape.index(c, n, y, x)].norm_sqr() as f64;
                }
            }
        }
    }
    energy
}

fn check_mask_dims(z: &VideoFeature, mask: &BandMask) -> Result<()> {
    let expected = mask.domain.bin_dims(z.shape());
    if expected != mask.dims {
        return Err(Error::Dimension(format!(
            "{} mask dims {:?} do not match feature {} (expected {:?})",
            mask.domain,
            mask.dims,
            z.shape(),
            expected
        )));
    }
    Ok(())
}

/// Share of spectral energy inside `mask`. Energies are pooled over the
/// axes the domain does not transform before the ratio is taken.
pub fn band_energy_fraction(z: &VideoFeature, mask: &BandMask) -> Result<f64> {
    check_mask_dims(z, mask)?;
    let energy = pooled_energy(z, mask.domain);
    let (mut inside, mut outside) = (0.0, 0.0);
    for (e, &m) in energy.iter().zip(&mask.bins) {
        if m {
            inside += e;
        } else {
            outside += e;
        }
    }
    let total = inside + outside;
    if total <= 0.0 {
        return Err(Error::UndefinedFraction(format!("{} spectrum has zero total energy", mask.domain)));
    }
    Ok(inside / total)
}

/// `(low, high)` energy fractions from a single transform.
pub fn band_fractions(z: &VideoFeature, domain: Domain, split: f64) -> Result<(f64, f64)> {
    let (low, _) = band_mask(domain, &domain.bin_dims(z.shape()), split)?;
    let energy = pooled_energy(z, domain);
    let (mut lo, mut hi) = (0.0, 0.0);
    for (e, &m) in energy.iter().zip(&low.bins) {
        if m {
            lo += e;
        } else {
            hi += e;
        }
    }
    let total = lo + hi;
    if total <= 0.0 {
        return Err(Error::UndefinedFraction(format!("{domain} spectrum has zero total energy")));
    }
    Ok((lo / total, hi / total))
}

/// Band-energy fractions of a video relative to a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandRatio {
    pub low: f64,
    pub high: f64,
}

/// `fraction(long, band) / fraction(short, band)` for the low and high bands.
/// Each input is analyzed at its own length.
pub fn relative_band_ratio(long: &VideoFeature, short: &VideoFeature, domain: Domain, split: f64) -> Result<BandRatio> {
    if long.shape().channels != short.shape().channels {
        return Err(Error::Dimension(format!(
            "channel counts differ: {} vs {}",
            long.shape().channels,
            short.shape().channels
        )));
    }
    let (long_lo, long_hi) = band_fractions(long, domain, split)?;
    let (short_lo, short_hi) = band_fractions(short, domain, split)?;
    let ratio = |num: f64, den: f64, band: &str| {
        if den <= 0.0 {
            Err(Error::UndefinedRatio(format!("reference {domain} {band}-band fraction is zero")))
        } else {
            Ok(num / den)
        }
    };
    Ok(BandRatio { low: ratio(long_lo, short_lo, "low")?, high: ratio(long_hi, short_hi, "high")? })
}

/// Band-energy fractions of one domain, optionally against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub domain: Domain,
    pub split: f64,
    pub low_fraction: f64,
    pub high_fraction: f64,
    pub ratio_low: Option<f64>,
    pub ratio_high: Option<f64>,
}
