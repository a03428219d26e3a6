//! Frequency-domain machinery: transforms, the Gaussian low-pass filter,
//! band masks, spectral blending, and band-energy statistics.

mod band;
mod blend;
mod fft;
mod filter;
mod oracle;

pub use band::{
    band_energy_fraction, band_fractions, band_mask, relative_band_ratio, BandMask, BandRatio, BandReport,
    Domain, DEFAULT_SPLIT,
};
pub use blend::{blend_spectra, spectral_blend};
pub use fft::{fft3, ifft3, ifft3_complex, Spectrum, IMAG_RESIDUE_TOLERANCE};
pub use filter::{gaussian_lpf, normalized_frequency, LowPassFilter, DEFAULT_D0};
pub use oracle::{dft3_oracle, ORACLE_MAX_BINS};

pub(crate) use fft::fft_axes;
