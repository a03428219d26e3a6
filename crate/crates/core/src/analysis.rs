//! Band-energy diagnostics of stored videos against a short reference, and
//! the consecutive-frame flicker statistic.

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{band_fractions, relative_band_ratio, BandReport, Domain, DEFAULT_SPLIT};
use crate::tensor::{read_tensor, VideoFeature};

#[derive(Debug, Clone)]
pub struct AnalysisRequest {
    pub video: PathBuf,
    /// Short (typically 16-frame) reference.
    pub baseline: PathBuf,
    pub split: f64,
    pub domains: Vec<Domain>,
}

impl AnalysisRequest {
    pub fn new(video: impl Into<PathBuf>, baseline: impl Into<PathBuf>) -> Self {
        AnalysisRequest {
            video: video.into(),
            baseline: baseline.into(),
            split: DEFAULT_SPLIT,
            domains: Domain::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::Parameter(format!("split must lie in (0, 1), got {}", self.split)));
        }
        if self.domains.is_empty() {
            return Err(Error::Parameter("at least one domain is required".into()));
        }
        Ok(())
    }
}

/// Loads both tensors and reports every requested domain.
pub fn frequency_report(req: &AnalysisRequest) -> Result<Vec<BandReport>> {
    req.validate()?;
    let video = VideoFeature::from_tensor(read_tensor(&req.video)?)?;
    let baseline = VideoFeature::from_tensor(read_tensor(&req.baseline)?)?;
    frequency_report_features(&video, &baseline, req.split, &req.domains)
}

/// One [`BandReport`] per domain, in spatial, temporal, spatiotemporal order
/// regardless of request order. Each input is analyzed at its own length.
pub fn frequency_report_features(
    video: &VideoFeature,
    baseline: &VideoFeature,
    split: f64,
    domains: &[Domain],
) -> Result<Vec<BandReport>> {
    if baseline.shape().frames > video.shape().frames {
        return Err(Error::Parameter(format!(
            "baseline has {} frames, more than the video's {}",
            baseline.shape().frames,
            video.shape().frames
        )));
    }
    Domain::ALL
        .iter()
        .filter(|d| domains.contains(d))
        .map(|&domain| {
            let wrap = |e: Error| Error::Analysis { domain: domain.name(), source: Box::new(e) };
            let (low, high) = band_fractions(video, domain, split).map_err(wrap)?;
            let ratio = relative_band_ratio(video, baseline, domain, split).map_err(wrap)?;
            Ok(BandReport {
                domain,
                split,
                low_fraction: low,
                high_fraction: high,
                ratio_low: Some(ratio.low),
                ratio_high: Some(ratio.high),
            })
        })
        .collect()
}

/// Mean absolute difference between consecutive frames, over all channels
/// and pixels. Computed over every frame pair ("raw MAD"), without any
/// static-frame selection.
pub fn temporal_flicker(video: &VideoFeature) -> Result<f64> {
    let s = video.shape();
    if s.frames < 2 {
        return Err(Error::Parameter(format!("flicker needs at least 2 frames, got {}", s.frames)));
    }
    let frame = s.spatial();
    let mut total = 0.0f64;
    for c in 0..s.channels {
        let chan = &video.data()[c * s.volume()..(c + 1) * s.volume()];
        for n in 0..s.frames - 1 {
            let (a, b) = (&chan[n * frame..(n + 1) * frame], &chan[(n + 1) * frame..(n + 2) * frame]);
            total += a.iter().zip(b).map(|(x, y)| (*y as f64 - *x as f64).abs()).sum::<f64>();
        }
    }
    Ok(total / (s.channels * (s.frames - 1) * frame) as f64)
}

/// Flicker summary as it appears in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlickerReport {
    pub metric: &'static str,
    pub value: f64,
}

impl FlickerReport {
    pub fn of(video: &VideoFeature) -> Result<Self> {
        Ok(FlickerReport { metric: "raw MAD", value: temporal_flicker(video)? })
    }
}

/// CSV with one row per (domain, band).
pub fn reports_to_csv(reports: &[BandReport]) -> String {
    let mut out = String::from("domain,band,split,fraction,ratio\n");
    let fmt = |r: Option<f64>| r.map(|v| v.to_string()).unwrap_or_default();
    for r in reports {
        out.push_str(&format!("{},low,{},{},{}\n", r.domain, r.split, r.low_fraction, fmt(r.ratio_low)));
        out.push_str(&format!("{},high,{},{},{}\n", r.domain, r.split, r.high_fraction, fmt(r.ratio_high)));
    }
    out
}
