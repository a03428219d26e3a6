use std::collections::BTreeMap;

use serde::Serialize;

use super::conditioning::validate_segments;
use super::{embedding_for, reschedule_noise, segment_conditioning, ConditioningTable, Segment, BLOCK_FRAMES};
use crate::attention::{
    global_output, project_qkv, sliding_window_attention, spectralblend_ta, AttentionWeights, SequenceFeature,
    DEFAULT_ALPHA, DEFAULT_TAU,
};
use crate::error::{Error, Result};
use crate::spectral::{gaussian_lpf, DEFAULT_D0};
use crate::tensor::{sample_gaussian, RngSpec, VideoFeature, VideoShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Full temporal attention over all frames.
    Direct,
    /// Overlapping fixed-length windows, averaged.
    SlidingWindow,
    /// Spectral blend of global and local attention for the first `tau` steps.
    Freelong,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Mode::Direct),
            "sliding_window" | "sliding" => Ok(Mode::SlidingWindow),
            "freelong" => Ok(Mode::Freelong),
            other => Err(Error::Parameter(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseInit {
    Random,
    /// 16-frame noise tiled with per-block frame shuffles.
    Rescheduled,
}

impl std::str::FromStr for NoiseInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(NoiseInit::Random),
            "rescheduled" => Ok(NoiseInit::Rescheduled),
            other => Err(Error::Parameter(format!("unknown noise init {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenoiseConfig {
    pub channels: usize,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub total_steps: usize,
    pub tau: usize,
    pub alpha: usize,
    pub d0: f64,
    pub heads: usize,
    /// Sliding-window length and stride (sliding_window mode only).
    pub window: usize,
    pub stride: usize,
    pub rng: RngSpec,
    pub mode: Mode,
    pub noise_init: NoiseInit,
    pub segments: Option<Vec<Segment>>,
    /// Keep every `n`-th step's latent; `None` keeps none.
    pub snapshot_stride: Option<usize>,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            channels: 4,
            frames: 128,
            height: 16,
            width: 16,
            total_steps: 50,
            tau: DEFAULT_TAU,
            alpha: DEFAULT_ALPHA,
            d0: DEFAULT_D0,
            heads: 1,
            window: BLOCK_FRAMES,
            stride: BLOCK_FRAMES / 2,
            rng: RngSpec::new(0),
            mode: Mode::Freelong,
            noise_init: NoiseInit::Random,
            segments: None,
            snapshot_stride: None,
        }
    }
}

impl DenoiseConfig {
    pub fn shape(&self) -> Result<VideoShape> {
        VideoShape::new(self.channels, self.frames, self.height, self.width)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape()?;
        if self.total_steps == 0 {
            return Err(Error::Parameter("total steps must be >= 1".into()));
        }
        if self.tau > self.total_steps {
            return Err(Error::Parameter(format!("tau {} exceeds total steps {}", self.tau, self.total_steps)));
        }
        if !self.d0.is_finite() || self.d0 <= 0.0 {
            return Err(Error::Parameter(format!("d0 must be positive, got {}", self.d0)));
        }
        if self.heads == 0 || !self.channels.is_multiple_of(self.heads) {
            return Err(Error::Parameter(format!("{} heads do not divide {} channels", self.heads, self.channels)));
        }
        if self.mode == Mode::SlidingWindow {
            crate::attention::sliding_windows(self.frames, self.window, self.stride)?;
        }
        if self.noise_init == NoiseInit::Rescheduled && !self.frames.is_multiple_of(BLOCK_FRAMES) {
            return Err(Error::Parameter(format!(
                "rescheduled noise needs a multiple of {BLOCK_FRAMES} frames, got {}",
                self.frames
            )));
        }
        if let Some(segments) = &self.segments {
            validate_segments(segments, self.frames)?;
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::Parameter("snapshot stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Embedding for every segment id, keyed by id.
    pub fn embeddings(&self) -> BTreeMap<String, Vec<f32>> {
        self.segments
            .iter()
            .flatten()
            .map(|s| (s.id.clone(), embedding_for(&s.id, self.channels, 0.1, &self.rng)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepFlag {
    pub step: usize,
    pub used_blend: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: DenoiseConfig,
    pub flags: Vec<StepFlag>,
    /// `(step, latent after that step)`, step 0 being the initial noise.
    pub snapshots: Vec<(usize, VideoFeature)>,
    pub conditioning: Option<ConditioningTable>,
    pub final_latent: VideoFeature,
}

impl Trajectory {
    pub fn rng_algorithm(&self) -> &'static str {
        self.config.rng.algorithm
    }
}

fn initial_latent(cfg: &DenoiseConfig, shape: VideoShape) -> Result<VideoFeature> {
    match cfg.noise_init {
        NoiseInit::Random => VideoFeature::from_tensor(sample_gaussian(&shape.dims(), &cfg.rng)?),
        NoiseInit::Rescheduled => {
            let base_shape = VideoShape { frames: BLOCK_FRAMES, ..shape };
            let base = VideoFeature::from_tensor(sample_gaussian(&base_shape.dims(), &cfg.rng)?)?;
            reschedule_noise(&base, shape.frames, &cfg.rng)
        }
    }
}

/// Runs the fixed synthetic denoiser for `total_steps` steps.
///
/// Each step passes the latent through one temporal-attention layer chosen by
/// `mode`, adds the per-frame conditioning vector broadcast over space, and
/// contracts toward the result: `x <- x - (x - attended) / T`.
pub fn run_toy_denoise(cfg: &DenoiseConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let shape = cfg.shape()?;
    let weights = AttentionWeights::random(cfg.channels, cfg.heads, &cfg.rng)?;
    let filter = gaussian_lpf(shape.frames, shape.height, shape.width, cfg.d0)?;
    let conditioning = match &cfg.segments {
        Some(segments) => Some(segment_conditioning(segments, shape.frames, &cfg.embeddings())?),
        None => None,
    };

    let mut x = initial_latent(cfg, shape)?;
    let mut snapshots = Vec::new();
    if cfg.snapshot_stride.is_some() {
        snapshots.push((0, x.clone()));
    }
    let mut flags = Vec::with_capacity(cfg.total_steps);
    let inv_t = 1.0 / cfg.total_steps as f32;

    for step in 1..=cfg.total_steps {
        let used_blend = cfg.mode == Mode::Freelong && step <= cfg.tau;
        let mut attended = match cfg.mode {
            Mode::Freelong => spectralblend_ta(&x, &weights, cfg.alpha, &filter, step, cfg.tau)?,
            Mode::Direct => {
                let (q, k, v) = project_qkv(&SequenceFeature::from_video(&x), &weights)?;
                global_output(&q, &k, &v, cfg.heads)?.to_video(shape.height, shape.width)?
            }
            Mode::SlidingWindow => {
                let (q, k, v) = project_qkv(&SequenceFeature::from_video(&x), &weights)?;
                sliding_window_attention(&q, &k, &v, cfg.window, cfg.stride, cfg.heads)?
                    .output
                    .to_video(shape.height, shape.width)?
            }
        };
        if let Some(table) = &conditioning {
            add_conditioning(&mut attended, table);
        }
        for (xi, ai) in x.data_mut().iter_mut().zip(attended.data()) {
            *xi -= inv_t * (*xi - ai);
        }
        if x.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("latent became non-finite at step {step}")));
        }
        flags.push(StepFlag { step, used_blend });
        if let Some(stride) = cfg.snapshot_stride {
            if step % stride == 0 || step == cfg.total_steps {
                snapshots.push((step, x.clone()));
            }
        }
    }

    Ok(Trajectory { config: cfg.clone(), flags, snapshots, conditioning, final_latent: x })
}

fn add_conditioning(z: &mut VideoFeature, table: &ConditioningTable) {
    let s = z.shape();
    let frame = s.spatial();
    let data = z.data_mut();
    for c in 0..s.channels {
        for n in 0..s.frames {
            let v = table.vector(n)[c];
            let start = s.index(c, n, 0, 0);
            data[start..start + frame].iter_mut().for_each(|x| *x += v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> DenoiseConfig {
        DenoiseConfig { frames: 32, height: 4, width: 4, total_steps: 10, tau: 4, mode, ..Default::default() }
    }

    #[test]
    fn validation() {
        let bad = [
            DenoiseConfig { tau: 11, ..small(Mode::Freelong) },
            DenoiseConfig { total_steps: 0, tau: 0, ..small(Mode::Freelong) },
            DenoiseConfig { d0: 0.0, ..small(Mode::Freelong) },
            DenoiseConfig { heads: 3, ..small(Mode::Freelong) },
            DenoiseConfig { window: 64, ..small(Mode::SlidingWindow) },
            DenoiseConfig { frames: 24, noise_init: NoiseInit::Rescheduled, ..small(Mode::Direct) },
            DenoiseConfig { segments: Some(vec![Segment { start: 1, id: "A".into() }]), ..small(Mode::Direct) },
            DenoiseConfig { snapshot_stride: Some(0), ..small(Mode::Direct) },
        ];
        for cfg in bad {
            assert!(run_toy_denoise(&cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn gate_flags() {
        let traj = run_toy_denoise(&small(Mode::Freelong)).unwrap();
        let used: Vec<bool> = traj.flags.iter().map(|f| f.used_blend).collect();
        assert_eq!(used, [true, true, true, true, false, false, false, false, false, false]);
        for mode in [Mode::Direct, Mode::SlidingWindow] {
            let traj = run_toy_denoise(&small(mode)).unwrap();
            assert!(traj.flags.iter().all(|f| !f.used_blend));
        }
    }

    #[test]
    fn snapshots_follow_stride() {
        let cfg = DenoiseConfig { snapshot_stride: Some(4), ..small(Mode::Direct) };
        let steps: Vec<usize> = run_toy_denoise(&cfg).unwrap().snapshots.iter().map(|s| s.0).collect();
        assert_eq!(steps, vec![0, 4, 8, 10]);
    }

    #[test]
    fn conditioning_shifts_latent() {
        let plain = run_toy_denoise(&small(Mode::Direct)).unwrap();
        let segs = Some(vec![Segment { start: 0, id: "A".into() }, Segment { start: 16, id: "B".into() }]);
        let cond = run_toy_denoise(&DenoiseConfig { segments: segs, ..small(Mode::Direct) }).unwrap();
        assert!(plain.final_latent.max_abs_diff(&cond.final_latent) > 0.0);
        let table = cond.conditioning.unwrap();
        assert_eq!(table.runs(), vec![(0, 16, "A"), (16, 32, "B")]);
    }

    #[test]
    fn rescheduled_start() {
        let cfg = DenoiseConfig { noise_init: NoiseInit::Rescheduled, snapshot_stride: Some(100), ..small(Mode::Direct) };
        let traj = run_toy_denoise(&cfg).unwrap();
        let init = &traj.snapshots[0].1;
        // block 0 is the untouched base clip; frame 0 of block 1 is some base frame
        let frame = init.shape().spatial();
        let block1_first = &init.data()[16 * frame..17 * frame];
        let found = (0..16).any(|f| &init.data()[f * frame..(f + 1) * frame] == block1_first);
        assert!(found);
    }
}
