//! Wall-clock comparison of the three temporal-attention layers on identical
//! inputs. Reports min-of-N timings.

use std::time::Instant;

use serde::Serialize;

use crate::attention::{
    accumulate_window, average_windows, global_output, project_qkv, sliding_windows, spectralblend_ta,
    AttentionWeights, SequenceFeature,
};
use crate::error::{Error, Result};
use crate::spectral::{gaussian_lpf, DEFAULT_D0};
use crate::tensor::{sample_gaussian, RngSpec, VideoFeature, VideoShape};

/// Upper bound on `N * S * d` per run.
pub const BENCH_MAX_ELEMENTS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchConfig {
    pub frames: usize,
    pub dim: usize,
    pub spatial: usize,
    pub window: usize,
    pub stride: usize,
    pub alpha: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { frames: 128, dim: 64, spatial: 256, window: 16, stride: 8, alpha: 8, repetitions: 5, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeTiming {
    pub mode: &'static str,
    pub min_seconds: f64,
    pub mean_seconds: f64,
    /// Forward passes of the layer (one per window for the sliding baseline).
    pub passes: usize,
    pub attention_evaluations: usize,
    pub flops_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub machine: String,
    pub config: BenchConfig,
    pub grid: [usize; 2],
    pub timings: Vec<ModeTiming>,
}

impl BenchReport {
    pub fn timing(&self, mode: &str) -> Option<&ModeTiming> {
        self.timings.iter().find(|t| t.mode == mode)
    }
}

pub fn machine_descriptor() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| s.lines().find(|l| l.starts_with("model name")).map(|l| l.split(':').nth(1).unwrap_or("").trim().to_string()))
        .unwrap_or_else(|| "unknown cpu".to_string());
    format!(
        "{}-{}; {}; {} rayon threads",
        std::env::consts::ARCH,
        std::env::consts::OS,
        cpu,
        rayon::current_num_threads()
    )
}

/// Most square `h x w` factorization of `s`.
fn grid(s: usize) -> [usize; 2] {
    let h = (1..=s).take_while(|h| h * h <= s).filter(|h| s.is_multiple_of(*h)).last().unwrap_or(1);
    [h, s / h]
}

fn time_reps(reps: usize, mut f: impl FnMut() -> Result<()>) -> Result<(f64, f64)> {
    let mut min = f64::INFINITY;
    let mut total = 0.0;
    for _ in 0..reps {
        let start = Instant::now();
        f()?;
        let dt = start.elapsed().as_secs_f64();
        min = min.min(dt);
        total += dt;
    }
    Ok((min, total / reps as f64))
}

/// Times direct global attention (one pass), the sliding-window baseline
/// (one full layer pass per window, then overlap averaging), and the
/// spectral-blend layer (shared projection, local + global attention, blend).
///
/// Every mode maps the same `[d, N, h, w]` input to a `[d, N, h, w]` output.
pub fn bench_attention(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.repetitions == 0 {
        return Err(Error::Parameter("repetitions must be >= 1".into()));
    }
    let elements = cfg.frames.checked_mul(cfg.spatial).and_then(|x| x.checked_mul(cfg.dim));
    match elements {
        Some(e) if e <= BENCH_MAX_ELEMENTS => {}
        _ => {
            return Err(Error::Refused(format!(
                "N*S*d = {}*{}*{} exceeds the {BENCH_MAX_ELEMENTS}-element guard",
                cfg.frames, cfg.spatial, cfg.dim
            )))
        }
    }
    let [h, w] = grid(cfg.spatial);
    let shape = VideoShape::new(cfg.dim, cfg.frames, h, w)?;
    let offsets = sliding_windows(cfg.frames, cfg.window, cfg.stride)?;
    let rng = RngSpec::new(cfg.seed);
    let input = VideoFeature::from_tensor(sample_gaussian(&shape.dims(), &rng)?)?;
    let weights = AttentionWeights::random(cfg.dim, 1, &rng)?;
    let filter = gaussian_lpf(cfg.frames, h, w, DEFAULT_D0)?;
    let reps = cfg.repetitions;

    let direct = time_reps(reps, || {
        let (q, k, v) = project_qkv(&SequenceFeature::from_video(&input), &weights)?;
        std::hint::black_box(global_output(&q, &k, &v, 1)?.to_video(h, w)?);
        Ok(())
    })?;

    let sliding = time_reps(reps, || {
        let seq = SequenceFeature::from_video(&input);
        let mut sum = SequenceFeature::new(seq.seqs(), seq.frames(), seq.dim(), vec![0.0; seq.data().len()])?;
        let mut counts = vec![0u32; cfg.frames];
        for &o in &offsets {
            let (q, k, v) = project_qkv(&seq.frame_range(o, cfg.window)?, &weights)?;
            accumulate_window(&mut sum, &global_output(&q, &k, &v, 1)?, o);
            counts[o..o + cfg.window].iter_mut().for_each(|c| *c += 1);
        }
        average_windows(&mut sum, &counts);
        std::hint::black_box(sum.to_video(h, w)?);
        Ok(())
    })?;

    let freelong = time_reps(reps, || {
        std::hint::black_box(spectralblend_ta(&input, &weights, cfg.alpha, &filter, 1, 1)?);
        Ok(())
    })?;

    let (n, s, d) = (cfg.frames as f64, cfg.spatial as f64, cfg.dim as f64);
    let projection = |frames: f64| 3.0 * 2.0 * frames * s * d * d;
    let attention = |frames: f64| 2.0 * 2.0 * s * frames * frames * d;
    let band: f64 = (0..cfg.frames)
        .map(|i| ((i + cfg.alpha).min(cfg.frames - 1) - i.saturating_sub(cfg.alpha) + 1) as f64)
        .sum();
    let volume = n * s;
    let fft = 3.0 * 5.0 * d * volume * volume.log2();
    let win = cfg.window as f64;
    let windows = offsets.len();

    Ok(BenchReport {
        machine: machine_descriptor(),
        config: *cfg,
        grid: [h, w],
        timings: vec![
            ModeTiming {
                mode: "direct",
                min_seconds: direct.0,
                mean_seconds: direct.1,
                passes: 1,
                attention_evaluations: 1,
                flops_estimate: projection(n) + attention(n),
            },
            ModeTiming {
                mode: "sliding_window",
                min_seconds: sliding.0,
                mean_seconds: sliding.1,
                passes: windows,
                attention_evaluations: windows,
                flops_estimate: windows as f64 * (projection(win) + attention(win)),
            },
            ModeTiming {
                mode: "freelong",
                min_seconds: freelong.0,
                mean_seconds: freelong.1,
                passes: 1,
                attention_evaluations: 2,
                flops_estimate: projection(n) + attention(n) + 2.0 * s * d * band + fft,
            },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_factorization() {
        assert_eq!(grid(256), [16, 16]);
        assert_eq!(grid(12), [3, 4]);
        assert_eq!(grid(7), [1, 7]);
    }

    #[test]
    fn guards() {
        let cfg = BenchConfig { repetitions: 0, ..Default::default() };
        assert!(matches!(bench_attention(&cfg), Err(Error::Parameter(_))));
        let cfg = BenchConfig { frames: 1024, spatial: 1024, dim: 64, ..Default::default() };
        assert!(matches!(bench_attention(&cfg), Err(Error::Refused(_))));
    }

    #[test]
    fn small_run_schema() {
        let cfg = BenchConfig { frames: 32, dim: 8, spatial: 16, repetitions: 1, ..Default::default() };
        let r = bench_attention(&cfg).unwrap();
        assert_eq!(r.timings.len(), 3);
        assert_eq!(r.timing("sliding_window").unwrap().passes, 3);
        assert_eq!(r.timing("freelong").unwrap().attention_evaluations, 2);
        assert!(!r.machine.is_empty());
    }
}
