//! Toy denoising loop, noise rescheduling, per-frame conditioning, and
//! attention-kernel micro-benchmarks.

mod bench;
mod conditioning;
mod denoise;
mod noise;
mod run_dir;

pub use bench::{bench_attention, machine_descriptor, BenchConfig, BenchReport, ModeTiming, BENCH_MAX_ELEMENTS};
pub use conditioning::{embedding_for, parse_segments, segment_conditioning, ConditioningTable, Segment};
pub use denoise::{run_toy_denoise, DenoiseConfig, Mode, NoiseInit, StepFlag, Trajectory};
pub use noise::{block_permutations, reschedule_noise, BLOCK_FRAMES};
pub use run_dir::{sha256_hex, write_run, Manifest, ManifestFile};
