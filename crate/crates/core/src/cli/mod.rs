//! Command-line surface. [`run`] parses arguments and executes one command,
//! returning the exit code and output instead of touching the process, so
//! commands are testable in-process.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, ErrorClass};

/// Process outcome: exit code 0 success, 1 validation, 2 I/O, 3 numerical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn ok(stdout: String) -> Self {
        CommandResult { exit_code: 0, stdout, stderr: String::new() }
    }

    fn from_error(err: &Error) -> Self {
        CommandResult { exit_code: exit_code(err.class()), stdout: String::new(), stderr: format!("error: {err}\n") }
    }
}

pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Validation => 1,
        ErrorClass::Io => 2,
        ErrorClass::Numerical => 3,
    }
}

#[derive(Debug, Parser)]
#[command(name = "spectralblend", version, about = "Spectral blending of local and global temporal attention")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a Gaussian low-pass filter over [frames, height, width].
    GenFilter(GenFilterArgs),
    /// Blend the low band of a global feature with the high band of a local one.
    Blend(BlendArgs),
    /// Run one temporal-attention kernel with seeded random weights.
    Attend(AttendArgs),
    /// Band-energy report of a video against a short baseline, plus flicker.
    Analyze(AnalyzeArgs),
    /// Run the toy denoising loop and write a run directory.
    Simulate(SimulateArgs),
    /// Time direct, sliding-window, and blended attention layers.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GenFilterArgs {
    #[arg(long)]
    frames: usize,
    #[arg(long)]
    height: usize,
    #[arg(long)]
    width: usize,
    #[arg(long, default_value_t = 0.25)]
    d0: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BlendArgs {
    #[arg(long)]
    global: PathBuf,
    #[arg(long)]
    local: PathBuf,
    /// Filter tensor [N, h, w]; conflicts with --d0.
    #[arg(long, conflicts_with = "d0")]
    filter: Option<PathBuf>,
    /// Build a Gaussian filter on the fly (default 0.25 when no --filter).
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Check the output spectrum against the direct-summation DFT (small inputs only).
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttendMode {
    Global,
    Local,
    Sliding,
    Freelong,
}

#[derive(Debug, Args)]
struct AttendArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    weights_seed: u64,
    #[arg(long, value_enum)]
    mode: AttendMode,
    #[arg(long, default_value_t = 8)]
    alpha: usize,
    #[arg(long, default_value_t = 16)]
    window: usize,
    #[arg(long, default_value_t = 8)]
    stride: usize,
    /// Denoising step (1-based) for the freelong gate.
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[arg(long, default_value_t = 25)]
    tau: usize,
    #[arg(long, default_value_t = 0.25)]
    d0: f64,
    #[arg(long, default_value_t = 1)]
    heads: usize,
    #[arg(long)]
    out: PathBuf,
    /// Directory for attention maps ([S*H, N, N] tensors) and their stats.
    #[arg(long)]
    dump_maps: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    video: PathBuf,
    #[arg(long)]
    baseline: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    split: f64,
    /// Comma-separated subset of spatial,temporal,spatiotemporal.
    #[arg(long, default_value = "spatial,temporal,spatiotemporal")]
    domains: String,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimMode {
    Direct,
    Sliding,
    Freelong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    Random,
    Rescheduled,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 128)]
    frames: usize,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 25)]
    tau: usize,
    #[arg(long, default_value_t = 8)]
    alpha: usize,
    #[arg(long, default_value_t = 0.25)]
    d0: f64,
    #[arg(long, value_enum, default_value_t = SimMode::Freelong)]
    mode: SimMode,
    #[arg(long, value_enum, default_value_t = NoiseArg::Random)]
    noise: NoiseArg,
    /// e.g. "0:A,64:B"
    #[arg(long)]
    segments: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    outdir: PathBuf,
    #[arg(long, default_value_t = 4)]
    channels: usize,
    #[arg(long, default_value_t = 16)]
    height: usize,
    #[arg(long, default_value_t = 16)]
    width: usize,
    #[arg(long, default_value_t = 1)]
    heads: usize,
    #[arg(long, default_value_t = 16)]
    window: usize,
    #[arg(long, default_value_t = 8)]
    stride: usize,
    /// Save every n-th step's latent.
    #[arg(long)]
    snapshot_stride: Option<usize>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 128)]
    frames: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 256)]
    spatial: usize,
    #[arg(long, default_value_t = 16)]
    window: usize,
    #[arg(long, default_value_t = 8)]
    stride: usize,
    #[arg(long, default_value_t = 8)]
    alpha: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output is always JSON; accepted for symmetry with `analyze`.
    #[arg(long)]
    json: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandResult::ok(text),
                _ => CommandResult { exit_code: 1, stdout: String::new(), stderr: text },
            };
        }
    };
    let result = match cli.command {
        Command::GenFilter(a) => commands::gen_filter(a),
        Command::Blend(a) => commands::blend(a),
        Command::Attend(a) => commands::attend(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(out) => CommandResult::ok(out),
        Err(e) => CommandResult::from_error(&e),
    }
}
