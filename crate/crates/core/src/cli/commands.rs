use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use super::{AnalyzeArgs, AttendArgs, AttendMode, BenchArgs, BlendArgs, GenFilterArgs, NoiseArg, SimMode, SimulateArgs};
use crate::analysis::{frequency_report_features, reports_to_csv, FlickerReport};
use crate::attention::{
    attention_diagonality, global_attention, local_attention, project_qkv, sliding_window_attention, spectralblend_ta,
    AttentionMap, AttentionWeights, SequenceFeature,
};
use crate::error::{Error, Result};
use crate::harness::{bench_attention, parse_segments, run_toy_denoise, write_run, BenchConfig, DenoiseConfig, Mode, NoiseInit};
use crate::spectral::{blend_spectra, dft3_oracle, gaussian_lpf, spectral_blend, Domain, LowPassFilter, DEFAULT_D0};
use crate::tensor::{read_tensor, write_tensor, RngSpec, Tensor, VideoFeature};

fn pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json value serializes");
    s.push('\n');
    s
}

fn load_video(path: &Path) -> Result<VideoFeature> {
    VideoFeature::from_tensor(read_tensor(path)?)
}

pub(super) fn gen_filter(a: GenFilterArgs) -> Result<String> {
    let p = gaussian_lpf(a.frames, a.height, a.width, a.d0)?;
    write_tensor(&p.to_tensor(), &a.out)?;
    let min = p.data().iter().copied().fold(f32::INFINITY, f32::min);
    Ok(pretty(json!({
        "out": a.out,
        "dims": p.dims(),
        "d0": a.d0,
        "dc_value": p.at(0, 0, 0),
        "min_value": min,
    })))
}

pub(super) fn blend(a: BlendArgs) -> Result<String> {
    let global = load_video(&a.global)?;
    let local = load_video(&a.local)?;
    if global.shape() != local.shape() {
        return Err(Error::Dimension(format!(
            "global {} and local {} shapes differ",
            global.shape(),
            local.shape()
        )));
    }
    let s = global.shape();
    let (filter, filter_desc) = match (&a.filter, a.d0) {
        (Some(path), _) => (LowPassFilter::from_tensor(&read_tensor(path)?)?, json!({ "file": path })),
        (None, d0) => {
            let d0 = d0.unwrap_or(DEFAULT_D0);
            (gaussian_lpf(s.frames, s.height, s.width, d0)?, json!({ "gaussian_d0": d0 }))
        }
    };
    let out = spectral_blend(&global, &local, &filter)?;

    let verify = if a.verify {
        let g = dft3_oracle(&global)?;
        let l = dft3_oracle(&local)?;
        let expected = blend_spectra(&g, &l, &filter)?;
        let actual = dft3_oracle(&out)?;
        let err = actual.max_abs_diff(&expected);
        let peak = global.data().iter().chain(local.data()).fold(0.0f32, |m, v| m.max(v.abs()));
        let tol = 1e-4 * peak.max(1.0);
        if err > tol {
            return Err(Error::Numerical(format!(
                "blended spectrum deviates from the oracle by {err:e} (tolerance {tol:e})"
            )));
        }
        json!({ "max_abs_error": err, "tolerance": tol, "passed": true })
    } else {
        Value::Null
    };

    write_tensor(&out.to_tensor(), &a.out)?;
    Ok(pretty(json!({
        "out": a.out,
        "dims": s.dims(),
        "filter": filter_desc,
        "verify": verify,
    })))
}

fn mean_stats(maps: &[AttentionMap], k: usize) -> Value {
    let stats: Vec<_> = maps.iter().map(|m| attention_diagonality(m, k)).collect();
    let count = stats.len().max(1) as f64;
    json!({
        "band_mass": stats.iter().map(|s| s.band_mass).sum::<f64>() / count,
        "row_entropy_mean": stats.iter().map(|s| s.row_entropy_mean).sum::<f64>() / count,
        "N": maps.first().map(|m| m.n()).unwrap_or(0),
        "k": k,
        "maps": stats.len(),
    })
}

fn dump_maps(dir: &Path, kind: &str, maps: &[AttentionMap], k: usize) -> Result<Value> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let n = maps[0].n();
    let data: Vec<f32> = maps.iter().flat_map(|m| m.data().iter().copied()).collect();
    let file = dir.join(format!("maps_{kind}.vlt"));
    write_tensor(&Tensor::real32(vec![maps.len(), n, n], data)?, &file)?;
    let stats = mean_stats(maps, k);
    let stats_file = dir.join(format!("maps_{kind}.json"));
    crate::tensor::io::write_atomic(&stats_file, pretty(stats.clone()).as_bytes())?;
    Ok(json!({ "kind": kind, "file": file, "stats": stats }))
}

pub(super) fn attend(a: AttendArgs) -> Result<String> {
    let z = load_video(&a.input)?;
    let s = z.shape();
    let weights = AttentionWeights::random(s.channels, a.heads, &RngSpec::new(a.weights_seed))?;
    let seq = SequenceFeature::from_video(&z);
    let mut summary = json!({ "out": a.out, "dims": s.dims(), "weights_seed": a.weights_seed, "heads": a.heads });
    let mut dumped = Vec::new();

    let out = match a.mode {
        AttendMode::Global | AttendMode::Local => {
            let (q, k, v) = project_qkv(&seq, &weights)?;
            let (kind, res) = if a.mode == AttendMode::Global {
                ("global", global_attention(&q, &k, &v, a.heads)?)
            } else {
                ("local", local_attention(&q, &k, &v, a.alpha, a.heads)?)
            };
            summary["mode"] = json!(kind);
            if a.mode == AttendMode::Local {
                summary["alpha"] = json!(a.alpha);
            }
            if let Some(dir) = &a.dump_maps {
                dumped.push(dump_maps(dir, kind, &res.maps, a.alpha)?);
            }
            res.output.to_video(s.height, s.width)?
        }
        AttendMode::Sliding => {
            if a.dump_maps.is_some() {
                return Err(Error::Parameter("--dump-maps is not available for sliding mode".into()));
            }
            let (q, k, v) = project_qkv(&seq, &weights)?;
            let res = sliding_window_attention(&q, &k, &v, a.window, a.stride, a.heads)?;
            summary["mode"] = json!("sliding");
            summary["window"] = json!(a.window);
            summary["stride"] = json!(a.stride);
            summary["windows"] = json!(res.windows);
            res.output.to_video(s.height, s.width)?
        }
        AttendMode::Freelong => {
            let filter = gaussian_lpf(s.frames, s.height, s.width, a.d0)?;
            let used_blend = crate::attention::blend_active(a.step, a.tau);
            summary["mode"] = json!("freelong");
            summary["alpha"] = json!(a.alpha);
            summary["step"] = json!(a.step);
            summary["tau"] = json!(a.tau);
            summary["d0"] = json!(a.d0);
            summary["used_blend"] = json!(used_blend);
            if let Some(dir) = &a.dump_maps {
                let (q, k, v) = project_qkv(&seq, &weights)?;
                dumped.push(dump_maps(dir, "local", &local_attention(&q, &k, &v, a.alpha, a.heads)?.maps, a.alpha)?);
                if used_blend {
                    dumped.push(dump_maps(dir, "global", &global_attention(&q, &k, &v, a.heads)?.maps, a.alpha)?);
                }
            }
            spectralblend_ta(&z, &weights, a.alpha, &filter, a.step, a.tau)?
        }
    };
    if !dumped.is_empty() {
        summary["maps"] = Value::Array(dumped);
    }
    write_tensor(&out.to_tensor(), &a.out)?;
    Ok(pretty(summary))
}

pub(super) fn analyze(a: AnalyzeArgs) -> Result<String> {
    if !(a.split > 0.0 && a.split < 1.0) {
        return Err(Error::Parameter(format!("split must lie in (0, 1), got {}", a.split)));
    }
    let domains = a.domains.split(',').map(|d| d.trim().parse::<Domain>()).collect::<Result<Vec<_>>>()?;
    let video = load_video(&a.video)?;
    let baseline = load_video(&a.baseline)?;
    let reports = frequency_report_features(&video, &baseline, a.split, &domains)?;
    let flicker_video = FlickerReport::of(&video)?;
    let flicker_baseline = FlickerReport::of(&baseline)?;
    if a.csv {
        let mut csv = reports_to_csv(&reports);
        csv.push_str(&format!("flicker_raw_mad,video,,{},\n", flicker_video.value));
        csv.push_str(&format!("flicker_raw_mad,baseline,,{},\n", flicker_baseline.value));
        return Ok(csv);
    }
    Ok(pretty(json!({
        "video": a.video,
        "baseline": a.baseline,
        "video_dims": video.shape().dims(),
        "baseline_dims": baseline.shape().dims(),
        "reports": reports,
        "flicker": { "video": flicker_video, "baseline": flicker_baseline },
    })))
}

pub(super) fn simulate(a: SimulateArgs) -> Result<String> {
    let cfg = DenoiseConfig {
        channels: a.channels,
        frames: a.frames,
        height: a.height,
        width: a.width,
        total_steps: a.steps,
        tau: a.tau,
        alpha: a.alpha,
        d0: a.d0,
        heads: a.heads,
        window: a.window,
        stride: a.stride,
        rng: RngSpec::new(a.seed),
        mode: match a.mode {
            SimMode::Direct => Mode::Direct,
            SimMode::Sliding => Mode::SlidingWindow,
            SimMode::Freelong => Mode::Freelong,
        },
        noise_init: match a.noise {
            NoiseArg::Random => NoiseInit::Random,
            NoiseArg::Rescheduled => NoiseInit::Rescheduled,
        },
        segments: a.segments.as_deref().map(parse_segments).transpose()?,
        snapshot_stride: a.snapshot_stride,
    };
    let traj = run_toy_denoise(&cfg)?;
    let (manifest, manifest_sha256) = write_run(&traj, &a.outdir)?;
    let blended = manifest.flags.iter().filter(|f| f.used_blend).count();
    Ok(pretty(json!({
        "outdir": a.outdir,
        "manifest": a.outdir.join("manifest.json"),
        "manifest_sha256": manifest_sha256,
        "final_sha256": manifest.final_sha256,
        "final_dims": traj.final_latent.shape().dims(),
        "steps": cfg.total_steps,
        "blended_steps": blended,
        "files": manifest.files.len(),
    })))
}

pub(super) fn bench(a: BenchArgs) -> Result<String> {
    let _ = a.json;
    let cfg = BenchConfig {
        frames: a.frames,
        dim: a.dim,
        spatial: a.spatial,
        window: a.window,
        stride: a.stride,
        alpha: a.alpha,
        repetitions: a.reps,
        seed: a.seed,
    };
    let report = bench_attention(&cfg)?;
    Ok(pretty(serde_json::to_value(&report).expect("report serializes")))
}
