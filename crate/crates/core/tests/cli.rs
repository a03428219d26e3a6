mod common;

use std::path::Path;
use std::process::Command;

use common::*;
use serde_json::Value;
use spectralblend::cli::{run, CommandResult};
use spectralblend::tensor::{read_tensor, write_tensor, VideoFeature};

fn cli(args: &[&str]) -> CommandResult {
    run(std::iter::once("spectralblend").chain(args.iter().copied()))
}

fn json(r: &CommandResult) -> Value {
    assert_eq!(r.exit_code, 0, "stderr: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn save(v: &VideoFeature, dir: &Path, name: &str) -> String {
    let p = dir.join(name);
    write_tensor(&v.to_tensor(), &p).unwrap();
    p.to_str().unwrap().to_owned()
}

fn load(p: &str) -> VideoFeature {
    VideoFeature::from_tensor(read_tensor(p).unwrap()).unwrap()
}

#[test]
fn gen_filter_writes_unit_dc() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.vlt");
    let r = cli(&["gen-filter", "--frames", "16", "--height", "8", "--width", "8", "--out", out.to_str().unwrap()]);
    let v = json(&r);
    assert_eq!(v["dc_value"], 1.0);
    assert_eq!(read_tensor(&out).unwrap().dims(), &[16, 8, 8]);
}

#[test]
fn gen_filter_rejects_zero_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.vlt");
    let r = cli(&["gen-filter", "--frames", "4", "--height", "4", "--width", "4", "--d0", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(r.exit_code, 1);
    assert!(!out.exists());
}

#[test]
fn blend_verifies_against_direct_sum() {
    let dir = tempfile::tempdir().unwrap();
    let s = shape(2, 4, 4, 4);
    let g = save(&uniform_video(s, 1), dir.path(), "g.vlt");
    let l = save(&uniform_video(s, 2), dir.path(), "l.vlt");
    let out = dir.path().join("o.vlt");
    let v = json(&cli(&["blend", "--global", &g, "--local", &l, "--out", out.to_str().unwrap(), "--verify"]));
    assert_eq!(v["verify"]["passed"], true);
    assert_eq!(load(out.to_str().unwrap()).shape(), s);
}

#[test]
fn blend_rejects_mismatched_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let g = save(&uniform_video(shape(2, 4, 4, 4), 1), dir.path(), "g.vlt");
    let l = save(&uniform_video(shape(2, 8, 4, 4), 2), dir.path(), "l.vlt");
    let out = dir.path().join("o.vlt");
    let r = cli(&["blend", "--global", &g, "--local", &l, "--out", out.to_str().unwrap()]);
    assert_eq!(r.exit_code, 1);
    assert!(r.stderr.contains("[2, 4, 4, 4]") && r.stderr.contains("[2, 8, 4, 4]"), "{}", r.stderr);
    assert!(!out.exists());
}

#[test]
fn missing_and_corrupt_inputs_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.vlt");
    std::fs::write(&bad, b"NOPE\x00\x01").unwrap();
    let out = dir.path().join("o.vlt");
    let missing = dir.path().join("missing.vlt");
    for input in [&bad, &missing] {
        let r = cli(&["attend", "--input", input.to_str().unwrap(), "--mode", "global", "--out", out.to_str().unwrap()]);
        assert_eq!(r.exit_code, 2, "{}", r.stderr);
    }
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(cli(&["transmogrify"]).exit_code, 1);
    assert_eq!(cli(&["--help"]).exit_code, 0);
}

#[test]
fn wide_local_window_matches_global() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(&uniform_video(shape(4, 12, 3, 3), 3), dir.path(), "z.vlt");
    let (a, b) = (dir.path().join("a.vlt"), dir.path().join("b.vlt"));
    json(&cli(&["attend", "--input", &input, "--mode", "local", "--alpha", "1000", "--out", a.to_str().unwrap()]));
    json(&cli(&["attend", "--input", &input, "--mode", "global", "--out", b.to_str().unwrap()]));
    assert!(load(a.to_str().unwrap()).max_abs_diff(&load(b.to_str().unwrap())) <= 1e-6);
}

#[test]
fn freelong_after_tau_is_local() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(&uniform_video(shape(4, 20, 2, 3), 4), dir.path(), "z.vlt");
    let (a, b) = (dir.path().join("a.vlt"), dir.path().join("b.vlt"));
    let v = json(&cli(&[
        "attend", "--input", &input, "--mode", "freelong", "--step", "30", "--tau", "25", "--out", a.to_str().unwrap(),
    ]));
    assert_eq!(v["used_blend"], false);
    json(&cli(&["attend", "--input", &input, "--mode", "local", "--out", b.to_str().unwrap()]));
    assert_eq!(load(a.to_str().unwrap()).data(), load(b.to_str().unwrap()).data());
}

#[test]
fn sliding_reports_window_count() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(&uniform_video(shape(4, 128, 2, 2), 5), dir.path(), "z.vlt");
    let out = dir.path().join("o.vlt");
    let v = json(&cli(&[
        "attend", "--input", &input, "--mode", "sliding", "--window", "16", "--stride", "8", "--out", out.to_str().unwrap(),
    ]));
    assert_eq!(v["windows"], 15);
}

#[test]
fn dumped_maps_have_one_row_stochastic_matrix_per_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(&uniform_video(shape(4, 10, 2, 2), 6), dir.path(), "z.vlt");
    let out = dir.path().join("o.vlt");
    let maps = dir.path().join("maps");
    json(&cli(&[
        "attend", "--input", &input, "--mode", "local", "--alpha", "2", "--out", out.to_str().unwrap(),
        "--dump-maps", maps.to_str().unwrap(),
    ]));
    let t = read_tensor(maps.join("maps_local.vlt")).unwrap();
    assert_eq!(t.dims(), &[4, 10, 10]);
    for row in t.as_real32().unwrap().chunks(10) {
        assert!((row.iter().sum::<f32>() - 1.0).abs() < 1e-5);
    }
}

#[test]
fn analyze_self_reference_and_constant_video() {
    let dir = tempfile::tempdir().unwrap();
    let v = save(&uniform_video(shape(2, 16, 4, 4), 7), dir.path(), "v.vlt");
    let report = json(&cli(&["analyze", "--video", &v, "--baseline", &v, "--json"]));
    let reports = report["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert!((r["ratio_low"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((r["ratio_high"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    // A flat clip against a textured reference: every ratio is defined.
    let flat = VideoFeature::from_fn(shape(2, 16, 4, 4), |c, _, _, _| 1.0 + c as f32).unwrap();
    let flat = save(&flat, dir.path(), "flat.vlt");
    let r = cli(&["analyze", "--video", &flat, "--baseline", &v, "--csv"]);
    assert_eq!(r.exit_code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("domain,band,split,fraction,ratio"));
    let report = json(&cli(&["analyze", "--video", &flat, "--baseline", &v]));
    assert_eq!(report["flicker"]["video"]["value"], 0.0);
    assert_eq!(report["reports"][1]["ratio_high"], 0.0);

    // Against itself the flat clip has no high band to compare.
    assert_eq!(cli(&["analyze", "--video", &flat, "--baseline", &flat]).exit_code, 3);
}

#[test]
fn analyze_all_zero_video_is_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let z = save(&VideoFeature::zeros(shape(1, 16, 2, 2)), dir.path(), "z.vlt");
    let b = save(&uniform_video(shape(1, 16, 2, 2), 1), dir.path(), "b.vlt");
    let r = cli(&["analyze", "--video", &z, "--baseline", &b]);
    assert_eq!(r.exit_code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("spatial"), "{}", r.stderr);
}

#[test]
fn analyze_detects_added_noise() {
    let dir = tempfile::tempdir().unwrap();
    let base = smooth_clip(shape(2, 32, 8, 8), 3);
    let noisy = add_frame_noise(&base, 0.5, 3);
    let (v, b) = (save(&noisy, dir.path(), "v.vlt"), save(&base, dir.path(), "b.vlt"));
    let report = json(&cli(&["analyze", "--video", &v, "--baseline", &b, "--domains", "temporal"]));
    assert!(report["reports"][0]["ratio_high"].as_f64().unwrap() > 1.0);
}

#[test]
fn bench_rejects_zero_repetitions() {
    assert_eq!(cli(&["bench", "--reps", "0"]).exit_code, 1);
}

#[test]
fn simulate_echoes_defaults_and_segments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let v = json(&cli(&[
        "simulate", "--frames", "32", "--steps", "6", "--tau", "3", "--height", "4", "--width", "4", "--segments", "0:A,16:B",
        "--outdir", out.to_str().unwrap(),
    ]));
    assert_eq!(v["blended_steps"], 3);
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["alpha"], 8);
    assert_eq!(manifest["config"]["d0"], 0.25);
    let runs = manifest["conditioning"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!((runs[1]["start"].as_u64(), runs[1]["id"].as_str()), (Some(16), Some("B")));
    assert_eq!(load(out.join("final.vlt").to_str().unwrap()).shape(), shape(4, 32, 4, 4));
}

#[test]
fn simulate_rejects_bad_segments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    for seg in ["4:A", "0:A,64:B", "0:A,0:B"] {
        let r = cli(&["simulate", "--frames", "32", "--steps", "2", "--segments", seg, "--outdir", out.to_str().unwrap()]);
        assert_eq!(r.exit_code, 1, "{seg}: {}", r.stderr);
    }
}

#[test]
fn binary_exit_codes_follow_error_class() {
    let exe = env!("CARGO_BIN_EXE_spectralblend");
    let dir = tempfile::tempdir().unwrap();
    let ok = Command::new(exe)
        .args(["gen-filter", "--frames", "4", "--height", "2", "--width", "2", "--out"])
        .arg(dir.path().join("p.vlt"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let missing = Command::new(exe)
        .args(["analyze", "--video", "/nonexistent/v.vlt", "--baseline", "/nonexistent/b.vlt"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let usage = Command::new(exe).args(["bench", "--reps", "0"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
}
