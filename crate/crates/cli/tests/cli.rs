use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hexnet::data::{load_hex_image, read_png, write_png};
use hexnet::resample::SquareImage;

const BIN: &str = env!("CARGO_BIN_EXE_hexnet");
const MNIST_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist");
// frozen from a reference run on the test pattern below
const SELF_AREA_PSNR: f64 = 17.801_476;
const PSNR_TOL: f64 = 1e-4;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn hexnet")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gradient_png(dir: &Path) -> PathBuf {
    let data = (0..32 * 32)
        .flat_map(|i| {
            let (r, c) = (i / 32, i % 32);
            [r as f32 / 31.0, c as f32 / 31.0, ((r * c) % 17) as f32 / 16.0]
        })
        .map(|v| (v * 255.0).round() / 255.0)
        .collect();
    let path = dir.join("gradient.png");
    write_png(&SquareImage::new(32, 32, 3, data).unwrap(), &path).unwrap();
    path
}

#[test]
fn transform_writes_fitted_grid() {
    let dir = tempfile::tempdir().unwrap();
    let png = gradient_png(dir.path());
    let out = dir.path().join("g.hexi");
    let o = run(&["transform", "-i", p(&png), "-o", p(&out)]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("{\"args\""));
    assert!(text.contains("hex grid 34x30"));
    let hex = load_hex_image(&out).unwrap();
    assert_eq!(hex.geometry.shape(), (34, 30));
    assert_eq!(hex.channels, 3);
}

#[test]
fn constant_png_gives_constant_payload_for_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("c.png");
    write_png(&SquareImage::filled(32, 32, 3, 0.4).unwrap(), &png).unwrap();
    let v = read_png(&png).unwrap().data[0];
    for method in ["nearest", "bilinear", "bicubic", "area"] {
        let out = dir.path().join(format!("{method}.hexi"));
        let o = run(&["transform", "-i", p(&png), "-o", p(&out), "--method", method]);
        assert!(o.status.success());
        let hex = load_hex_image(&out).unwrap();
        assert!(hex.data.iter().all(|&x| (x - v).abs() < 1e-6), "{method}");
    }
}

#[test]
fn io_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.png");
    let o = run(&["transform", "-i", p(&missing), "-o", "x.hexi"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(run(&["train", "--dataset", "imagenet"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let o = run(&["train", "--data-dir", p(&missing), "--out", p(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn metrics_rows() {
    let dir = tempfile::tempdir().unwrap();
    let png = gradient_png(dir.path());
    let hexi = dir.path().join("g.hexi");
    assert!(run(&["transform", "-i", p(&png), "-o", p(&hexi)]).status.success());
    let o = run(&["metrics", "--square", p(&png), "--hex", p(&hexi)]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "mse,psnr,mae");
    let psnr: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((psnr - SELF_AREA_PSNR).abs() < PSNR_TOL, "{psnr}");
    assert_eq!(text, stdout(&run(&["metrics", "--square", p(&png), "--hex", p(&hexi)])));

    let flat = dir.path().join("flat.png");
    write_png(&SquareImage::filled(32, 32, 3, 1.0).unwrap(), &flat).unwrap();
    let flat_hex = dir.path().join("flat.hexi");
    assert!(run(&["transform", "-i", p(&flat), "-o", p(&flat_hex)]).status.success());
    let o = run(&["metrics", "--square", p(&flat), "--hex", p(&flat_hex)]);
    let row = stdout(&o).lines().nth(2).unwrap().to_string();
    assert_eq!(row.split(',').nth(1), Some("inf"));

    let small = dir.path().join("small.png");
    write_png(&SquareImage::filled(16, 16, 3, 1.0).unwrap(), &small).unwrap();
    let o = run(&["metrics", "--square", p(&small), "--hex", p(&hexi)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn render_tiles_hexagons() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.png");
    write_png(&SquareImage::filled(32, 32, 3, 1.0).unwrap(), &flat).unwrap();
    let hexi = dir.path().join("flat.hexi");
    assert!(run(&["transform", "-i", p(&flat), "-o", p(&hexi)]).status.success());
    let png = dir.path().join("r.png");
    let o = run(&["render", "-i", p(&hexi), "-o", p(&png), "--scale", "8"]);
    assert!(o.status.success(), "{o:?}");
    let img = read_png(&png).unwrap();
    let hex = load_hex_image(&hexi).unwrap();
    let g = hex.geometry;
    let (x0, y0, x1, y1) = g.bounding_box();
    assert_eq!(img.width, ((x1 - x0) * 8.0).ceil() as usize);
    let lit = (0..img.pixels()).filter(|&i| img.pixel(i)[0] > 0.5).count() as f64;
    let measured = lit / img.pixels() as f64;
    let analytic = g.len() as f64 * g.cell_area() / ((x1 - x0) * (y1 - y0));
    assert!((measured - analytic).abs() < 0.01, "{measured} {analytic}");
    assert_eq!(run(&["render", "-i", p(&hexi), "-o", p(&png), "--scale", "2"]).status.code(), Some(2));
}

#[test]
fn help_lists_defaults() {
    let o = run(&["train", "--help"]);
    let text = stdout(&o);
    for flag in ["--epochs", "--batch-size", "--lr", "--beta1", "--beta2", "--seed", "--limit", "--out", "--resume"] {
        assert!(text.contains(flag), "{flag}");
    }
    assert!(text.contains("[default: 100]"));
    assert!(text.contains("[default: 0.0002]"));
    for sub in ["transform", "metrics", "generate", "render"] {
        assert!(run(&[sub, "--help"]).status.success());
    }
}

fn small_train(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "train", "--dataset", "mnist", "--data-dir", MNIST_DIR, "--limit", "12", "--batch-size", "6", "--seed",
        "3", "--out", p(out),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn train_writes_run_directory_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = small_train(&out, &["--epochs", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let config: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(config["train"]["adam"]["lr"], 2e-4);
    assert_eq!(config["model"]["lattice"], "hex");
    for f in ["checkpoint.hxck", "config.json", "epochs.jsonl", "report.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.starts_with("mse,psnr,mae\n"));

    let o = small_train(&out, &["--epochs", "2", "--resume"]);
    assert!(o.status.success());
    let log = fs::read_to_string(out.join("epochs.jsonl")).unwrap();
    let epochs: Vec<u64> = log
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["epoch"].as_u64().unwrap())
        .collect();
    assert_eq!(epochs, vec![1, 2]);
}

#[test]
fn gan_train_then_generate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gan");
    let o = small_train(&out, &["--family", "acgan", "--epochs", "1", "--generator-width", "32"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.starts_with("mse,psnr,mae,discriminator_accuracy\n"));

    let samples = dir.path().join("samples");
    let ckpt = out.join("checkpoint.hxck");
    let o = run(&["generate", "--checkpoint", p(&ckpt), "--out", p(&samples), "--scale", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(&samples)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 10);
    assert!(names.contains(&"class7_sample0.png".to_string()));

    let o = run(&["generate", "--checkpoint", p(&ckpt), "--out", p(&samples), "--classes", "2,5", "--samples", "3"]);
    assert!(o.status.success());
    assert!(samples.join("class5_sample2.png").exists());
    assert_eq!(
        run(&["generate", "--checkpoint", p(&ckpt), "--classes", "10", "--out", p(&samples)]).status.code(),
        Some(2)
    );

    let bad = dir.path().join("bad.hxck");
    let mut bytes = fs::read(&ckpt).unwrap();
    bytes.truncate(bytes.len() / 2);
    fs::write(&bad, bytes).unwrap();
    let cfg = out.join("config.json");
    let o = run(&["generate", "--checkpoint", p(&bad), "--config", p(&cfg), "--out", p(&samples)]);
    assert_eq!(o.status.code(), Some(2));
}
