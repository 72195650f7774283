use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use hexnet::data::{
    load_cifar10, load_hex_image, load_image_folder, load_mnist, read_png, render_hex, save_hex_image, write_png,
    Dataset, Split,
};
use hexnet::metrics::{transformation_report, MetricReport};
use hexnet::models::{Acgan, EpochLog, Family, LatticeImage, ModelConfig, Swwae, TrainOptions};
use hexnet::resample::{compute_overlap_map, fit_hex_geometry, square_to_hex, SquareImage};
use hexnet::tensor::{AdamConfig, Checkpoint};
use hexnet::{Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::args::{DatasetArg, GenerateArgs, MetricsArgs, RenderArgs, SplitArg, TrainArgs, TransformArgs};

const CHECKPOINT_FILE: &str = "checkpoint.hxck";
const CONFIG_FILE: &str = "config.json";
const EPOCH_LOG_FILE: &str = "epochs.jsonl";
const REPORT_FILE: &str = "report.csv";

fn echo_config(command: &str, args: &impl Serialize) -> Result<()> {
    let line = json!({ "command": command, "args": args });
    println!("{}", serde_json::to_string(&line)?);
    Ok(())
}

pub fn transform(a: &TransformArgs) -> Result<()> {
    echo_config("transform", a)?;
    let img = read_png(&a.input)?;
    let geometry = fit_hex_geometry(img.height, img.width)?;
    let hex = square_to_hex(&img, &geometry, a.method.into())?;
    save_hex_image(&hex, &a.output)?;
    println!(
        "hex grid {}x{} circumradius {:.10} channels {}",
        geometry.rows, geometry.cols, geometry.circumradius, hex.channels
    );
    Ok(())
}

pub fn metrics(a: &MetricsArgs) -> Result<()> {
    echo_config("metrics", a)?;
    let square = read_png(&a.square)?;
    let mut hex = load_hex_image(&a.hex)?;
    let fitted = fit_hex_geometry(square.height, square.width)?;
    if hex.geometry.shape() != fitted.shape() {
        return Err(Error::Dimension(format!(
            "hex grid {:?} does not belong to a {}x{} image (expected {:?})",
            hex.geometry.shape(),
            square.height,
            square.width,
            fitted.shape()
        )));
    }
    if hex.channels == 1 && square.channels == 3 {
        hex.data = hex.data.iter().flat_map(|&v| [v; 3]).collect();
        hex.channels = 3;
    }
    let map = compute_overlap_map(&hex.geometry, square.height, square.width);
    let report = transformation_report(&square, &hex, &map)?;
    println!("{}", MetricReport::CSV_HEADER);
    println!("{}", report.csv_row());
    Ok(())
}

pub fn render(a: &RenderArgs) -> Result<()> {
    echo_config("render", a)?;
    let hex = load_hex_image(&a.input)?;
    let out = render_hex(&hex, a.scale)?;
    write_png(&out, &a.output)?;
    println!("rendered {}x{} hex grid to {}x{} pixels", hex.geometry.rows, hex.geometry.cols, out.height, out.width);
    Ok(())
}

#[derive(Serialize)]
struct TrainConfig<'a> {
    command: &'static str,
    model: &'a ModelConfig,
    train: &'a TrainOptions,
    dataset: DatasetArg,
    data_dir: &'a Path,
    limit: Option<usize>,
    eval_split: SplitArg,
    eval_limit: Option<usize>,
    out: &'a Path,
    resume: bool,
}

fn load_dataset(kind: DatasetArg, dir: &Path, split: Split) -> Result<Dataset> {
    match kind {
        DatasetArg::Mnist => load_mnist(dir, split),
        DatasetArg::Cifar10 => load_cifar10(dir, split),
        DatasetArg::Folder if split == Split::Train => load_image_folder(dir),
        DatasetArg::Folder => Err(Error::Config("image folders have no test split".into())),
    }
}

fn write_atomic(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    write(&tmp)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Epoch log lines up to and including `epoch`.
fn kept_log_lines(path: &Path, epoch: usize) -> Result<Vec<String>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut kept = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        let log: EpochLog = serde_json::from_str(&line)?;
        if log.epoch <= epoch {
            kept.push(line);
        }
    }
    Ok(kept)
}

struct RunFiles {
    dir: PathBuf,
    log: File,
}

impl RunFiles {
    fn epoch(&mut self, log: &EpochLog, ckpt: &Checkpoint) -> Result<()> {
        let line = serde_json::to_string(log)?;
        println!("{line}");
        writeln!(self.log, "{line}")?;
        self.log.flush()?;
        write_atomic(&self.dir.join(CHECKPOINT_FILE), |p| ckpt.save(p))
    }
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let started = Instant::now();
    let data_dir = a.data_dir.clone().unwrap_or_else(|| {
        PathBuf::from("data").join(match a.dataset {
            DatasetArg::Mnist => "mnist",
            DatasetArg::Cifar10 => "cifar10",
            DatasetArg::Folder => "folder",
        })
    });
    let family: Family = a.family.into();
    let base = match family {
        Family::Swwae => ModelConfig::swwae(a.lattice.into()),
        Family::Acgan => ModelConfig::acgan(a.lattice.into()),
    };
    let opts = TrainOptions {
        epochs: a.epochs,
        batch_size: a.batch_size,
        adam: AdamConfig {
            lr: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            ..AdamConfig::default()
        },
        seed: a.seed,
    };
    opts.adam.validate()?;
    if a.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }

    let train_set = load_dataset(a.dataset, &data_dir, Split::Train)?.limited(a.limit);
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let model = ModelConfig {
        seed: a.seed,
        class_count: train_set.class_count,
        generator_width: a.generator_width,
        residual: a.residual,
        ..base
    };
    let eval_limit = a.eval_limit.or(a.limit);
    let config = TrainConfig {
        command: "train",
        model: &model,
        train: &opts,
        dataset: a.dataset,
        data_dir: &data_dir,
        limit: a.limit,
        eval_split: a.eval_split,
        eval_limit,
        out: &a.out,
        resume: a.resume,
    };
    let config_line = serde_json::to_string(&config)?;
    println!("{config_line}");

    let eval_set = match a.eval_split {
        SplitArg::Train => train_set.clone().limited(eval_limit),
        SplitArg::Test => load_dataset(a.dataset, &data_dir, Split::Test)?.limited(eval_limit),
    };
    if eval_set.is_empty() {
        return Err(Error::EmptyDataset);
    }

    fs::create_dir_all(&a.out)?;
    let ckpt_path = a.out.join(CHECKPOINT_FILE);
    let log_path = a.out.join(EPOCH_LOG_FILE);
    let resume_from = if a.resume && ckpt_path.exists() {
        Some(Checkpoint::load(&ckpt_path)?)
    } else {
        None
    };
    fs::write(a.out.join(CONFIG_FILE), format!("{config_line}\n"))?;

    let mut summary = serde_json::Map::new();
    let (report, start_epoch) = match family {
        Family::Swwae => {
            let mut m = Swwae::new(model.clone())?;
            let mut adam = m.optimizer(opts.adam)?;
            let start = match &resume_from {
                Some(c) => m.load_checkpoint(c, Some(&mut adam))?,
                None => 0,
            };
            let mut files = open_run_files(&a.out, &log_path, start)?;
            m.train(&train_set.images, &opts, &mut adam, start, &mut |log, m, adam| {
                files.epoch(log, &m.to_checkpoint(Some(adam), log.epoch))
            })?;
            summary.insert("trainable_params".into(), json!(m.trainable_params()));
            (m.evaluate(&eval_set.images, a.batch_size)?, start)
        }
        Family::Acgan => {
            let mut m = Acgan::new(model.clone())?;
            let (mut adam_g, mut adam_d) = m.optimizers(opts.adam)?;
            let start = match &resume_from {
                Some(c) => m.load_checkpoint(c, Some((&mut adam_g, &mut adam_d)))?,
                None => 0,
            };
            let mut files = open_run_files(&a.out, &log_path, start)?;
            m.train(
                &train_set.images,
                &train_set.labels,
                &opts,
                (&mut adam_g, &mut adam_d),
                start,
                &mut |log, m, g, d| files.epoch(log, &m.to_checkpoint(Some((g, d)), log.epoch)),
            )?;
            let (g, d) = m.trainable_params();
            summary.insert("trainable_params".into(), json!(g + d));
            summary.insert("generator_params".into(), json!(g));
            summary.insert("discriminator_params".into(), json!(d));
            let n = eval_set.len().min(a.batch_size);
            let (imgs, labels) = (&eval_set.images[..n], &eval_set.labels[..n]);
            let acc = m.discriminator_accuracy(imgs, labels, a.seed, false)?;
            let acc_batch = m.discriminator_accuracy(imgs, labels, a.seed, true)?;
            summary.insert("discriminator_accuracy".into(), json!(acc));
            summary.insert("discriminator_accuracy_batch_stats".into(), json!(acc_batch));
            (m.evaluate(&eval_set.images, &eval_set.labels, a.seed)?, start)
        }
    };
    if start_epoch >= a.epochs {
        eprintln!("checkpoint already holds {start_epoch} epochs");
    }

    let mut csv = format!("{}\n{}\n", MetricReport::CSV_HEADER, report.csv_row());
    if let Some(acc) = summary.get("discriminator_accuracy") {
        csv = format!("{},discriminator_accuracy\n{},{acc}\n", MetricReport::CSV_HEADER, report.csv_row());
    }
    fs::write(a.out.join(REPORT_FILE), csv)?;
    summary.insert("mse".into(), json!(report.mse));
    summary.insert("psnr".into(), json!(hexnet::metrics::format_psnr(report.psnr)));
    summary.insert("mae".into(), json!(report.mae));
    println!("{}", serde_json::to_string(&json!({ "summary": summary }))?);
    eprintln!("finished in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn open_run_files(dir: &Path, log_path: &Path, start_epoch: usize) -> Result<RunFiles> {
    let kept = kept_log_lines(log_path, start_epoch)?;
    let mut log = File::create(log_path)?;
    for line in kept {
        writeln!(log, "{line}")?;
    }
    Ok(RunFiles {
        dir: dir.to_path_buf(),
        log,
    })
}

fn upscale(img: &SquareImage, factor: usize) -> Result<SquareImage> {
    let (h, w, c) = (img.height * factor, img.width * factor, img.channels);
    let mut data = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            data.extend_from_slice(img.pixel((y / factor) * img.width + x / factor));
        }
    }
    SquareImage::new(h, w, c, data)
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    echo_config("generate", a)?;
    let config_path = a.config.clone().unwrap_or_else(|| {
        a.checkpoint
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(CONFIG_FILE)
    });
    let resolved: serde_json::Value = serde_json::from_str(&fs::read_to_string(&config_path)?)?;
    let model: ModelConfig = serde_json::from_value(resolved.get("model").cloned().unwrap_or(resolved))?;
    if model.family != Family::Acgan {
        return Err(Error::Config(format!("{} checkpoints cannot generate", model.family)));
    }
    let mut m = Acgan::new(model)?;
    m.load_checkpoint(&Checkpoint::load(&a.checkpoint)?, None)?;
    let classes: Vec<usize> = if a.classes.is_empty() {
        (0..m.config.class_count).collect()
    } else {
        a.classes.clone()
    };
    if let Some(&bad) = classes.iter().find(|&&k| k >= m.config.class_count) {
        return Err(Error::Label {
            label: bad,
            class_count: m.config.class_count,
        });
    }
    let labels: Vec<usize> = classes.iter().flat_map(|&k| std::iter::repeat_n(k, a.samples)).collect();
    if labels.is_empty() {
        return Err(Error::Config("nothing to generate".into()));
    }
    let images = m.generate(&labels, a.seed)?;
    fs::create_dir_all(&a.out)?;
    for (i, (img, &k)) in images.iter().zip(&labels).enumerate() {
        let rendered = match img {
            LatticeImage::Hex(h) => render_hex(h, a.scale)?,
            LatticeImage::Square(s) => upscale(s, a.scale.round().max(1.0) as usize)?,
        };
        let path = a.out.join(format!("class{k}_sample{}.png", i % a.samples));
        write_png(&rendered, &path)?;
    }
    println!("wrote {} images to {}", images.len(), a.out.display());
    Ok(())
}
