use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use signgan::augment::{build_augmented_dataset, write_emission_log, AugmentPlan, ClassPolicy, AUGMENTED_TAG};
use signgan::classifier::{predict_dataset, train_classifier, ClfCheckpoint};
use signgan::dataio::toy::{render_indexed, ToyJitter};
use signgan::dataio::{
    denormalize, encode_png, ingest_directory, read_snf, split_dataset, write_snf, ClassId, Dataset, RgbImage,
    IMAGE_SIZE, NUM_CLASSES,
};
use signgan::evalreport::{
    emit_csv, emit_plot_series, per_class_accuracy, ComparisonTable, PerClassAccuracy, RunReport,
};
use signgan::gan::{
    loss_history_csv, sample_generator, synthesize_labeled_set, train_gan_with, GanCheckpoint, GanError,
    GAN_IMAGE_SIZE, SYNTHETIC_TAG,
};

use crate::config::{write_snapshot, PipelineConfig};
use crate::error::CliError;
use crate::{
    AugmentArgs, ClfFinetuneArgs, ClfTrainArgs, Command, EvaluateArgs, Extension, GanSampleArgs, GanTrainArgs,
    IngestArgs, MakeToyArgs, ReportArgs,
};

pub fn dispatch(command: Command, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    match command {
        Command::MakeToy(a) => make_toy(a, cfg, args),
        Command::Ingest(a) => ingest(a, cfg, args),
        Command::Augment(a) => augment(a, cfg, args),
        Command::GanTrain(a) => gan_train(a, cfg, args),
        Command::GanSample(a) => gan_sample(a, cfg, args),
        Command::ClfTrain(a) => clf_train(a, cfg, args),
        Command::ClfFinetune(a) => clf_finetune(a, cfg, args),
        Command::Evaluate(a) => evaluate(a, cfg, args),
        Command::Report(a) => report(a, cfg, args),
    }
}

/// Writes through a temporary sibling so readers never see a partial file.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| io_err(path, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn data_dir(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.paths.out.join("data").join(name)
}

fn gan_dir(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.paths.out.join("gan").join(name)
}

fn run_dir(cfg: &PipelineConfig, run: &str) -> PathBuf {
    cfg.paths.out.join("runs").join(run)
}

fn check_name(kind: &str, name: &str) -> Result<(), CliError> {
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && name != "..";
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{kind} name {name:?} must be alphanumeric, '-', '_' or '.'"
        )))
    }
}

fn load_split(cfg: &PipelineConfig, dataset: &str, part: &str) -> Result<Dataset, CliError> {
    let path = data_dir(cfg, dataset).join(format!("{part}.snf"));
    if !path.is_file() {
        return Err(CliError::Data(format!(
            "{} not found; run `ingest --name {dataset}` first",
            path.display()
        )));
    }
    Ok(read_snf(&read_file(&path)?, dataset)?)
}

fn make_toy(a: MakeToyArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    if let Some(v) = a.per_class {
        cfg.toy.per_class = v;
    }
    if let Some(v) = a.seed {
        cfg.toy.seed = v;
    }
    let jitter = ToyJitter::default();
    for class in ClassId::all() {
        for i in 0..cfg.toy.per_class {
            let img = render_indexed(class, i, cfg.toy.seed, &jitter);
            let path = a.dir.join(class.index().to_string()).join(format!("{i:05}.png"));
            write_file(&path, &encode_png(&img)?)?;
        }
    }
    write_snapshot(&a.dir, "make-toy", args, cfg)?;
    println!(
        "wrote {} images to {}",
        cfg.toy.per_class * NUM_CLASSES,
        a.dir.display()
    );
    Ok(())
}

fn ingest(a: IngestArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    check_name("dataset", &a.name)?;
    if let Some(v) = a.test_fraction {
        cfg.split.test_fraction = v;
    }
    if let Some(v) = a.seed {
        cfg.split.seed = v;
    }
    if !a.input.is_dir() {
        return Err(CliError::Data(format!("{} is not a directory", a.input.display())));
    }
    let all = ingest_directory(&a.input, &a.name)?;
    if all.is_empty() {
        return Err(CliError::Data(format!(
            "no PPM or PNG images under {}",
            a.input.display()
        )));
    }
    let split = split_dataset(&all, cfg.split.test_fraction, cfg.split.seed)?;
    let dir = data_dir(cfg, &a.name);
    write_file(&dir.join("all.snf"), &write_snf(&all))?;
    write_file(&dir.join("train.snf"), &write_snf(&split.train))?;
    write_file(&dir.join("test.snf"), &write_snf(&split.test))?;
    let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    let listing = format!(
        "seed {}\ntest_fraction {}\ntrain {}\ntest {}\n",
        split.seed,
        split.test_fraction,
        join(&split.train_indices),
        join(&split.test_indices)
    );
    write_file(&dir.join("split.txt"), listing.as_bytes())?;
    write_snapshot(&dir, "ingest", args, cfg)?;
    println!(
        "{}: {} images, {} train, {} test",
        a.name,
        all.len(),
        split.train.len(),
        split.test.len()
    );
    Ok(())
}

fn augment(a: AugmentArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    check_name("dataset", &a.dataset)?;
    if let Some(v) = a.multiplier {
        cfg.augment.multiplier = v;
    }
    if let Some(v) = a.seed {
        cfg.augment.seed = v;
    }
    if let Some(v) = a.policy {
        cfg.paths.policy = v;
    }
    let policy = if cfg.paths.policy.as_os_str().is_empty() {
        ClassPolicy::default()
    } else {
        let text = fs::read_to_string(&cfg.paths.policy).map_err(|e| io_err(&cfg.paths.policy, e))?;
        ClassPolicy::parse(&text)?
    };
    for warning in policy.safety_violations() {
        eprintln!("warning: {warning}");
    }
    let train = load_split(cfg, &a.dataset, "train")?;
    let plan = AugmentPlan {
        multiplier: cfg.augment.multiplier,
        seed: cfg.augment.seed,
        policy: policy.clone(),
    };
    let (augmented, log) = build_augmented_dataset(&train, &plan)?;
    let dir = data_dir(cfg, &a.dataset);
    write_file(&dir.join("augmented.snf"), &write_snf(&augmented))?;
    write_file(&dir.join("augmented.log"), write_emission_log(&log).as_bytes())?;
    write_file(&dir.join("policy.txt"), policy.to_text().as_bytes())?;
    write_snapshot(&dir, "augment", args, cfg)?;
    println!(
        "{}: {} augmented images ({} variants)",
        a.dataset,
        augmented.len(),
        log.len()
    );
    Ok(())
}

fn checkpoint_path(dir: &Path, class: ClassId) -> PathBuf {
    dir.join(format!("class_{}.ganc", class.index()))
}

fn load_gan(path: &Path) -> Result<GanCheckpoint, CliError> {
    Ok(GanCheckpoint::from_bytes(&read_file(path)?)?)
}

fn gan_train(a: GanTrainArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    check_name("dataset", &a.dataset)?;
    for (flag, v) in [("input_height", a.input_height), ("output_height", a.output_height)] {
        if v != GAN_IMAGE_SIZE {
            return Err(CliError::Usage(format!(
                "unsupported size: --{flag}={v}; only {GAN_IMAGE_SIZE} is supported"
            )));
        }
    }
    if let Some(v) = a.epochs {
        cfg.gan.epochs = v;
    }
    if let Some(v) = a.batch_size {
        cfg.gan.batch_size = v;
    }
    if let Some(v) = a.seed {
        cfg.gan.seed = v;
    }
    let classes: Vec<ClassId> = match a.class_id {
        Some(c) => vec![ClassId::new(c).map_err(|e| CliError::Usage(e.to_string()))?],
        None => ClassId::all().collect(),
    };
    let dir = gan_dir(cfg, &a.dataset);
    if !a.train {
        for class in classes {
            let path = checkpoint_path(&dir, class);
            if path.is_file() {
                let ck = load_gan(&path)?;
                println!(
                    "class {}: {}/{} epochs",
                    class.index(),
                    ck.epochs_completed,
                    ck.config.epochs
                );
            } else {
                println!("class {}: not trained", class.index());
            }
        }
        return Ok(());
    }
    let train = load_split(cfg, &a.dataset, "train")?;
    write_snapshot(&dir, "gan-train", args, cfg)?;
    for class in classes {
        let config = cfg.gan_config(class);
        let path = checkpoint_path(&dir, class);
        let resume = if a.resume && path.is_file() {
            Some(load_gan(&path)?)
        } else {
            None
        };
        let losses = dir.join(format!("class_{}.losses.csv", class.index()));
        let mut write_failure = None;
        let result = train_gan_with(&train.only_class(class), &config, resume, |ck| {
            let saved =
                write_file(&path, &ck.to_bytes()).and_then(|()| write_file(&losses, loss_history_csv(ck).as_bytes()));
            if let Err(e) = saved {
                write_failure = Some(e);
                return Err(GanError::InvalidConfig("checkpoint write failed".into()));
            }
            let (d, g) = ck.loss_history.last().copied().unwrap_or((f32::NAN, f32::NAN));
            eprintln!(
                "class {} epoch {}/{}: d_loss {d:.4} g_loss {g:.4}",
                class.index(),
                ck.epochs_completed,
                config.epochs
            );
            Ok(())
        });
        if let Some(e) = write_failure {
            return Err(e);
        }
        let ck = result?;
        // Already complete on resume: the callback never ran.
        write_file(&path, &ck.to_bytes())?;
        write_file(&losses, loss_history_csv(&ck).as_bytes())?;
    }
    Ok(())
}

fn gan_sample(a: GanSampleArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    check_name("dataset", &a.dataset)?;
    if let Some(v) = a.per_class {
        cfg.sample.per_class = v;
    }
    if let Some(v) = a.seed {
        cfg.sample.seed = v;
    }
    let gdir = gan_dir(cfg, &a.dataset);
    let checkpoints = ClassId::all()
        .map(|class| {
            let path = checkpoint_path(&gdir, class);
            if path.is_file() {
                load_gan(&path)
            } else {
                Err(CliError::Data(format!(
                    "{} not found; run gan-train first",
                    path.display()
                )))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let synthetic = synthesize_labeled_set(&checkpoints, cfg.sample.per_class, cfg.sample.seed)?;
    let dir = data_dir(cfg, &a.dataset);
    write_file(&dir.join("synthetic.snf"), &write_snf(&synthetic))?;
    if let Some(sheet) = &a.sheet {
        let cols = cfg.sample.per_class.min(10);
        let rows: Vec<Vec<RgbImage>> = checkpoints
            .iter()
            .map(|ck| {
                Ok(sample_generator(ck, cols, cfg.sample.seed)?
                    .iter()
                    .map(denormalize)
                    .collect())
            })
            .collect::<Result<_, CliError>>()?;
        write_file(sheet, &encode_png(&contact_sheet(&rows))?)?;
    }
    write_snapshot(&dir, "gan-sample", args, cfg)?;
    println!("{}: {} synthetic images", a.dataset, synthetic.len());
    Ok(())
}

/// Tiles equally sized images into one raster, one row per inner vector.
fn contact_sheet(rows: &[Vec<RgbImage>]) -> RgbImage {
    let s = IMAGE_SIZE;
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let (w, h) = (cols * s, rows.len().max(1) * s);
    let mut px = vec![0u8; w * h * 3];
    for (r, row) in rows.iter().enumerate() {
        for (c, img) in row.iter().enumerate() {
            for y in 0..s {
                let dst = ((r * s + y) * w + c * s) * 3;
                px[dst..dst + s * 3].copy_from_slice(&img.pixels[y * s * 3..(y + 1) * s * 3]);
            }
        }
    }
    RgbImage::new(w, h, px)
}

/// Training provenance stored with each run.
#[derive(Debug, Serialize, Deserialize)]
struct RunMeta {
    stage: String,
    dataset: String,
    extension: String,
    train_size: usize,
    seed: u64,
    config_hash: String,
}

fn finish_run(
    dir: &Path,
    command: &str,
    args: &[String],
    cfg: &PipelineConfig,
    ck: &ClfCheckpoint,
    mut meta: RunMeta,
) -> Result<(), CliError> {
    meta.config_hash = write_snapshot(dir, command, args, cfg)?;
    write_file(&dir.join("model.clfc"), &ck.to_bytes())?;
    let mut csv = String::from("epoch,batch,loss\n");
    for (i, l) in ck.loss_curve.iter().enumerate() {
        writeln!(csv, "{},{},{l}", i / ck.batches_per_epoch, i % ck.batches_per_epoch).unwrap();
    }
    write_file(&dir.join("loss.csv"), csv.as_bytes())?;
    let text = toml::to_string(&meta).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&dir.join("run.toml"), text.as_bytes())
}

impl RunMeta {
    fn new(ck: &ClfCheckpoint, dataset: &str, extension: &str, train_size: usize) -> Self {
        Self {
            stage: ck.config.stage.name().to_string(),
            dataset: dataset.to_string(),
            extension: extension.to_string(),
            train_size,
            seed: ck.config.seed,
            config_hash: String::new(),
        }
    }
}

fn clf_train(a: ClfTrainArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    check_name("dataset", &a.dataset)?;
    check_name("run", &a.run)?;
    if let Some(v) = a.epochs {
        cfg.classifier.pretrain_epochs = v;
    }
    if let Some(v) = a.lr {
        cfg.classifier.pretrain_learning_rate = v;
    }
    if let Some(v) = a.seed {
        cfg.classifier.seed = v;
    }
    let train = load_split(cfg, &a.dataset, "train")?;
    let ck = train_classifier(None, &train, &cfg.pretrain_config())?;
    let meta = RunMeta::new(&ck, &a.dataset, "none", train.len());
    finish_run(&run_dir(cfg, &a.run), "clf-train", args, cfg, &ck, meta)?;
    println!("{}: pretrained on {} images", a.run, train.len());
    Ok(())
}

fn clf_finetune(a: ClfFinetuneArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    check_name("dataset", &a.dataset)?;
    check_name("run", &a.run)?;
    check_name("run", &a.from)?;
    if let Some(v) = a.epochs {
        cfg.classifier.finetune_epochs = v;
    }
    if let Some(v) = a.lr {
        cfg.classifier.finetune_learning_rate = v;
    }
    let model = run_dir(cfg, &a.from).join("model.clfc");
    if !model.is_file() {
        return Err(CliError::Data(format!(
            "{} not found; run clf-train first",
            model.display()
        )));
    }
    let start = ClfCheckpoint::from_bytes(&read_file(&model)?)?;
    let dir = data_dir(cfg, &a.dataset);
    let (train, ext) = match a.extend {
        Extension::None => (load_split(cfg, &a.dataset, "train")?, "none"),
        // The augmented set already holds every original image.
        Extension::Augmented => {
            let p = dir.join("augmented.snf");
            (read_snf(&read_file(&p)?, AUGMENTED_TAG)?, "augmented")
        }
        Extension::Synthetic => {
            let p = dir.join("synthetic.snf");
            let synth = read_snf(&read_file(&p)?, SYNTHETIC_TAG)?;
            (load_split(cfg, &a.dataset, "train")?.merged(&synth), "synthetic")
        }
    };
    let mut config = cfg.finetune_config();
    config.seed = start.config.seed;
    cfg.classifier.seed = start.config.seed;
    let ck = train_classifier(Some(&start), &train, &config)?;
    let meta = RunMeta::new(&ck, &a.dataset, ext, train.len());
    finish_run(&run_dir(cfg, &a.run), "clf-finetune", args, cfg, &ck, meta)?;
    println!(
        "{}: fine-tuned from {} on {} images ({ext})",
        a.run,
        a.from,
        train.len()
    );
    Ok(())
}

/// Evaluation record; per-class accuracy is recomputed from the counts.
#[derive(Debug, Serialize, Deserialize)]
struct EvalRecord {
    label: String,
    seed: u64,
    config_hash: String,
    test_split_hash: String,
    train_size: usize,
    test_size: usize,
    correct: Vec<usize>,
    count: Vec<usize>,
}

impl EvalRecord {
    fn to_report(&self) -> Result<RunReport, CliError> {
        if self.correct.len() != NUM_CLASSES || self.count.len() != NUM_CLASSES {
            return Err(CliError::Data(format!(
                "{}: expected {NUM_CLASSES} classes",
                self.label
            )));
        }
        let accuracy =
            std::array::from_fn(|c| (self.count[c] > 0).then(|| 100.0 * self.correct[c] as f64 / self.count[c] as f64));
        let count = std::array::from_fn(|c| self.count[c]);
        let per_class = PerClassAccuracy { accuracy, count };
        Ok(RunReport::new(
            &self.label,
            per_class,
            self.seed,
            &self.config_hash,
            &self.test_split_hash,
            self.train_size,
        )?)
    }
}

fn evaluate(a: EvaluateArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    check_name("dataset", &a.dataset)?;
    check_name("run", &a.run)?;
    let dir = run_dir(cfg, &a.run);
    let meta_path = dir.join("run.toml");
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?;
    let meta: RunMeta =
        toml::from_str(&meta_text).map_err(|e| CliError::Data(format!("{}: {e}", meta_path.display())))?;
    let ck = ClfCheckpoint::from_bytes(&read_file(&dir.join("model.clfc"))?)?;
    let test_path = data_dir(cfg, &a.dataset).join("test.snf");
    let test_bytes = read_file(&test_path)?;
    let test = read_snf(&test_bytes, &a.dataset)?;
    let pred = predict_dataset(&ck.net, &test)?;
    let labels = test.labels();
    let per_class = per_class_accuracy(&pred.classes, &labels)?;
    let mut correct = vec![0; NUM_CLASSES];
    for (p, l) in pred.classes.iter().zip(&labels) {
        if p == l {
            correct[*l] += 1;
        }
    }
    let record = EvalRecord {
        label: a.label.unwrap_or_else(|| a.run.clone()),
        seed: meta.seed,
        config_hash: meta.config_hash,
        test_split_hash: hex::encode(Sha256::digest(&test_bytes)),
        train_size: meta.train_size,
        test_size: test.len(),
        correct,
        count: per_class.count.to_vec(),
    };
    let report = record.to_report()?;
    write_file(&dir.join("metrics.csv"), emit_csv(&report).as_bytes())?;
    let text = toml::to_string(&record).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&dir.join("report.toml"), text.as_bytes())?;
    write_snapshot(&dir, "evaluate", args, cfg)?;
    println!("{}: mean per-class accuracy {:.2}%", report.label, report.mean);
    Ok(())
}

fn report(a: ReportArgs, cfg: &mut PipelineConfig, args: &[String]) -> Result<(), CliError> {
    let mut table = ComparisonTable::default();
    for run in &a.runs {
        check_name("run", run)?;
        let path = run_dir(cfg, run).join("report.toml");
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let record: EvalRecord =
            toml::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        table.push(record.to_report()?)?;
    }
    let series = emit_plot_series(&table)?;
    let mut summary = String::from("label,mean,seed,train_size,test_size,config_hash,test_split_hash\n");
    for r in &table.rows {
        writeln!(
            summary,
            "{},{:.2},{},{},{},{},{}",
            r.label, r.mean, r.seed, r.train_size, r.test_size, r.config_hash, r.test_split_hash
        )
        .unwrap();
    }
    let dir = cfg.paths.out.join("report");
    write_file(&dir.join("series.txt"), series.as_bytes())?;
    write_file(&dir.join("summary.csv"), summary.as_bytes())?;
    write_snapshot(&dir, "report", args, cfg)?;
    print!("{summary}");
    Ok(())
}
