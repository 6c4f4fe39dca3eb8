mod images;
mod learn;
mod masks;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use hemo_core::evaluation::{ConfusionMatrix, MetricsReport, Task};
use hemo_core::CLASS_NAMES;

use crate::cli::{Cli, Command, SvmArgs};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

/// Loads the config, applies global overrides and runs the command.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    let jobs = cfg.jobs.unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::usage("--jobs must be >= 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {jobs} workers: {e}")))?;
    let ctx = Ctx { cfg, pool };
    log::debug!("running {}", cli.command.name());
    match cli.command {
        Command::Synth { preset, cells, out } => images::synth(ctx, preset, cells, out),
        Command::Segment { images, out } => images::segment(ctx, images, out),
        Command::Label {
            images,
            annotations,
            scheme,
            separator,
            out,
        } => images::label(ctx, images, annotations, scheme, separator, out),
        Command::Features {
            images,
            annotations,
            out,
        } => images::features(ctx, images, annotations, out),
        Command::Separate {
            features,
            label_column,
            svm,
            out,
        } => learn::separate(ctx, &features, &label_column, &svm, out),
        Command::Resample { features, variant, out } => learn::resample(ctx, &features, variant, out),
        Command::Train {
            features,
            task,
            variant,
            weights,
            svm,
            out,
        } => learn::train(ctx, &features, task, variant, weights, &svm, out),
        Command::Predict { model, features, out } => learn::predict(ctx, &model, &features, out),
        Command::Evaluate { predictions, out } => learn::evaluate(ctx, &predictions, out),
        Command::EvalMasks {
            labels,
            predicted,
            scheme,
            threshold,
            out,
        } => masks::eval_masks(ctx, &labels, &predicted, scheme, threshold, out),
        Command::Experiment {
            recipe,
            list,
            features,
            folds,
            svm,
            out,
        } => {
            if list {
                learn::list_recipes();
                return Ok(());
            }
            let (Some(recipe), Some(features)) = (recipe, features) else {
                return Err(CliError::usage("--recipe and --features are required"));
            };
            learn::experiment(ctx, &recipe, &features, folds, &svm, out)
        }
        Command::Report { experiments, out } => learn::report(ctx, &experiments, out),
    }
}

pub(crate) struct Ctx {
    pub cfg: PipelineConfig,
    pub pool: rayon::ThreadPool,
}

impl Ctx {
    pub fn out_dir(&self, flag: Option<PathBuf>) -> CliResult<PathBuf> {
        flag.or_else(|| self.cfg.paths.output.clone())
            .ok_or_else(|| CliError::usage("an output directory is required: --out or paths.output"))
    }

    /// Runs `f` over `items` on the worker pool, keeping input order.
    pub fn par_map<T: Sync, U: Send>(&self, items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
        self.pool.install(|| items.par_iter().map(&f).collect())
    }

    pub fn apply_svm(&mut self, svm: &SvmArgs) {
        if let Some(c) = svm.c {
            self.cfg.svm.c = c;
        }
        if svm.gamma.is_some() {
            self.cfg.svm.gamma = svm.gamma;
        }
    }
}

pub(crate) fn existing_dir(p: Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    let p = p.ok_or_else(|| CliError::usage(format!("the {what} directory is required")))?;
    if !p.is_dir() {
        return Err(CliError::usage(format!(
            "{what} directory {} does not exist",
            p.display()
        )));
    }
    Ok(p)
}

pub(crate) fn existing_file(p: &Path) -> CliResult<()> {
    if !p.is_file() {
        return Err(CliError::usage(format!("{} does not exist", p.display())));
    }
    Ok(())
}

pub(crate) fn class_name(task: Task, class: usize) -> String {
    match task {
        Task::Binary => ["normal", "abnormal"].get(class).copied().unwrap_or("?").to_string(),
        Task::Multiclass => CLASS_NAMES
            .get(class)
            .map(|s| s.to_lowercase())
            .unwrap_or_else(|| class.to_string()),
    }
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// `class,name,frequency,tp,fn,fp,tn,sensitivity,specificity,precision,f2`
/// plus a `macro` row.
pub(crate) fn write_per_class(
    path: &Path,
    report: &MetricsReport,
    name: impl Fn(usize) -> String,
) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "class",
        "name",
        "frequency",
        "tp",
        "fn",
        "fp",
        "tn",
        "sensitivity",
        "specificity",
        "precision",
        "f2",
    ])?;
    for c in &report.per_class {
        let m = &c.metrics;
        w.write_record([
            c.class.to_string(),
            name(c.class),
            c.frequency.to_string(),
            m.tp.to_string(),
            m.fn_.to_string(),
            m.fp.to_string(),
            m.tn.to_string(),
            fmt(m.sensitivity),
            fmt(m.specificity),
            fmt(m.precision),
            fmt(m.f2),
        ])?;
    }
    let a = &report.macro_avg;
    w.write_record([
        "macro".into(),
        "macro average".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        fmt(a.sensitivity),
        fmt(a.specificity),
        fmt(a.precision),
        fmt(a.f2),
    ])?;
    w.flush()?;
    Ok(())
}

/// Counts and row percentages restricted to `classes`.
pub(crate) fn write_confusion(
    counts_path: &Path,
    normalized_path: &Path,
    cm: &ConfusionMatrix,
    classes: &[usize],
    name: impl Fn(usize) -> String,
) -> anyhow::Result<Vec<Vec<f64>>> {
    let names: Vec<String> = classes.iter().map(|&c| name(c)).collect();
    let mut header = vec!["truth \\ predicted".to_string()];
    header.extend(names.iter().cloned());
    let mut counts = csv::Writer::from_path(counts_path)?;
    let mut norm = csv::Writer::from_path(normalized_path)?;
    counts.write_record(&header)?;
    norm.write_record(&header)?;
    let mut percent = Vec::new();
    for (&t, tname) in classes.iter().zip(&names) {
        let row: Vec<u64> = classes.iter().map(|&p| cm.get(t, p)).collect();
        let total: u64 = row.iter().sum();
        let pct: Vec<f64> = row
            .iter()
            .map(|&v| {
                if total == 0 {
                    0.0
                } else {
                    100.0 * v as f64 / total as f64
                }
            })
            .collect();
        let mut rec = vec![tname.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        counts.write_record(&rec)?;
        let mut rec = vec![tname.clone()];
        rec.extend(pct.iter().map(|v| format!("{v:.4}")));
        norm.write_record(&rec)?;
        percent.push(pct);
    }
    counts.flush()?;
    norm.flush()?;
    Ok(percent)
}
