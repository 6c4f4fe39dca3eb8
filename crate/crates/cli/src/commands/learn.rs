use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use hemo_core::classifier::Kernel;
use hemo_core::evaluation::{
    aggregate, confusion, fit, metrics, run_fold, select_hyperparameters, stratified_kfold, task_classes, CvConfig,
    CvReport, MetricSummary, Task,
};
use hemo_core::features::FeatureManifest;
use hemo_core::groundtruth::RegionLabel;
use hemo_core::resampling::{apply_plan_indexed, build_plan, LabeledDataset, ResamplingPlan};

use super::{class_name, existing_file, fmt, write_confusion, write_per_class, Ctx};
use crate::cli::SvmArgs;
use crate::config::{parse_task, parse_variant, task_name, weighting_name};
use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::model::ModelFile;
use crate::plot;
use crate::recipes::{self, Recipe, Reference, RECIPES, SEPARATOR_REFERENCE_SENSITIVITY};
use crate::table::{FeatureRow, FeatureTable};

fn read_table(run: &mut Run, path: &Path, label_column: &str) -> CliResult<FeatureTable> {
    existing_file(path)?;
    run.input(path);
    FeatureTable::read(path, label_column)
}

/// Runs every fold on the worker pool and pools the results.
fn cross_validate(ctx: &Ctx, ds: &LabeledDataset, cv: &CvConfig) -> CliResult<CvReport> {
    let split = stratified_kfold(ds.labels(), cv.k, cv.seed)?;
    let folds: Vec<usize> = (0..cv.k).collect();
    let results = ctx.par_map(&folds, |&f| run_fold(ds, &split, f, cv));
    let folds = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(&task_classes(ds, cv.task), folds)?)
}

/// Abnormal-class metrics for the two-class task, macro averages otherwise.
fn headline(report: &hemo_core::evaluation::MetricsReport, task: Task) -> MetricSummary {
    match (task, report.class(1)) {
        (Task::Binary, Some(c)) => MetricSummary {
            sensitivity: c.metrics.sensitivity,
            specificity: c.metrics.specificity,
            precision: c.metrics.precision,
            f2: c.metrics.f2,
        },
        _ => report.macro_avg,
    }
}

fn gamma_text(k: Kernel) -> String {
    match k {
        Kernel::Rbf { gamma } => gamma.to_string(),
        Kernel::Linear => String::new(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct Summary {
    pub name: String,
    pub description: String,
    pub task: String,
    pub variant: String,
    pub weighting: String,
    pub folds: usize,
    pub seed: u64,
    pub rows: usize,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f2: f64,
    pub reference: Option<ReferenceJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ReferenceJson {
    pub sensitivity: f64,
    pub specificity: Option<f64>,
    pub f2: Option<f64>,
}

impl From<Reference> for ReferenceJson {
    fn from(r: Reference) -> Self {
        Self {
            sensitivity: r.sensitivity / 100.0,
            specificity: Some(r.specificity / 100.0),
            f2: Some(r.f2 / 100.0),
        }
    }
}

fn write_plan(path: &Path, plans: &[(String, &ResamplingPlan)], task: Task) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["fold", "class", "name", "original", "target"])?;
    for (fold, p) in plans {
        for (c, (&o, &t)) in p.original.iter().zip(&p.target).enumerate() {
            if o == 0 && t == 0 {
                continue;
            }
            let name = if task == Task::Binary {
                class_name(Task::Multiclass, c)
            } else {
                class_name(task, c)
            };
            w.write_record([fold.clone(), c.to_string(), name, o.to_string(), t.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes every cross-validation artefact and returns the headline metrics.
fn write_cv_outputs(
    run: &mut Run,
    title: &str,
    report: &CvReport,
    task: Task,
    table: &FeatureTable,
    rows: &[usize],
) -> CliResult<MetricSummary> {
    let name = |c: usize| class_name(task, c);
    let mut w = csv::Writer::from_path(run.output("folds.csv")).map_err(anyhow::Error::from)?;
    w.write_record([
        "fold",
        "seed",
        "c",
        "gamma",
        "train_rows",
        "test_rows",
        "sensitivity",
        "specificity",
        "precision",
        "f2",
    ])
    .map_err(anyhow::Error::from)?;
    for f in &report.folds {
        let h = headline(&f.metrics, task);
        let train_rows: usize = f.train_counts.iter().map(|&(_, n)| n).sum();
        w.write_record([
            f.fold.to_string(),
            f.seed.to_string(),
            f.svm.c.to_string(),
            gamma_text(f.svm.kernel),
            train_rows.to_string(),
            f.test_indices.len().to_string(),
            fmt(h.sensitivity),
            fmt(h.specificity),
            fmt(h.precision),
            fmt(h.f2),
        ])
        .map_err(anyhow::Error::from)?;
    }
    let mean = headline(&report.mean, task);
    let blank = String::new;
    w.write_record([
        "mean".into(),
        blank(),
        blank(),
        blank(),
        blank(),
        blank(),
        fmt(mean.sensitivity),
        fmt(mean.specificity),
        fmt(mean.precision),
        fmt(mean.f2),
    ])
    .map_err(anyhow::Error::from)?;
    w.flush()?;

    write_per_class(&run.output("per_class.csv"), &report.mean, name)?;
    let percent = write_confusion(
        &run.output("confusion.csv"),
        &run.output("confusion_normalized.csv"),
        &report.pooled,
        &report.classes,
        name,
    )?;

    let plans: Vec<(String, &ResamplingPlan)> = report
        .folds
        .iter()
        .filter_map(|f| f.plan.as_ref().map(|p| (f.fold.to_string(), p)))
        .collect();
    if !plans.is_empty() {
        write_plan(&run.output("plan.csv"), &plans, task)?;
    }

    let mut w = csv::Writer::from_path(run.output("predictions.csv")).map_err(anyhow::Error::from)?;
    w.write_record(["fold", "image", "region", "task", "truth", "predicted"])
        .map_err(anyhow::Error::from)?;
    for f in &report.folds {
        for ((&i, &t), &p) in f.test_indices.iter().zip(&f.truth).zip(&f.predicted) {
            let r = &table.rows[rows[i]];
            w.write_record([
                f.fold.to_string(),
                r.image.clone(),
                r.region.to_string(),
                task_name(task).into(),
                t.to_string(),
                p.to_string(),
            ])
            .map_err(anyhow::Error::from)?;
        }
    }
    w.flush()?;

    let labels: Vec<String> = report.classes.iter().map(|&c| name(c)).collect();
    let series = |f: fn(&hemo_core::evaluation::BinaryMetrics) -> f64| {
        report
            .mean
            .per_class
            .iter()
            .map(|c| f(&c.metrics))
            .collect::<Vec<f64>>()
    };
    let svg = plot::bar_chart(
        &format!("{title}: per-class metrics (fold mean)"),
        &labels,
        &[
            ("sensitivity".into(), series(|m| m.sensitivity)),
            ("specificity".into(), series(|m| m.specificity)),
            ("precision".into(), series(|m| m.precision)),
            ("f2".into(), series(|m| m.f2)),
        ],
    );
    std::fs::write(run.output("metrics.svg"), svg)?;
    let svg = plot::confusion_heatmap(&format!("{title}: confusion (% of true class)"), &labels, &percent);
    std::fs::write(run.output("confusion.svg"), svg)?;
    Ok(mean)
}

fn write_summary(run: &mut Run, s: &Summary) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(s)?;
    text.push('\n');
    std::fs::write(run.output("summary.json"), text)?;
    Ok(())
}

pub(super) fn list_recipes() {
    println!(
        "{:<26} {:<11} {:<9} {:<13} description",
        "recipe", "task", "variant", "weights"
    );
    for r in RECIPES {
        println!(
            "{:<26} {:<11} {:<9} {:<13} {}",
            r.name,
            task_name(r.task),
            r.variant.map_or("none", |v| v.name()),
            weighting_name(r.weighting),
            r.description
        );
    }
}

fn unknown_recipe(name: &str) -> CliError {
    CliError::usage(format!(
        "unknown recipe `{name}`; available: {}",
        recipes::names().join(", ")
    ))
}

pub(super) fn experiment(
    mut ctx: Ctx,
    recipe: &str,
    features: &Path,
    folds: Option<usize>,
    svm: &SvmArgs,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let recipe: &Recipe = recipes::find(recipe).ok_or_else(|| unknown_recipe(recipe))?;
    ctx.apply_svm(svm);
    if let Some(k) = folds {
        ctx.cfg.cv.k = k;
    }
    ctx.cfg.cv.task = task_name(recipe.task).into();
    ctx.cfg.resampling.variant = recipe.variant.map_or("none", |v| v.name()).into();
    ctx.cfg.weights.scheme = weighting_name(recipe.weighting);
    let cv = ctx.cfg.cv_config()?;
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("experiment", &ctx.cfg, &out)?;
    run.stage("load");
    let table = read_table(&mut run, features, "label")?;
    let (ds, rows) = table.labeled()?;
    run.stage("cross-validate");
    let report = cross_validate(&ctx, &ds, &cv)?;
    run.stage("write");
    let mean = write_cv_outputs(&mut run, recipe.name, &report, cv.task, &table, &rows)?;
    write_summary(
        &mut run,
        &Summary {
            name: recipe.name.into(),
            description: recipe.description.into(),
            task: task_name(cv.task).into(),
            variant: ctx.cfg.resampling.variant.clone(),
            weighting: ctx.cfg.weights.scheme.clone(),
            folds: cv.k,
            seed: cv.seed,
            rows: ds.len(),
            sensitivity: mean.sensitivity,
            specificity: mean.specificity,
            precision: mean.precision,
            f2: mean.f2,
            reference: recipe.reference.map(Into::into),
        },
    )?;
    println!(
        "{}: sensitivity {:.4} specificity {:.4} precision {:.4} f2 {:.4}",
        recipe.name, mean.sensitivity, mean.specificity, mean.precision, mean.f2
    );
    run.finish()?;
    Ok(())
}

pub(super) fn separate(
    mut ctx: Ctx,
    features: &Path,
    label_column: &str,
    svm: &SvmArgs,
    out: Option<PathBuf>,
) -> CliResult<()> {
    ctx.apply_svm(svm);
    ctx.cfg.cv.task = "binary".into();
    let cv = ctx.cfg.cv_config()?;
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("separate", &ctx.cfg, &out)?;
    run.stage("load");
    let table = read_table(&mut run, features, label_column)?;
    let (mut xs, mut ys, mut rows) = (vec![], vec![], vec![]);
    for (i, r) in table.rows.iter().enumerate() {
        let y = match r.label {
            RegionLabel::Class(0) => 0,
            RegionLabel::Class(_) | RegionLabel::Overlapping => 1,
            RegionLabel::Unknown => continue,
        };
        xs.push(r.values.clone());
        ys.push(y);
        rows.push(i);
    }
    let ds = LabeledDataset::new(xs, ys, 2)?;
    if ds.counts().contains(&0) {
        return Err(CliError::data(
            "the separator needs both single (0) and overlapping (non-zero) rows",
        ));
    }
    run.stage("cross-validate");
    let report = cross_validate(&ctx, &ds, &cv)?;
    run.stage("fit");
    let classes = task_classes(&ds, Task::Binary);
    let svm = match &cv.grid {
        Some((cs, gs)) => select_hyperparameters(&ds, &cv, cs, gs, cv.seed)?,
        None => cv.svm,
    };
    let (model, _, _) = fit(&ds, &classes, &cv, &svm, cv.seed)?;
    run.stage("write");
    let names = FeatureManifest::new().names().map(String::from).collect();
    ModelFile::new("binary", names, model).save(&run.output("separator.json"))?;
    let mean = write_cv_outputs(&mut run, "separator", &report, Task::Binary, &table, &rows)?;
    write_summary(
        &mut run,
        &Summary {
            name: "separator".into(),
            description: "single vs overlapping cells".into(),
            task: "binary".into(),
            variant: ctx.cfg.resampling.variant.clone(),
            weighting: ctx.cfg.weights.scheme.clone(),
            folds: cv.k,
            seed: cv.seed,
            rows: ds.len(),
            sensitivity: mean.sensitivity,
            specificity: mean.specificity,
            precision: mean.precision,
            f2: mean.f2,
            reference: Some(ReferenceJson {
                sensitivity: SEPARATOR_REFERENCE_SENSITIVITY,
                specificity: None,
                f2: None,
            }),
        },
    )?;
    println!(
        "separator: sensitivity {:.4} specificity {:.4} precision {:.4} f2 {:.4}",
        mean.sensitivity, mean.specificity, mean.precision, mean.f2
    );
    run.finish()?;
    Ok(())
}

pub(super) fn resample(mut ctx: Ctx, features: &Path, variant: Option<String>, out: Option<PathBuf>) -> CliResult<()> {
    if let Some(v) = variant {
        ctx.cfg.resampling.variant = v;
    }
    let variant = parse_variant(&ctx.cfg.resampling.variant)?
        .ok_or_else(|| CliError::usage("a resampling variant is required: --variant or resampling.variant"))?;
    let seed = ctx.cfg.require_seed()?;
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("resample", &ctx.cfg, &out)?;
    run.stage("load");
    let table = read_table(&mut run, features, "label")?;
    let (ds, rows) = table.labeled()?;
    run.stage("resample");
    let plan = build_plan(variant, &ds.counts(), ctx.cfg.resampling.small_class_threshold)?;
    let (res, kept) = apply_plan_indexed(&ds, &plan, &ctx.cfg.resample_params(seed))?;
    run.stage("write");
    let mut outt = FeatureTable::default();
    for (j, (x, &y)) in res.rows().iter().zip(res.labels()).enumerate() {
        let (image, region) = match kept.get(j) {
            Some(&i) => {
                let r = &table.rows[rows[i]];
                (r.image.clone(), r.region)
            }
            None => (String::new(), 0),
        };
        outt.rows.push(FeatureRow {
            image,
            region,
            label: RegionLabel::Class(y),
            synthetic: res.synthetic()[j],
            values: x.clone(),
        });
    }
    outt.write(&run.output("resampled.csv"))?;
    write_plan(&run.output("plan.csv"), &[("all".into(), &plan)], Task::Multiclass)?;
    log::info!("{} rows -> {} rows", ds.len(), res.len());
    run.finish()?;
    Ok(())
}

pub(super) fn train(
    mut ctx: Ctx,
    features: &Path,
    task: Option<String>,
    variant: Option<String>,
    weights: Option<String>,
    svm: &SvmArgs,
    out: Option<PathBuf>,
) -> CliResult<()> {
    ctx.apply_svm(svm);
    if let Some(t) = task {
        ctx.cfg.cv.task = t;
    }
    if let Some(v) = variant {
        ctx.cfg.resampling.variant = v;
    }
    if let Some(w) = weights {
        ctx.cfg.weights.scheme = w;
    }
    let cv = ctx.cfg.cv_config()?;
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("train", &ctx.cfg, &out)?;
    run.stage("load");
    let table = read_table(&mut run, features, "label")?;
    let (ds, _) = table.labeled()?;
    run.stage("fit");
    let classes = task_classes(&ds, cv.task);
    let svm = match &cv.grid {
        Some((cs, gs)) => select_hyperparameters(&ds, &cv, cs, gs, cv.seed)?,
        None => cv.svm,
    };
    let (model, plan, _) = fit(&ds, &classes, &cv, &svm, cv.seed)?;
    run.stage("write");
    let names = FeatureManifest::new().names().map(String::from).collect();
    ModelFile::new(task_name(cv.task), names, model).save(&run.output("model.json"))?;
    if let Some(p) = &plan {
        write_plan(&run.output("plan.csv"), &[("all".into(), p)], cv.task)?;
    }
    run.finish()?;
    Ok(())
}

pub(super) fn predict(ctx: Ctx, model: &Path, features: &Path, out: Option<PathBuf>) -> CliResult<()> {
    existing_file(model)?;
    let m = ModelFile::load(model).map_err(CliError::Usage)?;
    let task = parse_task(&m.task)?;
    if m.feature_names != FeatureManifest::new().names().collect::<Vec<_>>() {
        return Err(CliError::usage(format!(
            "{} was trained on a different feature layout",
            model.display()
        )));
    }
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("predict", &ctx.cfg, &out)?;
    run.input(model);
    run.stage("load");
    let table = read_table(&mut run, features, "label")?;
    run.stage("predict");
    let predicted = ctx.par_map(&table.rows, |r| m.model.predict_class(&r.values));
    run.stage("write");
    let mut w = csv::Writer::from_path(run.output("predictions.csv")).map_err(anyhow::Error::from)?;
    w.write_record(["image", "region", "task", "truth", "predicted"])
        .map_err(anyhow::Error::from)?;
    for (r, p) in table.rows.iter().zip(predicted) {
        let truth = match r.label {
            RegionLabel::Class(c) => task.map_label(c).to_string(),
            _ => String::new(),
        };
        w.write_record([
            r.image.clone(),
            r.region.to_string(),
            m.task.clone(),
            truth,
            p.to_string(),
        ])
        .map_err(anyhow::Error::from)?;
    }
    w.flush()?;
    run.finish()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct PredictionRow {
    task: String,
    truth: Option<usize>,
    predicted: usize,
}

pub(super) fn evaluate(ctx: Ctx, predictions: &Path, out: Option<PathBuf>) -> CliResult<()> {
    existing_file(predictions)?;
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("evaluate", &ctx.cfg, &out)?;
    run.input(predictions);
    let mut r = csv::Reader::from_path(predictions).map_err(|e| CliError::usage(e.to_string()))?;
    let (mut truth, mut pred) = (vec![], vec![]);
    let mut task = None;
    for row in r.deserialize::<PredictionRow>() {
        let row = row.with_context(|| format!("bad row in {}", predictions.display()))?;
        task.get_or_insert(parse_task(&row.task)?);
        if let Some(t) = row.truth {
            truth.push(t);
            pred.push(row.predicted);
        }
    }
    if truth.is_empty() {
        return Err(CliError::data("no predictions with a known truth"));
    }
    let task = task.unwrap_or(Task::Multiclass);
    let mut classes: Vec<usize> = truth.iter().chain(&pred).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    let size = classes.last().map_or(0, |&c| c + 1);
    let cm = confusion(&truth, &pred, size)?;
    let present: Vec<usize> = classes.iter().copied().filter(|&c| truth.contains(&c)).collect();
    let report = metrics(&cm, &present);
    let name = |c: usize| class_name(task, c);
    write_per_class(&run.output("per_class.csv"), &report, name)?;
    let percent = write_confusion(
        &run.output("confusion.csv"),
        &run.output("confusion_normalized.csv"),
        &cm,
        &classes,
        name,
    )?;
    let labels: Vec<String> = classes.iter().map(|&c| name(c)).collect();
    std::fs::write(
        run.output("confusion.svg"),
        plot::confusion_heatmap("confusion (% of true class)", &labels, &percent),
    )?;
    let h = headline(&report, task);
    println!(
        "sensitivity {:.4} specificity {:.4} precision {:.4} f2 {:.4}",
        h.sensitivity, h.specificity, h.precision, h.f2
    );
    run.finish()?;
    Ok(())
}

pub(super) fn report(ctx: Ctx, experiments: &[PathBuf], out: Option<PathBuf>) -> CliResult<()> {
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("report", &ctx.cfg, &out)?;
    let mut summaries = Vec::new();
    for dir in experiments {
        let p = dir.join("summary.json");
        existing_file(&p)?;
        run.input(&p);
        let text = std::fs::read_to_string(&p)?;
        let s: Summary = serde_json::from_str(&text).with_context(|| format!("bad summary {}", p.display()))?;
        summaries.push(s);
    }
    let mut w = csv::Writer::from_path(run.output("comparison.csv")).map_err(anyhow::Error::from)?;
    w.write_record([
        "experiment",
        "task",
        "variant",
        "weighting",
        "rows",
        "sensitivity",
        "specificity",
        "precision",
        "f2",
        "reference_sensitivity",
        "reference_specificity",
        "reference_f2",
    ])
    .map_err(anyhow::Error::from)?;
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    for s in &summaries {
        let r = s.reference.as_ref();
        w.write_record([
            s.name.clone(),
            s.task.clone(),
            s.variant.clone(),
            s.weighting.clone(),
            s.rows.to_string(),
            fmt(s.sensitivity),
            fmt(s.specificity),
            fmt(s.precision),
            fmt(s.f2),
            opt(r.map(|r| r.sensitivity)),
            opt(r.and_then(|r| r.specificity)),
            opt(r.and_then(|r| r.f2)),
        ])
        .map_err(anyhow::Error::from)?;
    }
    w.flush()?;
    let names: Vec<String> = summaries.iter().map(|s| s.name.clone()).collect();
    let col = |f: fn(&Summary) -> f64| summaries.iter().map(f).collect::<Vec<f64>>();
    let svg = plot::bar_chart(
        "strategy comparison",
        &names,
        &[
            ("sensitivity".into(), col(|s| s.sensitivity)),
            ("specificity".into(), col(|s| s.specificity)),
            ("precision".into(), col(|s| s.precision)),
            ("f2".into(), col(|s| s.f2)),
        ],
    );
    std::fs::write(run.output("comparison.svg"), svg)?;
    run.finish()?;
    Ok(())
}
