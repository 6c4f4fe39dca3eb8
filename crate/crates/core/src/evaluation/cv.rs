//! Per-fold pipeline: split, resample the training part, fit scaler and SVM,
//! predict the held-out part, score.

use alloc::vec::Vec;

use super::{
    confusion, metrics, stratified_kfold, ClassMetrics, ConfusionMatrix, FoldSplit, MetricSummary, MetricsReport,
};
use crate::classifier::{
    designed_binary_weights, train_multiclass, weights_from_distribution, ClassWeights, Kernel, MulticlassSvmModel,
    SvmParams, WeightScheme,
};
use crate::error::{Error, Result};
use crate::resampling::{apply_plan, build_plan, LabeledDataset, ResampleParams, ResamplingPlan, SmoteVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Task {
    /// Normal (0) against every abnormal class (1).
    Binary,
    /// Every class kept separate.
    Multiclass,
}

impl Task {
    pub fn map_label(self, label: usize) -> usize {
        match self {
            Task::Binary => usize::from(label != 0),
            Task::Multiclass => label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Weighting {
    None,
    Designed(WeightScheme),
    /// Inverse class frequency of the (resampled) training fold.
    Distribution,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub task: Task,
    pub resampling: Option<SmoteVariant>,
    pub small_class_threshold: usize,
    /// The SMOTE seed is replaced by the fold seed.
    pub resample: ResampleParams,
    pub weighting: Weighting,
    pub svm: SvmParams,
    /// Optional `(C, gamma)` grid searched on a validation split of each
    /// training fold.
    pub grid: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 0,
            task: Task::Binary,
            resampling: None,
            small_class_threshold: crate::resampling::SMALL_CLASS_THRESHOLD,
            resample: ResampleParams::default(),
            weighting: Weighting::None,
            svm: SvmParams::default(),
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldResult {
    pub fold: usize,
    pub seed: u64,
    pub plan: Option<ResamplingPlan>,
    /// Training rows per task class after resampling.
    pub train_counts: Vec<(usize, usize)>,
    pub svm: SvmParams,
    pub test_indices: Vec<usize>,
    pub truth: Vec<usize>,
    pub predicted: Vec<usize>,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CvReport {
    pub classes: Vec<usize>,
    pub folds: Vec<FoldResult>,
    /// Per-class metrics averaged over folds; frequencies are summed.
    pub mean: MetricsReport,
    /// Sum of the fold confusion matrices.
    pub pooled: ConfusionMatrix,
}

/// Sorted distinct task labels present in `ds`.
pub fn task_classes(ds: &LabeledDataset, task: Task) -> Vec<usize> {
    let mut c: Vec<usize> = ds.labels().iter().map(|&l| task.map_label(l)).collect();
    c.sort_unstable();
    c.dedup();
    c
}

fn matrix_size(ds: &LabeledDataset, task: Task) -> usize {
    match task {
        Task::Binary => 2,
        Task::Multiclass => ds.num_classes(),
    }
}

/// Model, resampling plan and per-class training counts.
pub type FitOutput = (MulticlassSvmModel, Option<ResamplingPlan>, Vec<(usize, usize)>);

/// Resamples `train` on its original labels, relabels for the task and fits
/// the model; `classes` are the task labels to train. Returns the model, the plan and the per-class training counts.
pub fn fit(train: &LabeledDataset, classes: &[usize], cfg: &CvConfig, svm: &SvmParams, seed: u64) -> Result<FitOutput> {
    let plan = cfg
        .resampling
        .map(|v| build_plan(v, &train.counts(), cfg.small_class_threshold))
        .transpose()?;
    let resampled = match &plan {
        Some(p) => {
            let mut rp = cfg.resample;
            rp.smote.seed = seed;
            apply_plan(train, p, &rp)?
        }
        None => train.clone(),
    };
    let labels: Vec<usize> = resampled.labels().iter().map(|&l| cfg.task.map_label(l)).collect();
    let counts: Vec<(usize, usize)> = classes
        .iter()
        .map(|&c| (c, labels.iter().filter(|&&l| l == c).count()))
        .collect();
    let weights = match cfg.weighting {
        Weighting::None => ClassWeights::uniform(),
        Weighting::Designed(s) => {
            if cfg.task != Task::Binary {
                return Err(Error::param(
                    "weighting",
                    "designed weights apply to the two-class task",
                ));
            }
            designed_binary_weights(s)
        }
        Weighting::Distribution => {
            let present: Vec<(usize, usize)> = counts.iter().copied().filter(|&(_, n)| n > 0).collect();
            weights_from_distribution(&present)?
        }
    };
    let model = train_multiclass(resampled.rows(), &labels, classes, svm, &weights)?;
    Ok((model, plan, counts))
}

/// Picks the grid point with the best macro f2 on fold 0 of a stratified
/// split of `train`; ties keep the earlier grid point.
pub fn select_hyperparameters(
    train: &LabeledDataset,
    cfg: &CvConfig,
    cs: &[f64],
    gammas: &[f64],
    seed: u64,
) -> Result<SvmParams> {
    let classes = task_classes(train, cfg.task);
    let split = stratified_kfold(train.labels(), cfg.k, seed)?;
    let inner = train.select(&split.train_indices(0));
    let val_idx = split.test_indices(0);
    let truth: Vec<usize> = val_idx.iter().map(|&i| cfg.task.map_label(train.labels()[i])).collect();
    let mut best: Option<(f64, SvmParams)> = None;
    for &c in cs {
        for &gamma in gammas {
            let svm = SvmParams {
                c,
                kernel: Kernel::Rbf { gamma },
                ..cfg.svm
            };
            let (model, _, _) = fit(&inner, &classes, cfg, &svm, seed)?;
            let pred: Vec<usize> = val_idx.iter().map(|&i| model.predict_class(&train.rows()[i])).collect();
            let cm = confusion(&truth, &pred, matrix_size(train, cfg.task))?;
            let score = metrics(&cm, &classes).macro_avg.f2;
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, svm));
            }
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::param("grid", "no grid points"))
}

/// Runs one fold of `split`. Folds are independent and may run in parallel.
pub fn run_fold(ds: &LabeledDataset, split: &FoldSplit, fold: usize, cfg: &CvConfig) -> Result<FoldResult> {
    let classes = task_classes(ds, cfg.task);
    let seed = cfg.seed.wrapping_add(fold as u64);
    let train = ds.select(&split.train_indices(fold));
    let test_indices = split.test_indices(fold);
    let svm = match &cfg.grid {
        Some((cs, gammas)) => select_hyperparameters(&train, cfg, cs, gammas, seed)?,
        None => cfg.svm,
    };
    let (model, plan, train_counts) = fit(&train, &classes, cfg, &svm, seed)?;
    let truth: Vec<usize> = test_indices
        .iter()
        .map(|&i| cfg.task.map_label(ds.labels()[i]))
        .collect();
    let predicted: Vec<usize> = test_indices
        .iter()
        .map(|&i| model.predict_class(&ds.rows()[i]))
        .collect();
    let cm = confusion(&truth, &predicted, matrix_size(ds, cfg.task))?;
    Ok(FoldResult {
        fold,
        seed,
        plan,
        train_counts,
        svm,
        test_indices,
        truth,
        predicted,
        metrics: metrics(&cm, &classes),
        confusion: cm,
    })
}

/// Averages fold metrics per class and pools the confusion matrices.
pub fn aggregate(classes: &[usize], folds: Vec<FoldResult>) -> Result<CvReport> {
    let first = folds
        .first()
        .ok_or_else(|| Error::param("folds", "no folds to aggregate"))?;
    let mut pooled = ConfusionMatrix::zeros(first.confusion.size());
    for f in &folds {
        pooled.merge(&f.confusion)?;
    }
    let n = folds.len() as f64;
    let per_class: Vec<ClassMetrics> = classes
        .iter()
        .map(|&c| {
            let mut acc = ClassMetrics {
                class: c,
                frequency: 0,
                metrics: Default::default(),
            };
            for f in &folds {
                if let Some(m) = f.metrics.class(c) {
                    acc.frequency += m.frequency;
                    let (a, b) = (&mut acc.metrics, &m.metrics);
                    a.tp += b.tp;
                    a.fn_ += b.fn_;
                    a.fp += b.fp;
                    a.tn += b.tn;
                    a.sensitivity += b.sensitivity / n;
                    a.specificity += b.specificity / n;
                    a.precision += b.precision / n;
                    a.f2 += b.f2 / n;
                    a.degenerate |= b.degenerate;
                }
            }
            acc
        })
        .collect();
    let macro_avg = MetricSummary::mean_of(per_class.iter().map(|c| &c.metrics));
    Ok(CvReport {
        classes: classes.to_vec(),
        folds,
        mean: MetricsReport { per_class, macro_avg },
        pooled,
    })
}

/// Stratifies on the original labels (also for the two-class task), then
/// runs every fold in order.
pub fn run_cv(ds: &LabeledDataset, cfg: &CvConfig) -> Result<CvReport> {
    let split = stratified_kfold(ds.labels(), cfg.k, cfg.seed)?;
    let folds = (0..cfg.k)
        .map(|f| run_fold(ds, &split, f, cfg))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&task_classes(ds, cfg.task), folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resampling::LabeledDataset;
    use alloc::vec;

    /// Three tight, well separated blobs labelled 0, 3 and 7.
    fn blobs() -> LabeledDataset {
        let mut rows = vec![];
        let mut labels = vec![];
        for (c, n, cx) in [(0usize, 40usize, 0.0f64), (3, 15, 6.0), (7, 10, -6.0)] {
            for i in 0..n {
                let t = i as f64 * 2.399;
                let r = 0.5 * ((i % 5) as f64 / 5.0);
                rows.push(vec![cx + r * t.cos(), r * t.sin()]);
                labels.push(c);
            }
        }
        LabeledDataset::new(rows, labels, 11).unwrap()
    }

    fn cfg(task: Task) -> CvConfig {
        CvConfig {
            task,
            seed: 11,
            svm: SvmParams {
                c: 10.0,
                kernel: Kernel::Rbf { gamma: 0.5 },
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn separable_blobs_are_recovered() {
        let ds = blobs();
        for task in [Task::Binary, Task::Multiclass] {
            let r = run_cv(&ds, &cfg(task)).unwrap();
            assert_eq!(r.folds.len(), 5);
            assert!(r.mean.macro_avg.sensitivity >= 0.99, "{task:?}");
            assert_eq!(r.pooled.total(), ds.len() as u64);
        }
        let r = run_cv(&ds, &cfg(Task::Multiclass)).unwrap();
        assert_eq!(r.classes, vec![0, 3, 7]);
        assert_eq!(r.mean.class(3).unwrap().frequency, 15);
    }

    #[test]
    fn resampling_and_weights_run_per_fold() {
        let ds = blobs();
        let mut c = cfg(Task::Multiclass);
        c.resampling = Some(SmoteVariant::Smote1);
        c.weighting = Weighting::Distribution;
        let r = run_cv(&ds, &c).unwrap();
        for f in &r.folds {
            let plan = f.plan.as_ref().unwrap();
            assert_eq!(plan.target[3], plan.target[7]);
            assert_eq!(f.train_counts.iter().find(|t| t.0 == 3).unwrap().1, plan.target[3]);
        }
        assert_eq!(r, run_cv(&ds, &c).unwrap());
    }

    #[test]
    fn designed_weights_need_two_classes() {
        let mut c = cfg(Task::Multiclass);
        c.weighting = Weighting::Designed(WeightScheme::OneTwo);
        assert!(run_cv(&blobs(), &c).is_err());
        let mut c = cfg(Task::Binary);
        c.weighting = Weighting::Designed(WeightScheme::OneTwo);
        assert!(run_cv(&blobs(), &c).is_ok());
    }

    #[test]
    fn identity_plan_equals_no_resampling() {
        // with balanced minority classes SMOTE1 leaves every count unchanged
        let mut ds_rows = vec![];
        let mut labels = vec![];
        for (c, cx) in [(0usize, 0.0f64), (1, 3.0), (2, -3.0)] {
            for i in 0..10 {
                ds_rows.push(vec![cx + (i as f64) * 0.05, (i % 4) as f64 * 0.1]);
                labels.push(c);
            }
        }
        let ds = LabeledDataset::new(ds_rows, labels, 3).unwrap();
        let plain = run_cv(&ds, &cfg(Task::Multiclass)).unwrap();
        let mut c = cfg(Task::Multiclass);
        c.resampling = Some(SmoteVariant::Smote1);
        let resampled = run_cv(&ds, &c).unwrap();
        assert!(resampled.folds.iter().all(|f| f.plan.as_ref().unwrap().is_identity()));
        assert_eq!(plain.mean, resampled.mean);
        assert_eq!(plain.pooled, resampled.pooled);
    }

    #[test]
    fn grid_search_picks_from_grid() {
        let mut c = cfg(Task::Binary);
        c.grid = Some((vec![0.1, 10.0], vec![0.5]));
        let r = run_cv(&blobs(), &c).unwrap();
        assert!(r.folds.iter().all(|f| f.svm.c == 0.1 || f.svm.c == 10.0));
    }
}
