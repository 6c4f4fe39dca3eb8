//! Stratified cross-validation, one-against-all metrics, confusion matrices
//! and cell-level mask matching.

mod cellmatch;
mod cv;

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use cellmatch::{cell_match, regions_from_label_mask, CellMatch, CellMatchResult, DEFAULT_MATCH_THRESHOLD};
pub use cv::{
    aggregate, fit, run_cv, run_fold, select_hyperparameters, task_classes, CvConfig, CvReport, FitOutput, FoldResult,
    Task, Weighting,
};

/// Fold index per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub k: usize,
    pub seed: u64,
    pub fold_of: Vec<usize>,
}

impl FoldSplit {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

/// Shuffles each class with the seed and deals its members to folds in
/// turn. Each class starts where the previous one stopped so fold sizes
/// stay balanced too.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::param("k", "need at least two folds"));
    }
    let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut members = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for (class, m) in members.iter_mut().enumerate() {
        if m.is_empty() {
            continue;
        }
        if m.len() < k {
            return Err(Error::ClassTooSmall {
                class,
                count: m.len(),
                needed: k,
            });
        }
        m.shuffle(&mut rng);
        for &i in m.iter() {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldSplit { k, seed, fold_of })
}

/// 1 for `positive`, 0 otherwise.
pub fn binarize(labels: &[usize], positive: usize) -> Vec<usize> {
    labels.iter().map(|&l| usize::from(l == positive)).collect()
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn add(&mut self, truth: usize, pred: usize) -> Result<()> {
        for l in [truth, pred] {
            if l >= self.k {
                return Err(Error::LabelOutOfRange {
                    label: l,
                    classes: self.k,
                });
            }
        }
        self.counts[truth * self.k + pred] += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.k != self.k {
            return Err(Error::LengthMismatch(self.k, other.k));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.k..(truth + 1) * self.k]
    }

    /// One-against-all counts `(tp, fn, fp, tn)` for `class`.
    pub fn one_vs_all(&self, class: usize) -> (u64, u64, u64, u64) {
        let tp = self.get(class, class);
        let row: u64 = self.row(class).iter().sum();
        let col: u64 = (0..self.k).map(|t| self.get(t, class)).sum();
        let fn_ = row - tp;
        let fp = col - tp;
        (tp, fn_, fp, self.total() - tp - fn_ - fp)
    }

    /// Each row as percentages of its total; empty rows stay zero.
    pub fn row_normalize(&self) -> Vec<Vec<f64>> {
        (0..self.k)
            .map(|t| {
                let row = self.row(t);
                let n: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 })
                    .collect()
            })
            .collect()
    }

    /// Row percentages rounded to `decimals` places, the last column taking
    /// the rounding residue so non-empty rows print as exactly 100.
    pub fn rounded_percentages(&self, decimals: u32) -> Vec<Vec<f64>> {
        let scale = 10f64.powi(decimals as i32);
        self.row_normalize()
            .into_iter()
            .enumerate()
            .map(|(t, row)| {
                let mut units: Vec<i64> = row.iter().map(|v| (v * scale).round() as i64).collect();
                if self.row(t).iter().any(|&c| c > 0) {
                    let target = 100 * scale as i64;
                    let others: i64 = units[..self.k - 1].iter().sum();
                    units[self.k - 1] = target - others;
                }
                units.into_iter().map(|u| u as f64 / scale).collect()
            })
            .collect()
    }
}

pub fn confusion(truth: &[usize], pred: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch(truth.len(), pred.len()));
    }
    let mut cm = ConfusionMatrix::zeros(k);
    for (&t, &p) in truth.iter().zip(pred) {
        cm.add(t, p)?;
    }
    Ok(cm)
}

/// Sensitivity, specificity, precision and f2 of one positive class. A
/// ratio with a zero denominator is reported as 0 and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinaryMetrics {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f2: f64,
    pub degenerate: bool,
}

fn ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den == 0.0 {
        *degenerate = true;
        0.0
    } else {
        num / den
    }
}

/// `F_beta` with beta = 2.
pub fn f2_score(precision: f64, recall: f64) -> f64 {
    let den = 4.0 * precision + recall;
    if den == 0.0 {
        0.0
    } else {
        5.0 * precision * recall / den
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    let den = precision + recall;
    if den == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / den
    }
}

pub fn binary_metrics(tp: u64, fn_: u64, fp: u64, tn: u64) -> BinaryMetrics {
    let mut degenerate = false;
    let sensitivity = ratio(tp as f64, (tp + fn_) as f64, &mut degenerate);
    let specificity = ratio(tn as f64, (tn + fp) as f64, &mut degenerate);
    let precision = ratio(tp as f64, (tp + fp) as f64, &mut degenerate);
    BinaryMetrics {
        tp,
        fn_,
        fp,
        tn,
        sensitivity,
        specificity,
        precision,
        f2: f2_score(precision, sensitivity),
        degenerate,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassMetrics {
    pub class: usize,
    /// Number of samples whose true label is `class`.
    pub frequency: u64,
    pub metrics: BinaryMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricSummary {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f2: f64,
}

impl MetricSummary {
    fn mean_of<'a>(items: impl Iterator<Item = &'a BinaryMetrics>) -> Self {
        let (mut s, mut n) = (MetricSummary::default(), 0.0);
        for m in items {
            s.sensitivity += m.sensitivity;
            s.specificity += m.specificity;
            s.precision += m.precision;
            s.f2 += m.f2;
            n += 1.0;
        }
        if n > 0.0 {
            s.sensitivity /= n;
            s.specificity /= n;
            s.precision /= n;
            s.f2 /= n;
        }
        s
    }
}

/// Per-class one-against-all metrics plus their unweighted mean.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: MetricSummary,
}

impl MetricsReport {
    pub fn class(&self, class: usize) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.class == class)
    }
}

/// Binarises `cm` once per listed class.
pub fn metrics(cm: &ConfusionMatrix, classes: &[usize]) -> MetricsReport {
    let per_class: Vec<ClassMetrics> = classes
        .iter()
        .map(|&c| {
            let (tp, fn_, fp, tn) = cm.one_vs_all(c);
            ClassMetrics {
                class: c,
                frequency: tp + fn_,
                metrics: binary_metrics(tp, fn_, fp, tn),
            }
        })
        .collect();
    let macro_avg = MetricSummary::mean_of(per_class.iter().map(|c| &c.metrics));
    MetricsReport { per_class, macro_avg }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn hand_arithmetic_fixture() {
        let m = binary_metrics(9, 1, 3, 7);
        assert!((m.sensitivity - 0.9).abs() < 1e-12);
        assert!((m.specificity - 0.7).abs() < 1e-12);
        assert!((m.precision - 0.75).abs() < 1e-12);
        assert!((m.f2 - 3.375 / 3.9).abs() < 1e-12);
        assert!((m.f2 - 0.86538).abs() < 1e-5);
        assert!(!m.degenerate);
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = binary_metrics(5, 0, 0, 5);
        assert_eq!((m.sensitivity, m.specificity, m.precision, m.f2), (1.0, 1.0, 1.0, 1.0));
        let m = binary_metrics(0, 4, 0, 6);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.f2, 0.0);
        assert!(m.degenerate);
    }

    #[test]
    fn f2_favours_recall() {
        for i in 1..100 {
            for j in 1..100 {
                let (p, r) = (i as f64 / 100.0, j as f64 / 100.0);
                if r > p {
                    assert!(f2_score(p, r) > f1_score(p, r));
                }
            }
        }
        assert_eq!(f2_score(1.0, 1.0), 1.0);
        assert_eq!(f2_score(0.5, 0.0), 0.0);
    }

    #[test]
    fn three_class_confusion() {
        let truth = [0, 0, 0, 1, 1, 2, 2, 2, 2];
        let pred = [0, 1, 0, 1, 2, 2, 2, 0, 2];
        let cm = confusion(&truth, &pred, 3).unwrap();
        assert_eq!(cm.row(0), &[2, 1, 0]);
        assert_eq!(cm.row(1), &[0, 1, 1]);
        assert_eq!(cm.row(2), &[1, 0, 3]);
        assert_eq!(cm.one_vs_all(2), (3, 1, 1, 4));
        let r = metrics(&cm, &[0, 1, 2]);
        for c in &r.per_class {
            assert_eq!(c.metrics.tp + c.metrics.fn_, c.frequency);
        }
        assert!(confusion(&[0, 3], &[0, 0], 3).is_err());
        assert!(confusion(&[0], &[0, 0], 3).is_err());
    }

    #[test]
    fn rounding_residue_goes_to_last_column() {
        let cm = confusion(&[0, 0, 0, 1], &[0, 1, 2, 1], 3).unwrap();
        let r = cm.rounded_percentages(1);
        assert_eq!(r[0], vec![33.3, 33.3, 33.4]);
        assert_eq!(r[1], vec![0.0, 100.0, 0.0]);
        assert_eq!(r[2], vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn binarize_counts() {
        assert_eq!(binarize(&[2, 2], 2), vec![1, 1]);
        assert_eq!(binarize(&[0, 1], 5), vec![0, 0]);
        assert_eq!(binarize(&[3, 1, 3, 0], 3).iter().sum::<usize>(), 2);
    }

    #[test]
    fn small_class_is_named() {
        let err = stratified_kfold(&[0, 0, 0, 0, 0, 1, 1], 5, 0).unwrap_err();
        assert_eq!(
            err,
            Error::ClassTooSmall {
                class: 1,
                count: 2,
                needed: 5
            }
        );
    }

    #[test]
    fn balanced_pairs_split_evenly() {
        let labels = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let s = stratified_kfold(&labels, 5, 9).unwrap();
        for f in 0..5 {
            let t = s.test_indices(f);
            assert_eq!(t.len(), 2);
            assert_eq!(t.iter().filter(|&&i| labels[i] == 0).count(), 1);
        }
    }

    proptest! {
        #[test]
        fn folds_partition_and_stratify(counts in proptest::collection::vec(5usize..40, 1..6), seed in 0u64..10_000) {
            let mut labels = vec![];
            for (c, &n) in counts.iter().enumerate() {
                labels.extend(core::iter::repeat_n(c, n));
            }
            // interleave so class order and row order differ
            labels.reverse();
            let k = 5;
            let s = stratified_kfold(&labels, k, seed).unwrap();
            let mut seen = vec![0; labels.len()];
            for f in 0..k {
                for i in s.test_indices(f) {
                    seen[i] += 1;
                }
                for (c, &n) in counts.iter().enumerate() {
                    let in_fold = s.test_indices(f).iter().filter(|&&i| labels[i] == c).count();
                    prop_assert!(in_fold == n / k || in_fold == n.div_ceil(k));
                }
                prop_assert_eq!(s.test_indices(f).len() + s.train_indices(f).len(), labels.len());
            }
            prop_assert!(seen.iter().all(|&v| v == 1));
        }

        #[test]
        fn normalised_rows_sum_to_100(pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..200)) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let cm = confusion(&t, &p, 4).unwrap();
            prop_assert_eq!(cm.total(), t.len() as u64);
            for (i, row) in cm.row_normalize().iter().enumerate() {
                let s: f64 = row.iter().sum();
                if cm.row(i).iter().sum::<u64>() > 0 {
                    prop_assert!((s - 100.0).abs() < 1e-9);
                }
            }
        }
    }
}
