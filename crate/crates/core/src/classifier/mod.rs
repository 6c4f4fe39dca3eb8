//! Cost-sensitive RBF support vector machine with per-fold feature scaling
//! and one-vs-one multiclass voting.

pub mod smo;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
pub use smo::{kkt_violation, SmoParams, SmoSolution};

/// Floor applied to every standard deviation.
pub const STD_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalerParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ScalerParams {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }

    pub fn inverse(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

/// Per-column mean and population standard deviation.
pub fn fit_scaler(rows: &[Vec<f64>]) -> Result<ScalerParams> {
    if rows.len() < 2 {
        return Err(Error::param("rows", "need at least two rows to fit a scaler"));
    }
    let d = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(Error::RowLength {
            row: i,
            expected: d,
            got: r.len(),
        });
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt().max(STD_EPSILON)).collect();
    Ok(ScalerParams { mean, std })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => rbf(x, y, gamma),
            Kernel::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::param("gamma", "must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// `exp(-gamma * |x - y|^2)`.
pub fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Per-class multipliers of the box constraint. Classes without an entry
/// weigh 1.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassWeights(pub BTreeMap<usize, f64>);

impl ClassWeights {
    pub fn uniform() -> Self {
        Self::default()
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0.get(&class).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.values().all(|&w| w > 0.0 && w.is_finite()) {
            Ok(())
        } else {
            Err(Error::param("weights", "must be positive and finite"))
        }
    }
}

/// `w_c = N / (K n_c)` over the classes listed in `counts` (class id, count).
pub fn weights_from_distribution(counts: &[(usize, usize)]) -> Result<ClassWeights> {
    if let Some(&(c, _)) = counts.iter().find(|&&(_, n)| n == 0) {
        return Err(Error::ZeroCount(c));
    }
    if counts.is_empty() {
        return Err(Error::param("counts", "no classes"));
    }
    let total: usize = counts.iter().map(|&(_, n)| n).sum();
    let k = counts.len() as f64;
    Ok(ClassWeights(
        counts
            .iter()
            .map(|&(c, n)| (c, total as f64 / (k * n as f64)))
            .collect(),
    ))
}

/// Hand-picked normal:abnormal weightings for the two-class task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WeightScheme {
    OneTwo,
    TwoThree,
}

impl WeightScheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "1:2" => Some(WeightScheme::OneTwo),
            "2:3" => Some(WeightScheme::TwoThree),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::OneTwo => "1:2",
            WeightScheme::TwoThree => "2:3",
        }
    }
}

/// Weights for normal (0) and abnormal (1).
pub fn designed_binary_weights(scheme: WeightScheme) -> ClassWeights {
    let (n, a) = match scheme {
        WeightScheme::OneTwo => (1.0, 2.0),
        WeightScheme::TwoThree => (2.0, 3.0),
    };
    ClassWeights([(0, n), (1, a)].into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvmParams {
    pub c: f64,
    pub kernel: Kernel,
    pub smo: SmoParams,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            kernel: Kernel::Rbf {
                gamma: 1.0 / crate::features::FEATURE_COUNT as f64,
            },
            smo: SmoParams::default(),
        }
    }
}

/// A two-class model on already-scaled rows. Positive decision values vote
/// for `positive`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinarySvmModel {
    pub negative: usize,
    pub positive: usize,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
}

impl BinarySvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coef)
            .map(|(sv, a)| a * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        if self.decision(x) > 0.0 {
            self.positive
        } else {
            self.negative
        }
    }
}

/// Trains on the rows labelled `negative` or `positive`; other rows are
/// ignored. Returns the model and the raw solver output.
pub fn train_binary(
    rows: &[Vec<f64>],
    labels: &[usize],
    negative: usize,
    positive: usize,
    params: &SvmParams,
    weights: &ClassWeights,
) -> Result<(BinarySvmModel, SmoSolution)> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch(rows.len(), labels.len()));
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::param("C", "must be positive"));
    }
    weights.validate()?;
    let idx: Vec<usize> = (0..rows.len())
        .filter(|&i| labels[i] == negative || labels[i] == positive)
        .collect();
    let sub: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
    let y: Vec<f64> = idx
        .iter()
        .map(|&i| if labels[i] == positive { 1.0 } else { -1.0 })
        .collect();
    let c: Vec<f64> = idx.iter().map(|&i| params.c * weights.get(labels[i])).collect();
    let sol = smo::solve(&sub, &y, &c, params.kernel, &params.smo)?;
    let (mut support_vectors, mut coef) = (Vec::new(), Vec::new());
    for (t, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(sub[t].clone());
            coef.push(a * y[t]);
        }
    }
    let model = BinarySvmModel {
        negative,
        positive,
        support_vectors,
        coef,
        bias: -sol.rho,
        kernel: params.kernel,
    };
    Ok((model, sol))
}

/// One pairwise machine inside a multiclass model. Support vectors are
/// indices into the model's shared table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairModel {
    pub negative: usize,
    pub positive: usize,
    pub support: Vec<usize>,
    pub coef: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MulticlassSvmModel {
    pub classes: Vec<usize>,
    pub scaler: ScalerParams,
    pub kernel: Kernel,
    /// Scaled support vectors shared by all pairs.
    pub support_vectors: Vec<Vec<f64>>,
    pub pairs: Vec<PairModel>,
    /// Class pairs with no training rows on one side.
    pub skipped: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    /// (class, votes, summed decision value in favour of the class), in
    /// class-list order.
    pub scores: Vec<(usize, usize, f64)>,
}

impl MulticlassSvmModel {
    pub fn predict(&self, row: &[f64]) -> Prediction {
        let x = self.scaler.transform(row);
        let k: Vec<f64> = self.support_vectors.iter().map(|sv| self.kernel.eval(sv, &x)).collect();
        let pos = |c: usize| self.classes.iter().position(|&k| k == c).expect("pair class is listed");
        let mut votes = vec![0usize; self.classes.len()];
        let mut sums = vec![0.0; self.classes.len()];
        for p in &self.pairs {
            let d = p.support.iter().zip(&p.coef).map(|(&s, a)| a * k[s]).sum::<f64>() + p.bias;
            let (pi, ni) = (pos(p.positive), pos(p.negative));
            if d > 0.0 {
                votes[pi] += 1;
            } else {
                votes[ni] += 1;
            }
            sums[pi] += d;
            sums[ni] -= d;
        }
        let mut best = 0;
        for i in 1..self.classes.len() {
            let better = votes[i] > votes[best]
                || (votes[i] == votes[best]
                    && (sums[i] > sums[best] || (sums[i] == sums[best] && self.classes[i] < self.classes[best])));
            if better {
                best = i;
            }
        }
        Prediction {
            class: self.classes[best],
            scores: (0..self.classes.len())
                .map(|i| (self.classes[i], votes[i], sums[i]))
                .collect(),
        }
    }

    pub fn predict_class(&self, row: &[f64]) -> usize {
        self.predict(row).class
    }
}

/// Fits the scaler on all rows, then one machine per class pair of
/// `classes`. Pairs lacking rows on either side are skipped.
pub fn train_multiclass(
    rows: &[Vec<f64>],
    labels: &[usize],
    classes: &[usize],
    params: &SvmParams,
    weights: &ClassWeights,
) -> Result<MulticlassSvmModel> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch(rows.len(), labels.len()));
    }
    let mut classes = classes.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let scaler = fit_scaler(rows)?;
    let scaled = scaler.transform_rows(rows);
    let mut table: BTreeMap<usize, usize> = BTreeMap::new();
    let mut support_vectors = Vec::new();
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for (a, &neg) in classes.iter().enumerate() {
        for &posc in &classes[a + 1..] {
            let idx: Vec<usize> = (0..rows.len())
                .filter(|&i| labels[i] == neg || labels[i] == posc)
                .collect();
            let has = |c| idx.iter().any(|&i| labels[i] == c);
            if !(has(neg) && has(posc)) {
                log::warn!("no training rows for class pair ({neg}, {posc}); skipped");
                skipped.push((neg, posc));
                continue;
            }
            let sub: Vec<Vec<f64>> = idx.iter().map(|&i| scaled[i].clone()).collect();
            let sub_labels: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let (_, sol) = train_binary(&sub, &sub_labels, neg, posc, params, weights)?;
            let mut support = Vec::new();
            let mut coef = Vec::new();
            for (t, &alpha) in sol.alpha.iter().enumerate() {
                if alpha > 0.0 {
                    let row = idx[t];
                    let slot = *table.entry(row).or_insert_with(|| {
                        support_vectors.push(scaled[row].clone());
                        support_vectors.len() - 1
                    });
                    support.push(slot);
                    coef.push(if sub_labels[t] == posc { alpha } else { -alpha });
                }
            }
            pairs.push(PairModel {
                negative: neg,
                positive: posc,
                support,
                coef,
                bias: -sol.rho,
            });
        }
    }
    if pairs.is_empty() {
        return Err(Error::SingleClass);
    }
    Ok(MulticlassSvmModel {
        classes,
        scaler,
        kernel: params.kernel,
        support_vectors,
        pairs,
        skipped,
    })
}
