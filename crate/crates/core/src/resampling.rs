//! SMOTE oversampling, NearMiss-2 undersampling and the four per-class
//! resampling policies.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Feature rows with mandatory class labels. Rows appended by SMOTE carry a
/// synthetic flag.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabeledDataset {
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    synthetic: Vec<bool>,
    dim: usize,
    num_classes: usize,
}

impl LabeledDataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let n = rows.len();
        Self::with_flags(rows, labels, vec![false; n], num_classes)
    }

    pub fn with_flags(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        synthetic: Vec<bool>,
        num_classes: usize,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch(rows.len(), labels.len()));
        }
        if rows.len() != synthetic.len() {
            return Err(Error::LengthMismatch(rows.len(), synthetic.len()));
        }
        let dim = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::RowLength {
                    row: i,
                    expected: dim,
                    got: r.len(),
                });
            }
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: num_classes,
            });
        }
        Ok(Self {
            rows,
            labels,
            synthetic,
            dim,
            num_classes,
        })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn synthetic(&self) -> &[bool] {
        &self.synthetic
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.num_classes];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Row indices of `class`, ascending.
    pub fn members(&self, class: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == class).collect()
    }

    /// Subset of rows, in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            synthetic: idx.iter().map(|&i| self.synthetic[i]).collect(),
            dim: self.dim,
            num_classes: self.num_classes,
        }
    }

    /// Maps every label through `f` into a space of `num_classes` classes.
    pub fn relabel(&self, num_classes: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::with_flags(
            self.rows.clone(),
            self.labels.iter().map(|&l| f(l)).collect(),
            self.synthetic.clone(),
            num_classes,
        )
    }

    pub fn into_parts(self) -> (Vec<Vec<f64>>, Vec<usize>, Vec<bool>) {
        (self.rows, self.labels, self.synthetic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoteParams {
    pub k: usize,
    pub seed: u64,
}

impl Default for SmoteParams {
    fn default() -> Self {
        Self { k: 5, seed: 0 }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (into `members`) of the `k` nearest other members of each member,
/// nearest first, ties by position.
fn nearest_neighbors(rows: &[Vec<f64>], members: &[usize], k: usize) -> Vec<Vec<usize>> {
    members
        .iter()
        .enumerate()
        .map(|(a, &ia)| {
            let mut d: Vec<(f64, usize)> = members
                .iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(b, &ib)| (sq_dist(&rows[ia], &rows[ib]), b))
                .collect();
            d.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            d.into_iter().take(k).map(|(_, b)| b).collect()
        })
        .collect()
}

/// `x + lambda * (nn - x)`.
pub fn interpolate(x: &[f64], nn: &[f64], lambda: f64) -> Vec<f64> {
    x.iter().zip(nn).map(|(a, b)| a + lambda * (b - a)).collect()
}

/// Synthesises `target - n` new rows for `class`, where `n` is its current
/// size. Base samples are visited round-robin; the neighbour is drawn
/// uniformly from the `k` nearest same-class rows and the interpolation
/// factor from [0, 1).
pub fn smote_oversample(
    ds: &LabeledDataset,
    class: usize,
    target: usize,
    params: &SmoteParams,
) -> Result<Vec<Vec<f64>>> {
    let members = ds.members(class);
    let n = members.len();
    if target < n {
        return Err(Error::param("target", "below the current class size"));
    }
    if target == n {
        return Ok(Vec::new());
    }
    if params.k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if n < 2 || params.k >= n {
        return Err(Error::ClassTooSmall {
            class,
            count: n,
            needed: params.k.max(1) + 1,
        });
    }
    let neighbors = nearest_neighbors(&ds.rows, &members, params.k);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(class as u64);
    Ok((0..target - n)
        .map(|j| {
            let base = j % n;
            let nn = neighbors[base][rng.random_range(0..params.k)];
            let lambda: f64 = rng.random();
            interpolate(&ds.rows[members[base]], &ds.rows[members[nn]], lambda)
        })
        .collect())
}

/// Mean distance from `row` to its `k` farthest rows among `others`. The
/// distances are summed from the largest down.
pub fn mean_farthest_distance(row: &[f64], others: &[&[f64]], k: usize) -> f64 {
    let mut d: Vec<f64> = others.iter().map(|o| sq_dist(row, o).sqrt()).collect();
    let k = k.min(d.len());
    if k == 0 {
        return 0.0;
    }
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
        d.truncate(k);
    }
    d.sort_by(|a, b| b.total_cmp(a));
    d.iter().sum::<f64>() / k as f64
}

/// Keeps the `target` members of `class` with the smallest mean distance to
/// their `k_far` farthest out-of-class rows. Returns retained row indices in
/// ascending order.
pub fn nearmiss2_undersample(ds: &LabeledDataset, class: usize, target: usize, k_far: usize) -> Result<Vec<usize>> {
    let members = ds.members(class);
    if target > members.len() {
        return Err(Error::param("target", "exceeds the class size"));
    }
    if target == members.len() {
        return Ok(members);
    }
    if k_far == 0 {
        return Err(Error::param("k_far", "must be at least 1"));
    }
    let others: Vec<&[f64]> = (0..ds.len())
        .filter(|&i| ds.labels[i] != class)
        .map(|i| ds.rows[i].as_slice())
        .collect();
    if others.is_empty() {
        return Err(Error::SingleClass);
    }
    let mut scored: Vec<(f64, usize)> = members
        .iter()
        .map(|&i| (mean_farthest_distance(&ds.rows[i], &others, k_far), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut keep: Vec<usize> = scored.into_iter().take(target).map(|(_, i)| i).collect();
    keep.sort_unstable();
    Ok(keep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SmoteVariant {
    /// Every minority class raised to MaxMinSize; majority unchanged.
    Smote1,
    /// As `Smote1`, with the majority undersampled to MaxMinSize.
    Smote2,
    /// Small classes doubled, the rest raised to MaxMinSize.
    Smote3_2,
    /// Small classes tripled, the rest raised to MaxMinSize.
    Smote3_3,
}

impl SmoteVariant {
    pub const ALL: [SmoteVariant; 4] = [
        SmoteVariant::Smote1,
        SmoteVariant::Smote2,
        SmoteVariant::Smote3_2,
        SmoteVariant::Smote3_3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SmoteVariant::Smote1 => "smote1",
            SmoteVariant::Smote2 => "smote2",
            SmoteVariant::Smote3_2 => "smote3-2",
            SmoteVariant::Smote3_3 => "smote3-3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name().eq_ignore_ascii_case(s))
    }

    fn small_multiple(self) -> Option<usize> {
        match self {
            SmoteVariant::Smote3_2 => Some(2),
            SmoteVariant::Smote3_3 => Some(3),
            _ => None,
        }
    }
}

/// Classes below this size are multiplied rather than raised to MaxMinSize
/// under the third policy.
pub const SMALL_CLASS_THRESHOLD: usize = 500;

/// Per-class original and target counts. Class 0 is the majority.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResamplingPlan {
    pub original: Vec<usize>,
    pub target: Vec<usize>,
}

impl ResamplingPlan {
    pub fn identity(counts: &[usize]) -> Self {
        Self {
            original: counts.to_vec(),
            target: counts.to_vec(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.original == self.target
    }

    pub fn total(&self) -> usize {
        self.target.iter().sum()
    }
}

/// Largest count among classes `1..`.
pub fn max_min_size(counts: &[usize]) -> usize {
    counts.iter().skip(1).copied().max().unwrap_or(0)
}

pub fn build_plan(variant: SmoteVariant, counts: &[usize], threshold: usize) -> Result<ResamplingPlan> {
    let mms = max_min_size(counts);
    if mms == 0 {
        return Err(Error::NoMinorityClass);
    }
    let target = counts
        .iter()
        .enumerate()
        .map(|(c, &n)| match (c, n) {
            (_, 0) => 0,
            (0, _) if variant == SmoteVariant::Smote2 => mms,
            (0, _) => n,
            _ => match variant.small_multiple() {
                Some(m) if n < threshold => (m * n).min(mms).max(n),
                _ => mms,
            },
        })
        .collect();
    Ok(ResamplingPlan {
        original: counts.to_vec(),
        target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResampleParams {
    pub smote: SmoteParams,
    pub k_far: usize,
}

impl Default for ResampleParams {
    fn default() -> Self {
        Self {
            smote: SmoteParams::default(),
            k_far: 3,
        }
    }
}

/// Undersamples classes above their target with NearMiss-2 and oversamples
/// classes below it with SMOTE. Retained original rows keep their order and
/// precede all synthetic rows, which follow in class order.
pub fn apply_plan(ds: &LabeledDataset, plan: &ResamplingPlan, params: &ResampleParams) -> Result<LabeledDataset> {
    apply_plan_indexed(ds, plan, params).map(|(out, _)| out)
}

/// [`apply_plan`] that also returns the input index of every retained
/// original row (they come first in the output, in input order).
pub fn apply_plan_indexed(
    ds: &LabeledDataset,
    plan: &ResamplingPlan,
    params: &ResampleParams,
) -> Result<(LabeledDataset, Vec<usize>)> {
    let counts = ds.counts();
    if plan.original != counts || plan.target.len() != counts.len() {
        return Err(Error::param("plan", "was not built from this dataset's counts"));
    }
    let mut keep = vec![true; ds.len()];
    for (c, (&n, &t)) in counts.iter().zip(&plan.target).enumerate() {
        if t < n {
            let retained = nearmiss2_undersample(ds, c, t, params.k_far)?;
            let mut r = retained.into_iter().peekable();
            for i in ds.members(c) {
                if r.peek() == Some(&i) {
                    r.next();
                } else {
                    keep[i] = false;
                }
            }
        }
    }
    let idx: Vec<usize> = (0..ds.len()).filter(|&i| keep[i]).collect();
    let mut out = ds.select(&idx);
    for (c, (&n, &t)) in counts.iter().zip(&plan.target).enumerate() {
        if t <= n {
            continue;
        }
        let mut sp = params.smote;
        if n >= 2 && sp.k >= n {
            log::warn!("class {c}: k={} reduced to {} (class has {n} rows)", sp.k, n - 1);
            sp.k = n - 1;
        }
        for row in smote_oversample(ds, c, t, &sp)? {
            out.rows.push(row);
            out.labels.push(c);
            out.synthetic.push(true);
        }
    }
    Ok((out, idx))
}
