//! Cell-level comparison of a predicted label mask against ground truth.

use alloc::vec;
use alloc::vec::Vec;

use super::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::imaging::{CellRegion, Grid, NEIGHBORS_8};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.70;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellMatch {
    pub region_id: u32,
    pub true_class: u8,
    /// Most frequent predicted id over the interior, ties to the lower id.
    pub majority_class: u8,
    pub agreement: f64,
    pub matched: bool,
    pub interior_pixels: usize,
}

impl CellMatch {
    /// Column used in the cell-level confusion matrix: the true class when
    /// matched; otherwise the majority prediction, or background (0) when
    /// that majority is the true class but falls short of the threshold.
    pub fn confusion_column(&self) -> u8 {
        if self.matched {
            self.true_class
        } else if self.majority_class != self.true_class {
            self.majority_class
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellMatchResult {
    pub cells: Vec<CellMatch>,
    pub confusion: ConfusionMatrix,
    /// Regions with no pixels left after removing the border.
    pub skipped: usize,
}

impl CellMatchResult {
    pub fn matched(&self) -> usize {
        self.cells.iter().filter(|c| c.matched).count()
    }
}

/// Regions of a label mask: 8-connected pixels sharing one non-zero id.
pub fn regions_from_label_mask(mask: &Grid<u8>) -> Result<Vec<CellRegion>> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        let id = mask.as_slice()[start];
        if seen[start] || id == 0 {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut px = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            px.push((x, y));
            for &(dx, dy) in &NEIGHBORS_8 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if mask.get_signed(nx, ny) == Some(&id) {
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        out.push(CellRegion::from_pixels(out.len() as u32 + 1, px)?);
    }
    Ok(out)
}

/// Scores every region by the share of its interior (region minus its
/// one-pixel border) whose predicted id equals the true id. `num_classes`
/// sizes the confusion matrix and bounds every id.
pub fn cell_match(
    label_mask: &Grid<u8>,
    pred_mask: &Grid<u8>,
    regions: &[CellRegion],
    num_classes: usize,
    threshold: f64,
) -> Result<CellMatchResult> {
    label_mask.same_dims(pred_mask)?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::param("threshold", "must lie in [0, 1]"));
    }
    let check = |v: u8| {
        if (v as usize) < num_classes {
            Ok(())
        } else {
            Err(Error::LabelOutOfRange {
                label: v as usize,
                classes: num_classes,
            })
        }
    };
    let mut cells = Vec::new();
    let mut cm = ConfusionMatrix::zeros(num_classes);
    let mut skipped = 0;
    for r in regions {
        let interior: Vec<(usize, usize)> = r
            .pixels
            .iter()
            .copied()
            .filter(|p| {
                r.border_pixels
                    .binary_search_by_key(&(p.1, p.0), |q| (q.1, q.0))
                    .is_err()
            })
            .collect();
        if interior.is_empty() {
            skipped += 1;
            continue;
        }
        let mut truth_hist = vec![0usize; 256];
        let mut pred_hist = vec![0usize; 256];
        for &(x, y) in &interior {
            truth_hist[*label_mask.get(x, y) as usize] += 1;
            pred_hist[*pred_mask.get(x, y) as usize] += 1;
        }
        let argmax = |h: &[usize]| (0..256).max_by_key(|&v| (h[v], core::cmp::Reverse(v))).unwrap_or(0) as u8;
        let true_class = argmax(&truth_hist);
        let majority_class = argmax(&pred_hist);
        check(true_class)?;
        check(majority_class)?;
        let agree = interior
            .iter()
            .filter(|&&(x, y)| *pred_mask.get(x, y) == true_class)
            .count();
        // compare counts exactly so 7/10 against 0.70 is not lost to rounding
        let matched = agree as f64 >= threshold * interior.len() as f64 - 1e-9;
        let cell = CellMatch {
            region_id: r.id,
            true_class,
            majority_class,
            agreement: agree as f64 / interior.len() as f64,
            matched,
            interior_pixels: interior.len(),
        };
        cm.add(true_class as usize, cell.confusion_column() as usize)?;
        cells.push(cell);
    }
    Ok(CellMatchResult {
        cells,
        confusion: cm,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A `w x 3` interior strip surrounded by a one-pixel rind; the first
    /// `bad` interior pixels are predicted as class 2.
    fn fixture(interior: usize, bad: usize) -> (Grid<u8>, Grid<u8>) {
        let (w, h) = (interior + 4, 5);
        let label = Grid::from_fn(w, h, |x, y| {
            u8::from((1..w - 1).contains(&x) && (1..h - 1).contains(&y))
        })
        .unwrap();
        let mut pred = label.clone();
        for i in 0..bad {
            pred.set(2 + i, 2, 2);
        }
        // a wrong border pixel must not count
        pred.set(1, 1, 2);
        (label, pred)
    }

    #[test]
    fn threshold_is_inclusive() {
        for (bad, matched) in [(3, true), (4, false)] {
            let (label, pred) = fixture(10, bad);
            let regions = regions_from_label_mask(&label).unwrap();
            assert_eq!(regions.len(), 1);
            let r = cell_match(&label, &pred, &regions, 3, 0.70).unwrap();
            assert_eq!(r.cells[0].interior_pixels, 10);
            assert_eq!(r.cells[0].matched, matched, "bad={bad}");
        }
    }

    #[test]
    fn identical_masks_match_everything() {
        let label = Grid::from_fn(20, 12, |x, y| match (x / 5, y / 6) {
            (0, 0) => 1,
            (2, 0) => 3,
            (1, 1) | (3, 1) => 2,
            _ => 0,
        })
        .unwrap();
        let regions = regions_from_label_mask(&label).unwrap();
        assert_eq!(regions.len(), 4);
        let r = cell_match(&label, &label, &regions, 4, 0.70).unwrap();
        assert_eq!(r.matched(), 4);
        assert!(r.cells.iter().all(|c| c.agreement == 1.0));
        for t in 0..4 {
            for p in 0..4 {
                assert_eq!(r.confusion.get(t, p) > 0, t == p && t > 0);
            }
        }
    }

    #[test]
    fn unmatched_cells_go_to_majority_or_background() {
        let (label, mut pred) = fixture(10, 0);
        for x in 2..12 {
            pred.set(x, 2, 2);
        }
        let regions = regions_from_label_mask(&label).unwrap();
        let r = cell_match(&label, &pred, &regions, 3, 0.70).unwrap();
        assert_eq!(r.confusion.get(1, 2), 1);
        let (label, pred) = fixture(10, 4);
        let r = cell_match(&label, &pred, &regions, 3, 0.70).unwrap();
        assert_eq!(r.cells[0].majority_class, 1);
        assert_eq!(r.confusion.get(1, 0), 1);
    }

    #[test]
    fn thin_regions_are_skipped() {
        let label = Grid::from_fn(6, 6, |x, y| u8::from(y == 2 && x > 0 && x < 5)).unwrap();
        let regions = regions_from_label_mask(&label).unwrap();
        let r = cell_match(&label, &label, &regions, 2, 0.70).unwrap();
        assert_eq!((r.cells.len(), r.skipped), (0, 1));
    }

    #[test]
    fn mismatched_sizes_fail() {
        let a = Grid::filled(4, 4, 0u8).unwrap();
        let b = Grid::filled(4, 5, 0u8).unwrap();
        assert!(cell_match(&a, &b, &[], 2, 0.7).is_err());
    }
}
