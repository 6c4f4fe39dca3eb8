//! Grey-level run-length statistics.

use alloc::vec;

use super::glcm::DIRECTIONS;
use super::quantize;
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, GrayImage};

pub const GLRLM_STATS: [&str; 11] = [
    "sre", "lre", "gln", "rln", "rp", "lgre", "hgre", "srlge", "srhge", "lrlge", "lrhge",
];
pub const GLRLM_COUNT: usize = 44;

/// Run-length matrix along one direction: `counts[level][length - 1]`.
/// Runs stop at the mask boundary.
pub fn run_length_matrix(
    q: &GrayImage,
    mask: &BinaryMask,
    levels: usize,
    (dx, dy): (isize, isize),
) -> alloc::vec::Vec<alloc::vec::Vec<u64>> {
    let max_len = q.width().max(q.height());
    let mut counts = vec![vec![0u64; max_len]; levels];
    let same = |x: isize, y: isize, level: u8| {
        matches!(mask.get_signed(x, y), Some(true)) && *q.get(x as usize, y as usize) == level
    };
    for y in 0..q.height() as isize {
        for x in 0..q.width() as isize {
            if !*mask.get(x as usize, y as usize) {
                continue;
            }
            let level = *q.get(x as usize, y as usize);
            if same(x - dx, y - dy, level) {
                continue;
            }
            let mut len = 1;
            while same(x + dx * len as isize, y + dy * len as isize, level) {
                len += 1;
            }
            counts[level as usize][len - 1] += 1;
        }
    }
    counts
}

/// Eleven statistics per direction (0°, 45°, 90°, 135°), grouped by
/// direction. Grey levels are 1-based in the weighting terms.
pub fn glrlm_features(patch: &GrayImage, mask: &BinaryMask, levels: usize) -> Result<[f64; GLRLM_COUNT]> {
    patch.same_dims(mask)?;
    let n_pixels = mask.count();
    if n_pixels == 0 {
        return Err(Error::EmptyRegion);
    }
    let q = quantize(patch, levels)?;
    let mut out = [0.0; GLRLM_COUNT];
    for (d, &dir) in DIRECTIONS.iter().enumerate() {
        let m = run_length_matrix(&q, mask, levels, dir);
        let mut s = [0.0f64; 11];
        let mut runs = 0.0;
        let mut by_length = vec![0.0f64; m[0].len()];
        for (gi, row) in m.iter().enumerate() {
            let i2 = ((gi + 1) * (gi + 1)) as f64;
            let mut level_runs = 0.0;
            for (li, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let c = c as f64;
                let j2 = ((li + 1) * (li + 1)) as f64;
                runs += c;
                level_runs += c;
                by_length[li] += c;
                s[0] += c / j2;
                s[1] += c * j2;
                s[5] += c / i2;
                s[6] += c * i2;
                s[7] += c / (i2 * j2);
                s[8] += c * i2 / j2;
                s[9] += c * j2 / i2;
                s[10] += c * i2 * j2;
            }
            s[2] += level_runs * level_runs;
        }
        s[3] = by_length.iter().map(|c| c * c).sum();
        for (k, v) in s.iter_mut().enumerate() {
            if k != 4 {
                *v /= runs;
            }
        }
        s[4] = runs / n_pixels as f64;
        out[d * 11..d * 11 + 11].copy_from_slice(&s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Grid;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn full(w: usize, h: usize) -> BinaryMask {
        Grid::filled(w, h, true).unwrap()
    }

    #[test]
    fn constant_row() {
        let p = Grid::filled(8, 1, 100u8).unwrap();
        let f = glrlm_features(&p, &full(8, 1), 8).unwrap();
        // 0°: a single run of length 8 at level 3 (1-based 4)
        assert_eq!(f[0], 1.0 / 64.0);
        assert_eq!(f[1], 64.0);
        assert_eq!(f[4], 1.0 / 8.0);
        assert_eq!(f[2], 1.0);
        assert_eq!(f[3], 1.0);
        // 90°: eight unit runs
        assert_eq!(f[22], 1.0);
        assert_eq!(f[22 + 4], 1.0);
    }

    #[test]
    fn longest_run_maximises_lre() {
        let mask = full(8, 1);
        let lre = |vals: [u8; 8]| {
            let p = Grid::from_vec(8, 1, vals.to_vec()).unwrap();
            glrlm_features(&p, &mask, 8).unwrap()[1]
        };
        let constant = lre([100; 8]);
        for vals in [
            [0, 0, 0, 0, 0, 0, 0, 255],
            [0, 255, 0, 255, 0, 255, 0, 255],
            [0, 0, 0, 0, 255, 255, 255, 255],
        ] {
            assert!(lre(vals) < constant);
        }
    }

    #[test]
    fn checkerboard_unit_runs() {
        let p = Grid::from_fn(6, 6, |x, y| if (x + y) % 2 == 0 { 0u8 } else { 255 }).unwrap();
        let f = glrlm_features(&p, &full(6, 6), 8).unwrap();
        for d in [0, 2] {
            assert_eq!(f[d * 11], 1.0);
            assert_eq!(f[d * 11 + 4], 1.0);
        }
    }

    #[test]
    fn empty_mask_errors() {
        let p = Grid::filled(3, 3, 1u8).unwrap();
        let m = Grid::filled(3, 3, false).unwrap();
        assert_eq!(glrlm_features(&p, &m, 8), Err(Error::EmptyRegion));
    }

    /// Collects runs by walking each scan line of the direction explicitly.
    fn scanline_runs(q: &[Vec<u8>], dir: (isize, isize)) -> Vec<(u8, usize)> {
        let h = q.len() as isize;
        let w = q[0].len() as isize;
        let mut starts = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let (px, py) = (x - dir.0, y - dir.1);
                if px < 0 || py < 0 || px >= w || py >= h {
                    starts.push((x, y));
                }
            }
        }
        let mut runs = Vec::new();
        for (sx, sy) in starts {
            let mut line = Vec::new();
            let (mut x, mut y) = (sx, sy);
            while x >= 0 && y >= 0 && x < w && y < h {
                line.push(q[y as usize][x as usize]);
                x += dir.0;
                y += dir.1;
            }
            let mut i = 0;
            while i < line.len() {
                let mut j = i;
                while j < line.len() && line[j] == line[i] {
                    j += 1;
                }
                runs.push((line[i], j - i));
                i = j;
            }
        }
        runs
    }

    proptest! {
        #[test]
        fn matches_scanline_oracle(w in 1usize..9, h in 1usize..9, vals in proptest::collection::vec(0u8..4, 64)) {
            let rows: Vec<Vec<u8>> = (0..h).map(|y| (0..w).map(|x| vals[y * 8 + x]).collect()).collect();
            let p = Grid::from_fn(w, h, |x, y| rows[y][x] * 64).unwrap();
            let q = quantize(&p, 8).unwrap();
            let qrows: Vec<Vec<u8>> = (0..h).map(|y| (0..w).map(|x| *q.get(x, y)).collect()).collect();
            for &dir in &DIRECTIONS {
                let m = run_length_matrix(&q, &full(w, h), 8, dir);
                let mut expected = vec![vec![0u64; w.max(h)]; 8];
                for (lvl, len) in scanline_runs(&qrows, dir) {
                    expected[lvl as usize][len - 1] += 1;
                }
                prop_assert_eq!(m, expected);
            }
            let f = glrlm_features(&p, &full(w, h), 8).unwrap();
            prop_assert!(f.iter().all(|v| v.is_finite()));
        }
    }
}
