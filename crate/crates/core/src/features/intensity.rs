//! First-order statistics of the masked intensities.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, GrayImage};

pub const INTENSITY_BINS: usize = 8;
pub const INTENSITY_COUNT: usize = 8 + INTENSITY_BINS;

/// mean, std, skewness, excess kurtosis, entropy (bits, 8 bins), min, max,
/// median, then the 8-bin normalised histogram over [0, 256).
pub fn intensity_features(patch: &GrayImage, mask: &BinaryMask) -> Result<[f64; INTENSITY_COUNT]> {
    patch.same_dims(mask)?;
    let mut values: Vec<u8> = patch
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .collect();
    if values.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in &values {
        let d = v as f64 - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let std = m2.sqrt();
    let (skew, kurt) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    let mut hist = [0.0; INTENSITY_BINS];
    for &v in &values {
        hist[v as usize * INTENSITY_BINS / 256] += 1.0;
    }
    hist.iter_mut().for_each(|h| *h /= n);
    let entropy = -hist.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>();

    values.sort_unstable();
    let k = values.len();
    let median = if k % 2 == 1 {
        values[k / 2] as f64
    } else {
        (values[k / 2 - 1] as f64 + values[k / 2] as f64) / 2.0
    };

    let mut out = [0.0; INTENSITY_COUNT];
    out[..8].copy_from_slice(&[
        mean,
        std,
        skew,
        kurt,
        entropy.max(0.0),
        values[0] as f64,
        values[k - 1] as f64,
        median,
    ]);
    out[8..].copy_from_slice(&hist);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Grid;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn constant_patch() {
        let p = Grid::filled(5, 4, 77u8).unwrap();
        let m = Grid::filled(5, 4, true).unwrap();
        let f = intensity_features(&p, &m).unwrap();
        assert_eq!(f[0], 77.0);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[4], 0.0);
        assert_eq!((f[5], f[6], f[7]), (77.0, 77.0, 77.0));
        assert_eq!(f[8 + 2], 1.0);
        assert_eq!(f[8..].iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn two_value_patch() {
        let p = Grid::from_fn(4, 4, |x, _| if x < 2 { 0u8 } else { 255 }).unwrap();
        let m = Grid::filled(4, 4, true).unwrap();
        let f = intensity_features(&p, &m).unwrap();
        assert_eq!(f[0], 127.5);
        assert_eq!(f[8], 0.5);
        assert_eq!(f[15], 0.5);
        assert!((f[4] - 1.0).abs() < 1e-15);
        assert_eq!(f[7], 127.5);
        assert!(f[2].abs() < 1e-12);
        assert!((f[3] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn mask_excludes_background() {
        let p = Grid::from_fn(4, 1, |x, _| [10u8, 20, 200, 250][x]).unwrap();
        let m = Grid::from_vec(4, 1, vec![true, true, false, false]).unwrap();
        let f = intensity_features(&p, &m).unwrap();
        assert_eq!(f[0], 15.0);
        assert_eq!(f[6], 20.0);
        let empty = Grid::filled(4, 1, false).unwrap();
        assert_eq!(intensity_features(&p, &empty), Err(Error::EmptyRegion));
    }

    proptest! {
        #[test]
        fn moments_match_naive_two_pass(vals in proptest::collection::vec(any::<u8>(), 2..200)) {
            let n = vals.len();
            let p = Grid::from_vec(n, 1, vals.clone()).unwrap();
            let m = Grid::filled(n, 1, true).unwrap();
            let f = intensity_features(&p, &m).unwrap();
            // two-pass oracle over a separately sorted copy
            let xs: Vec<f64> = vals.iter().map(|&v| v as f64).collect();
            let mean: f64 = xs.iter().sum::<f64>() / n as f64;
            let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
            prop_assert!(rel(f[0], mean));
            prop_assert!(rel(f[1], var.sqrt()));
            if var > 0.0 {
                let skew = xs.iter().map(|x| ((x - mean) / var.sqrt()).powi(3)).sum::<f64>() / n as f64;
                let kurt = xs.iter().map(|x| ((x - mean) / var.sqrt()).powi(4)).sum::<f64>() / n as f64 - 3.0;
                prop_assert!(rel(f[2], skew));
                prop_assert!(rel(f[3], kurt));
            }
            prop_assert!((f[8..].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
