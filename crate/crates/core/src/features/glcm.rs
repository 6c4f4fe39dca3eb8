//! Grey-level co-occurrence statistics at distance 1.

use alloc::vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::quantize;
use crate::error::Result;
use crate::imaging::{BinaryMask, GrayImage};

/// Pixel offsets for 0°, 45°, 90° and 135° (y grows downwards).
pub const DIRECTIONS: [(isize, isize); 4] = [(1, 0), (1, -1), (0, -1), (-1, -1)];
pub const ANGLES: [u32; 4] = [0, 45, 90, 135];
pub const GLCM_STATS: [&str; 6] = [
    "contrast",
    "correlation",
    "energy",
    "homogeneity",
    "entropy",
    "dissimilarity",
];
pub const GLCM_COUNT: usize = 24;

/// Six statistics per direction, grouped by direction in [`ANGLES`] order.
///
/// Only pairs with both pixels inside the mask are counted; the matrix is
/// symmetrised and normalised. Energy is the angular second moment. A
/// direction with fewer than two pairs yields zeros.
pub fn glcm_features(patch: &GrayImage, mask: &BinaryMask, levels: usize) -> Result<[f64; GLCM_COUNT]> {
    patch.same_dims(mask)?;
    let q = quantize(patch, levels)?;
    let mut out = [0.0; GLCM_COUNT];
    for (d, &(dx, dy)) in DIRECTIONS.iter().enumerate() {
        let mut m = vec![0.0f64; levels * levels];
        let mut pairs = 0usize;
        for y in 0..patch.height() {
            for x in 0..patch.width() {
                if !*mask.get(x, y) {
                    continue;
                }
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if let Some(true) = mask.get_signed(nx, ny) {
                    let i = *q.get(x, y) as usize;
                    let j = *q.get(nx as usize, ny as usize) as usize;
                    m[i * levels + j] += 1.0;
                    m[j * levels + i] += 1.0;
                    pairs += 1;
                }
            }
        }
        if pairs < 2 {
            continue;
        }
        let total = 2.0 * pairs as f64;
        m.iter_mut().for_each(|v| *v /= total);
        out[d * 6..d * 6 + 6].copy_from_slice(&stats(&m, levels));
    }
    Ok(out)
}

fn stats(p: &[f64], levels: usize) -> [f64; 6] {
    let (mut mu, mut contrast, mut energy, mut homog, mut entropy, mut dissim) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..levels {
        for j in 0..levels {
            let v = p[i * levels + j];
            if v == 0.0 {
                continue;
            }
            let d = i as f64 - j as f64;
            mu += i as f64 * v;
            contrast += d * d * v;
            energy += v * v;
            homog += v / (1.0 + d * d);
            entropy -= v * v.log2();
            dissim += d.abs() * v;
        }
    }
    // symmetric matrix: row and column marginals coincide
    let (mut var, mut cov) = (0.0, 0.0);
    for i in 0..levels {
        for j in 0..levels {
            let v = p[i * levels + j];
            var += (i as f64 - mu).powi(2) * v;
            cov += (i as f64 - mu) * (j as f64 - mu) * v;
        }
    }
    let correlation = if var > 1e-15 { (cov / var).clamp(-1.0, 1.0) } else { 1.0 };
    [contrast, correlation, energy, homog, entropy.max(0.0), dissim]
}
