use core::cmp::Ordering;

use super::{BinaryMask, GrayImage};
use crate::error::{Error, Result};

/// Which side of the Otsu level is foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Polarity {
    /// Cells darker than background: foreground is `v < level`.
    #[default]
    Dark,
    /// Cells brighter than background: foreground is `v >= level`.
    Bright,
}

/// Otsu level over a 256-bin histogram.
///
/// A level `t` splits intensities into `v < t` and `v >= t`; candidates are
/// `1..=255`. The between-class variance is compared exactly in integer
/// arithmetic, so equal scores tie and the lowest level wins.
pub fn otsu_level(hist: &[u64; 256]) -> Result<u8> {
    let n: u128 = hist.iter().map(|&c| c as u128).sum();
    let s: u128 = hist.iter().enumerate().map(|(v, &c)| v as u128 * c as u128).sum();
    let distinct = hist.iter().filter(|&&c| c > 0).count();
    if distinct < 2 {
        return Err(Error::ConstantImage);
    }

    // sigma_b^2(t) = (s0*N - S*n0)^2 / (N^2 * n0 * n1); N^2 is common.
    let mut best: Option<(u8, [u64; 4], u128)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for t in 1..256usize {
        n0 += hist[t - 1] as u128;
        s0 += (t as u128 - 1) * hist[t - 1] as u128;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let a = (s0 * n).abs_diff(s * n0);
        let num = mul_wide(a, a);
        let den = n0 * n1;
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => cmp_ratio(&num, den, bn, *bd) == Ordering::Greater,
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    best.map(|(t, _, _)| t).ok_or(Error::ConstantImage)
}

/// Computes the Otsu level of `img` and the resulting foreground mask.
pub fn otsu_threshold(img: &GrayImage, polarity: Polarity) -> Result<(u8, BinaryMask)> {
    let mut hist = [0u64; 256];
    for &v in img.as_slice() {
        hist[v as usize] += 1;
    }
    let level = otsu_level(&hist)?;
    let mask = img.map(|&v| match polarity {
        Polarity::Dark => v < level,
        Polarity::Bright => v >= level,
    });
    Ok((level, mask))
}

/// Compares `num_a / den_a` with `num_b / den_b` by cross-multiplication.
fn cmp_ratio(num_a: &[u64; 4], den_a: u128, num_b: &[u64; 4], den_b: u128) -> Ordering {
    let lhs = mul_limbs(num_a, den_b);
    let rhs = mul_limbs(num_b, den_a);
    lhs.iter().rev().cmp(rhs.iter().rev())
}

/// Full 256-bit product of two `u128`, little-endian 64-bit limbs.
fn mul_wide(a: u128, b: u128) -> [u64; 4] {
    let a = [a as u64, (a >> 64) as u64];
    let b = [b as u64, (b >> 64) as u64];
    let mut out = [0u64; 4];
    for (i, &ai) in a.iter().enumerate() {
        let mut carry = 0u128;
        for (j, &bj) in b.iter().enumerate() {
            let cur = out[i + j] as u128 + ai as u128 * bj as u128 + carry;
            out[i + j] = cur as u64;
            carry = cur >> 64;
        }
        out[i + 2] = carry as u64;
    }
    out
}

/// 256-bit times 128-bit, truncated to 320 bits (never overflows here).
fn mul_limbs(x: &[u64; 4], m: u128) -> [u64; 6] {
    let m = [m as u64, (m >> 64) as u64];
    let mut out = [0u64; 6];
    for (j, &mj) in m.iter().enumerate() {
        let mut carry = 0u128;
        for (i, &xi) in x.iter().enumerate() {
            let cur = out[i + j] as u128 + xi as u128 * mj as u128 + carry;
            out[i + j] = cur as u64;
            carry = cur >> 64;
        }
        out[j + 4] = (out[j + 4] as u128 + carry) as u64;
    }
    out
}
