use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{GrayImage, Grid, RgbImage};
use crate::error::{Error, Result};

/// ITU-R BT.601 luma, rounded half up and computed in integers.
pub fn to_grayscale(image: &RgbImage) -> GrayImage {
    image.map(|&[r, g, b]| {
        let luma = (299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000;
        luma.min(255) as u8
    })
}

/// A quarter of the shorter side, rounded up to odd and at least 3.
pub fn default_background_window(width: usize, height: usize) -> usize {
    let w = width.min(height).div_ceil(4).max(3);
    if w % 2 == 0 {
        w + 1
    } else {
        w
    }
}

/// Flattens uneven illumination by dividing by a box-filtered background
/// estimate and rescaling to the mean background level.
///
/// The box mean at the image edge uses only the in-bounds part of the
/// window. Background values are floored at 1.
pub fn normalize_illumination(img: &GrayImage, window: usize) -> Result<GrayImage> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::param("background_window", "must be odd and >= 3"));
    }
    let (w, h) = img.dims();
    if window > w && window > h {
        return Err(Error::param("background_window", "larger than both image dimensions"));
    }
    let background = box_mean(img, window);
    let global = background.iter().sum::<f64>() / background.len() as f64;
    let out = img
        .as_slice()
        .iter()
        .zip(&background)
        .map(|(&v, &bg)| (v as f64 / bg * global).round().clamp(0.0, 255.0) as u8)
        .collect();
    Grid::from_vec(w, h, out)
}

fn box_mean(img: &GrayImage, window: usize) -> Vec<f64> {
    let (w, h) = img.dims();
    let half = window / 2;
    // summed-area table with a zero row/column in front
    let mut sat = vec![0u64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        for x in 0..w {
            row += *img.get(x, y) as u64;
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
        }
    }
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let y0 = y.saturating_sub(half);
        let y1 = (y + half + 1).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(half);
            let x1 = (x + half + 1).min(w);
            let s = sat[y1 * (w + 1) + x1] + sat[y0 * (w + 1) + x0] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0];
            let n = ((x1 - x0) * (y1 - y0)) as f64;
            out.push((s as f64 / n).max(1.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(pixels: &[[u8; 3]]) -> RgbImage {
        Grid::from_vec(pixels.len(), 1, pixels.to_vec()).unwrap()
    }

    #[test]
    fn luma_of_reference_colours() {
        let g = to_grayscale(&rgb(&[[255, 255, 255], [255, 0, 0], [0, 0, 0]]));
        assert_eq!(g.as_slice(), &[255, 76, 0]);
    }

    #[test]
    fn equal_channels_are_unchanged() {
        let px: Vec<[u8; 3]> = (0..=255u8).map(|v| [v, v, v]).collect();
        let g = to_grayscale(&rgb(&px));
        assert!(g.as_slice().iter().copied().eq(0..=255u8));
    }

    #[test]
    fn default_window_is_odd() {
        assert_eq!(default_background_window(64, 48), 13);
        assert_eq!(default_background_window(64, 64), 17);
        assert_eq!(default_background_window(5, 5), 3);
    }

    #[test]
    fn uniform_image_is_identity() {
        let img = Grid::filled(30, 20, 137u8).unwrap();
        assert_eq!(normalize_illumination(&img, 7).unwrap(), img);
    }

    #[test]
    fn window_validation() {
        let img = Grid::filled(10, 8, 1u8).unwrap();
        assert!(normalize_illumination(&img, 4).is_err());
        assert!(normalize_illumination(&img, 1).is_err());
        assert!(normalize_illumination(&img, 11).is_err());
        assert!(normalize_illumination(&img, 9).is_ok());
    }

    #[test]
    fn zero_background_is_floored() {
        let img = Grid::filled(9, 9, 0u8).unwrap();
        let out = normalize_illumination(&img, 3).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0));
        let mut img = Grid::filled(9, 9, 0u8).unwrap();
        img.set(4, 4, 9);
        let out = normalize_illumination(&img, 3).unwrap();
        // background at the corner is 0 -> floored to 1, so v/1*global stays finite
        assert_eq!(*out.get(0, 0), 0);
        assert_eq!(*out.get(4, 4), 9);
    }

    /// Direct per-pixel window average, no summed-area table.
    fn naive_box_mean(img: &GrayImage, window: usize) -> Vec<f64> {
        let half = (window / 2) as isize;
        let mut out = Vec::new();
        for y in 0..img.height() as isize {
            for x in 0..img.width() as isize {
                let (mut s, mut n) = (0.0, 0.0);
                for dy in -half..=half {
                    for dx in -half..=half {
                        if let Some(&v) = img.get_signed(x + dx, y + dy) {
                            s += v as f64;
                            n += 1.0;
                        }
                    }
                }
                out.push((s / n).max(1.0));
            }
        }
        out
    }

    #[test]
    fn step_illumination_is_flattened() {
        let img = Grid::from_fn(128, 64, |x, _| if x < 64 { 100u8 } else { 200 }).unwrap();
        let out = normalize_illumination(&img, 15).unwrap();

        let bg = naive_box_mean(&img, 15);
        let global = bg.iter().sum::<f64>() / bg.len() as f64;
        for (i, (&v, &b)) in img.as_slice().iter().zip(&bg).enumerate() {
            let expected = (v as f64 / b * global).round().clamp(0.0, 255.0) as u8;
            assert_eq!(out.as_slice()[i], expected);
        }

        let mean_half = |left: bool| {
            let mut s = 0.0;
            let mut n = 0.0;
            for y in 0..64 {
                for x in 0..128 {
                    if (x < 64) == left {
                        s += *out.get(x, y) as f64;
                        n += 1.0;
                    }
                }
            }
            s / n
        };
        assert!((mean_half(true) - mean_half(false)).abs() <= 10.0);
        assert_eq!(out.dims(), img.dims());
    }
}
