//! Uniform local binary patterns (8 neighbours, radius 1).

use crate::error::Result;
use crate::imaging::{BinaryMask, GrayImage};

pub const LBP_BINS: usize = 10;

/// Circular neighbour order: E, NE, N, NW, W, SW, S, SE.
const RING: [(isize, isize); 8] = [(1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1)];

/// Normalised histogram: bins 0..=8 count uniform patterns by their number of
/// set bits, bin 9 collects the non-uniform ones. A bit is set when the
/// neighbour is strictly brighter than the centre. Only masked pixels whose
/// eight neighbours are all masked contribute.
pub fn lbp_features(patch: &GrayImage, mask: &BinaryMask) -> Result<[f64; LBP_BINS]> {
    patch.same_dims(mask)?;
    let mut hist = [0.0; LBP_BINS];
    let mut n = 0usize;
    for y in 0..patch.height() {
        for x in 0..patch.width() {
            if !*mask.get(x, y) {
                continue;
            }
            let full = RING
                .iter()
                .all(|&(dx, dy)| *mask.get_signed(x as isize + dx, y as isize + dy).unwrap_or(&false));
            if !full {
                continue;
            }
            let c = *patch.get(x, y);
            let mut bits = [false; 8];
            for (b, &(dx, dy)) in bits.iter_mut().zip(&RING) {
                *b = *patch.get((x as isize + dx) as usize, (y as isize + dy) as usize) > c;
            }
            let transitions = (0..8).filter(|&i| bits[i] != bits[(i + 1) % 8]).count();
            let bin = if transitions <= 2 {
                bits.iter().filter(|&&b| b).count()
            } else {
                LBP_BINS - 1
            };
            hist[bin] += 1.0;
            n += 1;
        }
    }
    if n > 0 {
        hist.iter_mut().for_each(|h| *h /= n as f64);
    }
    Ok(hist)
}
