use alloc::vec::Vec;

use super::BinaryMask;

/// Offsets `(dx, dy)` of a digital disk with `dx² + dy² <= r²`.
pub fn disk_offsets(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

// Out-of-image positions are ignored by both operators, which keeps them
// adjoint: opening stays anti-extensive and closing extensive at the edges.

pub fn erode(mask: &BinaryMask, se: &[(isize, isize)]) -> BinaryMask {
    let mut out = mask.clone();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let keep = se
                .iter()
                .all(|&(dx, dy)| *mask.get_signed(x as isize + dx, y as isize + dy).unwrap_or(&true));
            out.set(x, y, keep);
        }
    }
    out
}

pub fn dilate(mask: &BinaryMask, se: &[(isize, isize)]) -> BinaryMask {
    let mut out = mask.clone();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let hit = se
                .iter()
                .any(|&(dx, dy)| *mask.get_signed(x as isize - dx, y as isize - dy).unwrap_or(&false));
            out.set(x, y, hit);
        }
    }
    out
}

pub fn open(mask: &BinaryMask, se: &[(isize, isize)]) -> BinaryMask {
    dilate(&erode(mask, se), se)
}

pub fn close(mask: &BinaryMask, se: &[(isize, isize)]) -> BinaryMask {
    erode(&dilate(mask, se), se)
}

/// `iterations` rounds of opening followed by closing with a disk.
pub fn morph_refine(mask: &BinaryMask, se_radius: usize, iterations: usize) -> BinaryMask {
    let se = disk_offsets(se_radius.max(1));
    let mut m = mask.clone();
    for _ in 0..iterations {
        m = close(&open(&m, &se), &se);
    }
    m
}
