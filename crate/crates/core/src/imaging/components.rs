use alloc::vec;
use alloc::vec::Vec;

use super::{BinaryMask, CellRegion, Grid, RegionMap, NEIGHBORS_4, NEIGHBORS_8};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &NEIGHBORS_4,
            Connectivity::Eight => &NEIGHBORS_8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CcParams {
    pub connectivity: Connectivity,
    /// Components with fewer pixels are dropped as noise.
    pub min_area: usize,
    /// Drop components that touch the image edge.
    pub discard_border: bool,
}

impl Default for CcParams {
    fn default() -> Self {
        Self {
            connectivity: Connectivity::Eight,
            min_area: 64,
            discard_border: true,
        }
    }
}

/// Labels maximal connected foreground sets.
///
/// Surviving regions get ids `1..=R` in raster order of their first pixel.
pub fn connected_components(mask: &BinaryMask, params: &CcParams) -> Result<(RegionMap, Vec<CellRegion>)> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut map: RegionMap = Grid::filled(w, h, 0u32)?;
    let mut regions = Vec::new();
    let mut stack = Vec::new();

    for start in 0..w * h {
        if seen[start] || !mask.as_slice()[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        let mut touches_edge = false;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            touches_edge |= x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            for &(dx, dy) in params.connectivity.offsets() {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if let Some(true) = mask.get_signed(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if pixels.len() < params.min_area || (params.discard_border && touches_edge) {
            continue;
        }
        let id = regions.len() as u32 + 1;
        for &(x, y) in &pixels {
            map.set(x, y, id);
        }
        regions.push(CellRegion::from_pixels(id, pixels)?);
    }
    Ok((map, regions))
}

/// Recovers the regions encoded in a region map (ids need not be contiguous;
/// output is sorted by id).
pub fn regions_from_map(map: &RegionMap) -> Result<Vec<CellRegion>> {
    let mut buckets: alloc::collections::BTreeMap<u32, Vec<(usize, usize)>> = Default::default();
    for y in 0..map.height() {
        for x in 0..map.width() {
            let id = *map.get(x, y);
            if id != 0 {
                buckets.entry(id).or_default().push((x, y));
            }
        }
    }
    buckets
        .into_iter()
        .map(|(id, px)| CellRegion::from_pixels(id, px))
        .collect()
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn keep_all(connectivity: Connectivity) -> CcParams {
        CcParams {
            connectivity,
            min_area: 1,
            discard_border: false,
        }
    }

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        Grid::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#').unwrap()
    }

    #[test]
    fn two_squares() {
        let m = mask_from(&[".........", ".###.###.", ".###.###.", ".###.###.", "........."]);
        let (map, regions) = connected_components(&m, &keep_all(Connectivity::Eight)).unwrap();
        assert_eq!(regions.len(), 2);
        assert!(regions.iter().all(|r| r.area() == 9));
        assert_eq!(*map.get(1, 1), 1);
        assert_eq!(*map.get(5, 1), 2);
    }

    #[test]
    fn diagonal_touch_depends_on_connectivity() {
        let m = mask_from(&["....", ".#..", "..#.", "...."]);
        let (_, r8) = connected_components(&m, &keep_all(Connectivity::Eight)).unwrap();
        let (_, r4) = connected_components(&m, &keep_all(Connectivity::Four)).unwrap();
        assert_eq!(r8.len(), 1);
        assert_eq!(r4.len(), 2);
    }

    #[test]
    fn border_and_small_regions_are_dropped() {
        let m = mask_from(&[
            "##.......",
            "##..###..",
            "....###..",
            "....###..",
            ".#.......",
            ".........",
        ]);
        let params = CcParams {
            connectivity: Connectivity::Eight,
            min_area: 2,
            discard_border: true,
        };
        let (map, regions) = connected_components(&m, &params).unwrap();
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].id, 1);
        assert_eq!(*map.get(0, 0), 0);
        assert_eq!(*map.get(1, 4), 0);
        assert_eq!(map.as_slice().iter().filter(|&&v| v != 0).count(), 9);
    }

    /// Recursive flood fill; returns per-pixel component index (raster order
    /// of first pixel), `usize::MAX` for background.
    fn flood_oracle(m: &BinaryMask, conn: Connectivity) -> Vec<usize> {
        fn fill(m: &BinaryMask, lab: &mut [usize], x: isize, y: isize, id: usize, conn: Connectivity) {
            let Some(&true) = m.get_signed(x, y) else { return };
            let i = y as usize * m.width() + x as usize;
            if lab[i] != usize::MAX {
                return;
            }
            lab[i] = id;
            for &(dx, dy) in conn.offsets() {
                fill(m, lab, x + dx, y + dy, id, conn);
            }
        }
        let mut lab = vec![usize::MAX; m.len()];
        let mut next = 0;
        for y in 0..m.height() {
            for x in 0..m.width() {
                let i = y * m.width() + x;
                if m.as_slice()[i] && lab[i] == usize::MAX {
                    fill(m, &mut lab, x as isize, y as isize, next, conn);
                    next += 1;
                }
            }
        }
        lab
    }

    proptest! {
        #[test]
        fn matches_flood_fill(bits in proptest::collection::vec(any::<bool>(), 256), four in any::<bool>()) {
            let conn = if four { Connectivity::Four } else { Connectivity::Eight };
            let m = Grid::from_vec(16, 16, bits).unwrap();
            let (map, regions) = connected_components(&m, &keep_all(conn)).unwrap();
            let oracle = flood_oracle(&m, conn);
            for i in 0..256 {
                let expected = if oracle[i] == usize::MAX { 0 } else { oracle[i] as u32 + 1 };
                prop_assert_eq!(map.as_slice()[i], expected);
            }
            // ids contiguous, areas sum to foreground
            let total: usize = regions.iter().map(|r| r.area()).sum();
            prop_assert_eq!(total, m.count());
            for (k, r) in regions.iter().enumerate() {
                prop_assert_eq!(r.id as usize, k + 1);
                prop_assert!(r.border_pixels.iter().all(|p| r.pixels.contains(p)));
            }
        }

        #[test]
        fn translation_invariant(bits in proptest::collection::vec(any::<bool>(), 100), dx in 0usize..6, dy in 0usize..6) {
            let small = Grid::from_vec(10, 10, bits).unwrap();
            let params = CcParams { connectivity: Connectivity::Eight, min_area: 2, discard_border: true };
            let place = |ox: usize, oy: usize| {
                Grid::from_fn(24, 24, |x, y| {
                    x >= ox && y >= oy && x < ox + 10 && y < oy + 10 && *small.get(x - ox, y - oy)
                }).unwrap()
            };
            let (_, a) = connected_components(&place(2, 2), &params).unwrap();
            let (_, b) = connected_components(&place(2 + dx, 2 + dy), &params).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (ra, rb) in a.iter().zip(&b) {
                let moved = ra.translated(dx as isize, dy as isize);
                prop_assert_eq!(&moved.pixels, &rb.pixels);
                prop_assert_eq!(moved.bbox, rb.bbox);
                prop_assert_eq!(&moved.border_pixels, &rb.border_pixels);
                prop_assert!((moved.centroid.0 - rb.centroid.0).abs() < 1e-9);
                prop_assert!((moved.centroid.1 - rb.centroid.1).abs() < 1e-9);
            }
        }
    }
}
