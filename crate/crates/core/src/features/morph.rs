//! Shape descriptors of a single region.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, CellRegion, NEIGHBORS_4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorphFeatures {
    pub area: f64,
    pub filled_area: f64,
    pub convex_area: f64,
    pub bbox_area: f64,
    pub solidity: f64,
    pub eccentricity: f64,
    pub extent: f64,
    pub minor_axis: f64,
    pub major_axis: f64,
    pub axis_ratio: f64,
    pub perimeter: f64,
}

impl MorphFeatures {
    pub const COUNT: usize = 11;

    pub fn to_array(&self) -> [f64; Self::COUNT] {
        [
            self.area,
            self.filled_area,
            self.convex_area,
            self.bbox_area,
            self.solidity,
            self.eccentricity,
            self.extent,
            self.minor_axis,
            self.major_axis,
            self.axis_ratio,
            self.perimeter,
        ]
    }
}

pub fn morphological_features(region: &CellRegion) -> Result<MorphFeatures> {
    if region.pixels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let local = region.local_mask(1);
    let area = region.area() as f64;
    let filled_area = filled_area(&local) as f64;
    let convex_area = convex_area(&local) as f64;
    let bbox_area = region.bbox.area() as f64;

    let (major, minor) = ellipse_axes(region);
    // a one-pixel-thick region has a zero second moment across it
    let minor = minor.max(1.0);
    let major = major.max(minor);
    let eccentricity = (1.0 - (minor * minor) / (major * major)).max(0.0).sqrt();

    Ok(MorphFeatures {
        area,
        filled_area,
        convex_area,
        bbox_area,
        solidity: area / convex_area,
        eccentricity,
        extent: area / bbox_area,
        minor_axis: minor,
        major_axis: major,
        axis_ratio: major / minor,
        perimeter: perimeter(&local),
    })
}

/// Pixels of the region with every enclosed hole filled. The mask must have a
/// one-pixel empty margin.
fn filled_area(local: &BinaryMask) -> usize {
    let (w, h) = local.dims();
    let mut outside = alloc::vec![false; w * h];
    let mut stack = alloc::vec![0usize];
    outside[0] = true;
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for &(dx, dy) in &NEIGHBORS_4 {
            if let Some(false) = local.get_signed(x + dx, y + dy) {
                let j = (y + dy) as usize * w + (x + dx) as usize;
                if !outside[j] {
                    outside[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    outside.iter().filter(|&&o| !o).count()
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull of integer points, counter-clockwise, collinear points dropped.
pub(crate) fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Pixels whose centres fall inside or on the convex hull of the region's
/// pixel centres.
fn convex_area(local: &BinaryMask) -> usize {
    let (w, h) = local.dims();
    let pts: Vec<(i64, i64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| *local.get(x, y))
        .map(|(x, y)| (x as i64, y as i64))
        .collect();
    let hull = convex_hull(pts);
    let inside = |p: (i64, i64)| match hull.len() {
        0 => false,
        1 => p == hull[0],
        2 => {
            let (a, b) = (hull[0], hull[1]);
            cross(a, b, p) == 0
                && p.0 >= a.0.min(b.0)
                && p.0 <= a.0.max(b.0)
                && p.1 >= a.1.min(b.1)
                && p.1 <= a.1.max(b.1)
        }
        n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0),
    };
    (0..h)
        .flat_map(|y| (0..w).map(move |x| (x as i64, y as i64)))
        .filter(|&p| inside(p))
        .count()
}

/// Major and minor axis lengths of the ellipse with the same normalised
/// second central moments.
fn ellipse_axes(region: &CellRegion) -> (f64, f64) {
    let n = region.area() as f64;
    let (cx, cy) = region.centroid;
    let (mut mu20, mut mu02, mut mu11) = (0.0, 0.0, 0.0);
    for &(x, y) in &region.pixels {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        mu20 += dx * dx;
        mu02 += dy * dy;
        mu11 += dx * dy;
    }
    mu20 /= n;
    mu02 /= n;
    mu11 /= n;
    let half_trace = (mu20 + mu02) / 2.0;
    let disc = (((mu20 - mu02) / 2.0).powi(2) + mu11 * mu11).sqrt();
    let l1 = half_trace + disc;
    let l2 = (half_trace - disc).max(0.0);
    (4.0 * l1.sqrt(), 4.0 * l2.sqrt())
}

/// Clockwise neighbour order starting west, y pointing down.
const MOORE: [(isize, isize); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

/// Length of the outer contour through boundary pixel centres, traced with
/// Moore-neighbour following, stopping when the start pixel is about to be
/// left towards the same neighbour as the first time. Diagonal steps count
/// as √2.
fn perimeter(local: &BinaryMask) -> f64 {
    let w = local.width();
    let Some(start) = local.as_slice().iter().position(|&b| b) else {
        return 0.0;
    };
    let start = ((start % w) as isize, (start / w) as isize);
    let fg = |p: (isize, isize)| *local.get_signed(p.0, p.1).unwrap_or(&false);
    let dir_of = |from: (isize, isize), to: (isize, isize)| {
        MOORE
            .iter()
            .position(|&d| d == (to.0 - from.0, to.1 - from.1))
            .expect("backtrack is always a neighbour")
    };

    // the start is the first raster pixel, so its west neighbour is empty
    let (mut cur, mut back) = (start, (start.0 - 1, start.1));
    let mut second = None;
    let mut length = 0.0;
    let limit = 4 * local.len() + 8;
    for _ in 0..limit {
        let bd = dir_of(cur, back);
        let Some(k) = (1..=8).find(|&k| {
            let d = (bd + k) % 8;
            fg((cur.0 + MOORE[d].0, cur.1 + MOORE[d].1))
        }) else {
            break;
        };
        let d = (bd + k) % 8;
        let next = (cur.0 + MOORE[d].0, cur.1 + MOORE[d].1);
        if cur == start {
            match second {
                None => second = Some(next),
                Some(s) if s == next => break,
                Some(_) => {}
            }
        }
        let prev = (bd + k - 1) % 8;
        back = (cur.0 + MOORE[prev].0, cur.1 + MOORE[prev].1);
        length += if d % 2 == 1 { core::f64::consts::SQRT_2 } else { 1.0 };
        cur = next;
    }
    length
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn region(pixels: Vec<(usize, usize)>) -> CellRegion {
        CellRegion::from_pixels(1, pixels).unwrap()
    }

    fn square(side: usize, hole: Option<(usize, usize, usize)>) -> CellRegion {
        let mut px = vec![];
        for y in 0..side {
            for x in 0..side {
                let in_hole = hole.is_some_and(|(hx, hy, s)| x >= hx && x < hx + s && y >= hy && y < hy + s);
                if !in_hole {
                    px.push((x + 5, y + 5));
                }
            }
        }
        region(px)
    }

    #[test]
    fn filled_square() {
        let f = morphological_features(&square(10, None)).unwrap();
        assert_eq!(f.area, 100.0);
        assert_eq!(f.filled_area, 100.0);
        assert_eq!(f.convex_area, 100.0);
        assert_eq!(f.bbox_area, 100.0);
        assert_eq!(f.extent, 1.0);
        assert_eq!(f.solidity, 1.0);
        assert!((f.perimeter - 36.0).abs() < 1e-12);
        assert!((f.axis_ratio - 1.0).abs() < 1e-12);
        assert!(f.eccentricity.abs() < 1e-6);
    }

    #[test]
    fn holed_square() {
        let f = morphological_features(&square(10, Some((4, 4, 2)))).unwrap();
        assert_eq!(f.area, 96.0);
        assert_eq!(f.filled_area, 100.0);
        assert_eq!(f.convex_area, 100.0);
        assert!((f.solidity - 0.96).abs() < 1e-12);
    }

    #[test]
    fn single_pixel_is_finite() {
        let f = morphological_features(&region(vec![(3, 3)])).unwrap();
        assert_eq!(f.area, 1.0);
        assert_eq!(f.minor_axis, 1.0);
        assert_eq!(f.axis_ratio, 1.0);
        assert_eq!(f.perimeter, 0.0);
        assert!(f.to_array().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn thin_line() {
        let f = morphological_features(&region((0..10).map(|x| (x + 2, 4)).collect())).unwrap();
        assert_eq!(f.convex_area, 10.0);
        assert_eq!(f.minor_axis, 1.0);
        assert!(f.eccentricity < 1.0);
        assert!((f.perimeter - 18.0).abs() < 1e-12);
        let diag = morphological_features(&region((0..6).map(|i| (i + 2, i + 2)).collect())).unwrap();
        assert_eq!(diag.convex_area, 6.0);
        assert!((diag.perimeter - 10.0 * core::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn plus_shape_contour() {
        // 3x3 plus: contour visits the four arms with diagonal steps between
        let f = morphological_features(&region(vec![(4, 3), (3, 4), (4, 4), (5, 4), (4, 5)])).unwrap();
        assert!((f.perimeter - 4.0 * core::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(f.convex_area, 5.0);
    }

    #[test]
    fn rasterised_ellipse_matches_continuous_moments() {
        // continuous ellipse with semi-axes a, b has axis variances a²/4, b²/4,
        // so the equivalent-moment axes are 2a, 2b
        let (a, b) = (20.0f64, 10.0f64);
        let mut px = vec![];
        for y in 0..60 {
            for x in 0..60 {
                let dx = x as f64 - 30.0;
                let dy = y as f64 - 30.0;
                if (dx / a).powi(2) + (dy / b).powi(2) <= 1.0 {
                    px.push((x, y));
                }
            }
        }
        let f = morphological_features(&region(px)).unwrap();
        let ratio = a / b;
        let ecc = (1.0 - (b / a).powi(2)).sqrt();
        assert!((f.axis_ratio - ratio).abs() / ratio < 0.05, "{}", f.axis_ratio);
        assert!((f.eccentricity - ecc).abs() / ecc < 0.05, "{}", f.eccentricity);
        assert!((f.major_axis - 2.0 * a).abs() / (2.0 * a) < 0.05);
        // perimeter of the continuous ellipse (Ramanujan) is ~96.9
        assert!((f.perimeter - 96.88).abs() / 96.88 < 0.05, "{}", f.perimeter);
        assert!(f.area <= f.filled_area && f.filled_area <= f.convex_area && f.convex_area <= f.bbox_area);
    }
}
