//! Pixel grids and the segmentation front end: grayscale conversion,
//! illumination normalisation, Otsu thresholding, morphological refinement
//! and connected-component labelling.

mod components;
mod morphology;
mod normalize;
mod threshold;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use components::{connected_components, regions_from_map, CcParams, Connectivity};
pub use morphology::{close, dilate, disk_offsets, erode, morph_refine, open};
pub use normalize::{default_background_window, normalize_illumination, to_grayscale};
pub use threshold::{otsu_level, otsu_threshold, Polarity};

/// Row-major 2-D grid of pixels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit intensity image.
pub type GrayImage = Grid<u8>;
/// Foreground flags.
pub type BinaryMask = Grid<bool>;
/// Region identity per pixel, `0` is background.
pub type RegionMap = Grid<u32>;
/// 24-bit colour image.
pub type RgbImage = Grid<[u8; 3]>;

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        Ok(Self {
            width,
            height,
            data: vec![value; width * height],
        })
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height {
            return Err(Error::BufferLength {
                width,
                height,
                got: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        let i = self.index(x, y);
        self.data[i] = value;
    }

    /// Signed lookup, `None` outside the grid.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> Option<&T> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(self.get(x as usize, y as usize))
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_dims<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: other.dims(),
            });
        }
        Ok(())
    }
}

impl BinaryMask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundingBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn of_pixels(pixels: &[(usize, usize)]) -> Option<Self> {
        let (&(x0, y0), rest) = pixels.split_first()?;
        let mut b = BoundingBox {
            min_x: x0,
            min_y: y0,
            max_x: x0,
            max_y: y0,
        };
        for &(x, y) in rest {
            b.min_x = b.min_x.min(x);
            b.min_y = b.min_y.min(y);
            b.max_x = b.max_x.max(x);
            b.max_y = b.max_y.max(y);
        }
        Some(b)
    }
}

/// One connected foreground component.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellRegion {
    pub id: u32,
    /// `(x, y)` coordinates in raster order.
    pub pixels: Vec<(usize, usize)>,
    pub bbox: BoundingBox,
    pub centroid: (f64, f64),
    /// Region pixels 8-adjacent to a pixel outside the region (or outside the image).
    pub border_pixels: Vec<(usize, usize)>,
}

impl CellRegion {
    /// Builds a region from an arbitrary non-empty pixel list. Pixels are
    /// sorted into raster order and deduplicated.
    pub fn from_pixels(id: u32, mut pixels: Vec<(usize, usize)>) -> Result<Self> {
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let bbox = BoundingBox::of_pixels(&pixels).ok_or(Error::EmptyRegion)?;
        let n = pixels.len() as f64;
        let (sx, sy) = pixels
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
        let local = local_mask(&pixels, &bbox, 1);
        let border_pixels = pixels
            .iter()
            .copied()
            .filter(|&(x, y)| {
                let lx = (x - bbox.min_x + 1) as isize;
                let ly = (y - bbox.min_y + 1) as isize;
                NEIGHBORS_8
                    .iter()
                    .any(|&(dx, dy)| !*local.get_signed(lx + dx, ly + dy).unwrap_or(&false))
            })
            .collect();
        Ok(Self {
            id,
            pixels,
            bbox,
            centroid: (sx / n, sy / n),
            border_pixels,
        })
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Region mask over its bounding box grown by `margin` on every side.
    pub fn local_mask(&self, margin: usize) -> BinaryMask {
        local_mask(&self.pixels, &self.bbox, margin)
    }

    /// Copy of the region moved by `(dx, dy)`; panics if it would leave the
    /// non-negative quadrant.
    pub fn translated(&self, dx: isize, dy: isize) -> Self {
        let shift = |(x, y): (usize, usize)| ((x as isize + dx) as usize, (y as isize + dy) as usize);
        Self {
            id: self.id,
            pixels: self.pixels.iter().copied().map(shift).collect(),
            bbox: BoundingBox {
                min_x: (self.bbox.min_x as isize + dx) as usize,
                min_y: (self.bbox.min_y as isize + dy) as usize,
                max_x: (self.bbox.max_x as isize + dx) as usize,
                max_y: (self.bbox.max_y as isize + dy) as usize,
            },
            centroid: (self.centroid.0 + dx as f64, self.centroid.1 + dy as f64),
            border_pixels: self.border_pixels.iter().copied().map(shift).collect(),
        }
    }
}

fn local_mask(pixels: &[(usize, usize)], bbox: &BoundingBox, margin: usize) -> BinaryMask {
    let w = bbox.width() + 2 * margin;
    let h = bbox.height() + 2 * margin;
    let mut m = BinaryMask {
        width: w,
        height: h,
        data: vec![false; w * h],
    };
    for &(x, y) in pixels {
        m.set(x - bbox.min_x + margin, y - bbox.min_y + margin, true);
    }
    m
}

pub(crate) const NEIGHBORS_8: [(isize, isize); 8] =
    [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

pub(crate) const NEIGHBORS_4: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

/// Parameters for [`segment`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentParams {
    /// Box-filter window for illumination normalisation; `None` picks
    /// [`default_background_window`], `Some(0)` skips the step.
    pub background_window: Option<usize>,
    pub polarity: Polarity,
    pub se_radius: usize,
    pub iterations: usize,
    pub cc: CcParams,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            background_window: None,
            polarity: Polarity::Dark,
            se_radius: 2,
            iterations: 2,
            cc: CcParams::default(),
        }
    }
}

/// Output of [`segment`].
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub normalized: GrayImage,
    pub level: u8,
    pub mask: BinaryMask,
    pub map: RegionMap,
    pub regions: Vec<CellRegion>,
}

/// Normalise, threshold, refine and label one grayscale image. An image with
/// a single intensity yields no regions.
pub fn segment(img: &GrayImage, params: &SegmentParams) -> Result<Segmentation> {
    let window = params
        .background_window
        .unwrap_or_else(|| default_background_window(img.width(), img.height()));
    let normalized = if window == 0 {
        img.clone()
    } else {
        normalize_illumination(img, window)?
    };
    let (level, raw) = match otsu_threshold(&normalized, params.polarity) {
        Err(Error::ConstantImage) => {
            log::warn!("image has a single intensity; no regions");
            let (w, h) = img.dims();
            return Ok(Segmentation {
                normalized,
                level: 0,
                mask: Grid::filled(w, h, false)?,
                map: Grid::filled(w, h, 0)?,
                regions: Vec::new(),
            });
        }
        r => r?,
    };
    let mask = morph_refine(&raw, params.se_radius, params.iterations);
    let (map, regions) = connected_components(&mask, &params.cc)?;
    Ok(Segmentation {
        normalized,
        level,
        mask,
        map,
        regions,
    })
}

/// Grayscale patch around a region with the region's footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub image: GrayImage,
    pub mask: BinaryMask,
    /// Top-left corner of the patch in source-image coordinates.
    pub origin: (usize, usize),
}

/// Cuts the region's bounding box grown by `pad` (clamped to the image).
pub fn extract_patch(img: &GrayImage, region: &CellRegion, pad: usize) -> Result<Patch> {
    let b = region.bbox;
    if b.max_x >= img.width() || b.max_y >= img.height() {
        return Err(Error::param("region", "region lies outside the image"));
    }
    let x0 = b.min_x.saturating_sub(pad);
    let y0 = b.min_y.saturating_sub(pad);
    let x1 = (b.max_x + pad).min(img.width() - 1);
    let y1 = (b.max_y + pad).min(img.height() - 1);
    let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
    let image = Grid::from_fn(w, h, |x, y| *img.get(x0 + x, y0 + y))?;
    let mut mask = Grid::filled(w, h, false)?;
    for &(x, y) in &region.pixels {
        mask.set(x - x0, y - y0, true);
    }
    Ok(Patch {
        image,
        mask,
        origin: (x0, y0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: usize, y0: usize, side: usize) -> CellRegion {
        let mut px = Vec::new();
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                px.push((x, y));
            }
        }
        CellRegion::from_pixels(1, px).unwrap()
    }

    #[test]
    fn grid_rejects_bad_buffers() {
        assert_eq!(Grid::<u8>::from_vec(0, 3, vec![]), Err(Error::EmptyImage));
        assert!(matches!(
            Grid::from_vec(2, 2, vec![0u8; 3]),
            Err(Error::BufferLength { .. })
        ));
    }

    #[test]
    fn region_border_is_one_pixel_rind() {
        let r = square(5, 5, 5);
        assert_eq!(r.area(), 25);
        assert_eq!(r.border_pixels.len(), 16);
        assert_eq!(r.centroid, (7.0, 7.0));
        assert_eq!(r.bbox.area(), 25);
    }

    #[test]
    fn patch_without_pad_matches_bbox() {
        let img = Grid::from_fn(20, 20, |x, y| (x + y) as u8).unwrap();
        let r = square(3, 4, 6);
        let p = extract_patch(&img, &r, 0).unwrap();
        assert_eq!(p.image.dims(), (6, 6));
        assert_eq!(p.mask.count(), 36);
        assert_eq!(*p.image.get(0, 0), 7);
    }

    #[test]
    fn patch_at_corner_is_clamped() {
        let img = Grid::filled(10, 10, 9u8).unwrap();
        let r = square(0, 0, 3);
        let p = extract_patch(&img, &r, 4).unwrap();
        assert_eq!(p.origin, (0, 0));
        assert_eq!(p.image.dims(), (7, 7));
        assert_eq!(p.mask.count(), 9);
        let r = square(7, 7, 3);
        let p = extract_patch(&img, &r, 4).unwrap();
        assert_eq!(p.origin, (3, 3));
        assert_eq!(p.image.dims(), (7, 7));
    }

    #[test]
    fn patch_outside_image_is_rejected() {
        let img = Grid::filled(4, 4, 0u8).unwrap();
        assert!(extract_patch(&img, &square(2, 2, 3), 0).is_err());
    }

    #[test]
    fn segment_finds_three_dark_disks() {
        let centres = [(20.0, 20.0), (60.0, 24.0), (40.0, 60.0)];
        let img = Grid::from_fn(80, 80, |x, y| {
            let inside = centres.iter().any(|&(cx, cy): &(f64, f64)| {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                dx * dx + dy * dy <= 81.0
            });
            if inside {
                90u8
            } else {
                210
            }
        })
        .unwrap();
        let seg = segment(&img, &SegmentParams::default()).unwrap();
        assert_eq!(seg.regions.len(), 3);
        assert!(seg.level > 90 && seg.level <= 210);
        for r in &seg.regions {
            assert!((230..=270).contains(&r.area()), "area {}", r.area());
        }
    }

    #[test]
    fn flat_image_has_no_regions() {
        let img = Grid::filled(32, 32, 128u8).unwrap();
        let seg = segment(&img, &SegmentParams::default()).unwrap();
        assert!(seg.regions.is_empty());
        assert_eq!(seg.mask.count(), 0);
    }
}
