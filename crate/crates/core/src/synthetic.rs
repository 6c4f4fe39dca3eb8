//! Programmatic blood-film-like images with known cell classes, used for
//! tests, demos and the directional experiments.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::groundtruth::AnnotationPoint;
use crate::imaging::{GrayImage, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ShapeKind {
    /// Nearly round, uniformly dark.
    Disk,
    /// Elongated, uniformly dark.
    Ellipse,
    /// Round with a paler ring between a dark centre and a dark rim.
    Target,
    /// Two overlapping disks.
    Doublet,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthClass {
    pub class: usize,
    pub shape: ShapeKind,
    /// Relative frequency; normalised over all classes.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthConfig {
    pub cells: usize,
    pub classes: Vec<SynthClass>,
    /// Cells per image row and column.
    pub grid: usize,
    /// Side of the square slot holding one cell.
    pub slot: usize,
    pub radius: (f64, f64),
    /// Axis ratio range of `Ellipse` cells; `Disk` and `Target` cells use
    /// `round_ratio`.
    pub ellipse_ratio: (f64, f64),
    pub round_ratio: (f64, f64),
    /// How far the pale ring of a target cell rises towards the background
    /// (0 = invisible, 1 = background level).
    pub ring_contrast: (f64, f64),
    pub background: f64,
    pub cell: f64,
    /// Standard deviation of per-cell darkness.
    pub cell_jitter: f64,
    /// Standard deviation of per-pixel noise.
    pub noise: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Disks (class 0), ellipses (class 5) and target cells (class 4) at
    /// 80/15/5.
    pub fn three_class(cells: usize, seed: u64) -> Self {
        Self {
            cells,
            classes: vec![
                SynthClass {
                    class: 0,
                    shape: ShapeKind::Disk,
                    weight: 0.80,
                },
                SynthClass {
                    class: 5,
                    shape: ShapeKind::Ellipse,
                    weight: 0.15,
                },
                SynthClass {
                    class: 4,
                    shape: ShapeKind::Target,
                    weight: 0.05,
                },
            ],
            grid: 4,
            slot: 48,
            radius: (9.0, 13.0),
            ellipse_ratio: (1.2, 1.7),
            round_ratio: (1.0, 1.15),
            ring_contrast: (0.1, 0.45),
            background: 205.0,
            cell: 120.0,
            cell_jitter: 10.0,
            noise: 8.0,
            seed,
        }
    }

    /// Single disks (class 0) against merged doublets (class 1), evenly split.
    pub fn singles_and_doublets(cells: usize, seed: u64) -> Self {
        let mut c = Self::three_class(cells, seed);
        c.classes = vec![
            SynthClass {
                class: 0,
                shape: ShapeKind::Disk,
                weight: 0.5,
            },
            SynthClass {
                class: 1,
                shape: ShapeKind::Doublet,
                weight: 0.5,
            },
        ];
        c.slot = 64;
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthImage {
    pub image: GrayImage,
    pub annotations: Vec<AnnotationPoint>,
}

/// Exact per-class counts by largest remainder, in class-list order.
fn class_counts(cfg: &SynthConfig) -> Vec<usize> {
    let total: f64 = cfg.classes.iter().map(|c| c.weight).sum();
    let raw: Vec<f64> = cfg
        .classes
        .iter()
        .map(|c| c.weight / total * cfg.cells as f64)
        .collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        (raw[b] - raw[b].floor())
            .total_cmp(&(raw[a] - raw[a].floor()))
            .then(a.cmp(&b))
    });
    let missing = cfg.cells - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

struct Cell {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    cos: f64,
    sin: f64,
    darkness: f64,
    ring: f64,
    kind: ShapeKind,
}

impl Cell {
    /// Normalised elliptical radius of a point.
    fn rho(&self, x: f64, y: f64, cx: f64, cy: f64) -> f64 {
        let (dx, dy) = (x - cx, y - cy);
        let u = dx * self.cos + dy * self.sin;
        let v = -dx * self.sin + dy * self.cos;
        ((u / self.a).powi(2) + (v / self.b).powi(2)).sqrt()
    }

    /// Cell intensity at a point, or `None` outside the cell.
    fn sample(&self, x: f64, y: f64, background: f64) -> Option<f64> {
        match self.kind {
            ShapeKind::Doublet => {
                let off = 0.7 * self.a;
                let (ox, oy) = (off * self.cos, off * self.sin);
                let inside = self.rho(x, y, self.cx - ox, self.cy - oy) <= 1.0
                    || self.rho(x, y, self.cx + ox, self.cy + oy) <= 1.0;
                inside.then_some(self.darkness)
            }
            _ => {
                let r = self.rho(x, y, self.cx, self.cy);
                if r > 1.0 {
                    None
                } else if self.kind == ShapeKind::Target && (0.3..0.65).contains(&r) {
                    Some(self.darkness + self.ring * (background - self.darkness))
                } else {
                    Some(self.darkness)
                }
            }
        }
    }
}

/// Renders `cfg.cells` cells, `grid x grid` per image, each jittered inside
/// its slot, with one centre annotation per cell. Deterministic in the seed.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<SynthImage>> {
    if cfg.classes.is_empty() || cfg.grid == 0 {
        return Err(Error::param("classes", "need at least one class and a non-empty grid"));
    }
    if cfg.classes.iter().any(|c| c.weight.is_nan() || c.weight < 0.0) || cfg.classes.iter().all(|c| c.weight == 0.0) {
        return Err(Error::param("weight", "weights must be non-negative and not all zero"));
    }
    // widest cell extent across the configured shapes, plus a margin
    let needed = cfg
        .classes
        .iter()
        .map(|c| match c.shape {
            ShapeKind::Ellipse => 2.0 * cfg.radius.1 * cfg.ellipse_ratio.1.sqrt(),
            ShapeKind::Doublet => 3.4 * cfg.radius.1 * cfg.round_ratio.1.sqrt(),
            _ => 2.0 * cfg.radius.1 * cfg.round_ratio.1.sqrt(),
        })
        .fold(0.0, f64::max)
        + 6.0;
    if (cfg.slot as f64) < needed {
        return Err(Error::param("slot", "too small for the largest cell"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = Vec::with_capacity(cfg.cells);
    for (i, n) in class_counts(cfg).into_iter().enumerate() {
        order.extend(core::iter::repeat_n(i, n));
    }
    order.shuffle(&mut rng);

    let pixel_noise = Normal::new(0.0, cfg.noise.max(0.0)).map_err(|_| Error::param("noise", "invalid"))?;
    let cell_noise = Normal::new(0.0, cfg.cell_jitter.max(0.0)).map_err(|_| Error::param("cell_jitter", "invalid"))?;
    let per_image = cfg.grid * cfg.grid;
    let side = cfg.grid * cfg.slot;
    let mut images = Vec::new();
    for chunk in order.chunks(per_image) {
        let mut cells = Vec::with_capacity(chunk.len());
        let mut annotations = Vec::with_capacity(chunk.len());
        for (slot, &ci) in chunk.iter().enumerate() {
            let spec = &cfg.classes[ci];
            let r = rng.random_range(cfg.radius.0..=cfg.radius.1);
            let (lo, hi) = match spec.shape {
                ShapeKind::Ellipse => cfg.ellipse_ratio,
                _ => cfg.round_ratio,
            };
            let ratio = rng.random_range(lo..=hi);
            let theta = rng.random_range(0.0..core::f64::consts::PI);
            let ring = rng.random_range(cfg.ring_contrast.0..=cfg.ring_contrast.1);
            let slack = (cfg.slot as f64 - needed) / 2.0;
            let jx = rng.random_range(-slack..=slack);
            let jy = rng.random_range(-slack..=slack);
            let cx = ((slot % cfg.grid) * cfg.slot) as f64 + cfg.slot as f64 / 2.0 + jx;
            let cy = ((slot / cfg.grid) * cfg.slot) as f64 + cfg.slot as f64 / 2.0 + jy;
            let darkness = (cfg.cell + cell_noise.sample(&mut rng)).clamp(0.0, cfg.background - 20.0);
            cells.push(Cell {
                cx,
                cy,
                a: r * ratio.sqrt(),
                b: r / ratio.sqrt(),
                cos: theta.cos(),
                sin: theta.sin(),
                darkness,
                ring,
                kind: spec.shape,
            });
            annotations.push(AnnotationPoint {
                x: cx.round() as usize,
                y: cy.round() as usize,
                class: spec.class,
            });
        }
        let mut data = vec![0u8; side * side];
        for (i, px) in data.iter_mut().enumerate() {
            let (x, y) = ((i % side) as f64, (i / side) as f64);
            let cell = &cells.get((i / side) / cfg.slot * cfg.grid + (i % side) / cfg.slot);
            // 4x4 supersampling for anti-aliased edges
            let mut acc = 0.0;
            for sy in 0..4 {
                for sx in 0..4 {
                    let (px_, py_) = (x - 0.375 + 0.25 * sx as f64, y - 0.375 + 0.25 * sy as f64);
                    acc += cell
                        .and_then(|c| c.sample(px_, py_, cfg.background))
                        .unwrap_or(cfg.background);
                }
            }
            let v = acc / 16.0 + pixel_noise.sample(&mut rng);
            *px = v.round().clamp(0.0, 255.0) as u8;
        }
        images.push(SynthImage {
            image: Grid::from_vec(side, side, data)?,
            annotations,
        });
    }
    Ok(images)
}
