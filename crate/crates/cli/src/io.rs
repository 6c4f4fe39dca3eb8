//! PNG and small CSV formats.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use image::{ImageBuffer, Luma};
use sha2::{Digest, Sha256};

use hemo_core::groundtruth::AnnotationPoint;
use hemo_core::imaging::{to_grayscale, BinaryMask, GrayImage, Grid, RegionMap, RgbImage};

/// Reads an 8-bit grayscale or colour PNG; colour is converted with BT.601
/// luma.
pub fn read_gray(path: &Path) -> anyhow::Result<GrayImage> {
    let img = image::open(path).with_context(|| format!("cannot read image {}", path.display()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if img.color().has_color() {
        let rgb = img.to_rgb8();
        let px: Vec<[u8; 3]> = rgb.pixels().map(|p| p.0).collect();
        let rgb: RgbImage = Grid::from_vec(w, h, px)?;
        Ok(to_grayscale(&rgb))
    } else {
        Ok(Grid::from_vec(w, h, img.to_luma8().into_raw())?)
    }
}

/// Reads an 8-bit single-channel PNG without any conversion.
pub fn read_u8_mask(path: &Path) -> anyhow::Result<Grid<u8>> {
    let img = image::open(path).with_context(|| format!("cannot read mask {}", path.display()))?;
    if img.color() != image::ColorType::L8 {
        bail!("{} is not an 8-bit single-channel PNG", path.display());
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(Grid::from_vec(w, h, img.into_luma8().into_raw())?)
}

pub fn write_u8(path: &Path, g: &Grid<u8>) -> anyhow::Result<()> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(g.width() as u32, g.height() as u32, g.as_slice().to_vec())
            .ok_or_else(|| anyhow!("image buffer size mismatch"))?;
    buf.save(path)
        .with_context(|| format!("cannot write {}", path.display()))
}

/// Foreground 255, background 0.
pub fn write_mask(path: &Path, m: &BinaryMask) -> anyhow::Result<()> {
    write_u8(path, &m.map(|&b| if b { 255 } else { 0 }))
}

/// 16-bit region ids, 0 = background.
pub fn write_region_map(path: &Path, map: &RegionMap) -> anyhow::Result<()> {
    let data = map
        .as_slice()
        .iter()
        .map(|&id| u16::try_from(id).map_err(|_| anyhow!("region id {id} does not fit 16 bits")))
        .collect::<anyhow::Result<Vec<u16>>>()?;
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(map.width() as u32, map.height() as u32, data)
        .ok_or_else(|| anyhow!("image buffer size mismatch"))?;
    buf.save(path)
        .with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_region_map(path: &Path) -> anyhow::Result<RegionMap> {
    let img = image::open(path).with_context(|| format!("cannot read region map {}", path.display()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.into_luma16().into_raw().into_iter().map(u32::from).collect();
    Ok(Grid::from_vec(w, h, data)?)
}

#[derive(Debug, serde::Deserialize, serde::Serialize)]
struct AnnotationRow {
    x: usize,
    y: usize,
    class: usize,
}

/// `x,y,class` with a header row.
pub fn read_annotations(path: &Path) -> anyhow::Result<Vec<AnnotationPoint>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    r.deserialize::<AnnotationRow>()
        .map(|row| {
            let row = row.with_context(|| format!("bad annotation row in {}", path.display()))?;
            Ok(AnnotationPoint {
                x: row.x,
                y: row.y,
                class: row.class,
            })
        })
        .collect()
}

pub fn write_annotations(path: &Path, points: &[AnnotationPoint]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in points {
        w.serialize(AnnotationRow {
            x: p.x,
            y: p.y,
            class: p.class,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// PNG files directly inside `dir`, sorted by name.
pub fn list_pngs(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")))
        .collect();
    out.sort();
    Ok(out)
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
