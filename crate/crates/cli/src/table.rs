//! The feature table: one row per cell region, `image,region,label,synthetic`
//! followed by the 124 feature columns in manifest order.
//!
//! `label` is an eleven-class id, `overlapping`, or empty for unknown.

use std::path::Path;

use anyhow::{bail, Context};

use hemo_core::features::{FeatureManifest, FEATURE_COUNT};
use hemo_core::groundtruth::RegionLabel;
use hemo_core::resampling::LabeledDataset;
use hemo_core::NUM_CLASSES;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub image: String,
    pub region: u32,
    pub label: RegionLabel,
    pub synthetic: bool,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
}

pub fn label_text(l: RegionLabel) -> String {
    match l {
        RegionLabel::Class(c) => c.to_string(),
        RegionLabel::Overlapping => "overlapping".into(),
        RegionLabel::Unknown => String::new(),
    }
}

pub fn parse_label(s: &str) -> anyhow::Result<RegionLabel> {
    match s.trim() {
        "" | "unknown" => Ok(RegionLabel::Unknown),
        "overlapping" => Ok(RegionLabel::Overlapping),
        t => {
            let c: usize = t.parse().with_context(|| format!("bad label `{t}`"))?;
            if c >= NUM_CLASSES {
                bail!("label {c} out of range 0..{NUM_CLASSES}");
            }
            Ok(RegionLabel::Class(c))
        }
    }
}

impl FeatureTable {
    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let manifest = FeatureManifest::new();
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut header = vec!["image", "region", "label", "synthetic"];
        header.extend(manifest.names());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.image.clone(),
                r.region.to_string(),
                label_text(r.label),
                u8::from(r.synthetic).to_string(),
            ];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table, taking labels from `label_column`. A missing label or
    /// feature column is a usage error.
    pub fn read(path: &Path, label_column: &str) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path)
            .map_err(|e| CliError::usage(format!("cannot read feature table {}: {e}", path.display())))?;
        let headers = r.headers().map_err(anyhow::Error::from)?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let label_at = col(label_column)
            .ok_or_else(|| CliError::usage(format!("{} has no `{label_column}` column", path.display())))?;
        let (image_at, region_at, synth_at) = (col("image"), col("region"), col("synthetic"));
        let manifest = FeatureManifest::new();
        let feature_at = manifest
            .names()
            .map(|n| col(n).ok_or_else(|| CliError::usage(format!("{} has no `{n}` column", path.display()))))
            .collect::<CliResult<Vec<usize>>>()?;
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(anyhow::Error::from)?;
            let ctx = || format!("{} data row {}", path.display(), line + 1);
            let field = |i: usize| rec.get(i).unwrap_or("");
            let values = feature_at
                .iter()
                .map(|&i| field(i).trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .with_context(ctx)?;
            rows.push(FeatureRow {
                image: image_at.map(field).unwrap_or("").to_string(),
                region: match region_at {
                    Some(i) => field(i).trim().parse().with_context(ctx)?,
                    None => line as u32 + 1,
                },
                label: parse_label(field(label_at)).with_context(ctx)?,
                synthetic: synth_at.is_some_and(|i| field(i).trim() == "1"),
                values,
            });
        }
        Ok(Self { rows })
    }

    /// Rows with a single-class label, plus the index of each in `rows`.
    pub fn labeled(&self) -> CliResult<(LabeledDataset, Vec<usize>)> {
        let mut keep = Vec::new();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (i, r) in self.rows.iter().enumerate() {
            if let RegionLabel::Class(c) = r.label {
                debug_assert_eq!(r.values.len(), FEATURE_COUNT);
                keep.push(i);
                xs.push(r.values.clone());
                ys.push(c);
            }
        }
        let skipped = self.rows.len() - keep.len();
        if skipped > 0 {
            log::info!("{skipped} rows without a single-class label left out");
        }
        if keep.is_empty() {
            return Err(CliError::data("feature table holds no labelled rows"));
        }
        Ok((LabeledDataset::new(xs, ys, NUM_CLASSES)?, keep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(label: RegionLabel, base: f64) -> FeatureRow {
        FeatureRow {
            image: "img_0".into(),
            region: 3,
            label,
            synthetic: false,
            values: (0..FEATURE_COUNT).map(|i| base + i as f64 / 7.0).collect(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let t = FeatureTable {
            rows: vec![
                row(RegionLabel::Class(4), 0.1),
                row(RegionLabel::Overlapping, -3.0),
                row(RegionLabel::Unknown, 1e-300),
            ],
        };
        t.write(&p).unwrap();
        assert_eq!(FeatureTable::read(&p, "label").unwrap(), t);
        let (ds, keep) = t.labeled().unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(keep, vec![0]);
    }

    #[test]
    fn missing_label_column_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        FeatureTable {
            rows: vec![row(RegionLabel::Class(0), 0.0)],
        }
        .write(&p)
        .unwrap();
        let e = FeatureTable::read(&p, "overlap").unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("overlap"));
    }

    #[test]
    fn labels_parse() {
        assert_eq!(parse_label("10").unwrap(), RegionLabel::Class(10));
        assert!(parse_label("11").is_err());
        assert_eq!(parse_label("").unwrap(), RegionLabel::Unknown);
    }
}
