//! Glue from one image plus its annotations to labelled feature rows.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::Result;
use crate::features::{extract_feature_vector, FeatureParams, FeatureVector};
use crate::groundtruth::{assign_region_labels, AnnotationPoint, RegionLabel};
use crate::imaging::{segment, CellRegion, GrayImage, SegmentParams, Segmentation};
use crate::resampling::LabeledDataset;
use crate::NUM_CLASSES;

/// One segmented region with its label and features.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub region: CellRegion,
    pub label: RegionLabel,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageCells {
    pub segmentation: Segmentation,
    pub cells: Vec<CellRecord>,
    pub orphans: Vec<AnnotationPoint>,
}

/// Segments `img`, labels regions from `annotations` and extracts features
/// for every region.
pub fn process_image(
    img: &GrayImage,
    annotations: &[AnnotationPoint],
    seg: &SegmentParams,
    feat: &FeatureParams,
) -> Result<ImageCells> {
    let segmentation = segment(img, seg)?;
    let assignment = assign_region_labels(&segmentation.map, annotations, &BTreeSet::new())?;
    let mut cells = Vec::with_capacity(segmentation.regions.len());
    for region in &segmentation.regions {
        let label = assignment.labels[&region.id];
        let features = extract_feature_vector(&segmentation.normalized, region, feat)?;
        cells.push(CellRecord {
            region: region.clone(),
            label,
            features,
        });
    }
    Ok(ImageCells {
        segmentation,
        cells,
        orphans: assignment.orphans,
    })
}

/// Collects the singly-labelled cells into an eleven-class dataset; overlapping
/// and unknown regions are left out.
pub fn labeled_dataset<'a>(cells: impl IntoIterator<Item = &'a CellRecord>) -> Result<LabeledDataset> {
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    for c in cells {
        if let RegionLabel::Class(k) = c.label {
            rows.push(c.features.values().to_vec());
            labels.push(k);
        }
    }
    LabeledDataset::new(rows, labels, NUM_CLASSES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SynthConfig};

    #[test]
    fn synthetic_cells_are_found_and_labelled() {
        let images = generate(&SynthConfig::three_class(48, 3)).unwrap();
        let mut all = Vec::new();
        for im in &images {
            let out = process_image(
                &im.image,
                &im.annotations,
                &SegmentParams::default(),
                &FeatureParams::default(),
            )
            .unwrap();
            assert!(out.orphans.is_empty());
            all.extend(out.cells);
        }
        let ds = labeled_dataset(&all).unwrap();
        assert_eq!(ds.len(), 48);
        let counts = ds.counts();
        assert_eq!(counts[0] + counts[4] + counts[5], 48);
        assert!(ds.rows().iter().flatten().all(|v| v.is_finite()));
    }
}
