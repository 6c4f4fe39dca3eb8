//! The fixed-order 124-entry feature vector: 11 shape descriptors followed by
//! 113 texture values in five groups.

pub mod dtcwt;
pub mod glcm;
pub mod glrlm;
pub mod intensity;
pub mod lbp;
pub mod morph;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::imaging::{extract_patch, CellRegion, GrayImage};

pub use dtcwt::dtcwt_features;
pub use glcm::glcm_features;
pub use glrlm::glrlm_features;
pub use intensity::intensity_features;
pub use lbp::lbp_features;
pub use morph::{morphological_features, MorphFeatures};

pub const FEATURE_COUNT: usize = 124;
pub const TEXTURE_COUNT: usize = 113;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FeatureGroup {
    Morphological,
    Intensity,
    Glcm,
    Lbp,
    Glrlm,
    Dtcwt,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 6] = [
        FeatureGroup::Morphological,
        FeatureGroup::Intensity,
        FeatureGroup::Glcm,
        FeatureGroup::Lbp,
        FeatureGroup::Glrlm,
        FeatureGroup::Dtcwt,
    ];

    pub fn size(self) -> usize {
        match self {
            FeatureGroup::Morphological => MorphFeatures::COUNT,
            FeatureGroup::Intensity => intensity::INTENSITY_COUNT,
            FeatureGroup::Glcm => glcm::GLCM_COUNT,
            FeatureGroup::Lbp => lbp::LBP_BINS,
            FeatureGroup::Glrlm => glrlm::GLRLM_COUNT,
            FeatureGroup::Dtcwt => dtcwt::DTCWT_COUNT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Morphological => "morphological",
            FeatureGroup::Intensity => "intensity",
            FeatureGroup::Glcm => "glcm",
            FeatureGroup::Lbp => "lbp",
            FeatureGroup::Glrlm => "glrlm",
            FeatureGroup::Dtcwt => "dtcwt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub group: FeatureGroup,
}

/// Ordered names of the 124 features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureManifest {
    entries: Vec<ManifestEntry>,
}

impl FeatureManifest {
    pub fn new() -> Self {
        let mut entries = Vec::with_capacity(FEATURE_COUNT);
        let mut push = |name: String, group| entries.push(ManifestEntry { name, group });
        use FeatureGroup::*;
        for n in [
            "area",
            "filled_area",
            "convex_area",
            "bbox_area",
            "solidity",
            "eccentricity",
            "extent",
            "minor_axis_length",
            "major_axis_length",
            "axis_ratio",
            "perimeter",
        ] {
            push(n.into(), Morphological);
        }
        for n in ["mean", "std", "skewness", "kurtosis", "entropy", "min", "max", "median"] {
            push(format!("intensity_{n}"), Intensity);
        }
        for b in 0..intensity::INTENSITY_BINS {
            push(format!("intensity_hist_{b}"), Intensity);
        }
        for a in glcm::ANGLES {
            for s in glcm::GLCM_STATS {
                push(format!("glcm_{s}_{a}"), Glcm);
            }
        }
        for b in 0..lbp::LBP_BINS - 1 {
            push(format!("lbp_uniform_{b}"), Lbp);
        }
        push("lbp_nonuniform".into(), Lbp);
        for a in glcm::ANGLES {
            for s in glrlm::GLRLM_STATS {
                push(format!("glrlm_{s}_{a}"), Glrlm);
            }
        }
        for l in 1..=dtcwt::LEVELS {
            for o in dtcwt::ORIENTATIONS {
                push(format!("dtcwt_l{l}_{o}deg"), Dtcwt);
            }
        }
        push("dtcwt_lowpass".into(), Dtcwt);
        debug_assert_eq!(entries.len(), FEATURE_COUNT);
        Self { entries }
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for FeatureManifest {
    fn default() -> Self {
        Self::new()
    }
}

/// One region's features in manifest order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector {
    values: Vec<f64>,
    pub label: Option<usize>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, label: Option<usize>) -> Result<Self> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::RowLength {
                row: 0,
                expected: FEATURE_COUNT,
                got: values.len(),
            });
        }
        Ok(Self { values, label })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureParams {
    /// Margin around the bounding box when cutting the patch.
    pub pad: usize,
    /// Grey levels for the co-occurrence and run-length matrices.
    pub levels: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self { pad: 2, levels: 8 }
    }
}

/// Equal-width binning of [0, 255] into `levels` bins.
pub fn quantize(img: &GrayImage, levels: usize) -> Result<GrayImage> {
    if !(2..=256).contains(&levels) {
        return Err(Error::param("levels", "must be in 2..=256"));
    }
    Ok(img.map(|&v| (v as usize * levels / 256) as u8))
}

/// Computes the full vector for `region` of `img`.
pub fn extract_feature_vector(img: &GrayImage, region: &CellRegion, params: &FeatureParams) -> Result<FeatureVector> {
    let patch = extract_patch(img, region, params.pad)?;
    let (p, m) = (&patch.image, &patch.mask);
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    values.extend_from_slice(&morphological_features(region)?.to_array());
    values.extend_from_slice(&intensity_features(p, m)?);
    values.extend_from_slice(&glcm_features(p, m, params.levels)?);
    values.extend_from_slice(&lbp_features(p, m)?);
    values.extend_from_slice(&glrlm_features(p, m, params.levels)?);
    values.extend_from_slice(&dtcwt_features(p, m)?);
    FeatureVector::new(values, None)
}
