//! TOML pipeline configuration. Every key is optional except `seed`, which
//! may also come from `--seed` or `HEMO_SEED`. Command-line flags win over
//! file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hemo_core::classifier::{Kernel, SmoParams, SvmParams, WeightScheme};
use hemo_core::evaluation::{CvConfig, Task, Weighting};
use hemo_core::features::{FeatureParams, FEATURE_COUNT};
use hemo_core::groundtruth::ClassScheme;
use hemo_core::imaging::{CcParams, Connectivity, Polarity, SegmentParams};
use hemo_core::resampling::{ResampleParams, SmoteParams, SmoteVariant, SMALL_CLASS_THRESHOLD};

use crate::error::{CliError, CliResult, UsageExt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub scheme: SchemeName,
    pub paths: Paths,
    pub imaging: ImagingConfig,
    pub features: FeatureConfig,
    pub resampling: ResamplingConfig,
    pub weights: WeightsConfig,
    pub svm: SvmConfig,
    pub cv: CvSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub images: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    #[default]
    Eleven,
    Five,
    Nine,
}

impl From<SchemeName> for ClassScheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Eleven => ClassScheme::Eleven,
            SchemeName::Five => ClassScheme::Five,
            SchemeName::Nine => ClassScheme::Nine,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImagingConfig {
    /// 0 disables illumination normalisation; absent picks a quarter of the
    /// shorter side.
    pub background_window: Option<usize>,
    pub polarity: Polarity,
    pub se_radius: usize,
    pub iterations: usize,
    pub connectivity: u8,
    pub min_area: usize,
    pub discard_border: bool,
}

impl Default for ImagingConfig {
    fn default() -> Self {
        let d = SegmentParams::default();
        Self {
            background_window: d.background_window,
            polarity: d.polarity,
            se_radius: d.se_radius,
            iterations: d.iterations,
            connectivity: 8,
            min_area: d.cc.min_area,
            discard_border: d.cc.discard_border,
        }
    }
}

impl ImagingConfig {
    pub fn params(&self) -> CliResult<SegmentParams> {
        let connectivity = match self.connectivity {
            4 => Connectivity::Four,
            8 => Connectivity::Eight,
            n => return Err(CliError::usage(format!("imaging.connectivity must be 4 or 8, got {n}"))),
        };
        if self.se_radius == 0 {
            return Err(CliError::usage("imaging.se_radius must be >= 1"));
        }
        Ok(SegmentParams {
            background_window: self.background_window,
            polarity: self.polarity,
            se_radius: self.se_radius,
            iterations: self.iterations,
            cc: CcParams {
                connectivity,
                min_area: self.min_area,
                discard_border: self.discard_border,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub pad: usize,
    pub levels: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        let d = FeatureParams::default();
        Self {
            pad: d.pad,
            levels: d.levels,
        }
    }
}

impl FeatureConfig {
    pub fn params(&self) -> CliResult<FeatureParams> {
        if !(2..=256).contains(&self.levels) {
            return Err(CliError::usage("features.levels must be in 2..=256"));
        }
        Ok(FeatureParams {
            pad: self.pad,
            levels: self.levels,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResamplingConfig {
    /// `none`, `smote1`, `smote2`, `smote3-2` or `smote3-3`.
    pub variant: String,
    pub k_neighbors: usize,
    pub k_far: usize,
    pub small_class_threshold: usize,
}

impl Default for ResamplingConfig {
    fn default() -> Self {
        let d = ResampleParams::default();
        Self {
            variant: "none".into(),
            k_neighbors: d.smote.k,
            k_far: d.k_far,
            small_class_threshold: SMALL_CLASS_THRESHOLD,
        }
    }
}

pub fn parse_variant(s: &str) -> CliResult<Option<SmoteVariant>> {
    if s == "none" {
        return Ok(None);
    }
    SmoteVariant::parse(s).map(Some).ok_or_else(|| {
        let names: Vec<_> = SmoteVariant::ALL.iter().map(|v| v.name()).collect();
        CliError::usage(format!(
            "unknown resampling variant `{s}`; expected none, {}",
            names.join(", ")
        ))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    /// `none`, `1:2`, `2:3` or `distribution`.
    pub scheme: String,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self { scheme: "none".into() }
    }
}

pub fn parse_weighting(s: &str) -> CliResult<Weighting> {
    match s {
        "none" => Ok(Weighting::None),
        "distribution" => Ok(Weighting::Distribution),
        other => WeightScheme::parse(other).map(Weighting::Designed).ok_or_else(|| {
            CliError::usage(format!(
                "unknown weight scheme `{other}`; expected none, 1:2, 2:3 or distribution"
            ))
        }),
    }
}

pub fn weighting_name(w: Weighting) -> String {
    match w {
        Weighting::None => "none".into(),
        Weighting::Distribution => "distribution".into(),
        Weighting::Designed(s) => s.name().into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    /// RBF width; absent means 1 / feature count.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub cache_mb: usize,
    /// Optional grid searched inside each training fold.
    pub grid_c: Vec<f64>,
    pub grid_gamma: Vec<f64>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        let smo = SmoParams::default();
        Self {
            c: 1.0,
            gamma: None,
            tol: smo.tol,
            max_iter: smo.max_iter,
            cache_mb: smo.cache_mb,
            grid_c: vec![],
            grid_gamma: vec![],
        }
    }
}

impl SvmConfig {
    pub fn params(&self) -> CliResult<SvmParams> {
        let gamma = self.gamma.unwrap_or(1.0 / FEATURE_COUNT as f64);
        let p = SvmParams {
            c: self.c,
            kernel: Kernel::Rbf { gamma },
            smo: SmoParams {
                tol: self.tol,
                max_iter: self.max_iter,
                cache_mb: self.cache_mb,
            },
        };
        if !(p.c > 0.0 && p.c.is_finite()) {
            return Err(CliError::usage("svm.c must be positive"));
        }
        p.kernel.validate().usage()?;
        Ok(p)
    }

    pub fn grid(&self) -> CliResult<Option<(Vec<f64>, Vec<f64>)>> {
        match (self.grid_c.is_empty(), self.grid_gamma.is_empty()) {
            (true, true) => Ok(None),
            (false, false) => Ok(Some((self.grid_c.clone(), self.grid_gamma.clone()))),
            _ => Err(CliError::usage("svm.grid_c and svm.grid_gamma must be given together")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub k: usize,
    /// `binary` or `multiclass`.
    pub task: String,
}

impl Default for CvSection {
    fn default() -> Self {
        Self {
            k: 5,
            task: "binary".into(),
        }
    }
}

pub fn parse_task(s: &str) -> CliResult<Task> {
    match s {
        "binary" => Ok(Task::Binary),
        "multiclass" => Ok(Task::Multiclass),
        other => Err(CliError::usage(format!(
            "unknown task `{other}`; expected binary or multiclass"
        ))),
    }
}

pub fn task_name(t: Task) -> &'static str {
    match t {
        Task::Binary => "binary",
        Task::Multiclass => "multiclass",
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::usage("a seed is required: set `seed` in the config, --seed or HEMO_SEED"))
    }

    pub fn resample_params(&self, seed: u64) -> ResampleParams {
        ResampleParams {
            smote: SmoteParams {
                k: self.resampling.k_neighbors,
                seed,
            },
            k_far: self.resampling.k_far,
        }
    }

    /// Cross-validation settings assembled from every section.
    pub fn cv_config(&self) -> CliResult<CvConfig> {
        let seed = self.require_seed()?;
        if self.cv.k < 2 {
            return Err(CliError::usage("cv.k must be >= 2"));
        }
        Ok(CvConfig {
            k: self.cv.k,
            seed,
            task: parse_task(&self.cv.task)?,
            resampling: parse_variant(&self.resampling.variant)?,
            small_class_threshold: self.resampling.small_class_threshold,
            resample: self.resample_params(seed),
            weighting: parse_weighting(&self.weights.scheme)?,
            svm: self.svm.params()?,
            grid: self.svm.grid()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: PipelineConfig = toml::from_str("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert!(c.require_seed().is_err());
    }

    #[test]
    fn full_file_parses() {
        let c: PipelineConfig = toml::from_str(
            r#"
            seed = 9
            scheme = "five"
            [imaging]
            polarity = "bright"
            connectivity = 4
            [resampling]
            variant = "smote3-3"
            [weights]
            scheme = "2:3"
            [svm]
            c = 10.0
            gamma = 0.5
            [cv]
            k = 3
            task = "binary"
            "#,
        )
        .unwrap();
        let cv = c.cv_config().unwrap();
        assert_eq!(cv.k, 3);
        assert_eq!(cv.resampling, Some(SmoteVariant::Smote3_3));
        assert_eq!(cv.weighting, Weighting::Designed(WeightScheme::TwoThree));
        assert_eq!(cv.svm.kernel, Kernel::Rbf { gamma: 0.5 });
        assert_eq!(c.imaging.params().unwrap().cc.connectivity, Connectivity::Four);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sed = 1").is_err());
        assert!(toml::from_str::<PipelineConfig>("[svm]\nC = 1.0").is_err());
    }

    #[test]
    fn bad_names_are_usage_errors() {
        assert_eq!(parse_variant("smote4").unwrap_err().exit_code(), 1);
        assert_eq!(parse_weighting("3:1").unwrap_err().exit_code(), 1);
        assert_eq!(parse_task("ternary").unwrap_err().exit_code(), 1);
    }
}
