//! JSON envelope for trained classifiers.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use hemo_core::classifier::MulticlassSvmModel;

pub const MODEL_FORMAT: &str = "hemo-svm";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    /// `binary` or `multiclass`.
    pub task: String,
    pub feature_names: Vec<String>,
    pub model: MulticlassSvmModel,
}

impl ModelFile {
    pub fn new(task: &str, feature_names: Vec<String>, model: MulticlassSvmModel) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            task: task.into(),
            feature_names,
            model,
        }
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).with_context(|| format!("{} is not a model file", path.display()))?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            bail!(
                "{}: unsupported model format {} v{} (expected {MODEL_FORMAT} v{MODEL_VERSION})",
                path.display(),
                m.format,
                m.version
            );
        }
        Ok(m)
    }
}
