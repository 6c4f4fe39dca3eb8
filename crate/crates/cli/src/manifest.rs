//! `run_manifest.json`: config snapshot, checksums and stage timings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::io::sha256_file;

pub const MANIFEST_NAME: &str = "run_manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub config: PipelineConfig,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// Collects what a command read and wrote while it runs.
#[derive(Debug)]
pub struct Run {
    command: String,
    config: PipelineConfig,
    out_dir: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    stages: Vec<Stage>,
    stage_start: Option<(String, Instant)>,
}

impl Run {
    pub fn new(command: &str, config: &PipelineConfig, out_dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
        Ok(Self {
            command: command.into(),
            config: config.clone(),
            out_dir: out_dir.to_path_buf(),
            inputs: vec![],
            outputs: vec![],
            stages: vec![],
            stage_start: None,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Path of an output file inside the run directory, recorded for the
    /// manifest.
    pub fn output(&mut self, name: impl AsRef<Path>) -> PathBuf {
        let p = self.out_dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn stage(&mut self, name: &str) {
        self.end_stage();
        self.stage_start = Some((name.into(), Instant::now()));
    }

    fn end_stage(&mut self) {
        if let Some((name, t)) = self.stage_start.take() {
            self.stages.push(Stage {
                name,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
    }

    /// Writes the manifest; the run fails if it cannot.
    pub fn finish(mut self) -> anyhow::Result<PathBuf> {
        self.end_stage();
        let checksums = |paths: &[PathBuf]| -> anyhow::Result<BTreeMap<String, String>> {
            paths
                .iter()
                .filter(|p| p.is_file())
                .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
                .collect()
        };
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.clone(),
            args: std::env::args().skip(1).collect(),
            config: self.config.clone(),
            inputs: checksums(&self.inputs)?,
            outputs: checksums(&self.outputs)?,
            stages: std::mem::take(&mut self.stages),
        };
        let path = self.out_dir.join(MANIFEST_NAME);
        let mut s = serde_json::to_string_pretty(&manifest)?;
        s.push('\n');
        std::fs::write(&path, s).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
