use std::path::PathBuf;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use crate::config::SchemeName;

#[derive(Debug, Parser)]
#[command(
    name = "hemo",
    version,
    about = "Red blood cell segmentation, features and imbalance-aware SVM experiments"
)]
pub struct Cli {
    /// TOML pipeline configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed for every random step.
    #[arg(long, global = true, env = "HEMO_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for per-image and per-fold stages.
    #[arg(long, global = true, env = "HEMO_JOBS")]
    pub jobs: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Disks, ellipses and target cells at 80/15/5 (classes 0, 5 and 4).
    ThreeClass,
    /// Single disks (class 0) and merged doublets (class 1), half each.
    Doublets,
}

#[derive(Debug, Clone, clap::Args, Default)]
pub struct SvmArgs {
    /// Soft-margin penalty.
    #[arg(long)]
    pub c: Option<f64>,
    /// RBF kernel width.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic smear dataset with centre-point annotations.
    Synth {
        #[arg(long, value_enum, default_value = "three-class")]
        preset: Preset,
        #[arg(long, default_value_t = 2000)]
        cells: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold and label cell regions in every PNG of a directory.
    Segment {
        #[arg(long)]
        images: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assign annotation classes to regions and write label masks.
    Label {
        #[arg(long)]
        images: Option<PathBuf>,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long, value_enum)]
        scheme: Option<SchemeName>,
        /// Two-class separator model flagging overlapping regions.
        #[arg(long)]
        separator: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the 124-feature table for every region.
    Features {
        #[arg(long)]
        images: Option<PathBuf>,
        /// Directory of `<image stem>.csv` annotation files.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and cross-validate the single/overlapping separator.
    Separate {
        #[arg(long)]
        features: PathBuf,
        /// Column holding the overlap label (non-zero = overlapping).
        #[arg(long, default_value = "label")]
        label_column: String,
        #[command(flatten)]
        svm: SvmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a SMOTE variant to a feature table.
    Resample {
        #[arg(long)]
        features: PathBuf,
        /// none, smote1, smote2, smote3-2 or smote3-3.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a classifier on a whole feature table.
    Train {
        #[arg(long)]
        features: PathBuf,
        /// binary or multiclass.
        #[arg(long)]
        task: Option<String>,
        #[arg(long)]
        variant: Option<String>,
        /// none, 1:2, 2:3 or distribution.
        #[arg(long)]
        weights: Option<String>,
        #[command(flatten)]
        svm: SvmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the rows of a feature table.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics and confusion matrix for a predictions file.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cell-based scoring of predicted label masks against ground truth.
    EvalMasks {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        predicted: PathBuf,
        #[arg(long, value_enum)]
        scheme: Option<SchemeName>,
        /// Fraction of interior pixels that must carry the true class.
        #[arg(long, default_value_t = hemo_core::evaluation::DEFAULT_MATCH_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate a named strategy.
    Experiment {
        /// Recipe name; see --list.
        #[arg(long, required_unless_present = "list")]
        recipe: Option<String>,
        /// Print the recipe registry and exit.
        #[arg(long)]
        list: bool,
        #[arg(long, required_unless_present = "list")]
        features: Option<PathBuf>,
        #[arg(long)]
        folds: Option<usize>,
        #[command(flatten)]
        svm: SvmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare finished experiments side by side.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        experiments: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Segment { .. } => "segment",
            Command::Label { .. } => "label",
            Command::Features { .. } => "features",
            Command::Separate { .. } => "separate",
            Command::Resample { .. } => "resample",
            Command::Train { .. } => "train",
            Command::Predict { .. } => "predict",
            Command::Evaluate { .. } => "evaluate",
            Command::EvalMasks { .. } => "eval-masks",
            Command::Experiment { .. } => "experiment",
            Command::Report { .. } => "report",
        }
    }
}
