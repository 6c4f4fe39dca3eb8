//! Named resampling and weighting strategies.

use hemo_core::classifier::WeightScheme;
use hemo_core::evaluation::{Task, Weighting};
use hemo_core::resampling::SmoteVariant;

/// Two-class SVM figures reported for a strategy on the original (private)
/// dataset, in percent. Kept for documentation; never asserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub sensitivity: f64,
    pub specificity: f64,
    pub f2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    pub task: Task,
    pub variant: Option<SmoteVariant>,
    pub weighting: Weighting,
    pub reference: Option<Reference>,
}

/// Reported sensitivity of the overlap separator on the original dataset.
pub const SEPARATOR_REFERENCE_SENSITIVITY: f64 = 0.906;

const fn r(sensitivity: f64, specificity: f64, f2: f64) -> Option<Reference> {
    Some(Reference {
        sensitivity,
        specificity,
        f2,
    })
}

use SmoteVariant::*;
use Task::*;
use WeightScheme::*;

const fn recipe(
    name: &'static str,
    description: &'static str,
    task: Task,
    variant: Option<SmoteVariant>,
    weighting: Weighting,
    reference: Option<Reference>,
) -> Recipe {
    Recipe {
        name,
        description,
        task,
        variant,
        weighting,
        reference,
    }
}

pub const RECIPES: &[Recipe] = &[
    recipe(
        "baseline-binary",
        "normal vs abnormal, no resampling or weights",
        Binary,
        None,
        Weighting::None,
        r(93.6, 79.4, 93.1),
    ),
    recipe(
        "baseline-multiclass",
        "eleven classes, no resampling or weights",
        Multiclass,
        None,
        Weighting::None,
        None,
    ),
    recipe(
        "smote1-binary",
        "SMOTE1, two-class",
        Binary,
        Some(Smote1),
        Weighting::None,
        None,
    ),
    recipe(
        "smote2-binary",
        "SMOTE2 (NearMiss-2 on the majority), two-class",
        Binary,
        Some(Smote2),
        Weighting::None,
        None,
    ),
    recipe(
        "smote3-2-binary",
        "SMOTE3-2, two-class",
        Binary,
        Some(Smote3_2),
        Weighting::None,
        None,
    ),
    recipe(
        "smote3-3-binary",
        "SMOTE3-3, two-class",
        Binary,
        Some(Smote3_3),
        Weighting::None,
        None,
    ),
    recipe(
        "smote1-multiclass",
        "SMOTE1, eleven classes",
        Multiclass,
        Some(Smote1),
        Weighting::None,
        None,
    ),
    recipe(
        "smote2-multiclass",
        "SMOTE2, eleven classes",
        Multiclass,
        Some(Smote2),
        Weighting::None,
        None,
    ),
    recipe(
        "smote3-2-multiclass",
        "SMOTE3-2, eleven classes",
        Multiclass,
        Some(Smote3_2),
        Weighting::None,
        None,
    ),
    recipe(
        "smote3-3-multiclass",
        "SMOTE3-3, eleven classes",
        Multiclass,
        Some(Smote3_3),
        Weighting::None,
        None,
    ),
    recipe(
        "csl-1-2-binary",
        "designed weights normal:abnormal = 1:2",
        Binary,
        None,
        Weighting::Designed(OneTwo),
        None,
    ),
    recipe(
        "csl-2-3-binary",
        "designed weights normal:abnormal = 2:3",
        Binary,
        None,
        Weighting::Designed(TwoThree),
        None,
    ),
    recipe(
        "csl-multiclass",
        "distribution weights, eleven classes",
        Multiclass,
        None,
        Weighting::Distribution,
        None,
    ),
    recipe(
        "smote1-csl-1-2-binary",
        "SMOTE1 + CSL(1:2)",
        Binary,
        Some(Smote1),
        Weighting::Designed(OneTwo),
        r(98.2, 55.7, 94.8),
    ),
    recipe(
        "smote1-csl-2-3-binary",
        "SMOTE1 + CSL(2:3)",
        Binary,
        Some(Smote1),
        Weighting::Designed(TwoThree),
        r(97.2, 65.3, 94.8),
    ),
    recipe(
        "smote3-3-csl-1-2-binary",
        "SMOTE3-3 + CSL(1:2)",
        Binary,
        Some(Smote3_3),
        Weighting::Designed(OneTwo),
        r(98.0, 59.1, 94.9),
    ),
    recipe(
        "smote3-3-csl-2-3-binary",
        "SMOTE3-3 + CSL(2:3)",
        Binary,
        Some(Smote3_3),
        Weighting::Designed(TwoThree),
        r(96.9, 68.3, 94.8),
    ),
    recipe(
        "smote1-csl-multiclass",
        "SMOTE1 + distribution weights, eleven classes",
        Multiclass,
        Some(Smote1),
        Weighting::Distribution,
        None,
    ),
    recipe(
        "smote3-2-csl-multiclass",
        "SMOTE3-2 + distribution weights, eleven classes",
        Multiclass,
        Some(Smote3_2),
        Weighting::Distribution,
        None,
    ),
];

pub fn find(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}

pub fn names() -> Vec<&'static str> {
    RECIPES.iter().map(|r| r.name).collect()
}
