use std::collections::BTreeMap;

use hemo_core::classifier::{train_multiclass, ClassWeights, SvmParams};
use hemo_core::evaluation::{confusion, metrics, run_cv, stratified_kfold, CvConfig, Task, Weighting};
use hemo_core::features::FeatureParams;
use hemo_core::groundtruth::{build_label_mask, scheme_map, ClassScheme};
use hemo_core::imaging::SegmentParams;
use hemo_core::pipeline::{labeled_dataset, process_image, CellRecord};
use hemo_core::resampling::SmoteVariant;
use hemo_core::synthetic::{generate, SynthConfig};

fn cells(cfg: &SynthConfig) -> Vec<CellRecord> {
    let mut out = Vec::new();
    for im in generate(cfg).unwrap() {
        let r = process_image(
            &im.image,
            &im.annotations,
            &SegmentParams::default(),
            &FeatureParams::default(),
        )
        .unwrap();
        assert!(r.orphans.is_empty());
        out.extend(r.cells);
    }
    out
}

#[test]
fn every_rendered_cell_is_found_and_labelled() {
    let cfg = SynthConfig::three_class(300, 1);
    let recs = cells(&cfg);
    assert_eq!(recs.len(), 300);
    let ds = labeled_dataset(&recs).unwrap();
    let counts = ds.counts();
    assert_eq!(counts.iter().sum::<usize>(), 300);
    assert!(
        counts[0] > counts[5] && counts[5] > counts[4] && counts[4] > 0,
        "{counts:?}"
    );
}

#[test]
fn held_out_fold_is_classified_well() {
    let ds = labeled_dataset(&cells(&SynthConfig::three_class(500, 2))).unwrap();
    let split = stratified_kfold(ds.labels(), 5, 2).unwrap();
    let (train, test) = (split.train_indices(0), split.test_indices(0));
    let rows: Vec<Vec<f64>> = train.iter().map(|&i| ds.rows()[i].clone()).collect();
    let labels: Vec<usize> = train.iter().map(|&i| ds.labels()[i]).collect();
    let model = train_multiclass(
        &rows,
        &labels,
        &[0, 4, 5],
        &SvmParams::default(),
        &ClassWeights::uniform(),
    )
    .unwrap();
    let truth: Vec<usize> = test.iter().map(|&i| ds.labels()[i]).collect();
    let pred: Vec<usize> = test.iter().map(|&i| model.predict_class(&ds.rows()[i])).collect();
    let report = metrics(&confusion(&truth, &pred, 11).unwrap(), &[0, 4, 5]);
    assert!(report.class(0).unwrap().metrics.sensitivity > 0.9, "{report:?}");
}

#[test]
fn cross_validation_is_reproducible() {
    let ds = labeled_dataset(&cells(&SynthConfig::three_class(400, 3))).unwrap();
    let cfg = CvConfig {
        seed: 9,
        task: Task::Multiclass,
        resampling: Some(SmoteVariant::Smote3_3),
        weighting: Weighting::Distribution,
        ..Default::default()
    };
    let a = run_cv(&ds, &cfg).unwrap();
    let b = run_cv(&ds, &cfg).unwrap();
    assert_eq!(a, b);
    let binary = run_cv(
        &ds,
        &CvConfig {
            seed: 9,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(binary.classes, vec![0, 1]);
    assert_eq!(binary.pooled.total() as usize, ds.len());
}

#[test]
fn label_mask_encodes_scheme_ids() {
    let im = &generate(&SynthConfig::three_class(60, 4)).unwrap()[0];
    let r = process_image(
        &im.image,
        &im.annotations,
        &SegmentParams::default(),
        &FeatureParams::default(),
    )
    .unwrap();
    let labels: BTreeMap<u32, _> = r.cells.iter().map(|c| (c.region.id, c.label)).collect();
    for scheme in [ClassScheme::Five, ClassScheme::Nine, ClassScheme::Eleven] {
        let mask = build_label_mask(&r.segmentation.map, &labels, scheme).unwrap();
        for c in &r.cells {
            let want = scheme_map(c.label, scheme).unwrap();
            assert!(c.region.pixels.iter().all(|&(x, y)| *mask.get(x, y) == want));
        }
        let background = mask.as_slice().iter().filter(|&&v| v == 0).count();
        let cell_pixels: usize = r.cells.iter().map(|c| c.region.area()).sum();
        assert_eq!(background + cell_pixels, mask.len());
    }
    assert!(build_label_mask(&r.segmentation.map, &labels, ClassScheme::Two).is_err());
}
