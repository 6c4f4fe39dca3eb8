use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::Context;

use hemo_core::features::FeatureManifest;
use hemo_core::groundtruth::{assign_region_labels, build_label_mask, scheme_map, AnnotationPoint, ClassScheme};
use hemo_core::imaging::{segment as segment_image, GrayImage};
use hemo_core::pipeline::{process_image, ImageCells};
use hemo_core::synthetic::{generate, SynthConfig};

use super::{existing_dir, Ctx};
use crate::cli::Preset;
use crate::config::SchemeName;
use crate::error::{CliError, CliResult};
use crate::io;
use crate::manifest::Run;
use crate::model::ModelFile;
use crate::table::{label_text, FeatureRow, FeatureTable};

pub(super) fn synth(ctx: Ctx, preset: Preset, cells: usize, out: Option<PathBuf>) -> CliResult<()> {
    let seed = ctx.cfg.require_seed()?;
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("synth", &ctx.cfg, &out)?;
    let cfg = match preset {
        Preset::ThreeClass => SynthConfig::three_class(cells, seed),
        Preset::Doublets => SynthConfig::singles_and_doublets(cells, seed),
    };
    run.stage("generate");
    let images = generate(&cfg).map_err(|e| CliError::usage(e.to_string()))?;
    run.stage("write");
    std::fs::create_dir_all(out.join("images"))?;
    std::fs::create_dir_all(out.join("annotations"))?;
    for (i, im) in images.iter().enumerate() {
        let stem = format!("img_{i:04}");
        io::write_u8(&run.output(format!("images/{stem}.png")), &im.image)?;
        io::write_annotations(&run.output(format!("annotations/{stem}.csv")), &im.annotations)?;
    }
    log::info!(
        "wrote {} images holding {cells} cells to {}",
        images.len(),
        out.display()
    );
    run.finish()?;
    Ok(())
}

/// Reads every PNG in `dir` on the pool. Unreadable files are logged and
/// skipped; it is a data error when every file fails.
fn load_each<T: Send>(
    ctx: &Ctx,
    dir: &Path,
    run: &mut Run,
    f: impl Fn(&Path, GrayImage) -> anyhow::Result<T> + Sync + Send,
) -> CliResult<Vec<(PathBuf, T)>> {
    let paths = io::list_pngs(dir).map_err(CliError::Usage)?;
    if paths.is_empty() {
        log::warn!("no PNG images in {}", dir.display());
    }
    let results = ctx.par_map(&paths, |p| io::read_gray(p).and_then(|img| f(p, img)));
    let mut ok = Vec::new();
    let mut failed = 0;
    for (p, r) in paths.into_iter().zip(results) {
        match r {
            Ok(v) => {
                run.input(&p);
                ok.push((p, v));
            }
            Err(e) => {
                log::error!("{}: {e:#}", p.display());
                failed += 1;
            }
        }
    }
    if failed > 0 && ok.is_empty() {
        return Err(CliError::data(format!("all {failed} images failed")));
    }
    Ok(ok)
}

pub(super) fn segment(ctx: Ctx, images: Option<PathBuf>, out: Option<PathBuf>) -> CliResult<()> {
    let images = existing_dir(images.or_else(|| ctx.cfg.paths.images.clone()), "images")?;
    let out = ctx.out_dir(out)?;
    let params = ctx.cfg.imaging.params()?;
    let mut run = Run::new("segment", &ctx.cfg, &out)?;
    run.stage("segment");
    let done = load_each(&ctx, &images, &mut run, |_, img| Ok(segment_image(&img, &params)?))?;
    run.stage("write");
    let mut w = csv::Writer::from_path(run.output("regions.csv")).map_err(anyhow::Error::from)?;
    w.write_record([
        "image",
        "region",
        "area",
        "min_x",
        "min_y",
        "max_x",
        "max_y",
        "centroid_x",
        "centroid_y",
    ])
    .map_err(anyhow::Error::from)?;
    for (path, seg) in &done {
        let stem = io::stem(path);
        if seg.regions.is_empty() {
            log::warn!("{stem}: no regions found");
        }
        io::write_mask(&run.output(format!("{stem}_mask.png")), &seg.mask)?;
        io::write_region_map(&run.output(format!("{stem}_regions.png")), &seg.map)?;
        for r in &seg.regions {
            let b = r.bbox;
            w.write_record([
                stem.clone(),
                r.id.to_string(),
                r.area().to_string(),
                b.min_x.to_string(),
                b.min_y.to_string(),
                b.max_x.to_string(),
                b.max_y.to_string(),
                format!("{:.4}", r.centroid.0),
                format!("{:.4}", r.centroid.1),
            ])
            .map_err(anyhow::Error::from)?;
        }
    }
    w.flush()?;
    log::info!(
        "segmented {} images, {} regions",
        done.len(),
        done.iter().map(|(_, s)| s.regions.len()).sum::<usize>()
    );
    run.finish()?;
    Ok(())
}

fn annotations_for(dir: Option<&Path>, image: &Path) -> anyhow::Result<(Option<PathBuf>, Vec<AnnotationPoint>)> {
    let Some(dir) = dir else { return Ok((None, vec![])) };
    let p = dir.join(format!("{}.csv", io::stem(image)));
    if !p.is_file() {
        log::warn!("{}: no annotation file {}", image.display(), p.display());
        return Ok((None, vec![]));
    }
    let points = io::read_annotations(&p)?;
    Ok((Some(p), points))
}

struct Processed {
    annotation_file: Option<PathBuf>,
    annotations: Vec<AnnotationPoint>,
    cells: ImageCells,
}

fn process_dir(
    ctx: &Ctx,
    run: &mut Run,
    images: &Path,
    annotations: Option<&Path>,
) -> CliResult<Vec<(PathBuf, Processed)>> {
    let seg = ctx.cfg.imaging.params()?;
    let feat = ctx.cfg.features.params()?;
    let done = load_each(ctx, images, run, |p, img| {
        let (annotation_file, annotations) = annotations_for(annotations, p)?;
        let cells = process_image(&img, &annotations, &seg, &feat).with_context(|| p.display().to_string())?;
        Ok(Processed {
            annotation_file,
            annotations,
            cells,
        })
    })?;
    for (p, d) in &done {
        if let Some(a) = &d.annotation_file {
            run.input(a);
        }
        for o in &d.cells.orphans {
            log::warn!(
                "{}: annotation ({}, {}) class {} is on background",
                p.display(),
                o.x,
                o.y,
                o.class
            );
        }
    }
    Ok(done)
}

fn write_orphans(run: &mut Run, done: &[(PathBuf, Processed)]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(run.output("orphans.csv"))?;
    w.write_record(["image", "x", "y", "class"])?;
    for (p, d) in done {
        for o in &d.cells.orphans {
            w.write_record([io::stem(p), o.x.to_string(), o.y.to_string(), o.class.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub(super) fn features(
    ctx: Ctx,
    images: Option<PathBuf>,
    annotations: Option<PathBuf>,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let images = existing_dir(images.or_else(|| ctx.cfg.paths.images.clone()), "images")?;
    let annotations = match annotations.or_else(|| ctx.cfg.paths.annotations.clone()) {
        Some(a) => Some(existing_dir(Some(a), "annotations")?),
        None => None,
    };
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("features", &ctx.cfg, &out)?;
    run.stage("extract");
    let done = process_dir(&ctx, &mut run, &images, annotations.as_deref())?;
    run.stage("write");
    let mut table = FeatureTable::default();
    for (p, d) in &done {
        let stem = io::stem(p);
        for c in &d.cells.cells {
            table.rows.push(FeatureRow {
                image: stem.clone(),
                region: c.region.id,
                label: c.label,
                synthetic: false,
                values: c.features.values().to_vec(),
            });
        }
    }
    table.write(&run.output("features.csv"))?;
    write_orphans(&mut run, &done)?;
    log::info!("{} feature rows from {} images", table.rows.len(), done.len());
    run.finish()?;
    Ok(())
}

pub(super) fn label(
    ctx: Ctx,
    images: Option<PathBuf>,
    annotations: Option<PathBuf>,
    scheme: Option<SchemeName>,
    separator: Option<PathBuf>,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let images = existing_dir(images.or_else(|| ctx.cfg.paths.images.clone()), "images")?;
    let annotations = existing_dir(annotations.or_else(|| ctx.cfg.paths.annotations.clone()), "annotations")?;
    let scheme: ClassScheme = scheme.unwrap_or(ctx.cfg.scheme).into();
    let separator_path = separator;
    let separator = match &separator_path {
        Some(p) => {
            super::existing_file(p)?;
            let m = ModelFile::load(p).map_err(CliError::Usage)?;
            if m.task != "binary" || m.feature_names != FeatureManifest::new().names().collect::<Vec<_>>() {
                return Err(CliError::usage(format!(
                    "{} is not a two-class feature model",
                    p.display()
                )));
            }
            Some(m)
        }
        None => None,
    };
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("label", &ctx.cfg, &out)?;
    if let Some(p) = &separator_path {
        run.input(p);
    }
    run.stage("segment");
    let done = process_dir(&ctx, &mut run, &images, Some(&annotations))?;
    run.stage("label");
    std::fs::create_dir_all(out.join("masks"))?;
    std::fs::create_dir_all(out.join("regions"))?;
    let mut w = csv::Writer::from_path(run.output("labels.csv")).map_err(anyhow::Error::from)?;
    w.write_record(["image", "region", "label", "scheme_id"])
        .map_err(anyhow::Error::from)?;
    for (p, d) in &done {
        let stem = io::stem(p);
        let map = &d.cells.segmentation.map;
        let overlapped: BTreeSet<u32> = match &separator {
            Some(m) => d
                .cells
                .cells
                .iter()
                .filter(|c| m.model.predict_class(c.features.values()) == 1)
                .map(|c| c.region.id)
                .collect(),
            None => BTreeSet::new(),
        };
        let assignment = assign_region_labels(map, &d.annotations, &overlapped)?;
        let mask = build_label_mask(map, &assignment.labels, scheme)?;
        io::write_u8(&run.output(format!("masks/{stem}.png")), &mask)?;
        io::write_region_map(&run.output(format!("regions/{stem}.png")), map)?;
        for (&id, &l) in &assignment.labels {
            let text = match label_text(l) {
                t if t.is_empty() => "unknown".to_string(),
                t => t,
            };
            w.write_record([stem.clone(), id.to_string(), text, scheme_map(l, scheme)?.to_string()])
                .map_err(anyhow::Error::from)?;
        }
    }
    w.flush()?;
    write_orphans(&mut run, &done)?;
    run.finish()?;
    Ok(())
}
