use std::path::{Path, PathBuf};

use hemo_core::evaluation::{cell_match, metrics, regions_from_label_mask, CellMatchResult, ConfusionMatrix};
use hemo_core::groundtruth::ClassScheme;

use super::{existing_dir, fmt, write_confusion, write_per_class, Ctx};
use crate::config::SchemeName;
use crate::error::{CliError, CliResult};
use crate::io;
use crate::manifest::Run;
use crate::plot;

fn match_file(label: &Path, pred: &Path, scheme: ClassScheme, threshold: f64) -> anyhow::Result<CellMatchResult> {
    let l = io::read_u8_mask(label)?;
    let p = io::read_u8_mask(pred)?;
    let regions = regions_from_label_mask(&l)?;
    Ok(cell_match(&l, &p, &regions, scheme.id_count(), threshold)?)
}

pub(super) fn eval_masks(
    ctx: Ctx,
    labels: &Path,
    predicted: &Path,
    scheme: Option<SchemeName>,
    threshold: f64,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let labels = existing_dir(Some(labels.to_path_buf()), "label mask")?;
    let predicted = existing_dir(Some(predicted.to_path_buf()), "predicted mask")?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::usage("--threshold must lie in [0, 1]"));
    }
    let scheme: ClassScheme = scheme.unwrap_or(ctx.cfg.scheme).into();
    let out = ctx.out_dir(out)?;
    let mut run = Run::new("eval-masks", &ctx.cfg, &out)?;
    run.stage("match");
    let files = io::list_pngs(&labels).map_err(CliError::Usage)?;
    let results = ctx.par_map(&files, |l| {
        let p = predicted.join(l.file_name().unwrap_or_default());
        (p.clone(), match_file(l, &p, scheme, threshold))
    });
    run.stage("write");
    let k = scheme.id_count();
    let mut pooled = ConfusionMatrix::zeros(k);
    let mut w = csv::Writer::from_path(run.output("cells.csv")).map_err(anyhow::Error::from)?;
    w.write_record([
        "image",
        "region",
        "true_class",
        "majority_class",
        "agreement",
        "matched",
        "interior_pixels",
    ])
    .map_err(anyhow::Error::from)?;
    let (mut ok, mut failed, mut skipped) = (0, 0, 0);
    for (l, (p, r)) in files.iter().zip(results) {
        match r {
            Ok(r) => {
                run.input(l);
                run.input(&p);
                pooled.merge(&r.confusion)?;
                skipped += r.skipped;
                ok += 1;
                for c in &r.cells {
                    w.write_record([
                        io::stem(l),
                        c.region_id.to_string(),
                        c.true_class.to_string(),
                        c.majority_class.to_string(),
                        fmt(c.agreement),
                        u8::from(c.matched).to_string(),
                        c.interior_pixels.to_string(),
                    ])
                    .map_err(anyhow::Error::from)?;
                }
            }
            Err(e) => {
                log::error!("{}: {e:#}", l.display());
                failed += 1;
            }
        }
    }
    w.flush()?;
    if ok == 0 && failed > 0 {
        return Err(CliError::data(format!("all {failed} mask pairs failed")));
    }
    if skipped > 0 {
        log::warn!("{skipped} regions had no interior pixels and were skipped");
    }
    let names = scheme.id_names();
    let name = |c: usize| names.get(c).map_or_else(|| c.to_string(), |s| s.to_string());
    let classes: Vec<usize> = (0..k)
        .filter(|&c| c == 0 || pooled.row(c).iter().sum::<u64>() > 0)
        .collect();
    let truth_classes: Vec<usize> = classes.iter().copied().filter(|&c| c != 0).collect();
    let report = metrics(&pooled, &truth_classes);
    write_per_class(&run.output("per_class.csv"), &report, name)?;
    let percent = write_confusion(
        &run.output("confusion.csv"),
        &run.output("confusion_normalized.csv"),
        &pooled,
        &classes,
        name,
    )?;
    let label_names: Vec<String> = classes.iter().map(|&c| name(c)).collect();
    std::fs::write(
        run.output("confusion.svg"),
        plot::confusion_heatmap("cell-based confusion (% of true class)", &label_names, &percent),
    )?;
    let total: u64 = truth_classes.iter().map(|&c| pooled.row(c).iter().sum::<u64>()).sum();
    let matched: u64 = truth_classes.iter().map(|&c| pooled.get(c, c)).sum();
    println!(
        "{ok} images, {matched}/{total} cells matched, macro sensitivity {:.4}",
        report.macro_avg.sensitivity
    );
    run.finish()?;
    Ok(())
}
