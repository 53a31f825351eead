//! Subcommand implementations around the core library.

use std::io::Write;
use std::path::{Path, PathBuf};

use fusebench_core::fusion::{self, FusionConfig, NormalizationMode, FUSED_SOURCE};
use fusebench_core::imgfeat::{self, dct_features, io as imgio, srm_residuals, to_grayscale};
use fusebench_core::learners::{self, LearnerKind};
use fusebench_core::manifest::RunManifest;
use fusebench_core::metrics::{self, DetCurve};
use fusebench_core::powell::{self, PowellSettings};
use fusebench_core::score::{self, ScoreTable, SourceRange};
use fusebench_core::{beauty, par, Error};

use crate::{Learner, Method};

pub struct Context {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

impl Context {
    pub fn out_dir(&self, default: &str) -> Result<PathBuf, Error> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from(default));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }

    pub fn log(&self, message: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[fusebench] {}", message.as_ref());
        }
    }
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn extract(
    ctx: &Context,
    images_dir: &Path,
    boxes_path: Option<&Path>,
    method: Method,
    margin: u32,
    crop: bool,
) -> Result<(), Error> {
    let boxes = match (crop, boxes_path) {
        (true, None) => {
            return Err(Error::Validation(
                "--crop needs a bounding-box file (--boxes)".into(),
            ))
        }
        (true, Some(path)) => Some(imgio::load_boxes(path)?),
        (false, _) => None,
    };

    let mut paths: Vec<PathBuf> = std::fs::read_dir(images_dir)
        .map_err(|e| Error::io(images_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase),
                Some(ref ext) if ext == "png" || ext == "ppm"
            )
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Validation(format!(
            "no images (.png/.ppm) found in {}",
            images_dir.display()
        )));
    }
    ctx.log(format!("extracting features from {} images", paths.len()));

    let out_dir = ctx.out_dir("features")?;
    let results = par::map_collect(&paths, |path| -> Result<(String, PathBuf, [usize; 3]), Error> {
        let sample_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut rgb = imgio::load_rgb(path)?;
        if let Some(boxes) = &boxes {
            let bbox = boxes.get(&sample_id).ok_or_else(|| {
                Error::Validation(format!("no bounding box for sample '{sample_id}'"))
            })?;
            rgb = imgfeat::crop_rgb(&rgb, bbox, margin)?;
        }

        let planes: Vec<imgfeat::ImagePlane> = match method {
            Method::Rgb => vec![rgb.r.clone(), rgb.g.clone(), rgb.b.clone()],
            Method::Dct => vec![dct_features(&to_grayscale(&rgb), 8, 256)?],
            Method::Srm => srm_residuals(&rgb, imgfeat::srm::DEFAULT_CLAMP)?.planes.to_vec(),
        };
        let tensor_path = out_dir.join(format!("{sample_id}.bin"));
        let refs: Vec<&imgfeat::ImagePlane> = planes.iter().collect();
        imgio::write_tensor(&tensor_path, &refs)?;
        Ok((
            sample_id,
            tensor_path,
            [planes[0].width(), planes[0].height(), planes.len()],
        ))
    });

    let mut rows = results.into_iter().collect::<Result<Vec<_>, Error>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut manifest = String::from("sample_id,path,width,height,planes\n");
    for (sample_id, path, [w, h, p]) in &rows {
        manifest.push_str(&format!("{sample_id},{},{w},{h},{p}\n", path.display()));
    }
    write_text(&out_dir.join("manifest.csv"), &manifest)?;
    println!(
        "extracted {} tensors into {}",
        rows.len(),
        out_dir.display()
    );
    Ok(())
}

/// Loads one source from the manifest and min-max normalizes it onto [0, 1],
/// using the declared range when present and the observed range otherwise.
/// Returns the normalized table plus the range that was used.
fn load_normalized(
    manifest: &RunManifest,
    source: &str,
    base_dir: &Path,
) -> Result<(ScoreTable, SourceRange), Error> {
    let table = manifest.load_source(source, base_dir)?;
    let (mode, min, max) = match manifest.declared_range(source) {
        Some((min, max)) => (NormalizationMode::Declared { min, max }, min, max),
        None => {
            let (min, max) = fusion::empirical_range(&table, source)?;
            (NormalizationMode::Empirical, min, max)
        }
    };
    let normalized = fusion::normalize_source(&table, source, mode, 0.0, 1.0)?;
    Ok((normalized, SourceRange::new(source, min, max)?))
}

pub fn fit(
    ctx: &Context,
    manifest_path: &Path,
    sources: &[String],
    trace_path: Option<&Path>,
) -> Result<(), Error> {
    let manifest = RunManifest::load(manifest_path)?;
    let base_dir = manifest_dir(manifest_path);

    let mut tables = Vec::new();
    let mut ranges = Vec::new();
    for source in sources {
        let (table, range) = load_normalized(&manifest, source, &base_dir)?;
        ctx.log(format!(
            "loaded source '{source}' ({} records, range [{}, {}])",
            table.len(),
            range.min,
            range.max
        ));
        tables.push(table);
        ranges.push(range);
    }
    let joined = score::join_tables(&tables)?;
    ctx.log(format!("joined table holds {} records", joined.len()));

    let settings = PowellSettings::default();
    let (fitted, trace) = powell::fit_fusion_weights(&joined, sources, &settings)?;

    // The saved config maps raw scores: swap the unit ranges for the ones the
    // normalization step actually used.
    let config = FusionConfig {
        source_ranges: ranges,
        ..fitted
    };
    config.validate()?;

    let out = ctx.out.clone().unwrap_or_else(|| PathBuf::from("fusion.json"));
    fusion::save_config(&config, &out)?;
    if let Some(trace_path) = trace_path {
        powell::write_trace_csv(&trace, &settings, trace_path)?;
    }

    println!("fitted weights over {sources:?}:");
    for (source, weight) in sources.iter().zip(&config.weights) {
        println!("  {source}: {weight:.6}");
    }
    println!("average D-EER: {:.6}", trace.final_objective);
    println!("config written to {}", out.display());
    Ok(())
}

/// Per-filter DET curves of one source within a table.
fn per_filter_curves(table: &ScoreTable, source: &str) -> Result<Vec<(String, DetCurve)>, Error> {
    let bonafide = table.bonafide_scores(source);
    let mut curves = Vec::new();
    for filter in table.attack_filters() {
        let attack = table.attack_scores(source, filter);
        curves.push((filter.to_string(), metrics::det_curve(&attack, &bonafide)?));
    }
    Ok(curves)
}

pub fn eval(ctx: &Context, manifest_path: &Path, config_path: &Path) -> Result<(), Error> {
    let config = fusion::load_config(config_path)?;
    let manifest = RunManifest::load(manifest_path)?;
    let base_dir = manifest_dir(manifest_path);

    let mut tables = Vec::new();
    for source in &config.sources {
        if !manifest.score_sources.contains_key(source) {
            return Err(Error::Validation(format!(
                "source '{source}' required by the config is missing from the manifest"
            )));
        }
        tables.push(manifest.load_source(source, &base_dir)?);
    }
    let joined = score::join_tables(&tables)?;
    let fused = fusion::fuse(&joined, &config)?;
    ctx.log(format!("fused {} samples", fused.bonafide_scores(FUSED_SOURCE).len()));

    let out_dir = ctx.out_dir("eval_out")?;
    let curves = per_filter_curves(&fused, FUSED_SOURCE)?;
    metrics::emit_det_plot(&curves, &out_dir.join("det_fused.svg"))?;

    let average = metrics::average_deer(&fused, FUSED_SOURCE)?;
    let mut report = String::from("filter,deer\n");
    println!("per-filter D-EER (fused):");
    for (filter, curve) in &curves {
        println!("  {filter}: {:.6}", curve.deer);
        report.push_str(&format!("{filter},{}\n", curve.deer));
    }
    report.push_str(&format!("average,{average}\n"));
    write_text(&out_dir.join("eval_report.csv"), &report)?;
    println!("average D-EER: {average:.6}");
    println!("report written to {}", out_dir.display());
    Ok(())
}

pub fn det(ctx: &Context, scores_path: &Path, source: &str) -> Result<(), Error> {
    let manifest = RunManifest::load(scores_path)?;
    let base_dir = manifest_dir(scores_path);
    let table = manifest.load_source(source, &base_dir)?;

    let out_dir = ctx.out_dir("det_out")?;
    let curves = per_filter_curves(&table, source)?;
    if curves.is_empty() {
        return Err(Error::Domain(format!(
            "source '{source}' has no attack filters"
        )));
    }
    let plot = out_dir.join(format!("det_{source}.svg"));
    metrics::emit_det_plot(&curves, &plot)?;
    for (filter, curve) in &curves {
        println!("{filter}: D-EER {:.6} at threshold {:.6}", curve.deer, curve.deer_threshold);
    }
    ctx.log(format!("plot written to {}", plot.display()));
    Ok(())
}

pub fn beauty_stats(ctx: &Context, scores_path: &Path, source: &str) -> Result<(), Error> {
    let table = score::load_scores(scores_path, source)?;
    let stats = beauty::filter_stats(&table, source)?;

    let out_dir = ctx.out_dir("beauty_out")?;
    let mut csv = String::from("filter,mean,std_dev,distance\n");
    for row in &stats {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.filter, row.mean, row.std_dev, row.distance
        ));
    }
    write_text(&out_dir.join(format!("stats_{source}.csv")), &csv)?;

    let mut curves = Vec::new();
    for row in &stats {
        let scores = if row.filter == score::BONAFIDE_FILTER {
            table.bonafide_scores(source)
        } else {
            table.attack_scores(source, &row.filter)
        };
        curves.push((row.filter.clone(), beauty::kde(&scores, 256)?));
    }
    beauty::emit_kde_plot(&curves, &out_dir.join(format!("kde_{source}.svg")))?;

    println!("filter,mean,std_dev,distance");
    for row in &stats {
        println!(
            "{},{:.4},{:.4},{:.4}",
            row.filter, row.mean, row.std_dev, row.distance
        );
    }
    ctx.log(format!("stats written to {}", out_dir.display()));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn ml_fuse(
    ctx: &Context,
    manifest_path: &Path,
    learner: Learner,
    train_frac: f64,
    repeats: usize,
    trees: usize,
    regularization: f64,
    epochs: usize,
) -> Result<(), Error> {
    let manifest = RunManifest::load(manifest_path)?;
    let base_dir = manifest_dir(manifest_path);
    let sources: Vec<String> = manifest.score_sources.keys().cloned().collect();
    if sources.is_empty() {
        return Err(Error::Validation("manifest has no score sources".into()));
    }
    let joined = manifest.load_joined(&sources, &base_dir)?;
    ctx.log(format!(
        "running {repeats} splits over sources {sources:?} ({} records)",
        joined.len()
    ));

    let kind = match learner {
        Learner::Forest => LearnerKind::Forest { n_trees: trees },
        Learner::Svc => LearnerKind::Margin {
            regularization,
            epochs,
        },
    };
    let report = learners::repeated_split_eval(&joined, kind, train_frac, repeats, ctx.seed)?;

    let out = ctx.out.clone().unwrap_or_else(|| PathBuf::from("report.csv"));
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
    let mut writer = std::io::BufWriter::new(file);
    writeln!(writer, "run,deer").map_err(|e| Error::io(&out, e))?;
    for (i, deer) in report.per_run_deer.iter().enumerate() {
        writeln!(writer, "{},{deer}", i + 1).map_err(|e| Error::io(&out, e))?;
    }
    writeln!(writer, "mean,{}", report.mean).map_err(|e| Error::io(&out, e))?;
    writeln!(writer, "std_dev,{}", report.std_dev).map_err(|e| Error::io(&out, e))?;
    writer.flush().map_err(|e| Error::io(&out, e))?;

    println!(
        "mean D-EER over {} runs: {:.6} (std {:.6})",
        report.per_run_deer.len(),
        report.mean,
        report.std_dev
    );
    println!("report written to {}", out.display());
    Ok(())
}
