//! End-to-end synthetic pipeline.
//!
//! Generates procedural face-like images (smooth blobs plus noise texture),
//! retouches them at three strengths, extracts rgb/dct/srm features, trains
//! a lightweight logistic detector per feature type under a
//! leave-one-filter-out protocol, fits fusion weights over the detector
//! scores, and writes a full report directory. Deterministic for a given
//! seed: subjects are split in half, detectors train on the first half, and
//! all reported scores come from the second half. Bona fide samples are
//! scored by the mean of the three leave-one-out models.

use std::collections::BTreeMap;

use rand::Rng;

use fusebench_core::fusion::{self, FUSED_SOURCE};
use fusebench_core::imgfeat::{
    self, block_stats, crop_rgb, dct_features, srm_residuals, synth_retouch, to_grayscale,
    BoundingBox, ImagePlane, RgbImage,
};
use fusebench_core::learners::logistic::{score_logistic, train_logistic, LogisticModel};
use fusebench_core::learners::FeatureVector;
use fusebench_core::manifest::RunManifest;
use fusebench_core::metrics;
use fusebench_core::powell::{self, PowellSettings};
use fusebench_core::score::{Label, ScoreRecord, ScoreTable, BONAFIDE_FILTER};
use fusebench_core::seeds;
use fusebench_core::{beauty, par, Error};

use crate::commands::Context;

const IMAGE_SIZE: usize = 128;
const RETOUCH_FILTERS: [(&str, f64); 3] =
    [("retouch30", 0.30), ("retouch55", 0.55), ("retouch80", 0.80)];
const SOURCES: [&str; 3] = ["rgb", "dct", "srm"];
const FEATURE_SIZE: usize = 112;
const BLOCK: usize = 8;
const DCT_CUT: usize = 8;

struct Sample {
    sample_id: String,
    subject: usize,
    filter: &'static str,
    label: Label,
    image: RgbImage,
    bbox: BoundingBox,
}

/// Procedural face: background gradient, skin ellipse with soft edge, eye
/// and mouth blobs, then integer-quantized noise texture.
fn synth_face(seed: u64, subject: usize) -> (RgbImage, BoundingBox) {
    let mut geometry = seeds::substream(seed, "geometry", subject as u64);
    let cx = 64.0 + geometry.gen_range(-5.0..5.0);
    let cy = 66.0 + geometry.gen_range(-5.0..5.0);
    let ax = 32.0 + geometry.gen_range(-4.0..4.0);
    let ay = 42.0 + geometry.gen_range(-4.0..4.0);
    let skin: [f64; 3] = [
        196.0 + geometry.gen_range(-18.0..18.0),
        158.0 + geometry.gen_range(-15.0..15.0),
        128.0 + geometry.gen_range(-12.0..12.0),
    ];
    let backdrop = 60.0 + geometry.gen_range(-15.0..15.0);

    let eye_dx = ax * 0.42;
    let eye_y = cy - ay * 0.25;
    let mouth_y = cy + ay * 0.45;

    let blob = |x: f64, y: f64, bx: f64, by: f64, rx: f64, ry: f64| -> f64 {
        let dx = (x - bx) / rx;
        let dy = (y - by) / ry;
        let d = dx * dx + dy * dy;
        // soft edge over the outer 20% of the radius
        (1.0 - (d - 0.8) / 0.4).clamp(0.0, 1.0)
    };

    // skin texture strength varies per subject, so the retouch effect size
    // varies and the detection problem has genuine overlap
    let mut noise = seeds::substream(seed, "noise", subject as u64);
    let amplitude = noise.gen_range(4.0..16.0);
    let mut planes = Vec::with_capacity(3);
    let mut noise_values = vec![[0.0f64; 3]; IMAGE_SIZE * IMAGE_SIZE];
    for values in &mut noise_values {
        for channel in values {
            *channel = noise.gen_range(-amplitude..amplitude);
        }
    }
    for channel in 0..3 {
        let plane = ImagePlane::from_fn(IMAGE_SIZE, IMAGE_SIZE, |x, y| {
            let (xf, yf) = (x as f64, y as f64);
            let base = backdrop + 18.0 * (yf / IMAGE_SIZE as f64) + 6.0 * (channel as f64);
            let face = blob(xf, yf, cx, cy, ax, ay);
            let mut value = base + face * (skin[channel] - base);
            let left_eye = blob(xf, yf, cx - eye_dx, eye_y, ax * 0.16, ay * 0.09);
            let right_eye = blob(xf, yf, cx + eye_dx, eye_y, ax * 0.16, ay * 0.09);
            let mouth = blob(xf, yf, cx, mouth_y, ax * 0.34, ay * 0.08);
            value -= (left_eye + right_eye) * 0.55 * value + mouth * 0.30 * value;
            let textured = value + noise_values[y * IMAGE_SIZE + x][channel];
            textured.round().clamp(0.0, 255.0)
        })
        .expect("fixed dimensions");
        planes.push(plane);
    }
    let image = RgbImage::new(planes.remove(0), planes.remove(0), planes.remove(0))
        .expect("equal dimensions");

    let x0 = (cx - ax - 8.0).floor().max(0.0) as i64;
    let y0 = (cy - ay - 8.0).floor().max(0.0) as i64;
    let x1 = (cx + ax + 8.0).ceil().min(IMAGE_SIZE as f64) as i64;
    let y1 = (cy + ay + 8.0).ceil().min(IMAGE_SIZE as f64) as i64;
    let bbox = BoundingBox {
        x: x0,
        y: y0,
        w: (x1 - x0) as u32,
        h: (y1 - y0) as u32,
    };
    (image, bbox)
}

fn quantize(image: &RgbImage) -> RgbImage {
    let q = |plane: &ImagePlane| {
        ImagePlane::from_fn(plane.width(), plane.height(), |x, y| {
            plane.get(x, y).round().clamp(0.0, 255.0)
        })
        .expect("dimensions preserved")
    };
    RgbImage::new(q(&image.r), q(&image.g), q(&image.b)).expect("dimensions preserved")
}

fn build_samples(ctx: &Context, n_subjects: usize) -> Result<Vec<Sample>, Error> {
    let subjects: Vec<usize> = (0..n_subjects).collect();
    let generated = par::map_collect(&subjects, |&subject| -> Result<Vec<Sample>, Error> {
        let (bonafide, bbox) = synth_face(ctx.seed, subject);
        let mut samples = vec![Sample {
            sample_id: format!("s{subject:04}_{BONAFIDE_FILTER}"),
            subject,
            filter: BONAFIDE_FILTER,
            label: Label::BonaFide,
            image: bonafide.clone(),
            bbox,
        }];
        for (filter, strength) in RETOUCH_FILTERS {
            let retouched = quantize(&synth_retouch(&bonafide, strength)?);
            samples.push(Sample {
                sample_id: format!("s{subject:04}_{filter}"),
                subject,
                filter,
                label: Label::Attack,
                image: retouched,
                bbox,
            });
        }
        Ok(samples)
    });
    let mut samples = Vec::with_capacity(n_subjects * 4);
    for group in generated {
        samples.extend(group?);
    }
    Ok(samples)
}

/// Per-source pooled block statistics of one sample's cropped image.
fn feature_vectors(sample: &Sample) -> Result<BTreeMap<&'static str, Vec<f64>>, Error> {
    let cropped = crop_rgb(&sample.image, &sample.bbox, 0)?;
    let resized = imgfeat::bilinear_resize_rgb(&cropped, FEATURE_SIZE, FEATURE_SIZE)?;

    let mut features = BTreeMap::new();
    let mut rgb = Vec::new();
    for plane in resized.planes() {
        rgb.extend(block_stats(plane, BLOCK)?);
    }
    features.insert("rgb", rgb);

    let spectrum = dct_features(&to_grayscale(&resized), DCT_CUT, FEATURE_SIZE)?;
    features.insert("dct", block_stats(&spectrum, BLOCK)?);

    let residuals = srm_residuals(&resized, imgfeat::srm::DEFAULT_CLAMP)?;
    let mut srm = Vec::new();
    for plane in &residuals.planes {
        srm.extend(block_stats(plane, BLOCK)?);
    }
    features.insert("srm", srm);
    Ok(features)
}

pub fn run(ctx: &Context, n_subjects: usize) -> Result<(), Error> {
    if n_subjects < 4 {
        return Err(Error::Validation(
            "demo needs at least 4 subjects (half train, half evaluate)".into(),
        ));
    }
    let out_dir = ctx.out_dir("demo_out")?;

    ctx.log(format!("generating {n_subjects} subjects x 4 variants"));
    let samples = build_samples(ctx, n_subjects)?;

    ctx.log("extracting rgb/dct/srm features");
    let features = par::map_collect(&samples, feature_vectors);
    let features = features.into_iter().collect::<Result<Vec<_>, Error>>()?;

    let train_cut = n_subjects / 2;
    let is_train = |sample: &Sample| sample.subject < train_cut;

    // One logistic detector per (source, held-out filter), trained on the
    // training subjects' bona fide images plus the other two filters.
    ctx.log("training leave-one-filter-out detectors");
    let mut score_tables = Vec::new();
    for source in SOURCES {
        let mut models: BTreeMap<&str, LogisticModel> = BTreeMap::new();
        for (held_out, _) in RETOUCH_FILTERS {
            let train: Vec<FeatureVector> = samples
                .iter()
                .zip(&features)
                .filter(|(s, _)| is_train(s) && s.filter != held_out)
                .map(|(s, f)| FeatureVector::new(f[source].clone(), s.label))
                .collect::<Result<Vec<_>, Error>>()?;
            models.insert(held_out, train_logistic(&train, 40, 0.25, 1e-3)?);
        }

        let mut records = Vec::new();
        for (sample, feats) in samples.iter().zip(&features) {
            if is_train(sample) {
                continue;
            }
            let score = match sample.label {
                Label::Attack => score_logistic(&models[sample.filter], &feats[source])?,
                Label::BonaFide => {
                    // each LOO model scores the shared bona fide pool; report
                    // their mean so one record covers the sample
                    let mut total = 0.0;
                    for model in models.values() {
                        total += score_logistic(model, &feats[source])?;
                    }
                    total / models.len() as f64
                }
            };
            records.push(ScoreRecord {
                sample_id: sample.sample_id.clone(),
                source: source.to_string(),
                filter: sample.filter.to_string(),
                label: sample.label,
                score,
            });
        }
        records.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
        let table = ScoreTable::new(records)?;
        fusebench_core::score::save_scores(&table, &out_dir.join(format!("scores_{source}.csv")))?;
        score_tables.push(table);
    }

    // per-source reports
    let mut summary = String::from("source,average_deer\n");
    let mut per_source_deer = Vec::new();
    for (source, table) in SOURCES.iter().zip(&score_tables) {
        let average = metrics::average_deer(table, source)?;
        per_source_deer.push(average);
        summary.push_str(&format!("{source},{average}\n"));

        let stats = beauty::filter_stats(table, source)?;
        let mut csv = String::from("filter,mean,std_dev,distance\n");
        for row in &stats {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                row.filter, row.mean, row.std_dev, row.distance
            ));
        }
        std::fs::write(out_dir.join(format!("stats_{source}.csv")), csv)
            .map_err(|e| Error::io(&out_dir, e))?;

        let bonafide = table.bonafide_scores(source);
        let mut curves = Vec::new();
        for filter in table.attack_filters() {
            let attack = table.attack_scores(source, filter);
            curves.push((filter.to_string(), metrics::det_curve(&attack, &bonafide)?));
        }
        metrics::emit_det_plot(&curves, &out_dir.join(format!("det_{source}.svg")))?;
        ctx.log(format!("{source}: average D-EER {average:.4}"));
    }

    // fusion fitting over the detector scores (already probabilities in [0,1])
    ctx.log("fitting fusion weights");
    let joined = fusebench_core::score::join_tables(&score_tables)?;
    let sources: Vec<String> = SOURCES.iter().map(|s| s.to_string()).collect();
    let settings = PowellSettings::default();
    let (config, trace) = powell::fit_fusion_weights(&joined, &sources, &settings)?;
    fusion::save_config(&config, &out_dir.join("fusion.json"))?;
    powell::write_trace_csv(&trace, &settings, &out_dir.join("trace.csv"))?;

    let fused = fusion::fuse(&joined, &config)?;
    let fused_deer = metrics::average_deer(&fused, FUSED_SOURCE)?;
    summary.push_str(&format!("fused,{fused_deer}\n"));
    std::fs::write(out_dir.join("summary.csv"), summary).map_err(|e| Error::io(&out_dir, e))?;

    let bonafide = fused.bonafide_scores(FUSED_SOURCE);
    let mut curves = Vec::new();
    for filter in fused.attack_filters() {
        let attack = fused.attack_scores(FUSED_SOURCE, filter);
        curves.push((filter.to_string(), metrics::det_curve(&attack, &bonafide)?));
    }
    metrics::emit_det_plot(&curves, &out_dir.join("det_fused.svg"))?;

    // run manifest so eval/det/ml-fuse work directly on the report directory
    let manifest = RunManifest {
        score_sources: SOURCES
            .iter()
            .map(|s| {
                (
                    s.to_string(),
                    fusebench_core::manifest::SourceEntry {
                        path: format!("scores_{s}.csv").into(),
                        min: Some(0.0),
                        max: Some(1.0),
                    },
                )
            })
            .collect(),
        boxes_path: None,
        images_path: None,
        // the manifest sits inside the report directory; keep it relocatable
        output_dir: ".".into(),
        seed: ctx.seed,
    };
    manifest.save(&out_dir.join("manifest.json"))?;

    println!("demo report in {}", out_dir.display());
    for (source, deer) in SOURCES.iter().zip(&per_source_deer) {
        println!("  {source}: average D-EER {deer:.4}");
    }
    println!("  fused: average D-EER {fused_deer:.4} with weights {:?}", config.weights);
    Ok(())
}
