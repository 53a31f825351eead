//! ISO-style attack-detection error rates, D-EER search, and DET curves.
//!
//! Decision convention everywhere: a score at or above the threshold is
//! classified as an attack (higher score = more likely retouched). Under
//! that convention APCER (attacks called bona fide) is non-decreasing in
//! the threshold and BPCER (bona fide called attacks) is non-increasing.

use std::path::Path;

use crate::error::{Error, Result};
use crate::par;
use crate::score::ScoreTable;
use crate::svgplot::{self, Series};

/// Error rates at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub threshold: f64,
    /// Fraction of attack samples classified bona fide (score < threshold).
    pub apcer: f64,
    /// Fraction of bona fide samples classified attack (score >= threshold).
    pub bpcer: f64,
}

/// Detection error tradeoff curve over the exact candidate-threshold sweep,
/// with the equal-error operating point.
#[derive(Debug, Clone)]
pub struct DetCurve {
    /// Points ordered by threshold ascending, one per candidate threshold.
    pub points: Vec<OperatingPoint>,
    /// (apcer + bpcer) / 2 at the threshold minimizing |apcer - bpcer|.
    pub deer: f64,
    pub deer_threshold: f64,
}

fn check_scores(attack: &[f64], bonafide: &[f64]) -> Result<()> {
    if attack.is_empty() || bonafide.is_empty() {
        return Err(Error::Domain(
            "attack and bona fide score lists must both be non-empty".into(),
        ));
    }
    if attack.iter().chain(bonafide).any(|s| !s.is_finite()) {
        return Err(Error::Domain("scores must be finite".into()));
    }
    Ok(())
}

/// APCER/BPCER at a fixed threshold.
pub fn classification_errors(
    attack: &[f64],
    bonafide: &[f64],
    threshold: f64,
) -> Result<OperatingPoint> {
    check_scores(attack, bonafide)?;
    Ok(rates_at(attack, bonafide, threshold))
}

fn rates_at(attack: &[f64], bonafide: &[f64], threshold: f64) -> OperatingPoint {
    let apcer =
        attack.iter().filter(|&&s| s < threshold).count() as f64 / attack.len() as f64;
    let bpcer =
        bonafide.iter().filter(|&&s| s >= threshold).count() as f64 / bonafide.len() as f64;
    OperatingPoint {
        threshold,
        apcer,
        bpcer,
    }
}

/// The empirical error rates are step functions that change only at data
/// values, so sweeping the distinct values, the midpoints between adjacent
/// distinct values, and the two infinite sentinels visits every achievable
/// operating point.
fn candidate_thresholds(attack: &[f64], bonafide: &[f64]) -> Vec<f64> {
    let mut values: Vec<f64> = attack.iter().chain(bonafide).copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    values.dedup();

    let mut candidates = Vec::with_capacity(2 * values.len() + 2);
    candidates.push(f64::NEG_INFINITY);
    for (i, &value) in values.iter().enumerate() {
        if i > 0 {
            let previous = values[i - 1];
            let mid = 0.5 * (previous + value);
            if previous < mid && mid < value {
                candidates.push(mid);
            }
        }
        candidates.push(value);
    }
    candidates.push(f64::INFINITY);
    candidates
}

fn det_scan(attack: &[f64], bonafide: &[f64]) -> Result<DetCurve> {
    check_scores(attack, bonafide)?;
    let points: Vec<OperatingPoint> = candidate_thresholds(attack, bonafide)
        .into_iter()
        .map(|t| rates_at(attack, bonafide, t))
        .collect();

    // Minimize |apcer - bpcer|, ties broken by the smaller threshold;
    // the sweep is threshold-ascending so the first strict improvement wins.
    let best = points
        .iter()
        .min_by(|a, b| {
            let da = (a.apcer - a.bpcer).abs();
            let db = (b.apcer - b.bpcer).abs();
            da.partial_cmp(&db)
                .expect("rates are finite")
                .then(a.threshold.partial_cmp(&b.threshold).expect("ordered"))
        })
        .expect("candidate sweep is never empty");

    Ok(DetCurve {
        deer: 0.5 * (best.apcer + best.bpcer),
        deer_threshold: best.threshold,
        points,
    })
}

/// Detection equal error rate: `(deer, threshold)` at the candidate
/// threshold where APCER and BPCER come closest.
pub fn deer(attack: &[f64], bonafide: &[f64]) -> Result<(f64, f64)> {
    let curve = det_scan(attack, bonafide)?;
    Ok((curve.deer, curve.deer_threshold))
}

/// Full DET curve over the candidate sweep.
pub fn det_curve(attack: &[f64], bonafide: &[f64]) -> Result<DetCurve> {
    det_scan(attack, bonafide)
}

/// Mean of the per-filter D-EERs of one source, each filter evaluated
/// against the full bona fide pool.
pub fn average_deer(table: &ScoreTable, source: &str) -> Result<f64> {
    average_deer_impl(table, source, true)
}

/// Sequential twin of [`average_deer`] for benchmark comparison.
pub fn average_deer_seq(table: &ScoreTable, source: &str) -> Result<f64> {
    average_deer_impl(table, source, false)
}

fn average_deer_impl(table: &ScoreTable, source: &str, parallel: bool) -> Result<f64> {
    if !table.has_source(source) {
        return Err(Error::Lookup {
            kind: "source",
            name: source.to_string(),
        });
    }
    let filters = table.attack_filters();
    if filters.is_empty() {
        return Err(Error::Domain("table has no attack filters".into()));
    }
    let bonafide = table.bonafide_scores(source);
    if bonafide.is_empty() {
        return Err(Error::Domain(format!(
            "no bona fide records for source '{source}'"
        )));
    }

    let per_filter = |filter: &&str| -> Result<f64> {
        let attack = table.attack_scores(source, filter);
        Ok(deer(&attack, &bonafide)?.0)
    };
    let deers = if parallel {
        par::map_collect(&filters, per_filter)
    } else {
        par::map_collect_seq(&filters, per_filter)
    };
    let deers = deers.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(deers.iter().sum::<f64>() / deers.len() as f64)
}

/// Inverse standard-normal CDF (Acklam's rational approximation,
/// |relative error| < 1.2e-9). Used for normal-deviate DET axes.
pub fn normal_deviate(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_deviate needs p in (0,1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_deviate(1.0 - p)
    }
}

/// Rates below this are clipped before the deviate transform (the deviate
/// of zero is -inf).
pub const DET_RATE_FLOOR: f64 = 0.001;
const DET_RATE_CEIL: f64 = 0.999;

const DET_TICKS: [f64; 9] = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4];

/// Writes an SVG DET plot on normal-deviate axes plus one
/// `threshold,apcer,bpcer` CSV sidecar per curve (named `<stem>_<curve>.csv`).
pub fn emit_det_plot(curves: &[(String, DetCurve)], path: &Path) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::Domain("DET plot needs at least one curve".into()));
    }

    let clip = |rate: f64| normal_deviate(rate.clamp(DET_RATE_FLOOR, DET_RATE_CEIL));
    let series: Vec<Series> = curves
        .iter()
        .map(|(name, curve)| Series {
            name: name.clone(),
            points: curve
                .points
                .iter()
                .map(|p| (clip(p.apcer), clip(p.bpcer)))
                .collect(),
        })
        .collect();

    let ticks: Vec<(f64, String)> = DET_TICKS
        .iter()
        .map(|&r| (normal_deviate(r), format!("{r}")))
        .collect();
    let lo = normal_deviate(DET_RATE_FLOOR);
    let hi = normal_deviate(DET_RATE_CEIL);

    svgplot::line_plot(
        path,
        "DET",
        "APCER",
        "BPCER",
        (lo, hi),
        (lo, hi),
        &ticks,
        &ticks,
        &series,
    )?;

    for (name, curve) in curves {
        let sidecar = svgplot::sidecar_path(path, name);
        let mut writer = csv::Writer::from_path(&sidecar)
            .map_err(|e| sidecar_error(&sidecar, e))?;
        writer
            .write_record(["threshold", "apcer", "bpcer"])
            .map_err(|e| sidecar_error(&sidecar, e))?;
        for point in &curve.points {
            writer
                .write_record([
                    format!("{}", point.threshold),
                    format!("{}", point.apcer),
                    format!("{}", point.bpcer),
                ])
                .map_err(|e| sidecar_error(&sidecar, e))?;
        }
        writer
            .flush()
            .map_err(|e| Error::io(&sidecar, e))?;
    }
    Ok(())
}

fn sidecar_error(path: &Path, error: csv::Error) -> Error {
    match error.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Validation(format!("csv write failed: {kind:?}")),
    }
}
