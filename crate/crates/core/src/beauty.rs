//! Beauty-score distribution analysis: per-filter means and population
//! standard deviations, mean-difference distances against the bona fide
//! pool, and Gaussian kernel density estimates for visualization.

use std::path::Path;

use crate::error::{Error, Result};
use crate::par;
use crate::score::{ScoreTable, BONAFIDE_FILTER};
use crate::svgplot::{self, Series};

/// Per-filter summary row. `distance` is mean(filter) - mean(bona fide);
/// the bona fide row carries distance exactly 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterStats {
    pub filter: String,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub distance: f64,
}

/// Gaussian KDE evaluated on a uniform grid spanning the data plus four
/// bandwidths on each side.
#[derive(Debug, Clone)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Signed mean difference between filtered and bona fide scores.
pub fn beauty_distance(filtered: &[f64], bonafide: &[f64]) -> Result<f64> {
    if filtered.is_empty() || bonafide.is_empty() {
        return Err(Error::Domain(
            "beauty distance needs non-empty score lists".into(),
        ));
    }
    Ok(mean(filtered) - mean(bonafide))
}

/// One row per filter plus the bona fide row, sorted by distance ascending
/// (ties by filter name).
pub fn filter_stats(table: &ScoreTable, source: &str) -> Result<Vec<FilterStats>> {
    if !table.has_source(source) {
        return Err(Error::Lookup {
            kind: "source",
            name: source.to_string(),
        });
    }
    let bonafide = table.bonafide_scores(source);
    if bonafide.is_empty() {
        return Err(Error::Domain(format!(
            "no bona fide records for source '{source}'"
        )));
    }
    let bonafide_mean = mean(&bonafide);

    let mut rows = vec![FilterStats {
        filter: BONAFIDE_FILTER.to_string(),
        mean: bonafide_mean,
        std_dev: population_std(&bonafide),
        distance: 0.0,
    }];
    for filter in table.attack_filters() {
        let scores = table.attack_scores(source, filter);
        if scores.is_empty() {
            continue;
        }
        rows.push(FilterStats {
            filter: filter.to_string(),
            mean: mean(&scores),
            std_dev: population_std(&scores),
            distance: mean(&scores) - bonafide_mean,
        });
    }
    rows.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .expect("distances are finite")
            .then_with(|| a.filter.cmp(&b.filter))
    });
    Ok(rows)
}

/// Gaussian KDE with Silverman's bandwidth
/// `h = 0.9 * min(sigma, IQR / 1.34) * n^(-1/5)`.
pub fn kde(scores: &[f64], grid_size: usize) -> Result<KdeCurve> {
    if grid_size < 2 {
        return Err(Error::Domain("KDE grid needs at least 2 points".into()));
    }
    let mut sorted = scores.to_vec();
    if sorted.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain("KDE scores must be finite".into()));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let distinct = {
        let mut d = sorted.clone();
        d.dedup();
        d.len()
    };
    if distinct < 2 {
        return Err(Error::DegenerateRange(
            "KDE needs at least two distinct scores".into(),
        ));
    }

    let n = sorted.len() as f64;
    let sigma = population_std(&sorted);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    // IQR collapses on heavily tied data; the dispersion estimate falls back
    // to sigma alone, which is positive whenever two values differ.
    let spread = if iqr > 0.0 {
        sigma.min(iqr / 1.34)
    } else {
        sigma
    };
    let bandwidth = 0.9 * spread * n.powf(-0.2);
    if !(bandwidth > 0.0) {
        return Err(Error::DegenerateRange(format!(
            "KDE bandwidth degenerated to {bandwidth}"
        )));
    }

    let lo = sorted[0] - 4.0 * bandwidth;
    let hi = sorted[sorted.len() - 1] + 4.0 * bandwidth;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| lo + step * i as f64).collect();

    const INV_SQRT_TAU: f64 = 0.398_942_280_401_432_7; // 1/sqrt(2*pi)
    let norm = 1.0 / (n * bandwidth);
    let density = par::map_collect(&grid, |&x| {
        let sum: f64 = sorted
            .iter()
            .map(|&s| {
                let u = (x - s) / bandwidth;
                (-0.5 * u * u).exp() * INV_SQRT_TAU
            })
            .sum();
        sum * norm
    });

    Ok(KdeCurve {
        grid,
        density,
        bandwidth,
    })
}

/// Linear-interpolation quantile of an already sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let position = q * (sorted.len() - 1) as f64;
    let lower = position.floor() as usize;
    let fraction = position - lower as f64;
    if lower + 1 < sorted.len() {
        sorted[lower] + fraction * (sorted[lower + 1] - sorted[lower])
    } else {
        sorted[lower]
    }
}

/// Writes an SVG of density curves plus one `x,density` CSV sidecar per
/// curve (named `<stem>_<curve>.csv`).
pub fn emit_kde_plot(curves: &[(String, KdeCurve)], path: &Path) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::Domain("KDE plot needs at least one curve".into()));
    }
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_hi: f64 = 0.0;
    for (_, curve) in curves {
        for (&x, &y) in curve.grid.iter().zip(&curve.density) {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_hi = y_hi.max(y);
        }
    }
    if !(x_lo < x_hi) || !(y_hi > 0.0) {
        return Err(Error::Domain("KDE curves span no area".into()));
    }
    y_hi *= 1.05;

    let series: Vec<Series> = curves
        .iter()
        .map(|(name, curve)| Series {
            name: name.clone(),
            points: curve.grid.iter().copied().zip(curve.density.iter().copied()).collect(),
        })
        .collect();

    let x_ticks = linear_ticks(x_lo, x_hi);
    let y_ticks = linear_ticks(0.0, y_hi);
    svgplot::line_plot(
        path,
        "Score densities",
        "score",
        "density",
        (x_lo, x_hi),
        (0.0, y_hi),
        &x_ticks,
        &y_ticks,
        &series,
    )?;

    for (name, curve) in curves {
        let sidecar = svgplot::sidecar_path(path, name);
        let mut out = String::from("x,density\n");
        for (x, y) in curve.grid.iter().zip(&curve.density) {
            out.push_str(&format!("{x},{y}\n"));
        }
        std::fs::write(&sidecar, out).map_err(|e| Error::io(&sidecar, e))?;
    }
    Ok(())
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let raw_step = (hi - lo) / 6.0;
    let magnitude = 10f64.powf(raw_step.abs().log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw_step)
        .unwrap_or(magnitude * 10.0);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|k| {
            let v = k as f64 * step;
            (v, format!("{v:.3}"))
        })
        .collect()
}
