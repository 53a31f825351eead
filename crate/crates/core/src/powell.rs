//! Powell's derivative-free direction-set minimizer, plus fusion-weight
//! fitting against the average D-EER objective.
//!
//! The objective here (average D-EER as a function of fusion weights) is
//! piecewise constant: rates only change when the threshold sweep crosses a
//! score. Line searches therefore use bi-directional bracketing followed by
//! golden-section refinement, never derivatives, and a flat line search
//! leaves the current point untouched.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fusion::{self, DegeneratePolicy, FusionConfig, FUSED_SOURCE};
use crate::metrics;
use crate::score::{Label, ScoreTable};

#[derive(Debug, Clone, Copy)]
pub struct PowellSettings {
    pub max_iterations: usize,
    /// Stop when one full iteration improves the objective by less than this.
    pub objective_tolerance: f64,
    /// Golden-section interval width at which a line search stops.
    pub line_search_tolerance: f64,
    /// First probe distance of the bi-directional bracket.
    pub initial_bracket_halfwidth: f64,
}

impl Default for PowellSettings {
    fn default() -> Self {
        PowellSettings {
            max_iterations: 100,
            objective_tolerance: 1e-6,
            line_search_tolerance: 1e-5,
            initial_bracket_halfwidth: 1.0,
        }
    }
}

impl PowellSettings {
    fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Domain("max_iterations must be >= 1".into()));
        }
        if !(self.objective_tolerance > 0.0)
            || !(self.line_search_tolerance > 0.0)
            || !(self.initial_bracket_halfwidth > 0.0)
        {
            return Err(Error::Domain(
                "tolerances and bracket halfwidth must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One accepted iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub weights: Vec<f64>,
    pub objective: f64,
}

/// Full optimization audit trail. `iterations[0]` is the starting point and
/// the objective sequence is non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub iterations: Vec<TracePoint>,
    pub final_weights: Vec<f64>,
    pub final_objective: f64,
}

/// Evaluation failure inside the optimizer: the offending point.
type EvalAbort = Vec<f64>;

fn checked<F: FnMut(&[f64]) -> f64>(
    objective: &mut F,
    point: &[f64],
) -> std::result::Result<f64, EvalAbort> {
    let value = objective(point);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(point.to_vec())
    }
}

/// Minimizes `objective` from `initial` with Powell's direction-set method:
/// per iteration, a line minimization along every direction, then the
/// direction of largest single-step decrease is replaced by the iteration's
/// net displacement when Powell's acceptance test favors it.
pub fn powell_minimize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    initial: &[f64],
    settings: &PowellSettings,
) -> Result<OptimizationTrace> {
    settings.validate()?;
    if initial.is_empty() {
        return Err(Error::Domain(
            "initial point must have dimension >= 1".into(),
        ));
    }
    if initial.iter().any(|w| !w.is_finite()) {
        return Err(Error::Domain("initial point must be finite".into()));
    }

    let n = initial.len();
    let mut x = initial.to_vec();
    let mut iterations: Vec<TracePoint> = Vec::new();

    let abort = |weights: EvalAbort, iterations: Vec<TracePoint>, x: Vec<f64>, fx: f64| {
        Error::NonFiniteObjective {
            weights,
            trace: Box::new(OptimizationTrace {
                iterations,
                final_weights: x,
                final_objective: fx,
            }),
        }
    };

    let mut fx = match checked(&mut objective, &x) {
        Ok(v) => v,
        Err(w) => return Err(abort(w, iterations, x.clone(), f64::NAN)),
    };
    iterations.push(TracePoint {
        weights: x.clone(),
        objective: fx,
    });

    let mut directions: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            d
        })
        .collect();

    for _ in 0..settings.max_iterations {
        let x_start = x.clone();
        let f_start = fx;
        let mut largest_decrease = 0.0;
        let mut largest_index = 0;

        for i in 0..n {
            let f_before = fx;
            if let Err(w) = line_minimize(&mut objective, &mut x, &directions[i], &mut fx, settings)
            {
                return Err(abort(w, iterations, x, fx));
            }
            let decrease = f_before - fx;
            if decrease > largest_decrease {
                largest_decrease = decrease;
                largest_index = i;
            }
        }

        let displacement: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        if displacement.iter().any(|d| *d != 0.0) {
            let extrapolated: Vec<f64> = x.iter().zip(&displacement).map(|(a, d)| a + d).collect();
            let f_extrapolated = match checked(&mut objective, &extrapolated) {
                Ok(v) => v,
                Err(w) => return Err(abort(w, iterations, x, fx)),
            };
            // A useful net direction (the extrapolated point still improves
            // on the iteration start) evicts the direction of largest
            // single-step decrease; the net direction joins at the end of
            // the search order, where repeated iterations accumulate a
            // mutually conjugate tail on quadratics.
            if f_extrapolated < f_start {
                if let Err(w) =
                    line_minimize(&mut objective, &mut x, &displacement, &mut fx, settings)
                {
                    return Err(abort(w, iterations, x, fx));
                }
                directions.remove(largest_index);
                directions.push(displacement);
            }
        }

        iterations.push(TracePoint {
            weights: x.clone(),
            objective: fx,
        });
        if f_start - fx < settings.objective_tolerance {
            break;
        }
    }

    Ok(OptimizationTrace {
        final_weights: x,
        final_objective: fx,
        iterations,
    })
}

/// Minimizes along `dir` from `*x`. Moves `*x`/`*fx` only on strict
/// improvement, so plateaus never cause drift.
fn line_minimize<F: FnMut(&[f64]) -> f64>(
    objective: &mut F,
    x: &mut Vec<f64>,
    dir: &[f64],
    fx: &mut f64,
    settings: &PowellSettings,
) -> std::result::Result<(), EvalAbort> {
    if dir.iter().all(|d| *d == 0.0) {
        return Ok(());
    }

    fn at(x: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
        x.iter().zip(dir).map(|(xi, di)| xi + t * di).collect()
    }

    let f0 = *fx;
    let h = settings.initial_bracket_halfwidth;

    let (lo, hi) = {
        let mut g = |t: f64| checked(objective, &at(x, dir, t));
        let f_plus = g(h)?;
        let f_minus = g(-h)?;

        if f0 <= f_plus && f0 <= f_minus {
            (-h, h)
        } else {
            // walk downhill with doubling steps until the objective rises
            let (sign, mut f_mid) = if f_plus <= f_minus {
                (1.0, f_plus)
            } else {
                (-1.0, f_minus)
            };
            let mut t_back = 0.0;
            let mut t_mid = sign * h;
            let mut t_front = 2.0 * sign * h;
            for _ in 0..64 {
                let f_front = g(t_front)?;
                if f_front >= f_mid {
                    break;
                }
                t_back = t_mid;
                t_mid = t_front;
                f_mid = f_front;
                t_front *= 2.0;
            }
            (t_back.min(t_front), t_back.max(t_front))
        }
    };

    let (t_best, f_best) = {
        let mut g = |t: f64| checked(objective, &at(x, dir, t));
        golden_section(&mut g, lo, hi, settings.line_search_tolerance)?
    };
    if f_best < f0 {
        let moved = at(x, dir, t_best);
        *x = moved;
        *fx = f_best;
    }
    Ok(())
}

/// Golden-section search on `[a, b]`; returns the final interval midpoint
/// and its value, which is deterministic even on flat objectives.
fn golden_section<G>(
    g: &mut G,
    mut a: f64,
    mut b: f64,
    tolerance: f64,
) -> std::result::Result<(f64, f64), EvalAbort>
where
    G: FnMut(f64) -> std::result::Result<f64, EvalAbort>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;

    while (b - a).abs() > tolerance {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = g(x2)?;
        }
    }
    let mid = 0.5 * (a + b);
    let f_mid = g(mid)?;
    Ok((mid, f_mid))
}

/// Fits fusion weights by minimizing the average D-EER of the fused source.
///
/// The table must be inner-joined over `sources` with scores already in
/// [0, 1] (the returned config carries unit source ranges). Weights start at
/// 1/N each. The returned config stores the fused renormalization range and
/// the pooled-D-EER threshold observed at the fitted weights.
pub fn fit_fusion_weights(
    table: &ScoreTable,
    sources: &[String],
    settings: &PowellSettings,
) -> Result<(FusionConfig, OptimizationTrace)> {
    if sources.is_empty() {
        return Err(Error::Domain("fit needs at least one source".into()));
    }
    for source in sources {
        if !table.has_source(source) {
            return Err(Error::Lookup {
                kind: "source",
                name: source.clone(),
            });
        }
    }
    let n = sources.len();
    let base = FusionConfig::with_unit_ranges(sources, vec![1.0 / n as f64; n])?;

    // Fail fast on tables the objective cannot evaluate.
    {
        let probe = fusion::fuse_with_policy(table, &base, DegeneratePolicy::MapToMidpoint)?;
        metrics::average_deer(&probe, FUSED_SOURCE)?;
    }

    let objective = |weights: &[f64]| -> f64 {
        let mut config = base.clone();
        config.weights = weights.to_vec();
        fusion::fuse_with_policy(table, &config, DegeneratePolicy::MapToMidpoint)
            .and_then(|fused| metrics::average_deer(&fused, FUSED_SOURCE))
            .unwrap_or(f64::NAN)
    };

    let initial = vec![1.0 / n as f64; n];
    let trace = powell_minimize(objective, &initial, settings)?;

    let mut config = base;
    config.weights = trace.final_weights.clone();
    let (lo, hi) = fusion::fused_raw_range(table, &config)?;
    config.fused_renorm_min = Some(lo);
    config.fused_renorm_max = Some(hi);

    let fused = fusion::fuse(table, &config)?;
    let attack: Vec<f64> = fused
        .records()
        .iter()
        .filter(|r| r.source == FUSED_SOURCE && r.label == Label::Attack)
        .map(|r| r.score)
        .collect();
    let bonafide: Vec<f64> = fused
        .records()
        .iter()
        .filter(|r| r.source == FUSED_SOURCE && r.label == Label::BonaFide)
        .map(|r| r.score)
        .collect();
    let (_, threshold) = metrics::deer(&attack, &bonafide)?;
    config.calibrated_threshold = Some(threshold);

    Ok((config, trace))
}

/// Writes `iteration,objective,w_1..w_N` rows; the leading comment line pins
/// the settings the run used.
pub fn write_trace_csv(
    trace: &OptimizationTrace,
    settings: &PowellSettings,
    path: &Path,
) -> Result<()> {
    use std::io::Write;

    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    let n = trace.final_weights.len();

    writeln!(
        writer,
        "# max_iterations={} objective_tolerance={} line_search_tolerance={} initial_bracket_halfwidth={}",
        settings.max_iterations,
        settings.objective_tolerance,
        settings.line_search_tolerance,
        settings.initial_bracket_halfwidth
    )
    .map_err(|e| Error::io(path, e))?;

    let header: Vec<String> = ["iteration".to_string(), "objective".to_string()]
        .into_iter()
        .chain((1..=n).map(|i| format!("w_{i}")))
        .collect();
    writeln!(writer, "{}", header.join(",")).map_err(|e| Error::io(path, e))?;

    for (i, point) in trace.iterations.iter().enumerate() {
        let mut row = format!("{i},{}", point.objective);
        for w in &point.weights {
            row.push(',');
            row.push_str(&format!("{w}"));
        }
        writeln!(writer, "{row}").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{ScoreRecord, ScoreTable};
    use rand::Rng;

    fn settings() -> PowellSettings {
        PowellSettings::default()
    }

    #[test]
    fn quadratic_bowl() {
        let f = |w: &[f64]| (w[0] - 1.0).powi(2) + (w[1] + 2.0).powi(2);
        let trace = powell_minimize(f, &[0.0, 0.0], &settings()).unwrap();
        assert!((trace.final_weights[0] - 1.0).abs() < 1e-4);
        assert!((trace.final_weights[1] + 2.0).abs() < 1e-4);
        assert!(trace.final_objective < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let f = |w: &[f64]| (1.0 - w[0]).powi(2) + 100.0 * (w[1] - w[0] * w[0]).powi(2);
        let trace = powell_minimize(f, &[-1.2, 1.0], &settings()).unwrap();
        assert!(
            (trace.final_weights[0] - 1.0).abs() < 1e-3,
            "{:?}",
            trace.final_weights
        );
        assert!((trace.final_weights[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn trace_objective_is_monotone() {
        let f = |w: &[f64]| (1.0 - w[0]).powi(2) + 100.0 * (w[1] - w[0] * w[0]).powi(2);
        let trace = powell_minimize(f, &[-1.2, 1.0], &settings()).unwrap();
        assert!(trace.iterations.len() >= 2);
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].objective <= pair[0].objective);
        }
        assert!(trace.final_objective <= trace.iterations[0].objective);
    }

    #[test]
    fn coordinate_permutation_leaves_objective_value() {
        // same landscape with relabeled coordinates
        let f = |w: &[f64]| {
            (w[0] - 0.3).powi(2) + 2.0 * (w[1] + 0.7).powi(2) + 0.5 * (w[2] - 1.1).powi(2)
        };
        let g = |w: &[f64]| f(&[w[2], w[0], w[1]]);
        let tf = powell_minimize(f, &[0.0, 0.0, 0.0], &settings()).unwrap();
        let tg = powell_minimize(g, &[0.0, 0.0, 0.0], &settings()).unwrap();
        assert!((tf.final_objective - tg.final_objective).abs() < 1e-6);
    }

    #[test]
    fn flat_objective_stays_put() {
        let f = |_: &[f64]| 0.25;
        let trace = powell_minimize(f, &[0.5, 0.5], &settings()).unwrap();
        assert_eq!(trace.final_weights, vec![0.5, 0.5]);
        assert_eq!(trace.final_objective, 0.25);
    }

    #[test]
    fn spd_quadratics_converge_within_dimension_plus_one() {
        let mut rng = crate::seeds::substream(31, "spd", 0);
        for n in 1..=5 {
            for trial in 0..3 {
                // A = M^T M + I/2, f = (w - c)^T A (w - c)
                let m: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect();
                let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let f = move |w: &[f64]| {
                    let d: Vec<f64> = w.iter().zip(&c).map(|(a, b)| a - b).collect();
                    let mut quad = 0.0;
                    for row in &m {
                        let s: f64 = row.iter().zip(&d).map(|(a, b)| a * b).sum();
                        quad += s * s;
                    }
                    quad + 0.5 * d.iter().map(|v| v * v).sum::<f64>()
                };
                let tight = PowellSettings {
                    line_search_tolerance: 1e-8,
                    ..PowellSettings::default()
                };
                let trace = powell_minimize(f, &vec![0.0; n], &tight).unwrap();
                let at = (n + 1).min(trace.iterations.len() - 1);
                assert!(
                    trace.iterations[at].objective < 1e-6,
                    "n={n} trial={trial}: objective {} after {at} iterations",
                    trace.iterations[at].objective
                );
            }
        }
    }

    #[test]
    fn non_finite_objective_aborts_with_trace() {
        let f = |w: &[f64]| {
            if w[0] > 0.5 {
                f64::NAN
            } else {
                (w[0] - 2.0).powi(2)
            }
        };
        match powell_minimize(f, &[0.0], &settings()) {
            Err(Error::NonFiniteObjective { weights, trace }) => {
                assert!(weights[0] > 0.5);
                assert!(!trace.iterations.is_empty());
            }
            other => panic!("expected NonFiniteObjective, got {other:?}"),
        }
    }

    #[test]
    fn empty_initial_rejected() {
        assert!(matches!(
            powell_minimize(|_| 0.0, &[], &settings()).unwrap_err(),
            Error::Domain(_)
        ));
    }

    fn record(sample_id: &str, source: &str, filter: &str, score: f64) -> ScoreRecord {
        let label = if filter == "bonafide" {
            Label::BonaFide
        } else {
            Label::Attack
        };
        ScoreRecord {
            sample_id: sample_id.into(),
            source: source.into(),
            filter: filter.into(),
            label,
            score,
        }
    }

    fn synthetic_table(rng: &mut impl Rng, informative: bool) -> ScoreTable {
        let mut records = Vec::new();
        for i in 0..60 {
            let (filter, base) = match i % 3 {
                0 => ("bonafide", 0.3),
                1 => ("smooth", 0.7),
                _ => ("warp", 0.7),
            };
            let id = format!("s{i:03}");
            let jitter: f64 = rng.gen_range(-0.1..0.1);
            let good = (base + jitter).clamp(0.0, 1.0);
            let noise = rng.gen_range(0.0..1.0);
            records.push(record(&id, "good", filter, if informative { good } else { noise }));
            records.push(record(&id, "noise", filter, rng.gen_range(0.0..1.0)));
        }
        ScoreTable::new(records).unwrap()
    }

    #[test]
    fn fit_single_source_keeps_unit_weight() {
        let mut rng = crate::seeds::substream(37, "fit1", 0);
        let table = synthetic_table(&mut rng, true);
        let (config, trace) = fit_fusion_weights(
            &table,
            &["good".to_string()],
            &settings(),
        )
        .unwrap();
        assert_eq!(config.weights, vec![1.0]);
        assert_eq!(
            trace.final_objective,
            metrics::average_deer(&table, "good").unwrap()
        );
        assert!(config.calibrated_threshold.is_some());
    }

    #[test]
    fn fit_duplicated_source_matches_single_source() {
        let mut rng = crate::seeds::substream(37, "fitdup", 0);
        let base = synthetic_table(&mut rng, true);
        // the "good" scores again under a second source name
        let doubled: Vec<ScoreRecord> = base
            .records()
            .iter()
            .filter(|r| r.source == "good")
            .cloned()
            .chain(
                base.records()
                    .iter()
                    .filter(|r| r.source == "good")
                    .map(|r| ScoreRecord {
                        source: "copy".into(),
                        ..r.clone()
                    }),
            )
            .collect();
        let table = ScoreTable::new(doubled).unwrap();
        let single = metrics::average_deer(&base, "good").unwrap();

        for weights in [[0.5, 0.5], [2.0, -1.0], [0.3, 0.7]] {
            let config = FusionConfig::with_unit_ranges(
                &["good".into(), "copy".into()],
                weights.to_vec(),
            )
            .unwrap();
            let fused = fusion::fuse(&table, &config).unwrap();
            assert_eq!(metrics::average_deer(&fused, FUSED_SOURCE).unwrap(), single);
        }
    }

    #[test]
    fn fit_never_worse_than_equal_weights() {
        let mut rng = crate::seeds::substream(41, "fit2", 0);
        let table = synthetic_table(&mut rng, true);
        let sources = vec!["good".to_string(), "noise".to_string()];
        let (config, trace) = fit_fusion_weights(&table, &sources, &settings()).unwrap();
        assert_eq!(trace.iterations[0].weights, vec![0.5, 0.5]);
        assert!(trace.final_objective <= trace.iterations[0].objective);
        assert_eq!(config.weights, trace.final_weights);
    }

    #[test]
    fn trace_csv_layout() {
        let f = |w: &[f64]| (w[0] - 1.0).powi(2) + (w[1] + 2.0).powi(2);
        let trace = powell_minimize(f, &[0.0, 0.0], &settings()).unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        write_trace_csv(&trace, &settings(), file.path()).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# max_iterations=100"));
        assert_eq!(lines.next().unwrap(), "iteration,objective,w_1,w_2");
        assert!(lines.next().unwrap().starts_with("0,"));
    }
}
