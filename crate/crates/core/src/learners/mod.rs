//! From-scratch classifiers for ML-based score fusion: a bagged decision
//! forest, a linear max-margin classifier, a tiny logistic detector for the
//! synthetic end-to-end pipeline, and the repeated stratified-split
//! evaluation protocol.

pub mod forest;
pub mod logistic;
pub mod margin;

pub use forest::{score_forest, train_forest, ForestModel};
pub use logistic::{score_logistic, train_logistic, LogisticModel};
pub use margin::{score_margin, train_margin, MarginModel};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::beauty;
use crate::error::{Error, Result};
use crate::metrics;
use crate::par;
use crate::score::{Label, ScoreTable, BONAFIDE_FILTER};
use crate::seeds;

/// One training/evaluation sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Label,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, label: Label) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("feature values must be finite".into()));
        }
        Ok(FeatureVector { values, label })
    }
}

pub(crate) fn check_training_set(data: &[FeatureVector]) -> Result<usize> {
    if data.len() < 2 {
        return Err(Error::Domain("training needs at least 2 samples".into()));
    }
    let dim = data[0].values.len();
    if dim == 0 {
        return Err(Error::Domain("features must have dimension >= 1".into()));
    }
    if data.iter().any(|f| f.values.len() != dim) {
        return Err(Error::Validation(
            "all feature vectors must share one dimension".into(),
        ));
    }
    let attacks = data.iter().filter(|f| f.label == Label::Attack).count();
    if attacks == 0 || attacks == data.len() {
        return Err(Error::Domain(
            "training needs both classes present".into(),
        ));
    }
    Ok(dim)
}

/// Which learner the repeated-split protocol trains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnerKind {
    Forest { n_trees: usize },
    Margin { regularization: f64, epochs: usize },
}

/// Per-run average D-EERs of the repeated-split protocol plus their mean
/// and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedSplitReport {
    pub per_run_deer: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

struct Row {
    values: Vec<f64>,
    label: Label,
    filter: String,
}

/// Turns a joined table into per-sample score vectors ordered by the
/// table's source order.
fn rows_from_table(table: &ScoreTable) -> Result<Vec<Row>> {
    let sources = table.sources();
    if sources.is_empty() {
        return Err(Error::Domain("table has no sources".into()));
    }
    let position: BTreeMap<&str, usize> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let mut per_sample: BTreeMap<&str, (Vec<Option<f64>>, Label, &str)> = BTreeMap::new();
    for record in table.records() {
        let entry = per_sample.entry(&record.sample_id).or_insert_with(|| {
            (vec![None; sources.len()], record.label, record.filter.as_str())
        });
        entry.0[position[record.source.as_str()]] = Some(record.score);
    }

    let mut rows = Vec::with_capacity(per_sample.len());
    for (sample_id, (values, label, filter)) in per_sample {
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::Consistency(format!(
                        "sample '{sample_id}' has no score from source '{}'",
                        sources[i]
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(Row {
            values,
            label,
            filter: filter.to_string(),
        });
    }
    Ok(rows)
}

/// Repeats `repeats` stratified train/test splits: train the learner on the
/// training fraction's score vectors, then report the average per-filter
/// D-EER on the held-out fraction.
pub fn repeated_split_eval(
    table: &ScoreTable,
    learner: LearnerKind,
    train_fraction: f64,
    repeats: usize,
    seed: u64,
) -> Result<RepeatedSplitReport> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "train fraction must lie strictly inside (0, 1), got {train_fraction}"
        )));
    }
    if repeats < 1 {
        return Err(Error::Domain("repeats must be >= 1".into()));
    }
    let rows = rows_from_table(table)?;

    // Stratify by (label, filter); the label is implied by the filter name.
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        groups.entry(row.filter.as_str()).or_default().push(i);
    }
    if !groups.contains_key(BONAFIDE_FILTER) || groups.len() < 2 {
        return Err(Error::Domain(
            "table needs bona fide records and at least one attack filter".into(),
        ));
    }
    for (filter, members) in &groups {
        if members.len() < 2 {
            return Err(Error::Validation(format!(
                "filter '{filter}' has fewer than 2 samples; stratified splitting is impossible"
            )));
        }
    }

    let run_indices: Vec<u64> = (0..repeats as u64).collect();
    let per_run = par::map_collect(&run_indices, |&run| -> Result<f64> {
        let mut rng = seeds::substream(seed, "split", run);
        let mut last_error = None;
        for _ in 0..100 {
            let mut train_idx = Vec::new();
            let mut test_idx = Vec::new();
            for members in groups.values() {
                let mut shuffled = members.clone();
                shuffled.shuffle(&mut rng);
                let n_train = ((train_fraction * shuffled.len() as f64).round() as usize)
                    .clamp(1, shuffled.len() - 1);
                train_idx.extend_from_slice(&shuffled[..n_train]);
                test_idx.extend_from_slice(&shuffled[n_train..]);
            }

            match evaluate_split(&rows, &train_idx, &test_idx, learner, seed, run) {
                Ok(deer) => return Ok(deer),
                Err(e) => last_error = Some(e),
            }
        }
        Err(last_error.unwrap_or_else(|| {
            Error::Domain("no valid split found in 100 draws".into())
        }))
    });
    let per_run_deer = per_run.into_iter().collect::<Result<Vec<f64>>>()?;

    let mean = beauty::mean(&per_run_deer);
    let std_dev = beauty::population_std(&per_run_deer);
    Ok(RepeatedSplitReport {
        per_run_deer,
        mean,
        std_dev,
    })
}

fn evaluate_split(
    rows: &[Row],
    train_idx: &[usize],
    test_idx: &[usize],
    learner: LearnerKind,
    seed: u64,
    run: u64,
) -> Result<f64> {
    let train: Vec<FeatureVector> = train_idx
        .iter()
        .map(|&i| FeatureVector {
            values: rows[i].values.clone(),
            label: rows[i].label,
        })
        .collect();

    let score: Box<dyn Fn(&[f64]) -> Result<f64>> = match learner {
        LearnerKind::Forest { n_trees } => {
            let model = train_forest(&train, n_trees, seeds::substream_seed(seed, "forest", run))?;
            Box::new(move |x| score_forest(&model, x))
        }
        LearnerKind::Margin {
            regularization,
            epochs,
        } => {
            let model = train_margin(
                &train,
                regularization,
                epochs,
                seeds::substream_seed(seed, "margin", run),
            )?;
            Box::new(move |x| score_margin(&model, x))
        }
    };

    let mut bonafide = Vec::new();
    let mut per_filter: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for &i in test_idx {
        let row = &rows[i];
        let s = score(&row.values)?;
        if row.label == Label::BonaFide {
            bonafide.push(s);
        } else {
            per_filter.entry(row.filter.as_str()).or_default().push(s);
        }
    }
    if bonafide.is_empty() || per_filter.is_empty() {
        return Err(Error::Domain("split left an empty class".into()));
    }

    let mut total = 0.0;
    for scores in per_filter.values() {
        total += metrics::deer(scores, &bonafide)?.0;
    }
    Ok(total / per_filter.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::ScoreRecord;
    use rand::Rng;

    fn table(records: Vec<ScoreRecord>) -> ScoreTable {
        ScoreTable::new(records).unwrap()
    }

    fn record(sample_id: &str, source: &str, filter: &str, score: f64) -> ScoreRecord {
        let label = if filter == BONAFIDE_FILTER {
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

    fn synthetic_table(n_per_group: usize, separating: bool, seed: u64) -> ScoreTable {
        let mut rng = crate::seeds::substream(seed, "ml-table", 0);
        let mut records = Vec::new();
        for filter in [BONAFIDE_FILTER, "smooth", "warp"] {
            for i in 0..n_per_group {
                let id = format!("{filter}{i:04}");
                let informative = if separating {
                    if filter == BONAFIDE_FILTER {
                        rng.gen_range(0.0..0.45)
                    } else {
                        rng.gen_range(0.55..1.0)
                    }
                } else {
                    rng.gen_range(0.0..1.0)
                };
                records.push(record(&id, "a", filter, informative));
                records.push(record(&id, "b", filter, rng.gen_range(0.0..1.0)));
            }
        }
        table(records)
    }

    #[test]
    fn separating_feature_gives_near_zero_deer() {
        let t = synthetic_table(60, true, 71);
        for learner in [
            LearnerKind::Forest { n_trees: 30 },
            LearnerKind::Margin {
                regularization: 1e-3,
                epochs: 30,
            },
        ] {
            let report = repeated_split_eval(&t, learner, 0.7, 3, 9).unwrap();
            assert!(report.mean < 0.01, "{learner:?}: {}", report.mean);
        }
    }

    #[test]
    fn report_is_reproducible_and_consistent() {
        let t = synthetic_table(40, true, 73);
        let learner = LearnerKind::Forest { n_trees: 20 };
        let a = repeated_split_eval(&t, learner, 0.7, 4, 5).unwrap();
        let b = repeated_split_eval(&t, learner, 0.7, 4, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_run_deer.len(), 4);

        let mean = a.per_run_deer.iter().sum::<f64>() / 4.0;
        assert_eq!(a.mean, mean);
        let var =
            a.per_run_deer.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / 4.0;
        assert!((a.std_dev - var.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fraction_bounds_are_enforced() {
        let t = synthetic_table(10, true, 75);
        let learner = LearnerKind::Forest { n_trees: 5 };
        assert!(matches!(
            repeated_split_eval(&t, learner, 1.0, 2, 1).unwrap_err(),
            Error::Domain(_)
        ));
        assert!(matches!(
            repeated_split_eval(&t, learner, 0.0, 2, 1).unwrap_err(),
            Error::Domain(_)
        ));
    }

    #[test]
    fn single_sample_filter_is_rejected() {
        let mut records = vec![record("only", "a", "smooth", 0.9)];
        for i in 0..6 {
            records.push(record(&format!("b{i}"), "a", BONAFIDE_FILTER, 0.1 * i as f64));
            if i > 0 {
                records.push(record(&format!("w{i}"), "a", "warp", 0.5 + 0.05 * i as f64));
            }
        }
        let t = table(records);
        assert!(matches!(
            repeated_split_eval(&t, LearnerKind::Forest { n_trees: 5 }, 0.7, 2, 1).unwrap_err(),
            Error::Validation(_)
        ));
    }
}
