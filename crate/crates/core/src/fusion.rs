//! Min-max score normalization, weighted-sum fusion, and fusion-config
//! persistence.
//!
//! Fusing maps each source's scores into the target range via its declared
//! range, forms the per-sample weighted sum, and then re-normalizes the
//! fused population to [0, 1] so that a negative-weighted source can never
//! push scores outside probability range.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::score::{ScoreRecord, ScoreTable, SourceRange};

/// Source name given to fused scores.
pub const FUSED_SOURCE: &str = "fused";

/// Config schema version this build reads and writes.
pub const FORMAT_VERSION: u64 = 1;

/// Everything needed to reproduce a fitted fusion on new data.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionConfig {
    pub format_version: u64,
    /// Source order; weights align with this order.
    pub sources: Vec<String>,
    /// Weights may be negative.
    pub weights: Vec<f64>,
    pub source_ranges: Vec<SourceRange>,
    pub target_range: (f64, f64),
    /// Fused-population range observed when the config was fitted; applied
    /// instead of the empirical range so a calibrated threshold keeps its
    /// meaning on new data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fused_renorm_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fused_renorm_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrated_threshold: Option<f64>,
}

impl FusionConfig {
    /// Config with unit ranges and the given weights, the shape produced by
    /// weight fitting on pre-normalized tables.
    pub fn with_unit_ranges(sources: &[String], weights: Vec<f64>) -> Result<Self> {
        let source_ranges = sources
            .iter()
            .map(|s| SourceRange::new(s.clone(), 0.0, 1.0))
            .collect::<Result<Vec<_>>>()?;
        let config = FusionConfig {
            format_version: FORMAT_VERSION,
            sources: sources.to_vec(),
            weights,
            source_ranges,
            target_range: (0.0, 1.0),
            fused_renorm_min: None,
            fused_renorm_max: None,
            calibrated_threshold: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Validation("config has no sources".into()));
        }
        if self.sources.len() != self.weights.len() {
            return Err(Error::Validation(format!(
                "config has {} sources but {} weights",
                self.sources.len(),
                self.weights.len()
            )));
        }
        if self.sources.len() != self.source_ranges.len() {
            return Err(Error::Validation(format!(
                "config has {} sources but {} source ranges",
                self.sources.len(),
                self.source_ranges.len()
            )));
        }
        for (source, range) in self.sources.iter().zip(&self.source_ranges) {
            if source != &range.source {
                return Err(Error::Validation(format!(
                    "source_ranges order mismatch: expected '{source}', found '{}'",
                    range.source
                )));
            }
            if !(range.min < range.max) {
                return Err(Error::Validation(format!(
                    "source '{source}' has empty range [{}, {}]",
                    range.min, range.max
                )));
            }
        }
        let mut sorted = self.sources.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.sources.len() {
            return Err(Error::Validation("duplicate source in config".into()));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Validation("weights must be finite".into()));
        }
        let (a, b) = self.target_range;
        if !(a < b) {
            return Err(Error::Validation(format!(
                "target range [{a}, {b}] is empty"
            )));
        }
        match (self.fused_renorm_min, self.fused_renorm_max) {
            (None, None) => {}
            (Some(lo), Some(hi)) if lo < hi => {}
            _ => {
                return Err(Error::Validation(
                    "fused_renorm_min/max must both be present with min < max".into(),
                ))
            }
        }
        Ok(())
    }
}

/// Min-max mapping of `x` from `[range_min, range_max]` onto `[a, b]`,
/// clamped so out-of-range inputs land on the target boundaries.
pub fn normalize(x: f64, range_min: f64, range_max: f64, a: f64, b: f64) -> Result<f64> {
    if !(range_min < range_max) {
        return Err(Error::Domain(format!(
            "normalization range [{range_min}, {range_max}] is empty"
        )));
    }
    if !(a < b) {
        return Err(Error::Domain(format!("target range [{a}, {b}] is empty")));
    }
    let mapped = (x - range_min) * (b - a) / (range_max - range_min) + a;
    Ok(mapped.clamp(a, b))
}

/// Where a source's input range comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizationMode {
    /// Known score range, e.g. 1..10 for a beauty classifier.
    Declared { min: f64, max: f64 },
    /// Observed min/max of the source within the table.
    Empirical,
}

/// Rewrites one source's scores through [`normalize`] onto `[a, b]`.
pub fn normalize_source(
    table: &ScoreTable,
    source: &str,
    mode: NormalizationMode,
    a: f64,
    b: f64,
) -> Result<ScoreTable> {
    if !table.has_source(source) {
        return Err(Error::Lookup {
            kind: "source",
            name: source.to_string(),
        });
    }
    let (min, max) = match mode {
        NormalizationMode::Declared { min, max } => (min, max),
        NormalizationMode::Empirical => empirical_range(table, source)?,
    };
    let records = table
        .records()
        .iter()
        .map(|r| {
            if r.source == source {
                Ok(ScoreRecord {
                    score: normalize(r.score, min, max, a, b)?,
                    ..r.clone()
                })
            } else {
                Ok(r.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreTable::new(records)
}

/// Observed min/max of one source. Constant scores have no usable range.
pub fn empirical_range(table: &ScoreTable, source: &str) -> Result<(f64, f64)> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for record in table.records() {
        if record.source == source {
            min = min.min(record.score);
            max = max.max(record.score);
        }
    }
    if min > max {
        return Err(Error::Lookup {
            kind: "source",
            name: source.to_string(),
        });
    }
    if min == max {
        return Err(Error::DegenerateRange(format!(
            "scores for source '{source}' are constant ({min}); \
             empirical normalization is impossible — declare a range for this source"
        )));
    }
    Ok((min, max))
}

/// What to do when the fused population is constant and no stored renorm
/// range exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneratePolicy {
    /// Report the degenerate range.
    Error,
    /// Map every fused score to the range midpoint (0.5). Opt-in: constants
    /// usually indicate an ingestion bug, but a weight optimizer probing
    /// all-zero weights needs a defined value.
    MapToMidpoint,
}

/// Weighted-sum fusion. Adds a synthetic `fused` source holding, per sample,
/// the weighted sum of that sample's normalized source scores, re-normalized
/// over the fused population (or through the config's stored renorm range).
pub fn fuse(table: &ScoreTable, config: &FusionConfig) -> Result<ScoreTable> {
    fuse_with_policy(table, config, DegeneratePolicy::Error)
}

/// [`fuse`] with explicit handling of a constant fused population.
pub fn fuse_with_policy(
    table: &ScoreTable,
    config: &FusionConfig,
    policy: DegeneratePolicy,
) -> Result<ScoreTable> {
    let raw = fused_raw_scores(table, config)?;

    let renorm = match (config.fused_renorm_min, config.fused_renorm_max) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        _ => {
            let lo = raw.values().fold(f64::INFINITY, |m, &(v, ..)| m.min(v));
            let hi = raw.values().fold(f64::NEG_INFINITY, |m, &(v, ..)| m.max(v));
            if lo < hi {
                Some((lo, hi))
            } else {
                match policy {
                    DegeneratePolicy::MapToMidpoint => None,
                    DegeneratePolicy::Error => {
                        return Err(Error::DegenerateRange(format!(
                            "fused scores are constant ({lo}); cannot re-normalize"
                        )))
                    }
                }
            }
        }
    };

    let mut records = table.records().to_vec();
    for (sample_id, (value, filter, label)) in raw {
        let score = match renorm {
            Some((lo, hi)) => normalize(value, lo, hi, 0.0, 1.0)?,
            None => 0.5,
        };
        records.push(ScoreRecord {
            sample_id,
            source: FUSED_SOURCE.to_string(),
            filter,
            label,
            score,
        });
    }
    ScoreTable::new(records)
}

/// Raw (pre-renormalization) fused score per sample, with the sample's
/// filter and label. Ordered by sample id.
fn fused_raw_scores(
    table: &ScoreTable,
    config: &FusionConfig,
) -> Result<BTreeMap<String, (f64, String, crate::score::Label)>> {
    config.validate()?;
    if table.has_source(FUSED_SOURCE) {
        return Err(Error::Validation(
            "table already contains a 'fused' source".into(),
        ));
    }
    for source in &config.sources {
        if !table.has_source(source) {
            return Err(Error::Lookup {
                kind: "source",
                name: source.clone(),
            });
        }
    }

    let mut per_sample: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    let mut meta: HashMap<&str, (&str, crate::score::Label)> = HashMap::new();
    let position: HashMap<&str, usize> = config
        .sources
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let n = config.sources.len();
    for record in table.records() {
        meta.entry(&record.sample_id)
            .or_insert((&record.filter, record.label));
        if let Some(&i) = position.get(record.source.as_str()) {
            let range = &config.source_ranges[i];
            let (a, b) = config.target_range;
            let normalized = normalize(record.score, range.min, range.max, a, b)?;
            per_sample
                .entry(&record.sample_id)
                .or_insert_with(|| vec![None; n])[i] = Some(normalized);
        }
    }

    let mut fused = BTreeMap::new();
    for (sample_id, values) in per_sample {
        let mut sum = 0.0;
        for (i, value) in values.iter().enumerate() {
            match value {
                Some(v) => sum += config.weights[i] * v,
                None => {
                    return Err(Error::Consistency(format!(
                        "sample '{sample_id}' has no score from source '{}'",
                        config.sources[i]
                    )))
                }
            }
        }
        let (filter, label) = meta[sample_id];
        fused.insert(sample_id.to_string(), (sum, filter.to_string(), label));
    }
    Ok(fused)
}

/// Fused-population raw range at the config's weights, the pair stored as
/// `fused_renorm_min/max` after fitting.
pub fn fused_raw_range(table: &ScoreTable, config: &FusionConfig) -> Result<(f64, f64)> {
    let raw = fused_raw_scores(table, config)?;
    let lo = raw.values().fold(f64::INFINITY, |m, &(v, ..)| m.min(v));
    let hi = raw.values().fold(f64::NEG_INFINITY, |m, &(v, ..)| m.max(v));
    if !(lo < hi) {
        return Err(Error::DegenerateRange(format!(
            "fused scores are constant ({lo})"
        )));
    }
    Ok((lo, hi))
}

pub fn save_config(config: &FusionConfig, path: &Path) -> Result<()> {
    config.validate()?;
    let mut text = serde_json::to_string_pretty(config)
        .map_err(|e| Error::Validation(format!("config serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_config(path: &Path) -> Result<FusionConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "missing format_version".into(),
        })?;
    if found != FORMAT_VERSION {
        return Err(Error::Schema {
            found,
            supported: FORMAT_VERSION,
        });
    }
    let config: FusionConfig = serde_json::from_value(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{Label, ScoreRecord, SourceRange};
    use rand::Rng;

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

    #[test]
    fn normalize_matches_closed_form() {
        let y = normalize(5.0, 1.0, 10.0, 0.0, 1.0).unwrap();
        assert_eq!(y, 4.0 / 9.0);
    }

    #[test]
    fn normalize_boundaries_and_midpoint() {
        assert_eq!(normalize(1.0, 1.0, 10.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(normalize(10.0, 1.0, 10.0, 0.0, 1.0).unwrap(), 1.0);
        // Beholder-style declared range 1..5: 3 is the midpoint.
        assert_eq!(normalize(3.0, 1.0, 5.0, 0.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn normalize_clamps_out_of_range() {
        assert_eq!(normalize(12.0, 1.0, 10.0, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(normalize(-3.0, 1.0, 10.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn normalize_rejects_empty_range() {
        assert!(matches!(
            normalize(1.0, 2.0, 2.0, 0.0, 1.0).unwrap_err(),
            Error::Domain(_)
        ));
    }

    #[test]
    fn normalize_is_order_preserving() {
        let mut rng = crate::seeds::substream(17, "order", 0);
        for _ in 0..200 {
            let x: f64 = rng.gen_range(-5.0..5.0);
            let y: f64 = rng.gen_range(-5.0..5.0);
            if x == y {
                continue;
            }
            let (lo, hi) = (x.min(y), x.max(y));
            let a = normalize(lo, -5.0, 5.0, 2.0, 7.0).unwrap();
            let b = normalize(hi, -5.0, 5.0, 2.0, 7.0).unwrap();
            assert!(a < b);
        }
    }

    #[test]
    fn normalize_source_declared_and_empirical() {
        let table = ScoreTable::new(vec![
            record("a", "x", "bonafide", 2.0),
            record("b", "x", "meitu", 4.0),
            record("c", "x", "meitu", 6.0),
        ])
        .unwrap();
        let declared = normalize_source(
            &table,
            "x",
            NormalizationMode::Declared { min: 1.0, max: 10.0 },
            0.0,
            1.0,
        )
        .unwrap();
        let scores: Vec<f64> = declared.records().iter().map(|r| r.score).collect();
        assert_eq!(scores, vec![1.0 / 9.0, 3.0 / 9.0, 5.0 / 9.0]);

        let empirical =
            normalize_source(&table, "x", NormalizationMode::Empirical, 0.0, 1.0).unwrap();
        let scores: Vec<f64> = empirical.records().iter().map(|r| r.score).collect();
        assert_eq!(scores, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_source_constant_scores_error() {
        let table = ScoreTable::new(vec![
            record("a", "x", "bonafide", 3.0),
            record("b", "x", "meitu", 3.0),
        ])
        .unwrap();
        let err =
            normalize_source(&table, "x", NormalizationMode::Empirical, 0.0, 1.0).unwrap_err();
        match err {
            Error::DegenerateRange(msg) => assert!(msg.contains("declare a range"), "{msg}"),
            other => panic!("expected degenerate range, got {other:?}"),
        }
    }

    fn two_source_table() -> ScoreTable {
        ScoreTable::new(vec![
            record("a", "x", "bonafide", 0.2),
            record("a", "y", "bonafide", 0.8),
            record("b", "x", "meitu", 0.9),
            record("b", "y", "meitu", 0.4),
            record("c", "x", "meitu", 0.5),
            record("c", "y", "meitu", 0.5),
        ])
        .unwrap()
    }

    #[test]
    fn fuse_weighted_sum_and_renormalization() {
        let table = two_source_table();
        let config =
            FusionConfig::with_unit_ranges(&["x".into(), "y".into()], vec![0.5, 0.5]).unwrap();
        let fused = fuse(&table, &config).unwrap();
        // raw sums: a = 0.5, b = 0.65, c = 0.5 -> renormalized over [0.5, 0.65]
        let score = |id: &str| {
            fused
                .records()
                .iter()
                .find(|r| r.source == FUSED_SOURCE && r.sample_id == id)
                .unwrap()
                .score
        };
        assert_eq!(score("a"), 0.0);
        assert_eq!(score("b"), 1.0);
        assert_eq!(score("c"), 0.0);
        assert!(fused.has_source("x") && fused.has_source("y"));
    }

    #[test]
    fn fuse_weights_from_three_source_fit() {
        // weighted sum with weights (0.3304, 0.0851, 0.4150) on unit scores
        let table = ScoreTable::new(vec![
            record("a", "x", "bonafide", 1.0),
            record("a", "y", "bonafide", 1.0),
            record("a", "z", "bonafide", 1.0),
            record("b", "x", "meitu", 0.0),
            record("b", "y", "meitu", 0.0),
            record("b", "z", "meitu", 0.0),
        ])
        .unwrap();
        let config = FusionConfig::with_unit_ranges(
            &["x".into(), "y".into(), "z".into()],
            vec![0.3304, 0.0851, 0.4150],
        )
        .unwrap();
        let (lo, hi) = fused_raw_range(&table, &config).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.8305).abs() < 1e-12);
    }

    #[test]
    fn negative_weight_lowers_fused_score() {
        let base = |w_y: f64| {
            let table = ScoreTable::new(vec![
                record("a", "x", "bonafide", 0.1),
                record("a", "y", "bonafide", 0.1),
                record("b", "x", "meitu", 0.5),
                record("b", "y", "meitu", 0.9),
                record("c", "x", "meitu", 0.6),
                record("c", "y", "meitu", 0.2),
            ])
            .unwrap();
            let config =
                FusionConfig::with_unit_ranges(&["x".into(), "y".into()], vec![0.5657, w_y])
                    .unwrap();
            let raw = fused_raw_scores(&table, &config).unwrap();
            raw["b"].0
        };
        assert!(base(-0.3314) < base(0.0));
    }

    #[test]
    fn fuse_missing_source_for_sample() {
        let table = ScoreTable::new(vec![
            record("a", "x", "bonafide", 0.2),
            record("a", "y", "bonafide", 0.8),
            record("b", "x", "meitu", 0.9),
        ])
        .unwrap();
        let config =
            FusionConfig::with_unit_ranges(&["x".into(), "y".into()], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            fuse(&table, &config).unwrap_err(),
            Error::Consistency(_)
        ));
    }

    #[test]
    fn fuse_ranking_is_preserved_by_renormalization() {
        let mut rng = crate::seeds::substream(23, "rank", 0);
        let mut records = Vec::new();
        for i in 0..40 {
            let filter = if i % 2 == 0 { "bonafide" } else { "meitu" };
            records.push(record(&format!("s{i:02}"), "x", filter, rng.gen()));
            records.push(record(&format!("s{i:02}"), "y", filter, rng.gen()));
        }
        let table = ScoreTable::new(records).unwrap();
        let config =
            FusionConfig::with_unit_ranges(&["x".into(), "y".into()], vec![0.7, 0.3]).unwrap();

        let raw = fused_raw_scores(&table, &config).unwrap();
        let fused = fuse(&table, &config).unwrap();
        let mut by_raw: Vec<(&String, f64)> = raw.iter().map(|(k, v)| (k, v.0)).collect();
        by_raw.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let mut by_final: Vec<(&String, f64)> = fused
            .records()
            .iter()
            .filter(|r| r.source == FUSED_SOURCE)
            .map(|r| (&r.sample_id, r.score))
            .collect();
        by_final.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let raw_order: Vec<&String> = by_raw.into_iter().map(|(k, _)| k).collect();
        let final_order: Vec<&String> = by_final.into_iter().map(|(k, _)| k).collect();
        assert_eq!(raw_order, final_order);
    }

    #[test]
    fn single_source_unit_weight_is_renormalized_identity() {
        let table = ScoreTable::new(vec![
            record("a", "x", "bonafide", 0.0),
            record("b", "x", "meitu", 0.25),
            record("c", "x", "meitu", 1.0),
        ])
        .unwrap();
        let config = FusionConfig::with_unit_ranges(&["x".into()], vec![1.0]).unwrap();
        let fused = fuse(&table, &config).unwrap();
        for r in fused.records().iter().filter(|r| r.source == FUSED_SOURCE) {
            let original = table
                .records()
                .iter()
                .find(|o| o.sample_id == r.sample_id)
                .unwrap();
            assert_eq!(r.score, original.score);
        }
    }

    #[test]
    fn fuse_degenerate_policies() {
        let table = ScoreTable::new(vec![
            record("a", "x", "bonafide", 0.4),
            record("b", "x", "meitu", 0.4),
        ])
        .unwrap();
        let config = FusionConfig::with_unit_ranges(&["x".into()], vec![1.0]).unwrap();
        assert!(matches!(
            fuse(&table, &config).unwrap_err(),
            Error::DegenerateRange(_)
        ));
        let fused = fuse_with_policy(&table, &config, DegeneratePolicy::MapToMidpoint).unwrap();
        for r in fused.records().iter().filter(|r| r.source == FUSED_SOURCE) {
            assert_eq!(r.score, 0.5);
        }
    }

    #[test]
    fn config_round_trip() {
        let config = FusionConfig {
            format_version: FORMAT_VERSION,
            sources: vec!["srm".into(), "dct".into(), "rgb".into(), "beholder".into(), "mebeauty".into()],
            weights: vec![0.5657, -0.3314, 0.1421, 0.1936, 0.1897],
            source_ranges: vec![
                SourceRange::new("srm", 0.0, 1.0).unwrap(),
                SourceRange::new("dct", 0.0, 1.0).unwrap(),
                SourceRange::new("rgb", 0.0, 1.0).unwrap(),
                SourceRange::new("beholder", 1.0, 5.0).unwrap(),
                SourceRange::new("mebeauty", 1.0, 10.0).unwrap(),
            ],
            target_range: (0.0, 1.0),
            fused_renorm_min: Some(-0.12),
            fused_renorm_max: Some(0.93),
            calibrated_threshold: Some(0.41),
        };
        let file = tempfile::NamedTempFile::new().unwrap();
        save_config(&config, file.path()).unwrap();
        let loaded = load_config(file.path()).unwrap();
        assert_eq!(config, loaded);
    }

    #[test]
    fn config_without_threshold_loads_absent() {
        let file = tempfile::NamedTempFile::new().unwrap();
        let config = FusionConfig::with_unit_ranges(&["x".into()], vec![1.0]).unwrap();
        save_config(&config, file.path()).unwrap();
        let loaded = load_config(file.path()).unwrap();
        assert_eq!(loaded.calibrated_threshold, None);
    }

    #[test]
    fn config_weight_count_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{
  "format_version": 1,
  "sources": ["a", "b", "c"],
  "weights": [0.5, 0.5],
  "source_ranges": [
    {"source": "a", "min": 0.0, "max": 1.0},
    {"source": "b", "min": 0.0, "max": 1.0},
    {"source": "c", "min": 0.0, "max": 1.0}
  ],
  "target_range": [0.0, 1.0]
}"#,
        )
        .unwrap();
        assert!(matches!(
            load_config(&path).unwrap_err(),
            Error::Validation(_)
        ));
    }

    #[test]
    fn config_unknown_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("future.json");
        std::fs::write(&path, r#"{"format_version": 99}"#).unwrap();
        assert!(matches!(
            load_config(&path).unwrap_err(),
            Error::Schema { found: 99, .. }
        ));
    }
}
