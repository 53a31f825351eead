//! Score data model, CSV ingestion, and table operations.
//!
//! A [`ScoreTable`] holds one scalar score per `(sample_id, source)` pair
//! together with the sample's ground-truth label and the retouch filter that
//! produced it. Tables are immutable after construction and safe to share
//! across threads.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};

/// Filter name reserved for unaltered samples.
pub const BONAFIDE_FILTER: &str = "bonafide";

const SCORE_CSV_HEADER: [&str; 4] = ["sample_id", "filter", "label", "score"];

/// Ground truth for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    BonaFide,
    Attack,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::BonaFide => "bonafide",
            Label::Attack => "attack",
        }
    }

    pub fn parse(text: &str) -> Option<Label> {
        match text {
            "bonafide" => Some(Label::BonaFide),
            "attack" => Some(Label::Attack),
            _ => None,
        }
    }
}

/// One scalar score for one sample from one score source.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub sample_id: String,
    pub source: String,
    pub filter: String,
    pub label: Label,
    pub score: f64,
}

/// Declared score range of one source, e.g. 1..10 for a beauty classifier.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SourceRange {
    pub source: String,
    pub min: f64,
    pub max: f64,
}

impl SourceRange {
    pub fn new(source: impl Into<String>, min: f64, max: f64) -> Result<Self> {
        if !(min < max) {
            return Err(Error::Domain(format!(
                "source range requires min < max, got [{min}, {max}]"
            )));
        }
        Ok(SourceRange {
            source: source.into(),
            min,
            max,
        })
    }
}

/// A validated, immutable collection of score records.
#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    records: Vec<ScoreRecord>,
    sources: Vec<String>,
    filters: BTreeSet<String>,
}

impl ScoreTable {
    /// Builds a table from records, checking every invariant:
    /// finite scores, filter/label agreement, unique `(sample_id, source)`
    /// pairs, and one label (and filter) per sample across sources.
    pub fn new(records: Vec<ScoreRecord>) -> Result<Self> {
        let mut sources: Vec<String> = Vec::new();
        let mut filters = BTreeSet::new();
        let mut seen: HashSet<(&str, &str)> = HashSet::with_capacity(records.len());
        let mut per_sample: HashMap<&str, (Label, &str)> = HashMap::new();

        for record in &records {
            if !record.score.is_finite() {
                return Err(Error::Validation(format!(
                    "non-finite score for sample '{}' source '{}'",
                    record.sample_id, record.source
                )));
            }
            let is_bonafide_filter = record.filter == BONAFIDE_FILTER;
            if is_bonafide_filter != (record.label == Label::BonaFide) {
                return Err(Error::Validation(format!(
                    "sample '{}' has filter '{}' but label '{}'",
                    record.sample_id,
                    record.filter,
                    record.label.as_str()
                )));
            }
            if !seen.insert((record.sample_id.as_str(), record.source.as_str())) {
                return Err(Error::Validation(format!(
                    "duplicate record for sample '{}' source '{}'",
                    record.sample_id, record.source
                )));
            }
            match per_sample.get(record.sample_id.as_str()) {
                None => {
                    per_sample.insert(&record.sample_id, (record.label, &record.filter));
                }
                Some(&(label, filter)) => {
                    if label != record.label {
                        return Err(Error::Consistency(format!(
                            "sample '{}' is labeled both '{}' and '{}'",
                            record.sample_id,
                            label.as_str(),
                            record.label.as_str()
                        )));
                    }
                    if filter != record.filter {
                        return Err(Error::Consistency(format!(
                            "sample '{}' carries filters '{}' and '{}'",
                            record.sample_id, filter, record.filter
                        )));
                    }
                }
            }
            if !sources.iter().any(|s| s == &record.source) {
                sources.push(record.source.clone());
            }
            filters.insert(record.filter.clone());
        }

        Ok(ScoreTable {
            records,
            sources,
            filters,
        })
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    /// Source names in order of first appearance.
    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    /// Distinct filter names, sorted.
    pub fn filters(&self) -> &BTreeSet<String> {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_source(&self, source: &str) -> bool {
        self.sources.iter().any(|s| s == source)
    }

    /// Attack filter names (everything except `bonafide`), sorted.
    pub fn attack_filters(&self) -> Vec<&str> {
        self.filters
            .iter()
            .map(String::as_str)
            .filter(|f| *f != BONAFIDE_FILTER)
            .collect()
    }

    /// Sample ids, sorted.
    pub fn sample_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.sample_id.as_str()).collect()
    }

    /// Scores of one source for bona fide samples.
    pub fn bonafide_scores(&self, source: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.source == source && r.label == Label::BonaFide)
            .map(|r| r.score)
            .collect()
    }

    /// Scores of one source for attack samples of one filter.
    pub fn attack_scores(&self, source: &str, filter: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.source == source && r.filter == filter)
            .map(|r| r.score)
            .collect()
    }
}

/// Loads a score CSV (`sample_id,filter,label,score`), tagging every record
/// with `source`.
pub fn load_scores(path: &Path, source: &str) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    let found: Vec<&str> = headers.iter().collect();
    if found != SCORE_CSV_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!(
                "expected header '{}', found '{}'",
                SCORE_CSV_HEADER.join(","),
                found.join(",")
            ),
        });
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if row.len() != 4 {
            return Err(parse_err(format!("expected 4 fields, found {}", row.len())));
        }
        let label = Label::parse(&row[2])
            .ok_or_else(|| parse_err(format!("label must be 'bonafide' or 'attack', found '{}'", &row[2])))?;
        let score: f64 = row[3]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("score is not a number: '{}'", &row[3])))?;
        if !score.is_finite() {
            return Err(Error::Validation(format!(
                "non-finite score at {}:{line}",
                path.display()
            )));
        }
        records.push(ScoreRecord {
            sample_id: row[0].to_string(),
            source: source.to_string(),
            filter: row[1].to_string(),
            label,
            score,
        });
    }
    ScoreTable::new(records)
}

/// Writes a table back to the score CSV format. Scores round-trip exactly.
pub fn save_scores(table: &ScoreTable, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer
        .write_record(SCORE_CSV_HEADER)
        .map_err(|e| csv_error(path, e))?;
    for record in table.records() {
        writer
            .write_record([
                record.sample_id.as_str(),
                record.filter.as_str(),
                record.label.as_str(),
                &format!("{}", record.score),
            ])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, error: csv::Error) -> Error {
    let line = match error.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    match error.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Inner-joins tables with disjoint sources on `sample_id`: only samples
/// present in every input survive.
pub fn join_tables(tables: &[ScoreTable]) -> Result<ScoreTable> {
    if tables.is_empty() {
        return Err(Error::Domain("join requires at least one table".into()));
    }

    let mut all_sources: HashSet<&str> = HashSet::new();
    for table in tables {
        for source in table.sources() {
            if !all_sources.insert(source) {
                return Err(Error::Validation(format!(
                    "source '{source}' appears in more than one table"
                )));
            }
        }
    }

    let mut common: BTreeSet<&str> = tables[0].sample_ids();
    for table in &tables[1..] {
        let ids = table.sample_ids();
        common.retain(|id| ids.contains(id));
    }

    // Cross-table label agreement; the per-table invariants already cover
    // agreement within one table.
    let mut labels: HashMap<&str, Label> = HashMap::new();
    for table in tables {
        for record in table.records() {
            if !common.contains(record.sample_id.as_str()) {
                continue;
            }
            match labels.get(record.sample_id.as_str()) {
                None => {
                    labels.insert(&record.sample_id, record.label);
                }
                Some(&label) if label != record.label => {
                    return Err(Error::Consistency(format!(
                        "sample '{}' is labeled '{}' in one table and '{}' in another",
                        record.sample_id,
                        label.as_str(),
                        record.label.as_str()
                    )));
                }
                Some(_) => {}
            }
        }
    }

    let records = tables
        .iter()
        .flat_map(|t| t.records())
        .filter(|r| common.contains(r.sample_id.as_str()))
        .cloned()
        .collect();
    ScoreTable::new(records)
}

/// Splits a table into the attack records of one filter and all bona fide
/// records.
pub fn partition_by_filter(table: &ScoreTable, filter: &str) -> Result<(ScoreTable, ScoreTable)> {
    if filter == BONAFIDE_FILTER {
        return Err(Error::Validation(
            "'bonafide' is not an attack filter".into(),
        ));
    }
    if !table.filters().contains(filter) {
        return Err(Error::Lookup {
            kind: "filter",
            name: filter.to_string(),
        });
    }
    let attack = table
        .records()
        .iter()
        .filter(|r| r.filter == filter)
        .cloned()
        .collect();
    let bonafide = table
        .records()
        .iter()
        .filter(|r| r.label == Label::BonaFide)
        .cloned()
        .collect();
    Ok((ScoreTable::new(attack)?, ScoreTable::new(bonafide)?))
}
