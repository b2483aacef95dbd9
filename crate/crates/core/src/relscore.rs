//! Relevance-score aggregation from fractional authorship votes.
//!
//! Every counted paper carries a total vote of 1. The vote splits equally
//! across the paper's distinct authors, and each author's share splits
//! equally across that author's distinct affiliations on the paper. An
//! author with no affiliation rows forfeits their share. Per-year sums of
//! these fractions are the relevance scores that the forecasting stage
//! models as time series, with missing years filled as zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ingest::{AuthorAffiliationRecord, PaperRecord};

#[derive(Debug, Error)]
pub enum RelScoreError {
    #[error("paper {paper_id:?} is not part of the ingested corpus")]
    UnknownPaper { paper_id: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

/// Neumaier-compensated accumulator. Scores are sums of many small
/// fractions; plain f64 addition would make the output depend on platform
/// summation quirks more than it has to.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Per (conference, year, affiliation) relevance scores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelScoreTable {
    entries: BTreeMap<(String, i32, String), f64>,
}

/// One affiliation's consecutive yearly scores for one conference.
#[derive(Debug, Clone, PartialEq)]
pub struct RelScoreSeries {
    pub affiliation_id: String,
    pub conference_id: String,
    pub first_year: i32,
    pub values: Vec<f64>,
}

impl RelScoreSeries {
    pub fn last_year(&self) -> i32 {
        self.first_year + self.values.len() as i32 - 1
    }

    /// Observed value at `year`, if the series covers it.
    pub fn value_at(&self, year: i32) -> Option<f64> {
        if year < self.first_year || year > self.last_year() {
            return None;
        }
        Some(self.values[(year - self.first_year) as usize])
    }

    /// Copy of the series truncated to end at `last_year`.
    pub fn truncated(&self, last_year: i32) -> Option<RelScoreSeries> {
        if last_year < self.first_year || last_year > self.last_year() {
            return None;
        }
        let len = (last_year - self.first_year + 1) as usize;
        Some(RelScoreSeries {
            affiliation_id: self.affiliation_id.clone(),
            conference_id: self.conference_id.clone(),
            first_year: self.first_year,
            values: self.values[..len].to_vec(),
        })
    }
}

impl RelScoreTable {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Score for one (conference, year, affiliation); absent entries are 0.
    pub fn score(&self, conference_id: &str, year: i32, affiliation_id: &str) -> f64 {
        self.entries
            .get(&(conference_id.to_string(), year, affiliation_id.to_string()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn insert(&mut self, conference_id: &str, year: i32, affiliation_id: &str, score: f64) {
        self.entries.insert(
            (conference_id.to_string(), year, affiliation_id.to_string()),
            score,
        );
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i32, &str, f64)> {
        self.entries
            .iter()
            .map(|((c, y, a), s)| (c.as_str(), *y, a.as_str(), *s))
    }

    /// First and last observed year for a conference.
    pub fn year_range(&self, conference_id: &str) -> Option<(i32, i32)> {
        let mut range: Option<(i32, i32)> = None;
        for (c, y, _) in self.entries.keys() {
            if c == conference_id {
                range = Some(match range {
                    None => (*y, *y),
                    Some((lo, hi)) => (lo.min(*y), hi.max(*y)),
                });
            }
        }
        range
    }

    /// Every affiliation that ever scored for a conference.
    pub fn affiliations(&self, conference_id: &str) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter(|((c, _, _), _)| c == conference_id)
            .map(|((_, _, a), _)| a.clone())
            .collect()
    }

    pub fn conferences(&self) -> BTreeSet<String> {
        self.entries.keys().map(|(c, _, _)| c.clone()).collect()
    }

    /// Zero-filled series for every affiliation of `conference_id` over the
    /// conference's full observed history.
    pub fn series_for_conference(&self, conference_id: &str) -> Vec<RelScoreSeries> {
        let Some((first, last)) = self.year_range(conference_id) else {
            return Vec::new();
        };
        self.affiliations(conference_id)
            .iter()
            .map(|affiliation| build_series(self, conference_id, affiliation, first, last))
            .collect()
    }

    /// Rows sorted by (conference, year, score descending, affiliation
    /// ascending), scores fixed to 6 decimal places.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut rows: Vec<(&str, i32, &str, f64)> = self.iter().collect();
        rows.sort_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then_with(|| b.3.partial_cmp(&a.3).expect("finite scores"))
                .then_with(|| a.2.cmp(b.2))
        });
        for (conference, year, affiliation, score) in rows {
            writeln!(out, "{conference}\t{year}\t{affiliation}\t{score:.6}")?;
        }
        Ok(())
    }

    /// Parse the TSV form written by [`RelScoreTable::write_tsv`].
    pub fn read_tsv(path: &Path) -> Result<RelScoreTable, RelScoreError> {
        let file = File::open(path).map_err(|source| RelScoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut table = RelScoreTable::default();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| RelScoreError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let parsed = (|| {
                if fields.len() != 4 {
                    return None;
                }
                let year: i32 = fields[1].trim().parse().ok()?;
                let score: f64 = fields[3].trim().parse().ok()?;
                (score >= 0.0 && score.is_finite()).then_some((year, score))
            })();
            let Some((year, score)) = parsed else {
                return Err(RelScoreError::Format(format!(
                    "{}:{}: expected conference<TAB>year<TAB>affiliation<TAB>score",
                    path.display(),
                    idx + 1
                )));
            };
            table.insert(fields[0].trim(), year, fields[2].trim(), score);
        }
        Ok(table)
    }
}

/// Aggregate fractional votes for every paper in `full_paper_ids`.
///
/// Contributions are accumulated in a fixed canonical order (ascending
/// paper, author, affiliation) with compensated summation, so results do
/// not depend on input ordering.
pub fn compute_rel_scores(
    papers: &[PaperRecord],
    affiliations: &[AuthorAffiliationRecord],
    full_paper_ids: &BTreeSet<String>,
) -> Result<RelScoreTable, RelScoreError> {
    let by_id: BTreeMap<&str, &PaperRecord> =
        papers.iter().map(|p| (p.paper_id.as_str(), p)).collect();
    for id in full_paper_ids {
        if !by_id.contains_key(id.as_str()) {
            return Err(RelScoreError::UnknownPaper {
                paper_id: id.clone(),
            });
        }
    }

    // paper -> author -> distinct affiliations
    let mut votes: BTreeMap<&str, BTreeMap<&str, BTreeSet<&str>>> = BTreeMap::new();
    for row in affiliations {
        if full_paper_ids.contains(&row.paper_id) {
            votes
                .entry(row.paper_id.as_str())
                .or_default()
                .entry(row.author_id.as_str())
                .or_default()
                .insert(row.affiliation_id.as_str());
        }
    }

    let mut sums: BTreeMap<(String, i32, String), KahanSum> = BTreeMap::new();
    for (paper_id, authors) in &votes {
        let paper = by_id[paper_id];
        let author_share = 1.0 / authors.len() as f64;
        for affils in authors.values() {
            let fraction = author_share / affils.len() as f64;
            for affiliation in affils {
                sums.entry((
                    paper.conference_id.clone(),
                    paper.year,
                    (*affiliation).to_string(),
                ))
                .or_default()
                .add(fraction);
            }
        }
    }

    Ok(RelScoreTable {
        entries: sums.into_iter().map(|(k, v)| (k, v.value())).collect(),
    })
}

/// Zero-filled yearly series for one (conference, affiliation) over
/// `[first_year, last_year]`.
pub fn build_series(
    table: &RelScoreTable,
    conference_id: &str,
    affiliation_id: &str,
    first_year: i32,
    last_year: i32,
) -> RelScoreSeries {
    assert!(first_year <= last_year, "year range must be non-empty");
    let values = (first_year..=last_year)
        .map(|year| table.score(conference_id, year, affiliation_id))
        .collect();
    RelScoreSeries {
        affiliation_id: affiliation_id.to_string(),
        conference_id: conference_id.to_string(),
        first_year,
        values,
    }
}
