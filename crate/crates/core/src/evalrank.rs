//! Ranking evaluation with NDCG and the cross-validation framework.
//!
//! A prediction for year t is scored against the relevance scores actually
//! observed at t: the predicted order's gains are discounted by
//! `log2(rank + 1)` and normalized by the ideal (descending) order's DCG.
//! Cross-validation forecasts each target year from the data strictly
//! before it, and the expected score of a model is the mean NDCG over the
//! three most recent validated years.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::forecast::{rank_affiliations, ForecastError, ModelSpec, Ranking};
use crate::relscore::{RelScoreSeries, RelScoreTable};

/// Grid used for alpha tuning when the caller does not supply one:
/// 0.05, 0.10, ..., 0.95.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth has no positive relevance score")]
    EmptyGroundTruth,
    #[error("cutoff must be at least 1")]
    InvalidCutoff,
    #[error("no ground truth available for {conference_id} in {year}")]
    MissingTruth { conference_id: String, year: i32 },
    #[error("cross-validation needs at least one target year")]
    NoTargetYears,
    #[error("alpha grid value {0} outside (0, 1]")]
    InvalidGrid(f64),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
}

/// Observed relevance scores for one conference-year.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub conference_id: String,
    pub year: i32,
    pub rel_by_affiliation: BTreeMap<String, f64>,
}

impl GroundTruth {
    pub fn has_positive(&self) -> bool {
        self.rel_by_affiliation.values().any(|&v| v > 0.0)
    }

    /// Truth extracted from a relevance table at one (conference, year).
    pub fn from_table(table: &RelScoreTable, conference_id: &str, year: i32) -> GroundTruth {
        let rel_by_affiliation = table
            .iter()
            .filter(|(c, y, _, _)| *c == conference_id && *y == year)
            .map(|(_, _, a, s)| (a.to_string(), s))
            .collect();
        GroundTruth {
            conference_id: conference_id.to_string(),
            year,
            rel_by_affiliation,
        }
    }

    /// Read a truth file: relevance-table rows restricted to a single
    /// (conference, year).
    pub fn read_tsv(path: &Path) -> Result<GroundTruth, EvalError> {
        let table = RelScoreTable::read_tsv(path).map_err(|e| match e {
            crate::relscore::RelScoreError::Io { path, source } => EvalError::Io { path, source },
            other => EvalError::Format(other.to_string()),
        })?;
        let mut keys: Vec<(String, i32)> = table
            .iter()
            .map(|(c, y, _, _)| (c.to_string(), y))
            .collect();
        keys.sort();
        keys.dedup();
        match keys.as_slice() {
            [] => Err(EvalError::Format(format!(
                "{}: truth file is empty",
                path.display()
            ))),
            [(conference_id, year)] => Ok(GroundTruth::from_table(&table, conference_id, *year)),
            _ => Err(EvalError::Format(format!(
                "{}: truth file mixes {} conference-years; expected exactly one",
                path.display(),
                keys.len()
            ))),
        }
    }
}

/// Per-year NDCG scores for one (conference, model) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub conference_id: String,
    pub model: String,
    pub per_year_scores: BTreeMap<i32, f64>,
    pub mean_score: f64,
}

impl CvReport {
    fn new(conference_id: String, model: String, per_year_scores: BTreeMap<i32, f64>) -> CvReport {
        let mean_score =
            per_year_scores.values().sum::<f64>() / per_year_scores.len().max(1) as f64;
        CvReport {
            conference_id,
            model,
            per_year_scores,
            mean_score,
        }
    }

    /// Machine-readable form: one `year<TAB>ndcg` row per year, then a
    /// final `mean` row.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (year, score) in &self.per_year_scores {
            writeln!(out, "{year}\t{score:.6}")?;
        }
        writeln!(out, "mean\t{:.6}", self.mean_score)
    }

    /// Human-readable table for terminal output.
    pub fn render_table(&self) -> String {
        let mut s = format!(
            "conference {}  model {}\n  year    ndcg\n",
            self.conference_id, self.model
        );
        for (year, score) in &self.per_year_scores {
            s.push_str(&format!("  {year}  {score:.6}\n"));
        }
        s.push_str(&format!("  mean  {:.6}\n", self.mean_score));
        s
    }
}

/// Discounted cumulative gain at cutoff `n` of gains already in rank order.
pub fn dcg_at_n(gains: &[f64], n: usize) -> f64 {
    gains
        .iter()
        .take(n)
        .enumerate()
        .map(|(i, &gain)| gain / ((i + 2) as f64).log2())
        .sum()
}

/// NDCG@n of a predicted order against observed relevance scores.
///
/// Gains are the truth scores read in prediction order (zero for
/// affiliations the truth does not mention); the normalizer is the DCG of
/// all truth scores sorted descending, so affiliations missing from the
/// prediction still raise the bar.
pub fn ndcg_at_n(prediction: &Ranking, truth: &GroundTruth, n: usize) -> Result<f64, EvalError> {
    if n == 0 {
        return Err(EvalError::InvalidCutoff);
    }
    if !truth.has_positive() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let gains: Vec<f64> = prediction
        .affiliation_order()
        .map(|affiliation| {
            truth
                .rel_by_affiliation
                .get(affiliation)
                .copied()
                .unwrap_or(0.0)
        })
        .collect();
    let mut ideal: Vec<f64> = truth.rel_by_affiliation.values().copied().collect();
    ideal.sort_by(|a, b| b.partial_cmp(a).expect("finite relevance"));
    let idcg = dcg_at_n(&ideal, n);
    Ok(dcg_at_n(&gains, n) / idcg)
}

/// Score a model by forecasting each target year from the years strictly
/// before it.
///
/// Every series must cover each target year (the observed value at t is
/// the ground truth) and start early enough to leave a non-empty history.
pub fn cross_validate(
    series_set: &[RelScoreSeries],
    spec: &ModelSpec,
    conference_id: &str,
    years: &[i32],
    n: usize,
) -> Result<CvReport, EvalError> {
    if years.is_empty() {
        return Err(EvalError::NoTargetYears);
    }
    let mut per_year_scores = BTreeMap::new();
    for &year in years {
        let mut truncated = Vec::with_capacity(series_set.len());
        let mut rel_by_affiliation = BTreeMap::new();
        for series in series_set {
            if series.conference_id != conference_id {
                continue;
            }
            let (Some(history), Some(actual)) = (series.truncated(year - 1), series.value_at(year))
            else {
                return Err(EvalError::MissingTruth {
                    conference_id: conference_id.to_string(),
                    year,
                });
            };
            truncated.push(history);
            rel_by_affiliation.insert(series.affiliation_id.clone(), actual);
        }
        if truncated.is_empty() {
            return Err(EvalError::MissingTruth {
                conference_id: conference_id.to_string(),
                year,
            });
        }
        let truth = GroundTruth {
            conference_id: conference_id.to_string(),
            year,
            rel_by_affiliation,
        };
        let (ranking, _) = rank_affiliations(&truncated, spec, year)?;
        per_year_scores.insert(year, ndcg_at_n(&ranking, &truth, n)?);
    }
    Ok(CvReport::new(
        conference_id.to_string(),
        spec.to_string(),
        per_year_scores,
    ))
}

/// Grid search over the smoothing factor, maximizing mean cross-validation
/// NDCG. Ties go to the smaller alpha.
pub fn grid_search_alpha(
    series_set: &[RelScoreSeries],
    conference_id: &str,
    years: &[i32],
    n: usize,
    grid: &[f64],
) -> Result<(f64, CvReport), EvalError> {
    if grid.is_empty() {
        return Err(EvalError::InvalidGrid(f64::NAN));
    }
    if let Some(&bad) = grid.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(EvalError::InvalidGrid(bad));
    }
    let mut ordered = grid.to_vec();
    ordered.sort_by(|a, b| a.partial_cmp(b).expect("finite alpha"));
    ordered.dedup();

    let mut best: Option<(f64, CvReport)> = None;
    for alpha in ordered {
        let report = cross_validate(
            series_set,
            &ModelSpec::SimpleEs { alpha },
            conference_id,
            years,
            n,
        )?;
        // Strictly-greater keeps the smallest alpha on ties.
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.mean_score > b.mean_score)
        {
            best = Some((alpha, report));
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// Mean NDCG over the three most recent validated years (fewer if the
/// report has fewer).
pub fn expected_score(report: &CvReport) -> f64 {
    let scores: Vec<f64> = report.per_year_scores.values().copied().collect();
    let tail = &scores[scores.len() - scores.len().min(3)..];
    tail.iter().sum::<f64>() / tail.len().max(1) as f64
}

/// Contest aggregate: phase 1 carries 20%, phases 2 and 3 carry 40% each.
pub fn overall_contest_score(phase1: f64, phase2: f64, phase3: f64) -> f64 {
    0.2 * phase1 + 0.4 * phase2 + 0.4 * phase3
}

/// Read a prediction file: `conference<TAB>affiliation<TAB>score` rows, or
/// the two-column `affiliation<TAB>score` form produced by the network
/// ranker. Row order is the predicted ranking.
pub fn read_prediction_tsv(path: &Path) -> Result<Ranking, EvalError> {
    let file = File::open(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut conference_id: Option<String> = None;
    let mut entries = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (conference, affiliation, raw_score) = match fields.as_slice() {
            [affiliation, score] => (None, *affiliation, *score),
            [conference, affiliation, score] => (Some(*conference), *affiliation, *score),
            _ => {
                return Err(EvalError::Format(format!(
                    "{}:{}: expected 2 or 3 tab-separated columns",
                    path.display(),
                    idx + 1
                )))
            }
        };
        let score: f64 = raw_score.trim().parse().map_err(|_| {
            EvalError::Format(format!(
                "{}:{}: bad score {raw_score:?}",
                path.display(),
                idx + 1
            ))
        })?;
        if let Some(c) = conference {
            match &conference_id {
                None => conference_id = Some(c.to_string()),
                Some(existing) if existing != c => {
                    return Err(EvalError::Format(format!(
                        "{}:{}: prediction file mixes conferences {existing:?} and {c:?}",
                        path.display(),
                        idx + 1
                    )))
                }
                Some(_) => {}
            }
        }
        entries.push((affiliation.to_string(), score));
    }
    if entries.is_empty() {
        return Err(EvalError::Format(format!(
            "{}: prediction file is empty",
            path.display()
        )));
    }
    Ok(Ranking {
        conference_id: conference_id.unwrap_or_default(),
        year: 0,
        entries,
    })
}
