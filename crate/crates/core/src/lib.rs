//! Rank research institutions by forecasting their per-conference relevance
//! scores from historical publication records.
//!
//! The pipeline runs in four stages, each owned by a module:
//!
//! 1. [`ingest`] parses tab-separated publication dumps into validated
//!    records, with title normalization and fuzzy title matching.
//! 2. [`paperfilter`] separates full research papers from keynotes, posters
//!    and other proceedings filler, combining substring rules with two
//!    trained classifiers and a human review queue.
//! 3. [`relscore`] aggregates fractional authorship votes into per-year
//!    relevance scores and assembles zero-filled time series.
//! 4. [`forecast`] predicts each institution's next score (exponential
//!    smoothing variants, ARIMA over a small candidate set, or a
//!    last-3-average fallback) and orders institutions by the prediction.
//!
//! [`evalrank`] scores predicted rankings against observed scores with
//! NDCG@N and drives the rolling cross-validation and alpha grid search.
//! [`netrank`] is a co-authorship PageRank baseline over the same corpus.

pub mod evalrank;
pub mod forecast;
pub mod ingest;
pub mod netrank;
pub mod paperfilter;
pub mod relscore;

pub use evalrank::{CvReport, GroundTruth};
pub use forecast::{ArimaFit, ArimaOrder, ModelSpec, Ranking};
pub use ingest::{AuthorAffiliationRecord, PaperRecord, TitleMatch};
pub use relscore::{RelScoreSeries, RelScoreTable};
