//! Next-score forecasting for relevance time series.
//!
//! Four forecasters are available, selected per conference through
//! cross-validation:
//!
//! * naive exponential smoothing — the non-parametric sum of past values
//!   weighted by `e^(-age)`;
//! * simple exponential smoothing — the recursion
//!   `s_t = alpha * y_t + (1 - alpha) * s_{t-1}` seeded with the first
//!   observation, whose final smoothed value is the next-period forecast;
//! * ARIMA over a small candidate set of (p,d,q) orders, fitted by
//!   conditional sum of squares and selected by held-out RMSE;
//! * the mean of the last three observations, which doubles as the
//!   fallback whenever a model cannot be fitted.
//!
//! Forecasts are clamped below at zero and turned into a [`Ranking`] by
//! descending score, ties broken by ascending affiliation id.

mod arima;

pub use arima::{arima_forecast, fit_arima, select_arima_order, simulate_arima, ArimaFit};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::relscore::RelScoreSeries;

/// Candidate orders tried by the ARIMA route when none are configured.
pub const DEFAULT_ARIMA_CANDIDATES: [ArimaOrder; 3] = [
    ArimaOrder { p: 1, d: 1, q: 1 },
    ArimaOrder { p: 1, d: 1, q: 0 },
    ArimaOrder { p: 0, d: 1, q: 1 },
];

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("series is empty")]
    EmptySeries,
    #[error("smoothing factor must be in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("unsupported order {0}; p, d and q must each be 0 or 1")]
    InvalidOrder(ArimaOrder),
    #[error("series too short after differencing: need {needed}, have {actual}")]
    SeriesTooShort { needed: usize, actual: usize },
    #[error("optimizer failed to produce a finite fit")]
    FitDiverged,
}

/// ARIMA model order: `p` autoregressive terms, `d` differencing steps,
/// `q` moving-average terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArimaOrder {
    pub p: u8,
    pub d: u8,
    pub q: u8,
}

impl ArimaOrder {
    pub const fn new(p: u8, d: u8, q: u8) -> Self {
        ArimaOrder { p, d, q }
    }

    pub fn is_supported(&self) -> bool {
        self.p <= 1 && self.d <= 1 && self.q <= 1
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

impl FromStr for ArimaOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected p,d,q in {s:?}"));
        }
        let parse = |part: &str| part.parse::<u8>().map_err(|_| format!("bad order component {part:?}"));
        Ok(ArimaOrder {
            p: parse(parts[0])?,
            d: parse(parts[1])?,
            q: parse(parts[2])?,
        })
    }
}

/// Which forecaster to run, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    NaiveEs,
    SimpleEs { alpha: f64 },
    Arima { candidate_orders: Vec<ArimaOrder> },
    Last3Avg,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<(), ForecastError> {
        match self {
            ModelSpec::SimpleEs { alpha } if !(*alpha > 0.0 && *alpha <= 1.0) => {
                Err(ForecastError::InvalidAlpha(*alpha))
            }
            ModelSpec::Arima { candidate_orders } => {
                if candidate_orders.is_empty() {
                    return Err(ForecastError::InvalidOrder(ArimaOrder::new(0, 0, 0)));
                }
                match candidate_orders.iter().find(|o| !o.is_supported()) {
                    Some(order) => Err(ForecastError::InvalidOrder(*order)),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// Forecast the next value of one observed series.
    pub fn forecast(&self, values: &[f64]) -> Result<f64, ForecastError> {
        match self {
            ModelSpec::NaiveEs => naive_es_forecast(values),
            ModelSpec::SimpleEs { alpha } => simple_es_forecast(values, *alpha),
            ModelSpec::Arima { candidate_orders } => arima_forecast(values, candidate_orders),
            ModelSpec::Last3Avg => last3_avg_forecast(values),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::NaiveEs => write!(f, "NaiveES"),
            ModelSpec::SimpleEs { alpha } => write!(f, "SimpleES(alpha={alpha})"),
            ModelSpec::Arima { candidate_orders } => {
                write!(f, "ARIMA[")?;
                for (i, order) in candidate_orders.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{order}")?;
                }
                write!(f, "]")
            }
            ModelSpec::Last3Avg => write!(f, "Last3Avg"),
        }
    }
}

/// Predicted scores for one conference-year, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub conference_id: String,
    pub year: i32,
    pub entries: Vec<(String, f64)>,
}

impl Ranking {
    /// Canonical order: score descending, affiliation id ascending.
    pub fn sort_entries(entries: &mut [(String, f64)]) {
        entries.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("finite scores")
                .then_with(|| a.0.cmp(&b.0))
        });
    }

    /// Ordered affiliation ids, highest score first.
    pub fn affiliation_order(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    /// Contest prediction format: conference, affiliation, score to six
    /// decimal places; no header.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (affiliation, score) in &self.entries {
            writeln!(out, "{}\t{}\t{:.6}", self.conference_id, affiliation, score)?;
        }
        Ok(())
    }
}

/// Non-fatal events observed while ranking a series set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RankDiagnostics {
    /// Series whose primary forecaster failed and used the last-3 fallback.
    pub fallbacks: usize,
    /// Series that produced no forecast at all.
    pub failed: usize,
}

/// Sum of y_i / e^(t-i) over i = 1..t: every past value counts, with weight
/// decaying by a factor of e per year of age.
pub fn naive_es_forecast(values: &[f64]) -> Result<f64, ForecastError> {
    if values.is_empty() {
        return Err(ForecastError::EmptySeries);
    }
    let t = values.len();
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &y)| y * (-((t - 1 - i) as f64)).exp())
        .sum())
}

/// Final smoothed value of `s_1 = y_1`, `s_t = alpha*y_t + (1-alpha)*s_{t-1}`.
pub fn simple_es_forecast(values: &[f64], alpha: f64) -> Result<f64, ForecastError> {
    if values.is_empty() {
        return Err(ForecastError::EmptySeries);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(ForecastError::InvalidAlpha(alpha));
    }
    let mut smoothed = values[0];
    for &y in &values[1..] {
        smoothed = alpha * y + (1.0 - alpha) * smoothed;
    }
    Ok(smoothed)
}

/// Mean of the final `min(3, len)` observations.
pub fn last3_avg_forecast(values: &[f64]) -> Result<f64, ForecastError> {
    if values.is_empty() {
        return Err(ForecastError::EmptySeries);
    }
    let tail = &values[values.len() - values.len().min(3)..];
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Forecast every series and order affiliations by predicted score.
///
/// A series whose forecaster fails (or returns a non-finite value) falls
/// back to the last-3 average and is counted in the diagnostics; the error
/// is propagated only when no series at all produces a forecast.
pub fn rank_affiliations(
    series_set: &[RelScoreSeries],
    spec: &ModelSpec,
    year: i32,
) -> Result<(Ranking, RankDiagnostics), ForecastError> {
    spec.validate()?;
    if series_set.is_empty() {
        return Err(ForecastError::EmptySeries);
    }
    let mut ordered: Vec<&RelScoreSeries> = series_set.iter().collect();
    ordered.sort_by(|a, b| a.affiliation_id.cmp(&b.affiliation_id));

    let conference_id = ordered[0].conference_id.clone();
    let mut diagnostics = RankDiagnostics::default();
    let mut entries: Vec<(String, f64)> = Vec::with_capacity(ordered.len());
    let mut last_error = None;
    for series in ordered {
        debug_assert_eq!(series.last_year(), year - 1, "series must end at year - 1");
        // The ARIMA route is inlined so its internal last-3 fallback is
        // visible in the diagnostics instead of hiding in arima_forecast.
        let primary = match spec {
            ModelSpec::Arima { candidate_orders } => {
                select_arima_order(&series.values, candidate_orders)
                    .and_then(|order| fit_arima(&series.values, order).ok())
                    .map(|fit| fit.forecast_next(&series.values))
            }
            other => other.forecast(&series.values).ok(),
        };
        let primary = primary.filter(|v| v.is_finite());
        let forecast = match primary {
            Some(v) => Some(v),
            None => {
                diagnostics.fallbacks += 1;
                match last3_avg_forecast(&series.values) {
                    Ok(v) => Some(v),
                    Err(err) => {
                        diagnostics.failed += 1;
                        last_error = Some(err);
                        None
                    }
                }
            }
        };
        if let Some(v) = forecast {
            entries.push((series.affiliation_id.clone(), v.max(0.0)));
        }
    }
    if entries.is_empty() {
        return Err(last_error.unwrap_or(ForecastError::EmptySeries));
    }
    Ranking::sort_entries(&mut entries);
    Ok((
        Ranking {
            conference_id,
            year,
            entries,
        },
        diagnostics,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(affiliation: &str, first_year: i32, values: &[f64]) -> RelScoreSeries {
        RelScoreSeries {
            affiliation_id: affiliation.to_string(),
            conference_id: "C1".to_string(),
            first_year,
            values: values.to_vec(),
        }
    }

    #[test]
    fn naive_es_single_value_is_identity() {
        assert_eq!(naive_es_forecast(&[0.7]).unwrap(), 0.7);
    }

    #[test]
    fn naive_es_weights_by_exp_age() {
        let got = naive_es_forecast(&[0.5, 1.0]).unwrap();
        let want = 0.5 / std::f64::consts::E + 1.0;
        assert!((got - want).abs() < 1e-12);
        assert!((got - 1.183940).abs() < 1e-6);
    }

    #[test]
    fn naive_es_zero_series_and_empty_series() {
        assert_eq!(naive_es_forecast(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            naive_es_forecast(&[]),
            Err(ForecastError::EmptySeries)
        ));
    }

    #[test]
    fn simple_es_follows_recursion() {
        let got = simple_es_forecast(&[1.0, 0.0], 0.4).unwrap();
        assert!((got - 0.6).abs() < 1e-12);
    }

    #[test]
    fn simple_es_alpha_one_returns_last_observation() {
        assert_eq!(simple_es_forecast(&[3.0, 9.0, 2.5], 1.0).unwrap(), 2.5);
    }

    #[test]
    fn simple_es_constant_series_is_fixed_point() {
        let got = simple_es_forecast(&[4.2, 4.2, 4.2], 0.4).unwrap();
        assert!((got - 4.2).abs() < 1e-12);
    }

    #[test]
    fn simple_es_rejects_bad_alpha() {
        for alpha in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                simple_es_forecast(&[1.0], alpha),
                Err(ForecastError::InvalidAlpha(_))
            ));
        }
    }

    #[test]
    fn last3_avg_uses_at_most_three_values() {
        assert_eq!(last3_avg_forecast(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(last3_avg_forecast(&[5.0]).unwrap(), 5.0);
        assert_eq!(last3_avg_forecast(&[0.0, 0.0, 1.0, 2.0, 3.0]).unwrap(), 2.0);
    }

    #[test]
    fn ranking_preserves_ratio_for_constant_series() {
        let set = vec![
            series("B", 2006, &[1.0; 10]),
            series("A", 2006, &[2.0; 10]),
        ];
        let (ranking, diag) = rank_affiliations(&set, &ModelSpec::NaiveEs, 2016).unwrap();
        assert_eq!(diag, RankDiagnostics::default());
        assert_eq!(ranking.entries[0].0, "A");
        assert!((ranking.entries[0].1 - 3.16).abs() < 0.01);
        assert!((ranking.entries[1].1 - 1.58).abs() < 0.01);
        let ratio = ranking.entries[0].1 / ranking.entries[1].1;
        assert!((ratio - 2.0).abs() < 1e-9);
    }

    #[test]
    fn all_zero_series_rank_by_affiliation_id() {
        let set = vec![
            series("Z", 2010, &[0.0; 5]),
            series("M", 2010, &[0.0; 5]),
            series("A", 2010, &[0.0; 5]),
        ];
        let (ranking, _) = rank_affiliations(&set, &ModelSpec::NaiveEs, 2015).unwrap();
        let order: Vec<&str> = ranking.affiliation_order().collect();
        assert_eq!(order, vec!["A", "M", "Z"]);
        assert!(ranking.entries.iter().all(|(_, s)| *s == 0.0));
    }

    #[test]
    fn singleton_series_set_ranks_alone() {
        let set = vec![series("X", 2014, &[1.5])];
        let (ranking, _) = rank_affiliations(&set, &ModelSpec::Last3Avg, 2015).unwrap();
        assert_eq!(ranking.entries, vec![("X".to_string(), 1.5)]);
    }

    #[test]
    fn arima_on_short_series_falls_back_and_is_counted() {
        let set = vec![series("X", 2013, &[1.0, 2.0])];
        let spec = ModelSpec::Arima {
            candidate_orders: DEFAULT_ARIMA_CANDIDATES.to_vec(),
        };
        let (ranking, diag) = rank_affiliations(&set, &spec, 2015).unwrap();
        assert_eq!(diag.fallbacks, 1);
        assert_eq!(diag.failed, 0);
        assert!((ranking.entries[0].1 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_spec_is_rejected_before_ranking() {
        let set = vec![series("X", 2014, &[1.0])];
        let err = rank_affiliations(&set, &ModelSpec::SimpleEs { alpha: 0.0 }, 2015).unwrap_err();
        assert!(matches!(err, ForecastError::InvalidAlpha(_)));
    }

    #[test]
    fn model_spec_display_names_parameters() {
        assert_eq!(ModelSpec::NaiveEs.to_string(), "NaiveES");
        assert_eq!(
            ModelSpec::SimpleEs { alpha: 0.4 }.to_string(),
            "SimpleES(alpha=0.4)"
        );
        let arima = ModelSpec::Arima {
            candidate_orders: DEFAULT_ARIMA_CANDIDATES.to_vec(),
        };
        assert_eq!(arima.to_string(), "ARIMA[(1,1,1),(1,1,0),(0,1,1)]");
    }

    #[test]
    fn arima_order_parses_both_forms() {
        assert_eq!("1,1,0".parse::<ArimaOrder>().unwrap(), ArimaOrder::new(1, 1, 0));
        assert_eq!("(0, 1, 1)".parse::<ArimaOrder>().unwrap(), ArimaOrder::new(0, 1, 1));
        assert!("1,1".parse::<ArimaOrder>().is_err());
    }

    #[test]
    fn prediction_file_has_six_decimal_scores() {
        let ranking = Ranking {
            conference_id: "C1".into(),
            year: 2016,
            entries: vec![("A".into(), 1.5), ("B".into(), 0.25)],
        };
        let mut buf = Vec::new();
        ranking.write_tsv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "C1\tA\t1.500000\nC1\tB\t0.250000\n"
        );
    }
}
