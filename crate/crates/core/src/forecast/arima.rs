//! ARIMA fitting by conditional sum of squares.
//!
//! Orders are restricted to p, d, q in {0, 1}, which covers the candidate
//! set used for ranking. The series is differenced d times, then the
//! one-step residuals
//!
//! ```text
//! e_t = w_t - c - phi * w_{t-1} - theta * e_{t-1}
//! ```
//!
//! (pre-sample residuals fixed at zero) are squared and summed. The
//! constant is concentrated out in closed form, and the remaining one or
//! two coefficients are minimized by a coarse scan over (-0.999, 0.999)
//! followed by golden-section refinement. Everything is deterministic:
//! the same series and order always produce bit-identical fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{last3_avg_forecast, ArimaOrder, ForecastError};

/// Coefficients stay strictly inside the unit interval.
const COEF_BOUND: f64 = 0.999;
/// Optimizer budget: rounds of coordinate refinement for ARMA(1,1).
const MAX_REFINE_ROUNDS: usize = 500;
/// Differenced series with no variation cannot identify coefficients.
const DEGENERATE_EPS: f64 = 1e-12;

/// A fitted ARIMA model and its in-sample diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    /// phi_1..phi_p
    pub ar_coeffs: Vec<f64>,
    /// theta_1..theta_q
    pub ma_coeffs: Vec<f64>,
    /// Fitted constant of the differenced series.
    pub constant: f64,
    /// Arithmetic mean of the differenced series.
    pub mean: f64,
    /// One-step in-sample residuals, one per conditioned observation.
    pub residuals: Vec<f64>,
    /// Root mean squared one-step residual.
    pub rmse: f64,
}

impl ArimaFit {
    /// One-step-ahead forecast. `values` must be the series the model was
    /// fitted on.
    pub fn forecast_next(&self, values: &[f64]) -> f64 {
        let w = difference(values, self.order.d as usize);
        let phi = self.ar_coeffs.first().copied().unwrap_or(0.0);
        let theta = self.ma_coeffs.first().copied().unwrap_or(0.0);
        let last_w = if self.order.p == 1 {
            w.last().copied().unwrap_or(0.0)
        } else {
            0.0
        };
        let last_e = if self.order.q == 1 {
            self.residuals.last().copied().unwrap_or(0.0)
        } else {
            0.0
        };
        let next_w = self.constant + phi * last_w + theta * last_e;
        if self.order.d == 1 {
            values.last().copied().unwrap_or(0.0) + next_w
        } else {
            next_w
        }
    }
}

fn difference(values: &[f64], d: usize) -> Vec<f64> {
    let mut out = values.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Conditional sum of squares at (phi, theta) with the optimal constant
/// substituted in closed form. Residuals are affine in c, so the three
/// accumulated quadratics determine both the minimizing c and the minimum.
fn css_concentrated(w: &[f64], p: usize, phi: f64, theta: f64) -> (f64, f64) {
    let mut prev_a = 0.0;
    let mut prev_b = 0.0;
    let mut saa = 0.0;
    let mut sab = 0.0;
    let mut sbb = 0.0;
    for t in p..w.len() {
        let ar = if p == 1 { phi * w[t - 1] } else { 0.0 };
        let a = w[t] - ar - theta * prev_a;
        let b = -1.0 - theta * prev_b;
        saa += a * a;
        sab += a * b;
        sbb += b * b;
        prev_a = a;
        prev_b = b;
    }
    let c = -sab / sbb;
    let sse = (saa - sab * sab / sbb).max(0.0);
    (sse, c)
}

fn residuals_at(w: &[f64], p: usize, phi: f64, theta: f64, c: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len() - p);
    let mut prev = 0.0;
    for t in p..w.len() {
        let ar = if p == 1 { phi * w[t - 1] } else { 0.0 };
        let e = w[t] - c - ar - theta * prev;
        out.push(e);
        prev = e;
    }
    out
}

/// Golden-section minimization on [lo, hi]; assumes the bracket contains a
/// single local minimum of interest.
fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo < 1e-10 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Coarse scan over the coefficient interval followed by golden-section
/// refinement around the best grid point.
fn minimize_1d(f: &impl Fn(f64) -> f64) -> f64 {
    let points = 201;
    let step = 2.0 * COEF_BOUND / (points - 1) as f64;
    let mut best_x = -COEF_BOUND;
    let mut best_f = f(best_x);
    for i in 1..points {
        let x = -COEF_BOUND + i as f64 * step;
        let fx = f(x);
        if fx < best_f {
            best_f = fx;
            best_x = x;
        }
    }
    let lo = (best_x - step).max(-COEF_BOUND);
    let hi = (best_x + step).min(COEF_BOUND);
    golden_section(f, lo, hi)
}

fn minimize_2d(f: &impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let points = 61;
    let step = 2.0 * COEF_BOUND / (points - 1) as f64;
    let mut best = (-COEF_BOUND, -COEF_BOUND);
    let mut best_f = f(best.0, best.1);
    for i in 0..points {
        let x = -COEF_BOUND + i as f64 * step;
        for j in 0..points {
            let y = -COEF_BOUND + j as f64 * step;
            let fxy = f(x, y);
            if fxy < best_f {
                best_f = fxy;
                best = (x, y);
            }
        }
    }
    let (mut phi, mut theta) = best;
    let mut current = best_f;
    for _ in 0..MAX_REFINE_ROUNDS {
        phi = minimize_1d(&|x| f(x, theta));
        theta = minimize_1d(&|y| f(phi, y));
        let next = f(phi, theta);
        if current - next < 1e-14 {
            break;
        }
        current = next;
    }
    (phi, theta)
}

/// Fit one ARIMA order to a series by conditional sum of squares.
///
/// Requires the differenced series to hold at least p + q + 3 points. A
/// differenced series with no variation short-circuits to the exact
/// zero-residual fit.
pub fn fit_arima(values: &[f64], order: ArimaOrder) -> Result<ArimaFit, ForecastError> {
    if values.is_empty() {
        return Err(ForecastError::EmptySeries);
    }
    if !order.is_supported() {
        return Err(ForecastError::InvalidOrder(order));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ForecastError::FitDiverged);
    }
    let (p, d, q) = (order.p as usize, order.d as usize, order.q as usize);
    let w = difference(values, d);
    let needed = p + q + 3;
    if w.len() < needed {
        return Err(ForecastError::SeriesTooShort {
            needed,
            actual: w.len(),
        });
    }
    let mean = w.iter().sum::<f64>() / w.len() as f64;

    if w.iter().all(|&x| (x - w[0]).abs() <= DEGENERATE_EPS) {
        return Ok(ArimaFit {
            order,
            ar_coeffs: vec![0.0; p],
            ma_coeffs: vec![0.0; q],
            constant: w[0],
            mean,
            residuals: vec![0.0; w.len() - p],
            rmse: 0.0,
        });
    }

    let (phi, theta) = match (p, q) {
        (0, 0) => (0.0, 0.0),
        (1, 0) => (minimize_1d(&|x| css_concentrated(&w, 1, x, 0.0).0), 0.0),
        (0, 1) => (0.0, minimize_1d(&|y| css_concentrated(&w, 0, 0.0, y).0)),
        (1, 1) => minimize_2d(&|x, y| css_concentrated(&w, 1, x, y).0),
        _ => unreachable!("orders above 1 rejected earlier"),
    };
    let (sse, constant) = css_concentrated(&w, p, phi, theta);
    if !sse.is_finite() || !constant.is_finite() {
        return Err(ForecastError::FitDiverged);
    }
    let residuals = residuals_at(&w, p, phi, theta, constant);
    let rmse = (sse / residuals.len() as f64).sqrt();
    Ok(ArimaFit {
        order,
        ar_coeffs: if p == 1 { vec![phi] } else { Vec::new() },
        ma_coeffs: if q == 1 { vec![theta] } else { Vec::new() },
        constant,
        mean,
        residuals,
        rmse,
    })
}

/// Pick the candidate order with the lowest held-out RMSE under
/// rolling-origin one-step evaluation over the last `min(3, t-4)` points.
///
/// Returns `None` when no candidate can be evaluated: the series is
/// constant, too short to hold out a point, or every candidate fails to
/// fit on some training prefix. Ties keep the earliest candidate.
pub fn select_arima_order(values: &[f64], candidates: &[ArimaOrder]) -> Option<ArimaOrder> {
    let t = values.len();
    let holdout = 3.min(t.saturating_sub(4));
    if holdout == 0 || candidates.is_empty() {
        return None;
    }
    if values.iter().all(|&v| (v - values[0]).abs() <= DEGENERATE_EPS) {
        return None;
    }
    let mut best: Option<(f64, ArimaOrder)> = None;
    for &order in candidates {
        let mut squared = 0.0;
        let mut usable = true;
        for h in (1..=holdout).rev() {
            let train = &values[..t - h];
            match fit_arima(train, order) {
                Ok(fit) => {
                    // candidates are compared on the prediction that would
                    // actually be emitted, i.e. clamped at zero
                    let predicted = fit.forecast_next(train).max(0.0);
                    let err = predicted - values[t - h];
                    squared += err * err;
                }
                Err(_) => {
                    usable = false;
                    break;
                }
            }
        }
        if !usable {
            continue;
        }
        let rmse = (squared / holdout as f64).sqrt();
        if best.as_ref().is_none_or(|(b, _)| rmse < *b) {
            best = Some((rmse, order));
        }
    }
    best.map(|(_, order)| order)
}

/// Forecast one step ahead with the best candidate order, falling back to
/// the last-3 average when nothing can be fitted. The result is clamped
/// below at zero.
pub fn arima_forecast(values: &[f64], candidates: &[ArimaOrder]) -> Result<f64, ForecastError> {
    if values.is_empty() {
        return Err(ForecastError::EmptySeries);
    }
    let Some(order) = select_arima_order(values, candidates) else {
        return last3_avg_forecast(values);
    };
    match fit_arima(values, order) {
        Ok(fit) => Ok(fit.forecast_next(values).max(0.0)),
        Err(_) => last3_avg_forecast(values),
    }
}

/// Generate a seeded ARIMA(p,d,q) realization with Gaussian innovations.
///
/// The ARMA core runs through a 50-step burn-in before the reported window
/// starts; with d = 1 the stationary draw is integrated by cumulative sum.
/// The same seed always yields the same series.
pub fn simulate_arima(
    order: ArimaOrder,
    phi: f64,
    theta: f64,
    n: usize,
    noise_sd: f64,
    seed: u64,
) -> Vec<f64> {
    assert!(order.is_supported(), "orders above 1 are not supported");
    let burn_in = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sd).expect("valid noise sd");
    let phi = if order.p == 1 { phi } else { 0.0 };
    let theta = if order.q == 1 { theta } else { 0.0 };

    let total = burn_in + n;
    let mut w = Vec::with_capacity(total);
    let mut prev_w = 0.0;
    let mut prev_e = 0.0;
    for _ in 0..total {
        let e = normal.sample(&mut rng);
        let value = phi * prev_w + e + theta * prev_e;
        w.push(value);
        prev_w = value;
        prev_e = e;
    }
    let window = &w[burn_in..];
    if order.d == 1 {
        let mut y = Vec::with_capacity(n);
        let mut level = 0.0;
        for &delta in window {
            level += delta;
            y.push(level);
        }
        y
    } else {
        window.to_vec()
    }
}
