//! Natural cubic splines for densifying a daily series to a higher
//! frequency. Knot values are reproduced exactly; interpolants are clamped
//! at zero since compartment shares cannot go negative.

use super::{CompartmentSeries, IngestError};
use crate::epimodel::CompartmentState;

/// Second derivatives of the natural cubic spline through `(t, y)`,
/// zero-curvature at both ends, via the Thomas algorithm.
fn second_derivatives(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut m = vec![0.0f64; n];
    if n < 3 {
        return m;
    }
    let interior = n - 2;
    let mut diag = vec![0.0f64; interior];
    let mut upper = vec![0.0f64; interior];
    let mut rhs = vec![0.0f64; interior];
    for i in 0..interior {
        let h0 = t[i + 1] - t[i];
        let h1 = t[i + 2] - t[i + 1];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
    }
    // forward sweep (lower diagonal mirrors the upper one)
    for i in 1..interior {
        let lower = t[i + 1] - t[i];
        let w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut sol = vec![0.0f64; interior];
    sol[interior - 1] = rhs[interior - 1] / diag[interior - 1];
    for i in (0..interior - 1).rev() {
        sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
    }
    m[1..=interior].copy_from_slice(&sol);
    m
}

/// Evaluate the spline on interval `i` at offset `s = x - t[i]`.
fn eval_segment(t: &[f64], y: &[f64], m: &[f64], i: usize, x: f64) -> f64 {
    let h = t[i + 1] - t[i];
    let s = x - t[i];
    let lin = (y[i + 1] - y[i]) / h - h / 6.0 * (2.0 * m[i] + m[i + 1]);
    y[i] + s * lin + s * s * m[i] / 2.0 + s * s * s * (m[i + 1] - m[i]) / (6.0 * h)
}

struct Spline {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn fit(t: &[f64], y: &[f64]) -> Self {
        Self { t: t.to_vec(), y: y.to_vec(), m: second_derivatives(t, y) }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let i = match self.t.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(k) => return self.y[k], // knots are exact by construction
            Err(k) => k.clamp(1, n - 1) - 1,
        };
        eval_segment(&self.t, &self.y, &self.m, i, x)
    }
}

/// Densify a series to `k` samples per original interval (`k` in
/// {1, 5, 10, 20}). Compartments and the administration rate are splined
/// independently; negative interpolants are clamped to zero.
pub fn augment_cubic_spline(
    series: &CompartmentSeries,
    k: usize,
) -> Result<CompartmentSeries, IngestError> {
    if ![1, 5, 10, 20].contains(&k) {
        return Err(IngestError::BadAugmentFactor(k));
    }
    if series.len() < 4 {
        return Err(IngestError::SeriesTooShort { need: 4, got: series.len() });
    }
    if k == 1 {
        return Ok(series.clone());
    }
    let n = series.len();
    let columns: Vec<Vec<f64>> = (0..9)
        .map(|c| {
            (0..n)
                .map(|i| {
                    if c < 8 {
                        series.states[i].as_array()[c]
                    } else {
                        series.alpha_obs[i]
                    }
                })
                .collect()
        })
        .collect();
    let splines: Vec<Spline> = columns.iter().map(|y| Spline::fit(&series.t, y)).collect();

    let mut t = Vec::with_capacity((n - 1) * k + 1);
    for i in 0..n - 1 {
        let h = (series.t[i + 1] - series.t[i]) / k as f64;
        for j in 0..k {
            t.push(series.t[i] + h * j as f64);
        }
    }
    t.push(series.t[n - 1]);

    let mut states = Vec::with_capacity(t.len());
    let mut alpha = Vec::with_capacity(t.len());
    for (izx, &x) in t.iter().enumerate() {
        let on_knot = izx % k == 0;
        let knot = izx / k;
        let mut vals = [0.0f64; 9];
        for (c, sp) in splines.iter().enumerate() {
            vals[c] = if on_knot {
                // reproduce originals exactly rather than re-evaluating
                sp.y[knot]
            } else {
                f64::max(0.0, sp.eval(x))
            };
        }
        states.push(CompartmentState::from_array([
            vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7],
        ]));
        alpha.push(vals[8]);
    }
    Ok(CompartmentSeries {
        start: series.start,
        t,
        states,
        alpha_obs: alpha,
        population: series.population,
    })
}
