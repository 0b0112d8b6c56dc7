//! Ordinary least squares of hospitalization-rate observations on the
//! observed administration rate, with a two-sided t-test on the slope.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::flows::FlowDecomposition;
use super::IngestError;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RegressionFit {
    pub intercept: f64,
    pub slope: f64,
    pub p_value: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Pair every decomposed day carrying a hospitalization-rate observation
/// with the administration rate of the same day, then fit
/// `p1 = intercept + slope * alpha` by least squares.
pub fn fit_hospitalization_regression(
    flows: &FlowDecomposition,
    alpha_obs: &[f64],
) -> Result<RegressionFit, IngestError> {
    let pairs: Vec<(f64, f64)> = flows
        .rows
        .iter()
        .filter_map(|row| {
            let p1 = row.p1_obs?;
            let alpha = *alpha_obs.get(row.index)?;
            Some((alpha, p1))
        })
        .collect();
    ols(&pairs)
}

fn ols(pairs: &[(f64, f64)]) -> Result<RegressionFit, IngestError> {
    let n = pairs.len();
    if n < 3 {
        return Err(IngestError::TooFewObservations { need: 3, got: n });
    }
    let nf = n as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in pairs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(IngestError::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = pairs
        .iter()
        .map(|&(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };

    let df = nf - 2.0;
    let sigma2 = ssr / df;
    let se_slope = (sigma2 / sxx).sqrt();
    let p_value = if se_slope == 0.0 {
        if slope == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        let t = slope / se_slope;
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok(RegressionFit { intercept, slope, p_value, r_squared, n })
}
