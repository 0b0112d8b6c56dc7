//! Synthetic compartment series generated from the model itself, for
//! calibration exercises, documentation examples and test fixtures.

use chrono::NaiveDate;

use crate::epimodel::{
    simulate_deterministic, simulate_path, CompartmentState, EpidemicParams, IntegratorConfig,
    NoiseIntensities, NoisePath,
};
use crate::ingest::CompartmentSeries;
use crate::seeds;

fn series_from(
    states: Vec<CompartmentState>,
    alpha: &[f64],
    days: usize,
    start: NaiveDate,
) -> CompartmentSeries {
    CompartmentSeries {
        start,
        t: (0..=days).map(|i| i as f64).collect(),
        states,
        alpha_obs: alpha[..days].iter().copied().chain(std::iter::once(alpha[days - 1])).collect(),
        population: 1.0,
    }
}

/// Daily series following the deterministic dynamics under a given
/// administration-rate path. The final date repeats the last rate so every
/// row carries one.
pub fn ode_series(
    x0: &CompartmentState,
    params: &EpidemicParams,
    alpha: &[f64],
    start: NaiveDate,
) -> CompartmentSeries {
    let days = alpha.len();
    let cfg = IntegratorConfig::daily(days);
    let traj = simulate_deterministic(
        x0,
        &|n: usize, _: &CompartmentState| alpha[n],
        params,
        &cfg,
    )
    .expect("synthetic generation with valid inputs");
    series_from(traj.states, alpha, days, start)
}

/// One noisy path of the stochastic dynamics on a daily grid.
pub fn sde_series(
    x0: &CompartmentState,
    params: &EpidemicParams,
    z: &NoiseIntensities,
    alpha: &[f64],
    start: NaiveDate,
    seed: u64,
) -> CompartmentSeries {
    let days = alpha.len();
    let cfg = IntegratorConfig::daily(days);
    let mut rng = seeds::rng(seed, seeds::stream::ENSEMBLE_PATH, 0);
    let noise = NoisePath::sample(&cfg, &mut rng);
    let traj = simulate_path(
        x0,
        &|n: usize, _: &CompartmentState| alpha[n],
        params,
        z,
        &cfg,
        &noise,
    )
    .expect("synthetic generation with valid inputs");
    series_from(traj.states, alpha, days, start)
}

/// Hump-shaped administration-rate path: a slow start, a mid-campaign peak,
/// and a tail decline, mimicking a realistic rollout.
pub fn hump_alpha_path(days: usize, floor: f64, peak: f64, peak_day: f64, width: f64) -> Vec<f64> {
    (0..days)
        .map(|n| {
            let z = (n as f64 - peak_day) / width;
            floor + peak * (-0.5 * z * z).exp()
        })
        .collect()
}
