//! Eight-compartment epidemic dynamics (S, V, E, I1, I2, I3, R, D) with
//! vital inflow/outflow, a vaccination control rate, a control-dependent
//! hospitalization rate, multiplicative per-compartment noise, and explicit
//! Euler / Euler–Maruyama integration with ensemble simulation.
//!
//! The drift is written once, generically over a scalar algebra, so the
//! plain `f64` integrators and the autodiff consumers evaluate the exact
//! same expression in the exact same order.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeds;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("non-finite compartment state")]
    NonFiniteState,
    #[error("policy produced invalid rate {rate} at step {step}")]
    InvalidRate { step: usize, rate: f64 },
    #[error("noise path has {got} steps, integrator expects {want}")]
    NoiseShape { got: usize, want: usize },
    #[error("horizon {horizon} is not an integral multiple of dt {dt}")]
    HorizonMismatch { horizon: f64, dt: f64 },
    #[error("ensemble needs at least one path")]
    EmptyEnsemble,
}

/// Population proportions in each compartment at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompartmentState {
    pub susceptible: f64,
    pub vaccinated: f64,
    pub exposed: f64,
    pub infectious_mild: f64,
    pub hospitalized: f64,
    pub icu: f64,
    pub recovered: f64,
    pub dead: f64,
}

impl CompartmentState {
    pub const ZERO: Self = Self::from_array([0.0; 8]);

    pub const fn from_array(a: [f64; 8]) -> Self {
        Self {
            susceptible: a[0],
            vaccinated: a[1],
            exposed: a[2],
            infectious_mild: a[3],
            hospitalized: a[4],
            icu: a[5],
            recovered: a[6],
            dead: a[7],
        }
    }

    pub const fn as_array(&self) -> [f64; 8] {
        [
            self.susceptible,
            self.vaccinated,
            self.exposed,
            self.infectious_mild,
            self.hospitalized,
            self.icu,
            self.recovered,
            self.dead,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    /// Share of the population unable to work: everyone outside S, V and R.
    pub fn non_working_share(&self) -> f64 {
        1.0 - (self.susceptible + self.vaccinated + self.recovered)
    }
}

/// Affine dependence of the mild-to-hospital transition rate on the
/// vaccination administration rate, clamped into [0, 1] before use so a
/// steep negative slope cannot create a reverse flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HospitalizationLink {
    pub intercept: f64,
    pub slope: f64,
}

impl HospitalizationLink {
    pub const fn constant(rate: f64) -> Self {
        Self { intercept: rate, slope: 0.0 }
    }
}

/// `clamp(intercept + slope * alpha, 0, 1)`.
pub fn hospitalization_rate(alpha: f64, link: &HospitalizationLink) -> f64 {
    (link.intercept + link.slope * alpha).clamp(0.0, 1.0)
}

/// Dynamics parameters. Rates are per day; `vacc_inefficiency` is the
/// residual susceptibility of vaccinated individuals in [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    /// Births plus net migration entering the susceptible pool, per day.
    pub inflow: f64,
    /// Background mortality leaving every living compartment, per day.
    pub outflow: f64,
    /// Infection pressure per unit of mild / hospitalized / ICU prevalence.
    pub transmission: [f64; 3],
    pub vacc_inefficiency: f64,
    /// Exposed-to-mild progression rate.
    pub incubation: f64,
    /// Recovery rates out of mild / hospitalized / ICU.
    pub recovery: [f64; 3],
    /// Hospital-to-ICU transition rate.
    pub icu_admission: f64,
    /// ICU mortality rate.
    pub icu_mortality: f64,
    pub hosp_link: HospitalizationLink,
}

/// Per-compartment multiplicative noise intensities, per square-root day.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseIntensities {
    pub sigma: [f64; 8],
}

impl NoiseIntensities {
    pub const ZERO: Self = Self { sigma: [0.0; 8] };

    pub fn uniform(s: f64) -> Self {
        Self { sigma: [s; 8] }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut sigma = self.sigma;
        for s in &mut sigma {
            *s *= k;
        }
        Self { sigma }
    }
}

/// Fixed-step integration grid: `steps * dt` days.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub steps: usize,
}

impl IntegratorConfig {
    /// Daily stepping over a whole number of days.
    pub fn daily(days: usize) -> Self {
        Self { dt: 1.0, steps: days }
    }

    /// `steps = horizon / dt`, which must divide exactly.
    pub fn from_horizon(dt: f64, horizon: f64) -> Result<Self, ModelError> {
        let steps = horizon / dt;
        if steps < 0.0 || steps.fract() != 0.0 {
            return Err(ModelError::HorizonMismatch { horizon, dt });
        }
        Ok(Self { dt, steps: steps as usize })
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// Standard-normal increments for one simulated path, one 8-vector per step.
/// The `sqrt(dt)` scaling happens inside the integrator step.
#[derive(Clone, Debug)]
pub struct NoisePath {
    pub increments: Vec<[f64; 8]>,
}

impl NoisePath {
    pub fn zeros(steps: usize) -> Self {
        Self { increments: vec![[0.0; 8]; steps] }
    }

    pub fn sample<R: Rng>(cfg: &IntegratorConfig, rng: &mut R) -> Self {
        let mut increments = Vec::with_capacity(cfg.steps);
        for _ in 0..cfg.steps {
            let mut dw = [0.0; 8];
            for w in &mut dw {
                *w = rng.sample(StandardNormal);
            }
            increments.push(dw);
        }
        Self { increments }
    }

    /// Path noise derived from `(master seed, path index)` so ensembles are
    /// order-independent and strategies can share noise for comparison.
    pub fn for_path(cfg: &IntegratorConfig, master_seed: u64, path_index: u64) -> Self {
        let mut rng = seeds::rng(master_seed, seeds::stream::ENSEMBLE_PATH, path_index);
        Self::sample(cfg, &mut rng)
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }
}

/// One simulated path: `steps + 1` states and the rate applied at each step.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<CompartmentState>,
    pub rates: Vec<f64>,
    pub dt: f64,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.rates.len()
    }

    pub fn terminal(&self) -> &CompartmentState {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// CSV export: header `t,S,V,E,I1,I2,I3,R,D,alpha`, one row per stored
    /// state, 10 significant digits. The terminal row repeats the last
    /// applied rate so every row stays numeric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,S,V,E,I1,I2,I3,R,D,alpha\n");
        for (n, state) in self.states.iter().enumerate() {
            let alpha = if self.rates.is_empty() {
                0.0
            } else {
                self.rates[n.min(self.rates.len() - 1)]
            };
            let a = state.as_array();
            out.push_str(&format!(
                "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n",
                n as f64 * self.dt,
                a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], alpha,
            ));
        }
        out
    }
}

/// Vaccination-rate policy applied during simulation.
pub trait RatePolicy {
    fn rate(&self, step: usize, state: &CompartmentState) -> f64;
}

impl<F: Fn(usize, &CompartmentState) -> f64> RatePolicy for F {
    fn rate(&self, step: usize, state: &CompartmentState) -> f64 {
        self(step, state)
    }
}

// ---------------------------------------------------------------------------
// Drift, written once over a scalar algebra.
// ---------------------------------------------------------------------------

/// Minimal scalar algebra so the drift can be evaluated on plain floats or
/// recorded on an autodiff tape without duplicating the expression.
pub trait Algebra {
    type V: Copy;
    fn lift(&mut self, c: f64) -> Self::V;
    fn add(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn sub(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn mul(&mut self, a: Self::V, b: Self::V) -> Self::V;
}

/// Plain `f64` evaluation.
pub struct F64Algebra;

impl Algebra for F64Algebra {
    type V = f64;
    #[inline]
    fn lift(&mut self, c: f64) -> f64 {
        c
    }
    #[inline]
    fn add(&mut self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline]
    fn sub(&mut self, a: f64, b: f64) -> f64 {
        a - b
    }
    #[inline]
    fn mul(&mut self, a: f64, b: f64) -> f64 {
        a * b
    }
}

/// Drift coefficients in algebra values. `p1` is explicit: simulation feeds
/// the control-linked value, calibration a trainable constant.
#[derive(Clone, Copy)]
pub struct DriftCoeffs<V> {
    pub inflow: V,
    pub outflow: V,
    pub transmission: [V; 3],
    pub vacc_inefficiency: V,
    pub incubation: V,
    pub recovery: [V; 3],
    pub icu_admission: V,
    pub icu_mortality: V,
    pub p1: V,
}

impl DriftCoeffs<f64> {
    pub fn from_params(p: &EpidemicParams, alpha: f64) -> Self {
        Self {
            inflow: p.inflow,
            outflow: p.outflow,
            transmission: p.transmission,
            vacc_inefficiency: p.vacc_inefficiency,
            incubation: p.incubation,
            recovery: p.recovery,
            icu_admission: p.icu_admission,
            icu_mortality: p.icu_mortality,
            p1: hospitalization_rate(alpha, &p.hosp_link),
        }
    }
}

/// Right-hand side of the deterministic system.
///
/// The component sum telescopes to `inflow − outflow·(S+V+E+I1+I2+I3+R)`;
/// the dead compartment has no vital outflow.
pub fn drift_terms<A: Algebra>(
    alg: &mut A,
    x: &[A::V; 8],
    alpha: A::V,
    c: &DriftCoeffs<A::V>,
) -> [A::V; 8] {
    let [s, v, e, i1, i2, i3, r, _d] = *x;

    // infection pressure: beta1*I1 + beta2*I2 + beta3*I3
    let b1 = alg.mul(c.transmission[0], i1);
    let b2 = alg.mul(c.transmission[1], i2);
    let b3 = alg.mul(c.transmission[2], i3);
    let t01 = alg.add(b1, b2);
    let pressure = alg.add(t01, b3);

    let press_s = alg.mul(pressure, s);
    let alpha_s = alg.mul(alpha, s);
    let zeta_s = alg.mul(c.outflow, s);
    let d_s = {
        let t = alg.sub(c.inflow, press_s);
        let t = alg.sub(t, alpha_s);
        alg.sub(t, zeta_s)
    };

    let sv = alg.mul(c.vacc_inefficiency, v);
    let press_sv = alg.mul(pressure, sv);
    let zeta_v = alg.mul(c.outflow, v);
    let d_v = {
        let t = alg.sub(alpha_s, press_sv);
        alg.sub(t, zeta_v)
    };

    let s_plus_sv = alg.add(s, sv);
    let press_in = alg.mul(pressure, s_plus_sv);
    let gamma_e = alg.mul(c.incubation, e);
    let zeta_e = alg.mul(c.outflow, e);
    let d_e = {
        let t = alg.sub(press_in, gamma_e);
        alg.sub(t, zeta_e)
    };

    let out1 = alg.add(c.recovery[0], c.p1);
    let out1_i1 = alg.mul(out1, i1);
    let zeta_i1 = alg.mul(c.outflow, i1);
    let d_i1 = {
        let t = alg.sub(gamma_e, out1_i1);
        alg.sub(t, zeta_i1)
    };

    let p1_i1 = alg.mul(c.p1, i1);
    let out2 = alg.add(c.recovery[1], c.icu_admission);
    let out2_i2 = alg.mul(out2, i2);
    let zeta_i2 = alg.mul(c.outflow, i2);
    let d_i2 = {
        let t = alg.sub(p1_i1, out2_i2);
        alg.sub(t, zeta_i2)
    };

    let p2_i2 = alg.mul(c.icu_admission, i2);
    let out3 = alg.add(c.recovery[2], c.icu_mortality);
    let out3_i3 = alg.mul(out3, i3);
    let zeta_i3 = alg.mul(c.outflow, i3);
    let d_i3 = {
        let t = alg.sub(p2_i2, out3_i3);
        alg.sub(t, zeta_i3)
    };

    let rec1 = alg.mul(c.recovery[0], i1);
    let rec2 = alg.mul(c.recovery[1], i2);
    let rec3 = alg.mul(c.recovery[2], i3);
    let zeta_r = alg.mul(c.outflow, r);
    let d_r = {
        let t = alg.add(rec1, rec2);
        let t = alg.add(t, rec3);
        alg.sub(t, zeta_r)
    };

    let d_d = alg.mul(c.icu_mortality, i3);

    [d_s, d_v, d_e, d_i1, d_i2, d_i3, d_r, d_d]
}

/// Deterministic drift with the control-linked hospitalization rate.
pub fn drift(x: &CompartmentState, alpha: f64, p: &EpidemicParams) -> Result<[f64; 8], ModelError> {
    if !x.is_finite() || !alpha.is_finite() {
        return Err(ModelError::NonFiniteState);
    }
    Ok(drift_unchecked(x, alpha, p))
}

#[inline]
fn drift_unchecked(x: &CompartmentState, alpha: f64, p: &EpidemicParams) -> [f64; 8] {
    let coeffs = DriftCoeffs::from_params(p, alpha);
    drift_terms(&mut F64Algebra, &x.as_array(), alpha, &coeffs)
}

/// Diffusion coefficients: `sigma_k * x_k` componentwise.
pub fn diffusion(x: &CompartmentState, z: &NoiseIntensities) -> [f64; 8] {
    let a = x.as_array();
    let mut out = [0.0; 8];
    for k in 0..8 {
        out[k] = z.sigma[k] * a[k];
    }
    out
}

#[inline]
fn clamp_nonneg(v: f64) -> f64 {
    f64::max(0.0, v)
}

/// One explicit Euler step with a non-negativity clamp. The exact system
/// stays positive, but the explicit scheme can cross zero; clamping at zero
/// after each step is the lightest repair that keeps the update otherwise
/// untouched.
pub fn step_euler(x: &CompartmentState, alpha: f64, p: &EpidemicParams, dt: f64) -> CompartmentState {
    let d = drift_unchecked(x, alpha, p);
    let a = x.as_array();
    let mut next = [0.0; 8];
    for k in 0..8 {
        next[k] = clamp_nonneg(a[k] + d[k] * dt);
    }
    CompartmentState::from_array(next)
}

/// One Euler–Maruyama step: drift plus `sigma_k x_k * sqrt(dt) * dW_k`,
/// then the non-negativity clamp. With all intensities zero this reproduces
/// [`step_euler`] bit for bit.
pub fn step_euler_maruyama(
    x: &CompartmentState,
    alpha: f64,
    p: &EpidemicParams,
    z: &NoiseIntensities,
    dt: f64,
    dw: &[f64; 8],
) -> CompartmentState {
    let d = drift_unchecked(x, alpha, p);
    let g = diffusion(x, z);
    let sq = dt.sqrt();
    let a = x.as_array();
    let mut next = [0.0; 8];
    for k in 0..8 {
        next[k] = clamp_nonneg(a[k] + d[k] * dt + g[k] * (sq * dw[k]));
    }
    CompartmentState::from_array(next)
}

/// Simulate one path under a policy and a fixed noise path.
pub fn simulate_path<P: RatePolicy>(
    x0: &CompartmentState,
    policy: &P,
    p: &EpidemicParams,
    z: &NoiseIntensities,
    cfg: &IntegratorConfig,
    noise: &NoisePath,
) -> Result<Trajectory, ModelError> {
    if noise.steps() != cfg.steps {
        return Err(ModelError::NoiseShape { got: noise.steps(), want: cfg.steps });
    }
    if !x0.is_finite() {
        return Err(ModelError::NonFiniteState);
    }
    let mut states = Vec::with_capacity(cfg.steps + 1);
    let mut rates = Vec::with_capacity(cfg.steps);
    let mut x = *x0;
    states.push(x);
    for n in 0..cfg.steps {
        let alpha = policy.rate(n, &x);
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(ModelError::InvalidRate { step: n, rate: alpha });
        }
        x = step_euler_maruyama(&x, alpha, p, z, cfg.dt, &noise.increments[n]);
        rates.push(alpha);
        states.push(x);
    }
    Ok(Trajectory { states, rates, dt: cfg.dt })
}

/// Deterministic path: zero noise, plain Euler stepping.
pub fn simulate_deterministic<P: RatePolicy>(
    x0: &CompartmentState,
    policy: &P,
    p: &EpidemicParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, ModelError> {
    simulate_path(x0, policy, p, &NoiseIntensities::ZERO, cfg, &NoisePath::zeros(cfg.steps))
}

/// Ensemble output: stepwise mean states/rates plus each path's terminal state.
#[derive(Clone, Debug)]
pub struct EnsembleSummary {
    pub mean: Trajectory,
    pub terminal_states: Vec<CompartmentState>,
}

/// Simulate `n_paths` independent paths (noise derived from the master seed
/// and the path index) and average them stepwise. Paths run in parallel;
/// the reduction is in fixed path order, so results do not depend on the
/// number of worker threads.
pub fn simulate_ensemble<P: RatePolicy + Sync>(
    x0: &CompartmentState,
    policy: &P,
    p: &EpidemicParams,
    z: &NoiseIntensities,
    cfg: &IntegratorConfig,
    n_paths: usize,
    master_seed: u64,
) -> Result<EnsembleSummary, ModelError> {
    if n_paths == 0 {
        return Err(ModelError::EmptyEnsemble);
    }
    let paths: Vec<Trajectory> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let noise = NoisePath::for_path(cfg, master_seed, i as u64);
            simulate_path(x0, policy, p, z, cfg, &noise)
        })
        .collect::<Result<_, _>>()?;

    let inv = 1.0 / n_paths as f64;
    let mut mean_states = vec![[0.0f64; 8]; cfg.steps + 1];
    let mut mean_rates = vec![0.0f64; cfg.steps];
    for traj in &paths {
        for (acc, s) in mean_states.iter_mut().zip(&traj.states) {
            let a = s.as_array();
            for k in 0..8 {
                acc[k] += a[k];
            }
        }
        for (acc, r) in mean_rates.iter_mut().zip(&traj.rates) {
            *acc += r;
        }
    }
    let mean = Trajectory {
        states: mean_states
            .into_iter()
            .map(|mut a| {
                for v in &mut a {
                    *v *= inv;
                }
                CompartmentState::from_array(a)
            })
            .collect(),
        rates: mean_rates.into_iter().map(|r| r * inv).collect(),
        dt: cfg.dt,
    };
    let terminal_states = paths.iter().map(|t| *t.terminal()).collect();
    Ok(EnsembleSummary { mean, terminal_states })
}
