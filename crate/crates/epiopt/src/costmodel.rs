//! Government expenditure accounting: instantaneous four-component cost,
//! accumulation along trajectories with the left-endpoint rectangle rule,
//! and ensemble expectation with standard errors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epimodel::{CompartmentState, Trajectory};

#[derive(Debug, Error)]
pub enum CostError {
    #[error("expected at least one path")]
    EmptyEnsemble,
}

/// Cost weights. `vaccination` multiplies the squared administration rate;
/// `quarantine` the exposed share; the three care weights the corresponding
/// prevalence; `economic` scales lost labour output via `labour_share`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub vaccination: f64,
    pub quarantine: f64,
    pub mild_care: f64,
    pub hospital_care: f64,
    pub icu_care: f64,
    pub economic: f64,
    pub labour_share: f64,
}

impl CostParams {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            vaccination: self.vaccination * k,
            quarantine: self.quarantine * k,
            mild_care: self.mild_care * k,
            hospital_care: self.hospital_care * k,
            icu_care: self.icu_care * k,
            economic: self.economic * k,
            labour_share: self.labour_share,
        }
    }
}

/// Four-component expenditure decomposition. `policy()` aggregates
/// vaccination and quarantine, the split reports keep internally.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub vaccination: f64,
    pub quarantine: f64,
    pub healthcare: f64,
    pub economic: f64,
}

impl CostBreakdown {
    pub const ZERO: Self =
        Self { vaccination: 0.0, quarantine: 0.0, healthcare: 0.0, economic: 0.0 };

    pub fn policy(&self) -> f64 {
        self.vaccination + self.quarantine
    }

    pub fn total(&self) -> f64 {
        self.vaccination + self.quarantine + self.healthcare + self.economic
    }

    pub fn components(&self) -> [f64; 4] {
        [self.vaccination, self.quarantine, self.healthcare, self.economic]
    }

    fn from_components(c: [f64; 4]) -> Self {
        Self { vaccination: c[0], quarantine: c[1], healthcare: c[2], economic: c[3] }
    }

    pub fn add_scaled(&mut self, other: &Self, k: f64) {
        self.vaccination += other.vaccination * k;
        self.quarantine += other.quarantine * k;
        self.healthcare += other.healthcare * k;
        self.economic += other.economic * k;
    }
}

/// Instantaneous cost rates at one state under administration rate `alpha`:
/// quadratic vaccination cost, quarantine support proportional to the
/// exposed share, severity-weighted care costs, and lost labour output for
/// everyone outside S, V and R. The economic term is floored at zero so a
/// noise-inflated working share cannot produce a negative expenditure.
pub fn instantaneous_cost(x: &CompartmentState, alpha: f64, cp: &CostParams) -> CostBreakdown {
    CostBreakdown {
        vaccination: cp.vaccination * alpha * alpha,
        quarantine: cp.quarantine * x.exposed,
        healthcare: cp.mild_care * x.infectious_mild
            + cp.hospital_care * x.hospitalized
            + cp.icu_care * x.icu,
        economic: f64::max(0.0, cp.economic * cp.labour_share * x.non_working_share()),
    }
}

/// Left-endpoint rectangle rule over the trajectory's applied steps:
/// `sum_n cost(x_n, alpha_n) * dt`. The control is piecewise constant per
/// step, so no higher-order quadrature is warranted; no discounting.
pub fn accumulate_cost(traj: &Trajectory, cp: &CostParams) -> CostBreakdown {
    let mut acc = CostBreakdown::ZERO;
    for n in 0..traj.steps() {
        let inst = instantaneous_cost(&traj.states[n], traj.rates[n], cp);
        acc.add_scaled(&inst, traj.dt);
    }
    acc
}

/// Mean and per-component standard error over per-path breakdowns, reduced
/// in the given path order. A single path reports zero standard error.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExpectedCost {
    pub mean: CostBreakdown,
    pub se: CostBreakdown,
}

pub fn expected_cost(paths: &[CostBreakdown]) -> Result<ExpectedCost, CostError> {
    let n = paths.len();
    if n == 0 {
        return Err(CostError::EmptyEnsemble);
    }
    let mut mean = [0.0f64; 4];
    for b in paths {
        let c = b.components();
        for k in 0..4 {
            mean[k] += c[k];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut se = [0.0f64; 4];
    if n > 1 {
        let mut var = [0.0f64; 4];
        for b in paths {
            let c = b.components();
            for k in 0..4 {
                let d = c[k] - mean[k];
                var[k] += d * d;
            }
        }
        for k in 0..4 {
            se[k] = (var[k] / (n - 1) as f64).sqrt() / (n as f64).sqrt();
        }
    }
    Ok(ExpectedCost {
        mean: CostBreakdown::from_components(mean),
        se: CostBreakdown::from_components(se),
    })
}

/// CSV row for strategy reports: `strategy,policy_cost,healthcare_cost,economic_cost,total`.
pub fn csv_row(label: &str, b: &CostBreakdown) -> String {
    format!("{},{:.6},{:.6},{:.6},{:.6}", label, b.policy(), b.healthcare, b.economic, b.total())
}
