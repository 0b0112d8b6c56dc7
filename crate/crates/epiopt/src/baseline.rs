//! Reference parameter set for the bundled case study: calibrated dynamics
//! and noise intensities, the fitted hospitalization–vaccination link, cost
//! weights, and the initial compartment proportions of the training and test
//! windows. These double as grid centers for calibration and as defaults for
//! the command-line pipeline.

use crate::costmodel::CostParams;
use crate::epimodel::{CompartmentState, EpidemicParams, HospitalizationLink, NoiseIntensities};

/// Daily inflow from births plus net migration.
pub const INFLOW: f64 = 0.000053;
/// Daily background mortality from life-expectancy accounting.
pub const OUTFLOW: f64 = 0.000033;

/// Fitted link: hospitalization rate `0.0060 - 0.1341 * alpha`.
pub const HOSP_LINK: HospitalizationLink = HospitalizationLink { intercept: 0.0060, slope: -0.1341 };

/// Calibrated dynamics for the case-study window.
pub fn params() -> EpidemicParams {
    EpidemicParams {
        inflow: INFLOW,
        outflow: OUTFLOW,
        transmission: [0.28120, 0.15838, 0.03880],
        vacc_inefficiency: 0.06352,
        incubation: 0.30954,
        recovery: [0.28505, 0.28269, 0.14206],
        icu_admission: 0.14310,
        icu_mortality: 0.00420,
        hosp_link: HOSP_LINK,
    }
}

/// Calibrated per-compartment noise intensities.
pub fn noise() -> NoiseIntensities {
    NoiseIntensities {
        sigma: [0.09275, 0.03887, 0.07517, 0.06302, 0.07878, 0.06123, 0.06110, 0.06199],
    }
}

/// Cost weights: vaccination, quarantine, mild/hospital/ICU care, economic
/// output, and the labour share of the population.
pub fn cost() -> CostParams {
    CostParams {
        vaccination: 100.0,
        quarantine: 20.0,
        mild_care: 50.0,
        hospital_care: 200.0,
        icu_care: 1000.0,
        economic: 100.0,
        labour_share: 0.5,
    }
}

/// Compartment proportions at the start of the training window.
pub fn train_start() -> CompartmentState {
    CompartmentState::from_array([
        0.554181, 0.429185, 0.010225, 0.001827, 0.000075, 0.000014, 0.004361, 0.000132,
    ])
}

/// Compartment proportions at the start of the held-out test window.
pub fn test_start() -> CompartmentState {
    CompartmentState::from_array([
        0.191591, 0.779949, 0.009535, 0.001896, 0.000044, 0.000006, 0.016773, 0.000206,
    ])
}
