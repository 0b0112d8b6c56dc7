//! Vital-dynamics rates from public statistics: daily inflow from births
//! and net migration, daily outflow from sex-weighted life expectancy.

use super::IngestError;

#[derive(Clone, Copy, Debug)]
pub struct VitalInputs {
    pub births_per_year: f64,
    pub net_migrants_per_quarter: f64,
    pub population: f64,
    pub male_life_expectancy_years: f64,
    pub female_life_expectancy_years: f64,
    /// Males per female, e.g. 0.98 for a 0.98:1 ratio.
    pub males_per_female: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VitalRates {
    pub inflow: f64,
    pub outflow: f64,
}

const DAYS_PER_YEAR: f64 = 365.0;
const DAYS_PER_QUARTER: f64 = 365.0 / 4.0;

pub fn compute_vital_rates(inputs: &VitalInputs) -> Result<VitalRates, IngestError> {
    if inputs.population <= 0.0 {
        return Err(IngestError::NonPositivePopulation(inputs.population));
    }
    let birth_rate = inputs.births_per_year / inputs.population / DAYS_PER_YEAR;
    let migration_rate = inputs.net_migrants_per_quarter / inputs.population / DAYS_PER_QUARTER;
    let r = inputs.males_per_female;
    let weighted_years = (inputs.male_life_expectancy_years * r
        + inputs.female_life_expectancy_years)
        / (r + 1.0);
    Ok(VitalRates {
        inflow: birth_rate + migration_rate,
        outflow: 1.0 / (weighted_years * DAYS_PER_YEAR),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_study_inputs_reproduce_reference_rates() {
        let rates = compute_vital_rates(&VitalInputs {
            births_per_year: 75_363.0,
            net_migrants_per_quarter: 13_100.0,
            population: 6.6e6,
            male_life_expectancy_years: 81.7,
            female_life_expectancy_years: 85.7,
            males_per_female: 0.98,
        })
        .unwrap();
        // 0.0000315 + 0.0000217 = 0.000053, up to source rounding
        assert!((rates.inflow - 0.000053).abs() < 5e-7, "inflow {}", rates.inflow);
        // 1 / ((81.7*0.98/1.98 + 85.7/1.98) * 365)
        assert!((rates.outflow - 0.000033).abs() < 5e-7, "outflow {}", rates.outflow);
    }

    #[test]
    fn equal_life_expectancies_ignore_the_sex_ratio() {
        for ratio in [0.5, 0.98, 2.0] {
            let rates = compute_vital_rates(&VitalInputs {
                births_per_year: 0.0,
                net_migrants_per_quarter: 0.0,
                population: 1e6,
                male_life_expectancy_years: 80.0,
                female_life_expectancy_years: 80.0,
                males_per_female: ratio,
            })
            .unwrap();
            assert!((rates.outflow - 1.0 / (80.0 * 365.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn non_positive_population_rejected() {
        let err = compute_vital_rates(&VitalInputs {
            births_per_year: 1.0,
            net_migrants_per_quarter: 1.0,
            population: 0.0,
            male_life_expectancy_years: 80.0,
            female_life_expectancy_years: 84.0,
            males_per_female: 1.0,
        });
        assert!(err.is_err());
    }
}
