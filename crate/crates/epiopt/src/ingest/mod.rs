//! Turn raw daily surveillance records into compartment-proportion series:
//! parsing, compartment construction, infectious-flow decomposition, the
//! hospitalization–vaccination regression, vital rates, train/test
//! splitting, and cubic-spline densification.

mod compartments;
mod flows;
mod records;
mod regression;
mod spline;
mod vital;

pub use compartments::{build_compartments, BuildOptions, BuiltCompartments};
pub use flows::{decompose_flows, FlowDecomposition, FlowRow};
pub use records::{
    parse_dataset, parse_doses, write_dataset, write_doses, DoseRecord, ParsedDataset, RawRecord,
};
pub use regression::{fit_hospitalization_regression, RegressionFit};
pub use spline::augment_cubic_spline;
pub use vital::{compute_vital_rates, VitalInputs, VitalRates};

use chrono::NaiveDate;
use thiserror::Error;

use crate::epimodel::CompartmentState;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("population must be positive, got {0}")]
    NonPositivePopulation(f64),
    #[error("population {population} is smaller than count {count} ({column}) on {date}")]
    CountExceedsPopulation { population: f64, count: f64, column: &'static str, date: NaiveDate },
    #[error("series too short: need at least {need} points, got {got}")]
    SeriesTooShort { need: usize, got: usize },
    #[error("need at least {need} paired observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("administration rates have zero variance; slope is undefined")]
    ZeroVariance,
    #[error("date {0} is outside the series range")]
    DateOutOfRange(NaiveDate),
    #[error("dates must be strictly ordered: {0} then {1}")]
    ReversedDates(NaiveDate, NaiveDate),
    #[error("augmentation factor {0} unsupported (expected 1, 5, 10 or 20)")]
    BadAugmentFactor(usize),
    #[error("series is not on a strictly daily grid")]
    NotDaily,
}

/// Time-indexed observed (or derived) compartment proportions plus the
/// observed daily administration rate. `t` is measured in days from
/// `start`; a freshly built series is strictly daily, a densified one has
/// fractional offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct CompartmentSeries {
    pub start: NaiveDate,
    pub t: Vec<f64>,
    pub states: Vec<CompartmentState>,
    pub alpha_obs: Vec<f64>,
    pub population: f64,
}

impl CompartmentSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// True when the offsets are exactly 0, 1, 2, ...
    pub fn is_daily(&self) -> bool {
        self.t.iter().enumerate().all(|(i, &t)| t == i as f64)
    }

    pub fn date_at(&self, index: usize) -> Option<NaiveDate> {
        let t = *self.t.get(index)?;
        if t.fract() != 0.0 {
            return None;
        }
        self.start.checked_add_days(chrono::Days::new(t as u64))
    }

    fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start).num_days();
        if offset < 0 {
            return None;
        }
        let idx = offset as usize;
        (idx < self.len() && self.t[idx] == offset as f64).then_some(idx)
    }

    /// CSV in the trajectory schema: `t,S,V,E,I1,I2,I3,R,D,alpha`,
    /// 10 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,S,V,E,I1,I2,I3,R,D,alpha\n");
        for i in 0..self.len() {
            let a = self.states[i].as_array();
            out.push_str(&format!(
                "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n",
                self.t[i], a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], self.alpha_obs[i],
            ));
        }
        out
    }

    /// Parse the [`to_csv`](CompartmentSeries::to_csv) schema back into a
    /// series; `start` and `population` are not part of the schema and must
    /// be supplied.
    pub fn from_csv(text: &str, start: NaiveDate, population: f64) -> Result<Self, IngestError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut t = Vec::new();
        let mut states = Vec::new();
        let mut alpha = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let get = |i: usize| -> f64 { row.get(i).and_then(|s| s.parse().ok()).unwrap_or(0.0) };
            t.push(get(0));
            states.push(CompartmentState::from_array([
                get(1),
                get(2),
                get(3),
                get(4),
                get(5),
                get(6),
                get(7),
                get(8),
            ]));
            alpha.push(get(9));
        }
        Ok(Self { start, t, states, alpha_obs: alpha, population })
    }
}

/// Split a strictly daily series into a contiguous training window
/// (`train_start..=train_end`) and the test window beginning the next day
/// and ending at `test_end`. Each half restarts its offsets at zero.
pub fn split_train_test(
    series: &CompartmentSeries,
    train_start: NaiveDate,
    train_end: NaiveDate,
    test_end: NaiveDate,
) -> Result<(CompartmentSeries, CompartmentSeries), IngestError> {
    if !series.is_daily() {
        return Err(IngestError::NotDaily);
    }
    if train_start > train_end {
        return Err(IngestError::ReversedDates(train_start, train_end));
    }
    if train_end > test_end {
        return Err(IngestError::ReversedDates(train_end, test_end));
    }
    let a = series.index_of(train_start).ok_or(IngestError::DateOutOfRange(train_start))?;
    let b = series.index_of(train_end).ok_or(IngestError::DateOutOfRange(train_end))?;
    let c = series.index_of(test_end).ok_or(IngestError::DateOutOfRange(test_end))?;
    let slice = |lo: usize, hi: usize, start: NaiveDate| CompartmentSeries {
        start,
        t: (0..hi.saturating_sub(lo)).map(|i| i as f64).collect(),
        states: series.states[lo..hi].to_vec(),
        alpha_obs: series.alpha_obs[lo..hi].to_vec(),
        population: series.population,
    };
    let train = slice(a, b + 1, train_start);
    let test_start = train_end.succ_opt().expect("representable date");
    let test = slice(b + 1, c + 1, test_start);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline;

    fn daily_series(days: usize) -> CompartmentSeries {
        CompartmentSeries {
            start: NaiveDate::from_ymd_opt(2021, 10, 4).unwrap(),
            t: (0..days).map(|i| i as f64).collect(),
            states: vec![baseline::train_start(); days],
            alpha_obs: vec![0.01; days],
            population: 1e9,
        }
    }

    #[test]
    fn paper_style_window_lengths() {
        let series = daily_series(90);
        let (train, test) = split_train_test(
            &series,
            NaiveDate::from_ymd_opt(2021, 10, 4).unwrap(),
            NaiveDate::from_ymd_opt(2021, 12, 2).unwrap(),
            NaiveDate::from_ymd_opt(2021, 12, 23).unwrap(),
        )
        .unwrap();
        assert_eq!(train.len(), 60);
        assert_eq!(test.len(), 21);
        assert_eq!(test.start, NaiveDate::from_ymd_opt(2021, 12, 3).unwrap());
        assert!(train.is_daily() && test.is_daily());
    }

    #[test]
    fn full_range_train_leaves_empty_test() {
        let series = daily_series(10);
        let last = series.date_at(9).unwrap();
        let (train, test) = split_train_test(&series, series.start, last, last).unwrap();
        assert_eq!(train.len(), 10);
        assert!(test.is_empty());
    }

    #[test]
    fn reversed_dates_rejected() {
        let series = daily_series(10);
        let err = split_train_test(
            &series,
            series.date_at(5).unwrap(),
            series.date_at(2).unwrap(),
            series.date_at(8).unwrap(),
        );
        assert!(matches!(err, Err(IngestError::ReversedDates(..))));
    }

    #[test]
    fn out_of_range_rejected() {
        let series = daily_series(10);
        let beyond = series.date_at(9).unwrap().succ_opt().unwrap();
        assert!(matches!(
            split_train_test(&series, series.start, beyond, beyond),
            Err(IngestError::DateOutOfRange(_))
        ));
    }

    #[test]
    fn csv_round_trip_preserves_series() {
        let series = daily_series(5);
        let text = series.to_csv();
        let back = CompartmentSeries::from_csv(&text, series.start, series.population).unwrap();
        assert_eq!(series.len(), back.len());
        for i in 0..series.len() {
            for (a, b) in series.states[i].as_array().iter().zip(back.states[i].as_array().iter()) {
                assert!((a - b).abs() <= a.abs() * 1e-9);
            }
        }
    }
}
