//! Compartment construction from raw counts.
//!
//! Mapping per day: hospitalized and ICU counts map directly; the mild pool
//! is the active confirmed count (cumulative confirmed minus resolved) less
//! the hospitalized and ICU counts; the exposed pool is proxied by daily
//! tests; vaccinated means two doses received; the susceptible share is the
//! residual so the eight proportions stay consistent. The administration
//! rate divides daily second doses by the previous day's susceptible count.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::records::{DoseRecord, RawRecord};
use super::{CompartmentSeries, IngestError};
use crate::epimodel::CompartmentState;

/// Knobs the source material leaves open; both default to the plain choice.
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Scale applied to the daily-tests exposure proxy.
    pub exposed_scale: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { exposed_scale: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct BuiltCompartments {
    pub series: CompartmentSeries,
    pub warnings: Vec<String>,
}

/// Fill calendar gaps: cumulative fields carry forward, daily fields zero.
fn fill_daily(records: &[RawRecord]) -> Vec<RawRecord> {
    let mut out: Vec<RawRecord> = Vec::with_capacity(records.len());
    for r in records {
        if let Some(prev) = out.last().copied() {
            let mut day = prev.date.succ_opt().expect("representable date");
            while day < r.date {
                out.push(RawRecord {
                    date: day,
                    confirmed: 0.0,
                    deaths: 0.0,
                    tests: 0.0,
                    recovered: 0.0,
                    hosp: prev.hosp,
                    icu: prev.icu,
                    vaccines: 0.0,
                    ..prev
                });
                day = day.succ_opt().expect("representable date");
            }
        }
        out.push(*r);
    }
    out
}

/// Dose cumulative for each record date, carrying the last known value
/// forward and starting at zero before the first dose record.
fn dose_lookup(doses: &[DoseRecord]) -> BTreeMap<NaiveDate, f64> {
    doses.iter().map(|d| (d.date, d.second_dose_cum)).collect()
}

fn second_dose_cum_at(map: &BTreeMap<NaiveDate, f64>, date: NaiveDate) -> f64 {
    map.range(..=date).next_back().map(|(_, &v)| v).unwrap_or(0.0)
}

pub fn build_compartments(
    records: &[RawRecord],
    doses: &[DoseRecord],
    population: f64,
    options: &BuildOptions,
) -> Result<BuiltCompartments, IngestError> {
    if population <= 0.0 {
        return Err(IngestError::NonPositivePopulation(population));
    }
    if records.is_empty() {
        return Err(IngestError::SeriesTooShort { need: 1, got: 0 });
    }
    let records = fill_daily(records);
    let dose_map = dose_lookup(doses);
    let mut warnings = Vec::new();

    let mut states = Vec::with_capacity(records.len());
    let mut alpha = Vec::with_capacity(records.len());
    let mut prev_s_count: Option<f64> = None;
    let mut prev_second = second_dose_cum_at(&dose_map, records[0].date);
    // The first day has no predecessor; its rate is reported as 0.
    let mut first_day = true;

    for r in &records {
        for (count, column) in [
            (r.confirmed_cum, "confirmed_cum"),
            (r.deaths_cum, "deaths_cum"),
            (r.recovered_cum, "recovered_cum"),
            (r.hosp, "hosp"),
            (r.icu, "icu"),
            (r.tests, "tests"),
        ] {
            if count > population {
                return Err(IngestError::CountExceedsPopulation {
                    population,
                    count,
                    column,
                    date: r.date,
                });
            }
        }
        let second_cum = second_dose_cum_at(&dose_map, r.date);
        if second_cum > population {
            return Err(IngestError::CountExceedsPopulation {
                population,
                count: second_cum,
                column: "second_dose_cum",
                date: r.date,
            });
        }

        let i2 = r.hosp;
        let i3 = r.icu;
        let active = f64::max(0.0, r.confirmed_cum - r.recovered_cum - r.deaths_cum);
        let mut i1 = active - i2 - i3;
        if i1 < 0.0 {
            warnings.push(format!(
                "{}: hospitalized + ICU ({}) exceed active confirmed ({active}); mild pool clamped to 0",
                r.date,
                i2 + i3,
            ));
            i1 = 0.0;
        }
        let e = r.tests * options.exposed_scale;
        let rcount = r.recovered_cum;
        let dcount = r.deaths_cum;
        let vcount = second_cum;
        let mut scount = population - (vcount + e + i1 + i2 + i3 + rcount + dcount);
        if scount < 0.0 {
            warnings.push(format!(
                "{}: residual susceptible count negative ({scount:.1}); clamped to 0",
                r.date
            ));
            scount = 0.0;
        }

        let daily_second = f64::max(0.0, second_cum - prev_second);
        let a = if first_day {
            0.0
        } else {
            match prev_s_count {
                Some(s_prev) if s_prev > 0.0 => daily_second / s_prev,
                _ => 0.0,
            }
        };
        alpha.push(a);
        states.push(CompartmentState::from_array([
            scount / population,
            vcount / population,
            e / population,
            i1 / population,
            i2 / population,
            i3 / population,
            rcount / population,
            dcount / population,
        ]));

        prev_second = second_cum;
        prev_s_count = Some(scount);
        first_day = false;
    }

    let series = CompartmentSeries {
        start: records[0].date,
        t: (0..records.len()).map(|i| i as f64).collect(),
        states,
        alpha_obs: alpha,
        population,
    };
    Ok(BuiltCompartments { series, warnings })
}
