//! Decompose daily changes of the three infectious pools into non-negative
//! inflows. Each pool's outflow into Recovered is approximated by the
//! recovered increment weighted by that pool's share of the infectious
//! total, and the inflow is what remains of the observed change, floored at
//! zero. The hospital-inflow fraction of the previous day's mild pool gives
//! a per-day hospitalization-rate observation.

use super::{CompartmentSeries, IngestError};

/// One decomposed day (index into the source series).
#[derive(Clone, Copy, Debug)]
pub struct FlowRow {
    pub index: usize,
    /// Non-negative inflows into mild, hospital, ICU.
    pub inflow: [f64; 3],
    /// Hospital inflow divided by the previous day's mild pool, when defined.
    pub p1_obs: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct FlowDecomposition {
    pub rows: Vec<FlowRow>,
    /// Indices skipped because the infectious total vanished.
    pub skipped: Vec<usize>,
}

pub fn decompose_flows(series: &CompartmentSeries) -> Result<FlowDecomposition, IngestError> {
    if series.len() < 2 {
        return Err(IngestError::SeriesTooShort { need: 2, got: series.len() });
    }
    let mut out = FlowDecomposition::default();
    for i in 1..series.len() {
        let cur = &series.states[i];
        let prev = &series.states[i - 1];
        let total = cur.infectious_mild + cur.hospitalized + cur.icu;
        if total == 0.0 {
            out.skipped.push(i);
            continue;
        }
        let dr = cur.recovered - prev.recovered;
        let pools = [
            (cur.infectious_mild, cur.infectious_mild - prev.infectious_mild),
            (cur.hospitalized, cur.hospitalized - prev.hospitalized),
            (cur.icu, cur.icu - prev.icu),
        ];
        let mut inflow = [0.0; 3];
        for (k, (level, delta)) in pools.iter().enumerate() {
            inflow[k] = f64::max(0.0, delta + (level / total) * dr);
        }
        let p1_obs = (prev.infectious_mild > 0.0).then(|| inflow[1] / prev.infectious_mild);
        out.rows.push(FlowRow { index: i, inflow, p1_obs });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epimodel::CompartmentState;
    use approx::assert_relative_eq;
    use chrono::NaiveDate;

    fn series_from_states(states: Vec<CompartmentState>) -> CompartmentSeries {
        let n = states.len();
        CompartmentSeries {
            start: NaiveDate::from_ymd_opt(2021, 10, 4).unwrap(),
            t: (0..n).map(|i| i as f64).collect(),
            states,
            alpha_obs: vec![0.0; n],
            population: 1e6,
        }
    }

    fn state(i1: f64, i2: f64, i3: f64, r: f64) -> CompartmentState {
        CompartmentState::from_array([0.5, 0.3, 0.01, i1, i2, i3, r, 0.0])
    }

    #[test]
    fn constant_series_without_recoveries_has_zero_inflows() {
        let s = state(0.002, 0.0005, 0.0001, 0.01);
        let series = series_from_states(vec![s; 4]);
        let flows = decompose_flows(&series).unwrap();
        for row in &flows.rows {
            assert_eq!(row.inflow, [0.0; 3]);
        }
    }

    #[test]
    fn negative_change_is_floored_at_zero() {
        // hospital pool shrinks by 0.001 while the recovery share only adds
        // back 0.0004: inflow clamps to zero
        let a = state(0.002, 0.0020, 0.0, 0.010);
        let mut b = state(0.002, 0.0010, 0.0, 0.010);
        // recovery share for hospital = i2/total * dr = (0.001/0.003)*0.0012 = 0.0004
        b.recovered = a.recovered + 0.0012;
        let flows = decompose_flows(&series_from_states(vec![a, b])).unwrap();
        assert_eq!(flows.rows[0].inflow[1], 0.0);
    }

    #[test]
    fn three_day_series_matches_hand_arithmetic() {
        let s0 = state(0.0020, 0.00050, 0.00010, 0.0100);
        let s1 = state(0.0024, 0.00055, 0.00012, 0.0103);
        let s2 = state(0.0021, 0.00052, 0.00011, 0.0108);
        let flows = decompose_flows(&series_from_states(vec![s0, s1, s2])).unwrap();

        // day 1: total = 0.00307, dr = 0.0003
        let total1 = 0.0024 + 0.00055 + 0.00012;
        let want_mild_1 = (0.0024 - 0.0020) + (0.0024 / total1) * 0.0003;
        let want_hosp_1 = (0.00055 - 0.00050) + (0.00055 / total1) * 0.0003;
        assert_relative_eq!(flows.rows[0].inflow[0], want_mild_1, epsilon = 1e-15);
        assert_relative_eq!(flows.rows[0].inflow[1], want_hosp_1, epsilon = 1e-15);
        assert_relative_eq!(
            flows.rows[0].p1_obs.unwrap(),
            want_hosp_1 / 0.0020,
            epsilon = 1e-12
        );

        // day 2: mild change is negative and dominated by the recovery share
        let total2 = 0.0021 + 0.00052 + 0.00011;
        let raw_mild_2 = (0.0021 - 0.0024) + (0.0021 / total2) * 0.0005;
        assert!(raw_mild_2 > 0.0);
        assert_relative_eq!(flows.rows[1].inflow[0], raw_mild_2, epsilon = 1e-15);
    }

    #[test]
    fn vanishing_infectious_total_skips_the_date() {
        let a = state(0.001, 0.0, 0.0, 0.01);
        let b = state(0.0, 0.0, 0.0, 0.011);
        let c = state(0.002, 0.0, 0.0, 0.011);
        let flows = decompose_flows(&series_from_states(vec![a, b, c])).unwrap();
        assert_eq!(flows.skipped, vec![1]);
        assert_eq!(flows.rows.len(), 1);
        // p1 undefined across the skipped date's zero mild pool
        assert!(flows.rows[0].p1_obs.is_none());
    }

    #[test]
    fn too_short_series_rejected() {
        let series = series_from_states(vec![state(0.001, 0.0, 0.0, 0.0)]);
        assert!(matches!(decompose_flows(&series), Err(IngestError::SeriesTooShort { .. })));
    }
}
