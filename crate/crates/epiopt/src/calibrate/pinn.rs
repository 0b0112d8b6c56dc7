//! Loss-term builders shared by both calibration variants. They operate on
//! node arrays so tests can drive them with hand-constructed outputs.

use nnkit::{NodeId, Tape};

use crate::epimodel::{drift_terms, DriftCoeffs};
use crate::tapealg::TapeAlgebra;

use super::grid::grid_node;

/// Grid-constrained parameter nodes for the eleven trainable dynamics
/// parameters, in [`ThetaCenters::as_array`](super::ThetaCenters::as_array)
/// order.
pub struct ThetaNodes {
    pub raw: Vec<NodeId>,
    pub constrained: [NodeId; 11],
}

impl ThetaNodes {
    /// Bind raw parameters and their grid transforms on the tape.
    pub fn bind(tape: &mut Tape, raws: &[f64; 11], centers: &[f64; 11], g: f64) -> Self {
        let mut raw = Vec::with_capacity(11);
        let mut constrained = Vec::with_capacity(11);
        for i in 0..11 {
            let r = tape.parameter(raws[i]);
            raw.push(r);
            constrained.push(grid_node(tape, r, centers[i], g));
        }
        Self { raw, constrained: constrained.try_into().expect("eleven parameters") }
    }

    /// Drift coefficients with fixed vital rates and the trainable rest.
    pub fn coeffs(&self, tape: &mut Tape, inflow: f64, outflow: f64) -> DriftCoeffs<NodeId> {
        let c = &self.constrained;
        DriftCoeffs {
            inflow: tape.constant(inflow),
            outflow: tape.constant(outflow),
            transmission: [c[0], c[1], c[2]],
            vacc_inefficiency: c[3],
            incubation: c[4],
            recovery: [c[5], c[6], c[7]],
            icu_admission: c[9],
            icu_mortality: c[10],
            p1: c[8],
        }
    }
}

/// Summed squared data mismatch for one date.
pub fn data_terms(tape: &mut Tape, x: &[NodeId; 8], obs: &[f64; 8]) -> NodeId {
    let mut terms = Vec::with_capacity(8);
    for k in 0..8 {
        let o = tape.constant(obs[k]);
        let diff = tape.sub(o, x[k]);
        terms.push(tape.square(diff));
    }
    tape.sum(&terms)
}

/// Summed squared deterministic residual for one date: the drift evaluated
/// at the outputs minus the outputs' time derivative.
pub fn det_residual_terms(
    tape: &mut Tape,
    x: &[NodeId; 8],
    xdot: &[NodeId; 8],
    alpha: f64,
    coeffs: &DriftCoeffs<NodeId>,
) -> NodeId {
    let a = tape.constant(alpha);
    let rhs = drift_terms(&mut TapeAlgebra(tape), x, a, coeffs);
    let mut terms = Vec::with_capacity(8);
    for k in 0..8 {
        let diff = tape.sub(rhs[k], xdot[k]);
        terms.push(tape.square(diff));
    }
    tape.sum(&terms)
}

/// One-step Euler–Maruyama prediction from the outputs at a date: the raw
/// update `x + drift dt + sigma_k x_k sqrt(dt) dW_k`, without the state
/// clamp (it is a regression target, not a state).
pub fn em_prediction(
    tape: &mut Tape,
    x: &[NodeId; 8],
    alpha: f64,
    coeffs: &DriftCoeffs<NodeId>,
    sigma: &[NodeId; 8],
    dt: f64,
    dw: &[f64; 8],
) -> [NodeId; 8] {
    let a = tape.constant(alpha);
    let d = drift_terms(&mut TapeAlgebra(tape), x, a, coeffs);
    let dt_node = tape.constant(dt);
    let sq = dt.sqrt();
    let mut out = *x;
    for k in 0..8 {
        let drift_dt = tape.mul(d[k], dt_node);
        let diffusion = tape.mul(sigma[k], x[k]);
        let shock = tape.constant(sq * dw[k]);
        let noise = tape.mul(diffusion, shock);
        let step = tape.add(drift_dt, noise);
        out[k] = tape.add(x[k], step);
    }
    out
}

/// Summed squared mismatch of a one-step prediction against the next date's
/// outputs.
pub fn sto_residual_terms(tape: &mut Tape, pred: &[NodeId; 8], x_next: &[NodeId; 8]) -> NodeId {
    let mut terms = Vec::with_capacity(8);
    for k in 0..8 {
        let diff = tape.sub(pred[k], x_next[k]);
        terms.push(tape.square(diff));
    }
    tape.sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline;
    use crate::calibrate::ThetaCenters;
    use approx::assert_relative_eq;

    fn bound_theta(tape: &mut Tape) -> ThetaNodes {
        let centers = ThetaCenters::from_params(&baseline::params()).as_array();
        ThetaNodes::bind(tape, &[0.0; 11], &centers, 0.5)
    }

    #[test]
    fn constant_disease_free_outputs_have_zero_residual() {
        // constant outputs with empty epidemic pools and no vital flows:
        // both the drift and the derivative vanish
        let mut tape = Tape::new();
        let theta = bound_theta(&mut tape);
        let coeffs = theta.coeffs(&mut tape, 0.0, 0.0);
        let vals = [0.6, 0.3, 0.0, 0.0, 0.0, 0.0, 0.1, 0.0];
        let x = vals.map(|v| tape.constant(v));
        let zero = tape.constant(0.0);
        let xdot = [zero; 8];
        let r = det_residual_terms(&mut tape, &x, &xdot, 0.0, &coeffs);
        assert_eq!(tape.value(r), 0.0);
    }

    #[test]
    fn exponential_decay_solves_the_reduced_equation() {
        // with only the vaccination drain active (no infection, no vital
        // flows), S(t) = S0 exp(-alpha t) satisfies dS/dt = -alpha S exactly
        let alpha = 0.02f64;
        let s0 = 0.7f64;
        for &t in &[0.0, 3.0, 17.5] {
            let mut tape = Tape::new();
            let centers = [1e-9; 11]; // epidemic terms effectively off
            let theta = ThetaNodes::bind(&mut tape, &[0.0; 11], &centers, 0.5);
            let coeffs = theta.coeffs(&mut tape, 0.0, 0.0);
            let s = s0 * (-alpha * t).exp();
            let x = [s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0].map(|v| tape.constant(v));
            let mut xdot = [tape.constant(0.0); 8];
            xdot[0] = tape.constant(-alpha * s);
            // V gains alpha*S from the drain; its derivative matches too
            xdot[1] = tape.constant(alpha * s);
            let r = det_residual_terms(&mut tape, &x, &xdot, alpha, &coeffs);
            assert!(tape.value(r) < 1e-25, "residual {}", tape.value(r));
        }
    }

    #[test]
    fn residual_matches_independent_evaluation() {
        // independent recomputation of the residual display in plain floats
        let mut tape = Tape::new();
        let theta = bound_theta(&mut tape);
        let p = baseline::params();
        let coeffs = theta.coeffs(&mut tape, p.inflow, p.outflow);
        let xv = baseline::train_start().as_array();
        let xdotv = [1e-3, -2e-3, 5e-4, 1e-4, -2e-5, 3e-6, 8e-4, 1e-7];
        let alpha = 0.0123;
        let x = xv.map(|v| tape.constant(v));
        let xdot = xdotv.map(|v| tape.constant(v));
        let r = det_residual_terms(&mut tape, &x, &xdot, alpha, &coeffs);

        let [s, v, e, i1, i2, i3, rr, _d] = xv;
        let lam = p.transmission[0] * i1 + p.transmission[1] * i2 + p.transmission[2] * i3;
        let p1 = p.hosp_link.intercept; // calibrated as a constant here
        let rhs = [
            p.inflow - lam * s - alpha * s - p.outflow * s,
            alpha * s - lam * p.vacc_inefficiency * v - p.outflow * v,
            lam * (s + p.vacc_inefficiency * v) - p.incubation * e - p.outflow * e,
            p.incubation * e - (p.recovery[0] + p1) * i1 - p.outflow * i1,
            p1 * i1 - (p.recovery[1] + p.icu_admission) * i2 - p.outflow * i2,
            p.icu_admission * i2 - (p.recovery[2] + p.icu_mortality) * i3 - p.outflow * i3,
            p.recovery[0] * i1 + p.recovery[1] * i2 + p.recovery[2] * i3 - p.outflow * rr,
            p.icu_mortality * i3,
        ];
        let want: f64 = rhs.iter().zip(xdotv.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        assert_relative_eq!(tape.value(r), want, max_relative = 1e-10);
    }

    #[test]
    fn euler_consistent_outputs_have_zero_stochastic_residual() {
        // zero noise intensities plus outputs that satisfy the one-step
        // deterministic recurrence exactly
        let mut tape = Tape::new();
        let theta = bound_theta(&mut tape);
        let p = baseline::params();
        let coeffs = theta.coeffs(&mut tape, p.inflow, p.outflow);
        let alpha = 0.01;
        let x0 = baseline::train_start().as_array();
        let x0n = x0.map(|v| tape.constant(v));
        let zero = tape.constant(0.0);
        let sigma = [zero; 8];
        let dw = [0.3, -0.7, 1.1, 0.0, 0.5, -0.2, 0.9, -1.3];
        let pred = em_prediction(&mut tape, &x0n, alpha, &coeffs, &sigma, 1.0, &dw);
        // next-date outputs = the deterministic one-step values
        let next = pred.map(|id| tape.value(id));
        let next_nodes = next.map(|v| tape.constant(v));
        let r = sto_residual_terms(&mut tape, &pred, &next_nodes);
        assert_eq!(tape.value(r), 0.0);
    }

    #[test]
    fn tiny_stochastic_instance_matches_hand_trace() {
        // two dates, one step, one draw: recompute the update line by line
        let mut tape = Tape::new();
        let theta = bound_theta(&mut tape);
        let p = baseline::params();
        let coeffs = theta.coeffs(&mut tape, p.inflow, p.outflow);
        let sig_val = 0.06;
        let sig = tape.constant(sig_val);
        let sigma = [sig; 8];
        let alpha = 0.02;
        let dt = 1.0;
        let dw = [0.5, -1.0, 0.25, 0.8, -0.4, 0.1, 0.0, 1.5];
        let x0 = baseline::train_start().as_array();
        let x1 = [0.548, 0.435, 0.0074, 0.0045, 0.00005, 0.00002, 0.0049, 0.000132];
        let x0n = x0.map(|v| tape.constant(v));
        let x1n = x1.map(|v| tape.constant(v));
        let pred = em_prediction(&mut tape, &x0n, alpha, &coeffs, &sigma, dt, &dw);
        let r = sto_residual_terms(&mut tape, &pred, &x1n);

        let [s, v, e, i1, i2, i3, rr, d] = x0;
        let lam = p.transmission[0] * i1 + p.transmission[1] * i2 + p.transmission[2] * i3;
        let p1 = p.hosp_link.intercept;
        let drift = [
            p.inflow - lam * s - alpha * s - p.outflow * s,
            alpha * s - lam * p.vacc_inefficiency * v - p.outflow * v,
            lam * (s + p.vacc_inefficiency * v) - p.incubation * e - p.outflow * e,
            p.incubation * e - (p.recovery[0] + p1) * i1 - p.outflow * i1,
            p1 * i1 - (p.recovery[1] + p.icu_admission) * i2 - p.outflow * i2,
            p.icu_admission * i2 - (p.recovery[2] + p.icu_mortality) * i3 - p.outflow * i3,
            p.recovery[0] * i1 + p.recovery[1] * i2 + p.recovery[2] * i3 - p.outflow * rr,
            p.icu_mortality * i3,
        ];
        let mut want = 0.0;
        for k in 0..8 {
            let pred_k = x0[k] + drift[k] * dt + sig_val * x0[k] * dt.sqrt() * dw[k];
            let diff = pred_k - x1[k];
            want += diff * diff;
        }
        assert_relative_eq!(tape.value(r), want, max_relative = 1e-10);
    }
}
