//! Adapter that lets the shared drift expression record onto an autodiff
//! tape instead of evaluating on floats.

use nnkit::{NodeId, Tape};

use crate::epimodel::Algebra;

pub struct TapeAlgebra<'a>(pub &'a mut Tape);

impl Algebra for TapeAlgebra<'_> {
    type V = NodeId;

    fn lift(&mut self, c: f64) -> NodeId {
        self.0.constant(c)
    }

    fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.0.add(a, b)
    }

    fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.0.sub(a, b)
    }

    fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.0.mul(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline;
    use crate::epimodel::{drift, DriftCoeffs};

    #[test]
    fn tape_drift_matches_float_drift() {
        let p = baseline::params();
        let x = baseline::train_start();
        let alpha = 0.0123;
        let want = drift(&x, alpha, &p).unwrap();

        let mut tape = Tape::new();
        let coeffs = DriftCoeffs::from_params(&p, alpha);
        let lifted = DriftCoeffs {
            inflow: tape.constant(coeffs.inflow),
            outflow: tape.constant(coeffs.outflow),
            transmission: coeffs.transmission.map(|v| tape.constant(v)),
            vacc_inefficiency: tape.constant(coeffs.vacc_inefficiency),
            incubation: tape.constant(coeffs.incubation),
            recovery: coeffs.recovery.map(|v| tape.constant(v)),
            icu_admission: tape.constant(coeffs.icu_admission),
            icu_mortality: tape.constant(coeffs.icu_mortality),
            p1: tape.constant(coeffs.p1),
        };
        let xs = x.as_array().map(|v| tape.input(v));
        let a = tape.constant(alpha);
        let got = crate::epimodel::drift_terms(&mut TapeAlgebra(&mut tape), &xs, a, &lifted);
        for k in 0..8 {
            assert_eq!(tape.value(got[k]), want[k]); // same expression, same order
        }
    }
}
