//! Smooth grid constraint: a raw unconstrained value is squashed into the
//! interval `[center(1-g), center(1+g)]` through a sigmoid, so the search
//! stays differentiable and surjective onto the open interval, and raw zero
//! maps exactly to the center.

use nnkit::{sigmoid, NodeId, Tape};

pub fn constrain_to_grid(raw: f64, center: f64, g: f64) -> f64 {
    center * (1.0 - g) + (2.0 * g * center) * sigmoid(raw)
}

/// Tape counterpart of [`constrain_to_grid`]; identical arithmetic order.
pub fn grid_node(tape: &mut Tape, raw: NodeId, center: f64, g: f64) -> NodeId {
    let lo = tape.constant(center * (1.0 - g));
    let span = tape.constant(2.0 * g * center);
    let s = tape.sigmoid(raw);
    let scaled = tape.mul(span, s);
    tape.add(lo, scaled)
}
