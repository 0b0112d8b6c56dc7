//! Minimal neural-network substrate: a scalar reverse-mode autodiff tape,
//! dense feedforward networks, and the Adam optimizer.
//!
//! The tape is deliberately scalar. The networks used downstream are tiny,
//! and several consumers need derivatives of network outputs with respect to
//! the network *input* as well as the parameters; a scalar tape provides both
//! through one mechanism ([`Tape::backward`] for adjoints, [`Tape::tangent`]
//! for input-directional derivatives that remain differentiable).
//!
//! Gradient accumulation across independent graphs (e.g. Monte Carlo paths)
//! must reduce in a fixed order to keep runs reproducible; see the consumers
//! for the reduction pattern.

mod adam;
mod net;
mod tape;

pub use adam::{AdamError, AdamState};
pub use net::{Activation, BoundNet, DenseNetwork, NetError, OutputActivation};
pub use tape::{sigmoid, Gradients, NodeId, Op, Tape, TapeError, TangentMap};
