//! Scalar reverse-mode automatic differentiation on a Wengert tape.
//!
//! Every scalar intermediate is recorded as a [`Node`] holding its value and
//! the local partial derivatives toward its (at most two) parents. A backward
//! sweep from a scalar output then accumulates adjoints for every node, so
//! gradients with respect to parameters *and* inputs come out of one pass.
//!
//! For losses that contain `d(output)/d(input)` terms, [`Tape::tangent`]
//! appends nodes that compute the input-directional derivative of everything
//! recorded so far. Those tangent nodes are ordinary nodes, so a later
//! backward pass differentiates through them as well.

use thiserror::Error;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Operation that produced a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Constant,
    Input,
    Parameter,
    Add,
    Sub,
    Mul,
    Div,
    Tanh,
    Sigmoid,
    Square,
    Sqrt,
    Log,
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    value: f64,
    // partial derivative of this node's value toward each parent
    d0: f64,
    d1: f64,
    p0: u32,
    p1: u32,
    op: Op,
}

#[derive(Debug, Error)]
pub enum TapeError {
    #[error("backward target {0:?} is not on this tape")]
    UnknownNode(NodeId),
}

/// Logistic function, shared so every consumer uses the same arithmetic.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Recorded computation graph. Nodes are append-only; parents always precede
/// children, which makes forward replay and the backward sweep simple loops.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { nodes: Vec::with_capacity(n) }
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drop all nodes but keep the allocation for reuse across epochs.
    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    #[inline]
    pub fn value(&self, id: NodeId) -> f64 {
        self.nodes[id.index()].value
    }

    #[inline]
    pub fn op(&self, id: NodeId) -> Op {
        self.nodes[id.index()].op
    }

    #[inline]
    fn push(&mut self, node: Node) -> NodeId {
        let id = self.nodes.len() as u32;
        debug_assert!(id != NONE, "tape overflow");
        self.nodes.push(node);
        NodeId(id)
    }

    fn leaf(&mut self, value: f64, op: Op) -> NodeId {
        self.push(Node { value, d0: 0.0, d1: 0.0, p0: NONE, p1: NONE, op })
    }

    pub fn constant(&mut self, value: f64) -> NodeId {
        self.leaf(value, Op::Constant)
    }

    pub fn input(&mut self, value: f64) -> NodeId {
        self.leaf(value, Op::Input)
    }

    pub fn parameter(&mut self, value: f64) -> NodeId {
        self.leaf(value, Op::Parameter)
    }

    #[inline]
    fn binary(&mut self, op: Op, a: NodeId, b: NodeId, value: f64, d0: f64, d1: f64) -> NodeId {
        self.push(Node { value, d0, d1, p0: a.0, p1: b.0, op })
    }

    #[inline]
    fn unary(&mut self, op: Op, a: NodeId, value: f64, d0: f64) -> NodeId {
        self.push(Node { value, d0, d1: 0.0, p0: a.0, p1: NONE, op })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.value(a) + self.value(b);
        self.binary(Op::Add, a, b, v, 1.0, 1.0)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.value(a) - self.value(b);
        self.binary(Op::Sub, a, b, v, 1.0, -1.0)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (self.value(a), self.value(b));
        self.binary(Op::Mul, a, b, va * vb, vb, va)
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (self.value(a), self.value(b));
        let v = va / vb;
        self.binary(Op::Div, a, b, v, 1.0 / vb, -v / vb)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).tanh();
        self.unary(Op::Tanh, a, v, 1.0 - v * v)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let v = sigmoid(self.value(a));
        self.unary(Op::Sigmoid, a, v, v * (1.0 - v))
    }

    pub fn square(&mut self, a: NodeId) -> NodeId {
        let va = self.value(a);
        self.unary(Op::Square, a, va * va, 2.0 * va)
    }

    pub fn sqrt(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).sqrt();
        self.unary(Op::Sqrt, a, v, 0.5 / v)
    }

    /// Natural logarithm.
    pub fn ln(&mut self, a: NodeId) -> NodeId {
        let va = self.value(a);
        self.unary(Op::Log, a, va.ln(), 1.0 / va)
    }

    /// `max(0, a)` with subgradient zero on the clamped branch. Recorded as a
    /// constant when clamped, so no gradient flows — the tape's op set stays
    /// closed while rollouts keep the integrator's non-negativity contract.
    pub fn clamp_nonneg(&mut self, a: NodeId) -> NodeId {
        if self.value(a) < 0.0 {
            self.constant(0.0)
        } else {
            a
        }
    }

    /// Sum of a slice of nodes, accumulated left to right.
    pub fn sum(&mut self, ids: &[NodeId]) -> NodeId {
        let mut acc = match ids.first() {
            Some(&id) => id,
            None => return self.constant(0.0),
        };
        for &id in &ids[1..] {
            acc = self.add(acc, id);
        }
        acc
    }

    /// Adjoints of every node with respect to the scalar `output`.
    pub fn backward(&self, output: NodeId) -> Result<Gradients, TapeError> {
        if output.index() >= self.nodes.len() {
            return Err(TapeError::UnknownNode(output));
        }
        let mut adj = vec![0.0f64; self.nodes.len()];
        adj[output.index()] = 1.0;
        for i in (0..=output.index()).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let n = &self.nodes[i];
            if n.p0 != NONE {
                adj[n.p0 as usize] += a * n.d0;
            }
            if n.p1 != NONE {
                adj[n.p1 as usize] += a * n.d1;
            }
        }
        Ok(Gradients { adjoints: adj })
    }

    /// Forward-mode pass: appends nodes computing the directional derivative
    /// of every node recorded so far, seeded at the given leaves. Returns a
    /// map from original node to its tangent node (`None` = identically zero).
    ///
    /// The tangent nodes are ordinary tape nodes; a subsequent [`backward`]
    /// from a loss built on them yields exact second-order-through-tangent
    /// gradients, which is what a differential-residual loss needs.
    ///
    /// [`backward`]: Tape::backward
    pub fn tangent(&mut self, seeds: &[(NodeId, f64)]) -> TangentMap {
        let n0 = self.nodes.len();
        let mut map: Vec<Option<NodeId>> = vec![None; n0];
        for &(id, v) in seeds {
            assert!(id.index() < n0, "tangent seed not on tape");
            map[id.index()] = Some(self.constant(v));
        }
        for i in 0..n0 {
            if map[i].is_some() {
                continue; // seeded leaf
            }
            let node = self.nodes[i];
            let id = NodeId(i as u32);
            let ta = if node.p0 != NONE { map[node.p0 as usize] } else { None };
            let tb = if node.p1 != NONE { map[node.p1 as usize] } else { None };
            map[i] = match node.op {
                Op::Constant | Op::Input | Op::Parameter => None,
                Op::Add => match (ta, tb) {
                    (Some(x), Some(y)) => Some(self.add(x, y)),
                    (Some(x), None) | (None, Some(x)) => Some(x),
                    (None, None) => None,
                },
                Op::Sub => match (ta, tb) {
                    (Some(x), Some(y)) => Some(self.sub(x, y)),
                    (Some(x), None) => Some(x),
                    (None, Some(y)) => {
                        let zero = self.constant(0.0);
                        Some(self.sub(zero, y))
                    }
                    (None, None) => None,
                },
                Op::Mul => {
                    let a = NodeId(node.p0);
                    let b = NodeId(node.p1);
                    let left = ta.map(|x| self.mul(x, b));
                    let right = tb.map(|y| self.mul(a, y));
                    match (left, right) {
                        (Some(x), Some(y)) => Some(self.add(x, y)),
                        (Some(x), None) | (None, Some(x)) => Some(x),
                        (None, None) => None,
                    }
                }
                Op::Div => {
                    // c = a/b  =>  c' = (a' - c b') / b
                    let b = NodeId(node.p1);
                    let corr = tb.map(|y| self.mul(id, y));
                    let num = match (ta, corr) {
                        (Some(x), Some(y)) => Some(self.sub(x, y)),
                        (Some(x), None) => Some(x),
                        (None, Some(y)) => {
                            let zero = self.constant(0.0);
                            Some(self.sub(zero, y))
                        }
                        (None, None) => None,
                    };
                    num.map(|x| self.div(x, b))
                }
                Op::Tanh => ta.map(|x| {
                    let sq = self.square(id);
                    let one = self.constant(1.0);
                    let g = self.sub(one, sq);
                    self.mul(g, x)
                }),
                Op::Sigmoid => ta.map(|x| {
                    let one = self.constant(1.0);
                    let om = self.sub(one, id);
                    let g = self.mul(id, om);
                    self.mul(g, x)
                }),
                Op::Square => ta.map(|x| {
                    let a = NodeId(node.p0);
                    let two = self.constant(2.0);
                    let g = self.mul(two, a);
                    self.mul(g, x)
                }),
                Op::Sqrt => ta.map(|x| {
                    let two = self.constant(2.0);
                    let den = self.mul(two, id);
                    self.div(x, den)
                }),
                Op::Log => ta.map(|x| {
                    let a = NodeId(node.p0);
                    self.div(x, a)
                }),
            };
        }
        TangentMap { map }
    }
}

/// Result of a backward sweep.
pub struct Gradients {
    adjoints: Vec<f64>,
}

impl Gradients {
    /// dy/dx for the node `x` (y being the backward root).
    #[inline]
    pub fn wrt(&self, x: NodeId) -> f64 {
        self.adjoints[x.index()]
    }

    /// Gradient for a batch of nodes in their given order.
    pub fn collect(&self, ids: &[NodeId]) -> Vec<f64> {
        ids.iter().map(|&id| self.wrt(id)).collect()
    }
}

/// Mapping node → tangent node produced by [`Tape::tangent`].
pub struct TangentMap {
    map: Vec<Option<NodeId>>,
}

impl TangentMap {
    /// Tangent node of `id`; `None` means the derivative is identically zero.
    pub fn of(&self, id: NodeId) -> Option<NodeId> {
        self.map.get(id.index()).copied().flatten()
    }

    /// Tangent node, materializing a zero constant when absent.
    pub fn of_or_zero(&self, tape: &mut Tape, id: NodeId) -> NodeId {
        match self.of(id) {
            Some(t) => t,
            None => tape.constant(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn square_gradient() {
        let mut t = Tape::new();
        let x = t.input(3.0);
        let y = t.square(x);
        let g = t.backward(y).unwrap();
        assert_eq!(g.wrt(x), 6.0);
    }

    #[test]
    fn tanh_gradient_at_zero() {
        let mut t = Tape::new();
        let x = t.input(0.0);
        let y = t.tanh(x);
        let g = t.backward(y).unwrap();
        assert_eq!(g.wrt(x), 1.0);
    }

    #[test]
    fn chain_and_fanout() {
        // y = (x*x) + x/2  =>  dy/dx = 2x + 0.5
        let mut t = Tape::new();
        let x = t.input(1.5);
        let two = t.constant(2.0);
        let sq = t.mul(x, x);
        let half = t.div(x, two);
        let y = t.add(sq, half);
        let g = t.backward(y).unwrap();
        assert_relative_eq!(g.wrt(x), 3.5, epsilon = 1e-15);
    }

    #[test]
    fn tangent_matches_analytic_derivative() {
        // f(t) = sigmoid(t)^2 + ln(t),  f'(t) = 2 s(t) s'(t) + 1/t
        let mut tape = Tape::new();
        let t = tape.input(0.7);
        let s = tape.sigmoid(t);
        let s2 = tape.square(s);
        let l = tape.ln(t);
        let f = tape.add(s2, l);
        let tg = tape.tangent(&[(t, 1.0)]);
        let fdot = tg.of(f).unwrap();
        let s_v = sigmoid(0.7);
        let expect = 2.0 * s_v * (s_v * (1.0 - s_v)) + 1.0 / 0.7;
        assert_relative_eq!(tape.value(fdot), expect, epsilon = 1e-14);
    }

    #[test]
    fn gradient_through_tangent() {
        // g(a) = d/dt [ a * t^2 ] at t0  = 2 a t0;   dg/da = 2 t0
        let t0 = 1.3;
        let mut tape = Tape::new();
        let a = tape.parameter(0.9);
        let t = tape.input(t0);
        let t2 = tape.square(t);
        let f = tape.mul(a, t2);
        let tg = tape.tangent(&[(t, 1.0)]);
        let fdot = tg.of(f).unwrap();
        assert_relative_eq!(tape.value(fdot), 2.0 * 0.9 * t0, epsilon = 1e-14);
        let g = tape.backward(fdot).unwrap();
        assert_relative_eq!(g.wrt(a), 2.0 * t0, epsilon = 1e-14);
    }

    #[test]
    fn clamp_passthrough_and_cut() {
        let mut t = Tape::new();
        let x = t.input(2.0);
        let y = t.clamp_nonneg(x);
        assert_eq!(y, x);
        let neg = t.constant(-1.0);
        let z = t.clamp_nonneg(neg);
        assert_eq!(t.value(z), 0.0);
        assert_eq!(t.op(z), Op::Constant);
    }
}
