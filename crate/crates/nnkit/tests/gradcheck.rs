//! Autodiff gradients vs central finite differences on random networks.

use nnkit::{Activation, AdamState, DenseNetwork, OutputActivation, Tape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar loss used for checking: sum of squared outputs.
fn loss_on_tape(net: &DenseNetwork, x: &[f64], tape: &mut Tape) -> (nnkit::NodeId, Vec<nnkit::NodeId>, Vec<nnkit::NodeId>) {
    let bound = net.bind(tape);
    let inputs: Vec<_> = x.iter().map(|&v| tape.input(v)).collect();
    let out = bound.forward(tape, &inputs).unwrap();
    let squares: Vec<_> = out.iter().map(|&o| tape.square(o)).collect();
    let loss = tape.sum(&squares);
    (loss, bound.param_ids().to_vec(), inputs)
}

fn loss_plain(net: &DenseNetwork, x: &[f64]) -> f64 {
    net.forward(x).unwrap().iter().map(|o| o * o).sum()
}

/// Guarded relative error: |a-b| / max(|a|, |b|, floor).
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240915);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let depth = rng.random_range(1..=4);
        let mut sizes = vec![rng.random_range(1..=4usize)];
        for _ in 0..depth {
            sizes.push(rng.random_range(2..=32usize));
        }
        sizes.push(rng.random_range(1..=3usize));
        let hidden = if trial % 2 == 0 { Activation::Tanh } else { Activation::Sigmoid };
        let output = match trial % 3 {
            0 => OutputActivation::Identity,
            1 => OutputActivation::Tanh,
            _ => OutputActivation::Bounded { lo: -0.2, hi: 1.3 },
        };
        let mut net = DenseNetwork::xavier(&sizes, hidden, output, &mut rng).unwrap();
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-1.5..1.5)).collect();

        let mut tape = Tape::new();
        let (loss, param_ids, input_ids) = loss_on_tape(&net, &x, &mut tape);
        let grads = tape.backward(loss).unwrap();

        // parameter gradients
        let mut flat = Vec::new();
        net.flatten_params(&mut flat);
        let h = 1e-5;
        for i in 0..flat.len() {
            let orig = flat[i];
            flat[i] = orig + h;
            net.assign_params(&flat).unwrap();
            let up = loss_plain(&net, &x);
            flat[i] = orig - h;
            net.assign_params(&flat).unwrap();
            let dn = loss_plain(&net, &x);
            flat[i] = orig;
            let fd = (up - dn) / (2.0 * h);
            worst = worst.max(rel_err(grads.wrt(param_ids[i]), fd));
        }
        net.assign_params(&flat).unwrap();

        // input gradients
        let mut xi = x.clone();
        for i in 0..xi.len() {
            let orig = xi[i];
            xi[i] = orig + h;
            let up = loss_plain(&net, &xi);
            xi[i] = orig - h;
            let dn = loss_plain(&net, &xi);
            xi[i] = orig;
            let fd = (up - dn) / (2.0 * h);
            worst = worst.max(rel_err(grads.wrt(input_ids[i]), fd));
        }
    }
    assert!(worst < 1e-4, "max relative error {worst:.3e} >= 1e-4");
}

#[test]
fn training_trajectory_is_seed_deterministic() {
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut net =
            DenseNetwork::xavier(&[2, 8, 1], Activation::Tanh, OutputActivation::Identity, &mut rng).unwrap();
        let mut flat = Vec::new();
        net.flatten_params(&mut flat);
        let mut adam = AdamState::new(flat.len(), 1e-2);
        for step in 0..50 {
            let x = [(step as f64 * 0.1).sin(), (step as f64 * 0.07).cos()];
            let mut tape = Tape::new();
            let (loss, ids, _) = loss_on_tape(&net, &x, &mut tape);
            let grads = tape.backward(loss).unwrap();
            let g = grads.collect(&ids);
            adam.step(&mut flat, &g).unwrap();
            net.assign_params(&flat).unwrap();
        }
        flat
    };
    let a = run();
    let b = run();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn bounded_output_respects_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (lo, hi) = (0.004, 0.036);
    let net = DenseNetwork::xavier(
        &[8, 16, 1],
        Activation::Tanh,
        OutputActivation::Bounded { lo, hi },
        &mut rng,
    )
    .unwrap();
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y = net.forward(&x).unwrap()[0];
        assert!(y >= lo && y <= hi, "output {y} escaped [{lo}, {hi}]");
    }
}
