use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::scale::ScaleParams;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn random_batch(batch: usize, steps: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..batch * steps).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = (0..batch).map(|_| rng.random_range(-1.0..1.0)).collect();
    (x, y)
}

#[test]
fn scalar_cell_hand_case() {
    let mut p = LstmCellParams::zeros(1, 1);
    p.weights.fill(1.0);
    let s = cell_forward(&p, &[1.0], &LstmState::zeros(1)).unwrap();
    let gate = sig(1.0);
    assert!((gate - 0.73106).abs() < 1e-5);
    let cand = 1f64.tanh();
    assert!((cand - 0.76159).abs() < 1e-5);
    assert!((s.c[0] - 0.55677).abs() < 1e-5, "C = {}", s.c[0]);
    assert!((s.h[0] - 0.369606).abs() < 1e-6, "h = {}", s.h[0]);
    assert!((s.c[0] - gate * cand).abs() < 1e-15);
    assert!((s.h[0] - gate * (gate * cand).tanh()).abs() < 1e-15);
}

#[test]
fn zero_cell_outputs_zero() {
    let p = LstmCellParams::zeros(2, 3);
    let s = cell_forward(&p, &[0.7, -4.0], &LstmState::zeros(3)).unwrap();
    assert_eq!(s, LstmState::zeros(3));
}

#[test]
fn cell_rejects_shape_mismatch() {
    let p = LstmCellParams::zeros(2, 3);
    assert!(matches!(
        cell_forward(&p, &[1.0], &LstmState::zeros(3)),
        Err(Error::Configuration(_))
    ));
    assert!(matches!(
        cell_forward(&p, &[1.0, 2.0], &LstmState::zeros(2)),
        Err(Error::Configuration(_))
    ));
}

#[test]
fn saturated_forget_gate_keeps_memory() {
    let mut p = LstmCellParams::zeros(1, 2);
    p.weights.fill(0.3);
    p.gate_bias_mut(Gate::Forget).fill(50.0);
    let prev = LstmState {
        h: vec![0.1, -0.2],
        c: vec![0.8, -1.5],
    };
    let s = cell_forward(&p, &[0.4], &prev).unwrap();
    let k = p.concat_dim();
    let concat = [0.1, -0.2, 0.4];
    for r in 0..2 {
        let pre = |g: Gate| p.gate_bias(g)[r] + (0..k).map(|j| p.gate_weights(g)[r * k + j] * concat[j]).sum::<f64>();
        let expect = prev.c[r] + sig(pre(Gate::Input)) * pre(Gate::Candidate).tanh();
        assert!((s.c[r] - expect).abs() < 1e-12);
    }
}

#[test]
fn closed_gates_hold_the_cell_state() {
    let mut p = LstmCellParams::zeros(1, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for w in &mut p.weights {
        *w = rng.random_range(-1.0..1.0);
    }
    p.gate_bias_mut(Gate::Forget).fill(50.0);
    p.gate_bias_mut(Gate::Input).fill(-50.0);
    let start = vec![0.9, -0.4, 0.05];
    let mut s = LstmState {
        h: vec![0.0; 3],
        c: start.clone(),
    };
    for _ in 0..100 {
        s = cell_forward(&p, &[rng.random_range(-1.0..1.0)], &s).unwrap();
    }
    for (c, c0) in s.c.iter().zip(&start) {
        assert!((c - c0).abs() < 1e-6);
    }
}

proptest! {
    #[test]
    fn gate_outputs_are_bounded(
        weights in prop::collection::vec(-5.0f64..5.0, 4 * 2 * 3),
        bias in prop::collection::vec(-5.0f64..5.0, 4 * 2),
        x in -10.0f64..10.0,
        h0 in prop::collection::vec(-1.0f64..1.0, 2),
        c0 in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        let p = LstmCellParams { input_dim: 1, hidden_dim: 2, weights, bias };
        let s = cell_forward(&p, &[x], &LstmState { h: h0, c: c0.clone() }).unwrap();
        for ((h, c), prev) in s.h.iter().zip(&s.c).zip(&c0) {
            prop_assert!(h.abs() < 1.0);
            // |C_t| <= f |C_{t-1}| + i |g| <= |C_{t-1}| + 1
            prop_assert!(c.abs() <= prev.abs() + 1.0);
        }
    }
}

#[test]
fn zero_network_predicts_head_bias() {
    let mut net = LstmNetwork::zeros(1, 4, 2).unwrap();
    assert_eq!(net.forward(&[0.3, 0.1, -2.0]).unwrap(), 0.0);
    net.head.bias = 0.25;
    assert_eq!(net.forward(&[0.3, 0.1, -2.0]).unwrap(), 0.25);
}

#[test]
fn network_matches_stacked_reference_cells() {
    let net = LstmNetwork::new(1, 4, 3, 11).unwrap();
    let window = [0.2, -0.5, 0.9, 0.1, -0.3];
    let mut states = vec![LstmState::zeros(4); 3];
    for &x in &window {
        let mut input = vec![x];
        for (cell, state) in net.layers.iter().zip(states.iter_mut()) {
            *state = cell_forward(cell, &input, state).unwrap();
            input = state.h.clone();
        }
    }
    let top = &states[2].h;
    let expect = net.head.bias + top.iter().zip(&net.head.weights).map(|(h, w)| h * w).sum::<f64>();
    assert!((net.forward(&window).unwrap() - expect).abs() < 1e-14);
}

#[test]
fn batching_does_not_change_predictions() {
    let net = LstmNetwork::new(1, 5, 2, 4).unwrap();
    let (x, _) = random_batch(7, 6, 1);
    let batched = net.forward_batch(&x, 7, 6).unwrap();
    for b in 0..7 {
        let single = net.forward(&x[b * 6..(b + 1) * 6]).unwrap();
        assert!((single - batched[b]).abs() < 1e-14);
    }
}

#[test]
fn golden_prediction() {
    let net = LstmNetwork::new(1, 8, 3, 2024).unwrap();
    let window: Vec<f64> = (0..10).map(|t| (t as f64 * 0.7).sin()).collect();
    let y = net.forward(&window).unwrap();
    assert!((y - GOLDEN).abs() < 1e-12, "prediction {y:.17}");
}

const GOLDEN: f64 = -0.003_366_642_549_796_88;

#[test]
fn initialization_follows_rules() {
    let net = LstmNetwork::new(1, 6, 2, 9).unwrap();
    let k0 = 1.0 / 7f64.sqrt();
    let k1 = 1.0 / 12f64.sqrt();
    assert!(net.layers[0].weights.iter().all(|w| w.abs() < k0));
    assert!(net.layers[1].weights.iter().all(|w| w.abs() < k1));
    for cell in &net.layers {
        assert!(cell.gate_bias(Gate::Forget).iter().all(|&b| b == 1.0));
        for g in [Gate::Input, Gate::Candidate, Gate::Output] {
            assert!(cell.gate_bias(g).iter().all(|&b| b == 0.0));
        }
    }
    assert_eq!(net, LstmNetwork::new(1, 6, 2, 9).unwrap());
    assert_ne!(net, LstmNetwork::new(1, 6, 2, 10).unwrap());
    let quiet = net.with_zero_head();
    assert_eq!(quiet.forward(&[0.5, 0.2]).unwrap(), 0.0);
}

/// Largest relative disagreement between the analytic gradient and central
/// differences of the loss, over every parameter.
fn gradient_check(layers: usize, hidden: usize, steps: usize, seed: u64) -> f64 {
    let mut net = LstmNetwork::new(1, hidden, layers, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    for s in net.param_slices_mut() {
        for p in s.iter_mut() {
            *p += rng.random_range(-0.3..0.3);
        }
    }
    let (x, y) = random_batch(3, steps, seed);
    let (_, grads) = bptt_gradients(&net, &x, &y, steps).unwrap();
    let analytic: Vec<f64> = grads.slices().iter().flat_map(|s| s.iter().copied()).collect();
    assert_eq!(analytic.len(), net.param_count());
    let loss = |net: &LstmNetwork| -> f64 {
        let p = net.forward_batch(&x, 3, steps).unwrap();
        p.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / 3.0
    };
    let eps = 1e-5;
    let mut worst = 0.0f64;
    let mut idx = 0;
    for block in 0..analytic.len() {
        let len = net.param_slices_mut()[block].len();
        for j in 0..len {
            let orig = net.param_slices_mut()[block][j];
            net.param_slices_mut()[block][j] = orig + eps;
            let up = loss(&net);
            net.param_slices_mut()[block][j] = orig - eps;
            let down = loss(&net);
            net.param_slices_mut()[block][j] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic[idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
            idx += 1;
        }
        if idx == analytic.len() {
            break;
        }
    }
    assert_eq!(idx, analytic.len());
    worst
}

#[test]
fn gradients_match_finite_differences_one_layer() {
    let worst = gradient_check(1, 3, 4, 5);
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn gradients_match_finite_differences_two_layers() {
    let worst = gradient_check(2, 5, 6, 6);
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn exact_fit_has_zero_gradient() {
    let net = LstmNetwork::new(1, 4, 2, 8).unwrap();
    let (x, _) = random_batch(5, 3, 2);
    let y = net.forward_batch(&x, 5, 3).unwrap();
    let (loss, grads) = bptt_gradients(&net, &x, &y, 3).unwrap();
    assert_eq!(loss, 0.0);
    assert_eq!(grads.max_abs(), 0.0);
}

#[test]
fn batch_gradient_is_mean_of_sample_gradients() {
    let net = LstmNetwork::new(1, 4, 2, 12).unwrap();
    let (x, y) = random_batch(2, 5, 3);
    let (_, g) = bptt_gradients(&net, &x, &y, 5).unwrap();
    let (_, g0) = bptt_gradients(&net, &x[..5], &y[..1], 5).unwrap();
    let (_, g1) = bptt_gradients(&net, &x[5..], &y[1..], 5).unwrap();
    for ((a, b), c) in g.slices().iter().zip(g0.slices()).zip(g1.slices()) {
        for j in 0..a.len() {
            assert!((a[j] - 0.5 * (b[j] + c[j])).abs() < 1e-12);
        }
    }
}

#[test]
fn non_finite_gradient_names_the_parameter() {
    let mut g = LstmGradients::zeros_like(&LstmNetwork::zeros(1, 2, 2).unwrap());
    assert_eq!(g.first_non_finite(), None);
    let k = g.layers[1].concat_dim();
    g.layers[1].gate_weights_mut(Gate::Input)[k + 3] = f64::NAN;
    assert_eq!(g.first_non_finite().as_deref(), Some("layer 1 W_i[1, 3]"));
}

fn decay_windows() -> SupervisedWindowSet {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for _ in 0..200 {
        let mut v: f64 = rng.random_range(-1.0..1.0);
        for _ in 0..4 {
            xs.push(v);
            v *= 0.9;
        }
        ys.push(v);
    }
    SupervisedWindowSet::from_pairs(xs, ys, 4, ScaleParams::new(-1.0, 1.0, -1.0, 1.0).unwrap()).unwrap()
}

fn small_config() -> TrainConfig {
    TrainConfig {
        layers: 1,
        hidden_dim: 8,
        window: 4,
        seed: 1,
        ..TrainConfig::default()
    }
}

#[test]
fn learns_a_linear_recurrence() {
    let data = decay_windows();
    let cfg = small_config();
    let mut net = cfg.init_network().unwrap();
    let report = train(&mut net, &data, &cfg).unwrap();
    assert_eq!(report.loss_history.len(), 100);
    assert!(report.val_history.is_empty());
    let last = report.final_loss().unwrap();
    assert!(last < 1e-3, "final loss {last}");
    let ma: Vec<f64> = report.loss_history.windows(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
    for pair in ma.windows(2) {
        assert!(pair[1] <= pair[0], "moving average rose: {pair:?}");
    }
}

#[test]
fn training_is_deterministic() {
    let data = decay_windows();
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 16,
        ..small_config()
    };
    let run = || {
        let mut net = cfg.init_network().unwrap();
        let report = train_with_validation(&mut net, &data, Some(&data), &cfg).unwrap();
        (net, report)
    };
    let (a, ra) = run();
    let (b, rb) = run();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    assert_eq!(ra.val_history.len(), 5);
    let (best_epoch, best) = ra.best_val.unwrap();
    assert_eq!(best, ra.val_history[best_epoch]);
    let other = TrainConfig { seed: 2, ..cfg.clone() };
    let mut c = other.init_network().unwrap();
    train(&mut c, &data, &other).unwrap();
    assert_ne!(a, c);
}

#[test]
fn short_final_batch_is_used() {
    let data = decay_windows();
    let cfg = TrainConfig {
        epochs: 1,
        batch_size: 64,
        ..small_config()
    };
    let mut net = cfg.init_network().unwrap();
    assert!(train(&mut net, &data, &cfg).is_ok());
    let tiny = SupervisedWindowSet::from_pairs(data.inputs()[..12].to_vec(), data.targets()[..3].to_vec(), 4, *data.scale()).unwrap();
    assert!(train(&mut net, &tiny, &cfg).is_ok());
}

#[test]
fn training_rejects_bad_input() {
    let cfg = small_config();
    let mut net = cfg.init_network().unwrap();
    let empty = SupervisedWindowSet::from_pairs(Vec::new(), Vec::new(), 4, ScaleParams::new(0.0, 1.0, -1.0, 1.0).unwrap()).unwrap();
    assert!(matches!(train(&mut net, &empty, &cfg), Err(Error::Configuration(_))));
    let bad = TrainConfig {
        learning_rate: 0.0,
        ..cfg.clone()
    };
    assert!(matches!(train(&mut net, &decay_windows(), &bad), Err(Error::Configuration(_))));
}

#[test]
fn windows_examples() {
    let unit = ScaleParams::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let w = make_windows(&[1.0, 2.0, 3.0, 4.0, 5.0], 2, unit).unwrap();
    assert_eq!(w.len(), 3);
    assert_eq!(w.inputs(), &[1.0, 2.0, 2.0, 3.0, 3.0, 4.0]);
    assert_eq!(w.targets(), &[3.0, 4.0, 5.0]);
    for n in 4..40 {
        let v: Vec<f64> = (0..n).map(|t| t as f64).collect();
        assert_eq!(make_windows(&v, 3, unit).unwrap().len(), n - 3);
    }
    assert!(matches!(make_windows(&[1.0, 2.0], 2, unit), Err(Error::DegenerateInput(_))));
    let flat = [4.0; 10];
    assert!(ScaleParams::fit(&flat).and_then(|s| make_windows(&flat, 3, s)).is_err());
}

#[test]
fn windows_apply_the_given_scale() {
    let values = [10.0, 20.0, 30.0, 40.0];
    let s = ScaleParams::fit(&values[..2]).unwrap();
    let w = make_windows(&values, 1, s).unwrap();
    assert_eq!(w.targets(), &[1.0, 3.0, 5.0]);
    assert_eq!(w.input(0), &[-1.0]);
}

