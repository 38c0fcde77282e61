mod oracles;

use dialstruct::mutual::{gradients, FlowMode, ModelParams, TrainConfig};
use dialstruct::ScoreMatrix;
use oracles::{check_gradient, random_matrix, random_params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;
const ABS_FLOOR: f64 = 1e-8;

fn run(mode: FlowMode, instances: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = TrainConfig {
        lambda1: 0.3,
        lambda2: 0.2,
        ..Default::default()
    };
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < instances {
        attempts += 1;
        assert!(attempts < instances * 50, "too many rejected instances");
        let n = rng.random_range(3..=8);
        let t = random_matrix(&mut rng, n);
        let r = random_matrix(&mut rng, n);
        let p = random_params(&mut rng, 8, mode);
        let Some(check) = check_gradient(&t, &r, &p, &cfg, H, REL_TOL, ABS_FLOOR) else {
            continue;
        };
        accepted += 1;
        assert_eq!(check.checked, p.num_values());
        assert_eq!(
            check.failures, 0,
            "n={n}: worst relative error {:e}",
            check.worst_relative
        );
    }
}

#[test]
fn scalar_flow_matches_finite_differences() {
    run(FlowMode::Scalar, 100, 42);
}

#[test]
fn per_index_flow_matches_finite_differences() {
    run(FlowMode::PerIndex, 40, 7);
}

#[test]
fn default_penalties_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = TrainConfig::default();
    let mut accepted = 0;
    while accepted < 20 {
        let n = rng.random_range(3..=8);
        let (t, r) = (random_matrix(&mut rng, n), random_matrix(&mut rng, n));
        let p = random_params(&mut rng, 8, FlowMode::Scalar);
        if let Some(c) = check_gradient(&t, &r, &p, &cfg, H, REL_TOL, ABS_FLOOR) {
            assert_eq!(c.failures, 0);
            accepted += 1;
        }
    }
}

#[test]
fn coinciding_fused_matrices_have_zero_gradient() {
    // Zero transforms and a zero rhetorical matrix make both fused matrices
    // vanish; without penalties the MSE term is flat there.
    let t = ScoreMatrix::from_fn(5, |i, j| 0.1 * (i + j) as f64);
    let r = ScoreMatrix::zeros(5);
    let mut p = ModelParams::simple_incorporation(5);
    p.w_left.iter_mut().for_each(|v| *v = 0.0);
    p.w_right.iter_mut().for_each(|v| *v = 0.0);
    p.w_col = vec![0.7];
    p.w_row = vec![-0.4];
    let cfg = TrainConfig {
        lambda1: 0.0,
        lambda2: 0.0,
        ..Default::default()
    };
    let (value, g) = gradients(&t, &r, &p, &cfg).unwrap();
    assert_eq!(value, 0.0);
    assert!(g.values().all(|v| v == 0.0));
}
