//! Penalized alignment objective and its exact gradient.
//!
//! ```text
//! L  = MSE(X, Y) - lambda1 * P1 - lambda2 * P2
//! P1 = std(X) + std(Y)
//! P2 = 1 / mean(X) + 1 / mean(Y)
//! ```
//!
//! with `X` the rhetoric-enhanced topic matrix and `Y` the topic-assisted
//! rhetorical matrix. All statistics run over the `m = n(n-1)/2`
//! strictly-upper cells.

use super::fuse::{local_flow, matmul, transpose};
use super::{FusedPair, ModelParams, ParamGrads, TrainConfig};
use crate::matrix::{check_same_n, pair_count};
use crate::{mat_stats, Error, Result, ScoreMatrix};

/// `(P1, P2)` for a fused pair. Fails if either mean is at or below `epsilon`.
pub fn penalties(f: &FusedPair, epsilon: f64) -> Result<(f64, f64)> {
    let sx = mat_stats(&f.a_top_rhe);
    let sy = mat_stats(&f.a_rhe_top);
    for mean in [sx.mean, sy.mean] {
        if !(mean > epsilon) {
            return Err(Error::DegenerateMean { mean });
        }
    }
    Ok((sx.std + sy.std, 1.0 / sx.mean + 1.0 / sy.mean))
}

fn mse(a: &ScoreMatrix, b: &ScoreMatrix) -> f64 {
    let m = pair_count(a.n()) as f64;
    a.upper_entries()
        .iter()
        .zip(b.upper_entries())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / m
}

/// Penalized alignment loss. The reciprocal-mean penalty (and its
/// degeneracy guard) only applies when `lambda2` is non-zero.
pub fn loss(f: &FusedPair, cfg: &TrainConfig) -> Result<f64> {
    check_same_n(&f.a_top_rhe, &f.a_rhe_top)?;
    let spread = mat_stats(&f.a_top_rhe).std + mat_stats(&f.a_rhe_top).std;
    let mut value = mse(&f.a_top_rhe, &f.a_rhe_top) - cfg.lambda1 * spread;
    if cfg.lambda2 != 0.0 {
        let (_, p2) = penalties(f, cfg.mean_epsilon)?;
        value -= cfg.lambda2 * p2;
    }
    Ok(value)
}

/// Loss and its gradient with respect to every parameter.
///
/// Backpropagates through the fused-matrix construction by hand. Only the
/// leading `n x n` blocks of `w_left`/`w_right` receive gradient.
pub fn gradients(
    a_top: &ScoreMatrix,
    a_rhe: &ScoreMatrix,
    p: &ModelParams,
    cfg: &TrainConfig,
) -> Result<(f64, ParamGrads)> {
    check_same_n(a_top, a_rhe)?;
    let n = a_top.n();
    p.check_len(n)?;
    let t = a_top.dense();
    let r = a_rhe.dense();

    // Forward.
    let w_re = local_flow(a_top, p);
    let w_r: Vec<f64> = w_re.dense().iter().zip(r).map(|(a, b)| a * b).collect();
    let x = ScoreMatrix::from_dense_upper(n, matmul(&w_r, t, n));
    let left = p.slice(&p.w_left, n);
    let right = p.slice(&p.w_right, n);
    let left_t = matmul(&left, t, n);
    let mut y_dense = matmul(&left_t, &right, n);
    for (v, rv) in y_dense.iter_mut().zip(r) {
        *v += rv;
    }
    let y = ScoreMatrix::from_dense_upper(n, y_dense);
    let fused = FusedPair {
        a_top_rhe: x,
        a_rhe_top: y,
    };
    let value = loss(&fused, cfg)?;

    // dL/dX and dL/dY on the strictly-upper cells.
    let m = pair_count(n) as f64;
    let sx = mat_stats(&fused.a_top_rhe);
    let sy = mat_stats(&fused.a_rhe_top);
    let (xd, yd) = (fused.a_top_rhe.dense(), fused.a_rhe_top.dense());
    let std_grad = |v: f64, mean: f64, std: f64| if std > 0.0 { (v - mean) / (m * std) } else { 0.0 };
    let mean_grad = |mean: f64| if cfg.lambda2 != 0.0 { cfg.lambda2 / (mean * mean * m) } else { 0.0 };
    let mut gx = vec![0.0; n * n];
    let mut gy = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let c = i * n + j;
            let diff = 2.0 * (xd[c] - yd[c]) / m;
            gx[c] = diff - cfg.lambda1 * std_grad(xd[c], sx.mean, sx.std) + mean_grad(sx.mean);
            gy[c] = -diff - cfg.lambda1 * std_grad(yd[c], sy.mean, sy.std) + mean_grad(sy.mean);
        }
    }

    let mut grads = ParamGrads::zeros_like(p);

    // Y = upper(L T R) + A_rhe:  dL/dL = G (T R)^T,  dL/dR = (L T)^T G.
    let t_right = matmul(t, &right, n);
    let g_left = matmul(&gy, &transpose(&t_right, n), n);
    let g_right = matmul(&transpose(&left_t, n), &gy, n);
    for i in 0..n {
        for j in 0..n {
            grads.w_left[i * p.n_max + j] = g_left[i * n + j];
            grads.w_right[i * p.n_max + j] = g_right[i * n + j];
        }
    }

    // X = W_R T:  dL/dW_R = G T^T, restricted to the upper cells where W_R lives,
    // then through W_R = W_re * A_rhe.
    let g_wr = matmul(&gx, &transpose(t, n), n);
    for i in 0..n {
        for j in i + 1..n {
            let g = g_wr[i * n + j] * r[i * n + j];
            if g == 0.0 {
                continue;
            }
            for k in i..n {
                let slot = col_slot(p, k);
                grads.w_col[slot] += g * t[k * n + j];
            }
            for k in 0..=j {
                let slot = row_slot(p, k);
                grads.w_row[slot] += g * t[i * n + k];
            }
        }
    }

    Ok((value, grads))
}

fn col_slot(p: &ModelParams, k: usize) -> usize {
    if p.w_col.len() == 1 {
        0
    } else {
        k
    }
}

fn row_slot(p: &ModelParams, k: usize) -> usize {
    if p.w_row.len() == 1 {
        0
    } else {
        k
    }
}

#[cfg(test)]
mod tests {
    use super::super::{fuse, FlowMode};
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(lambda1: f64, lambda2: f64) -> TrainConfig {
        TrainConfig {
            lambda1,
            lambda2,
            ..Default::default()
        }
    }

    #[test]
    fn penalty_examples() {
        let c = FusedPair {
            a_top_rhe: ScoreMatrix::constant(4, 0.5),
            a_rhe_top: ScoreMatrix::constant(4, 0.5),
        };
        let (p1, p2) = penalties(&c, 1e-6).unwrap();
        assert_abs_diff_eq!(p1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p2, 4.0, epsilon = 1e-12);

        let mixed = FusedPair {
            a_top_rhe: ScoreMatrix::from_upper(3, &[0.1, 0.3, 0.5]).unwrap(),
            a_rhe_top: ScoreMatrix::constant(3, 0.5),
        };
        let (p1, p2) = penalties(&mixed, 1e-6).unwrap();
        assert_abs_diff_eq!(p1, 0.1633, epsilon = 1e-4);
        assert_abs_diff_eq!(p2, 1.0 / 0.3 + 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p2, 5.333, epsilon = 1e-3);

        let zero = FusedPair {
            a_top_rhe: ScoreMatrix::zeros(3),
            a_rhe_top: ScoreMatrix::constant(3, 0.5),
        };
        assert!(matches!(penalties(&zero, 1e-6), Err(Error::DegenerateMean { .. })));
    }

    #[test]
    fn loss_examples() {
        let c = FusedPair {
            a_top_rhe: ScoreMatrix::constant(4, 0.5),
            a_rhe_top: ScoreMatrix::constant(4, 0.5),
        };
        assert_abs_diff_eq!(loss(&c, &cfg(1e-3, 1e-3)).unwrap(), -0.004, epsilon = 1e-15);
        assert_eq!(mse(&c.a_top_rhe, &c.a_rhe_top), 0.0);

        let pair = FusedPair {
            a_top_rhe: ScoreMatrix::from_upper(2, &[0.2]).unwrap(),
            a_rhe_top: ScoreMatrix::from_upper(2, &[0.6]).unwrap(),
        };
        assert_abs_diff_eq!(loss(&pair, &cfg(0.0, 0.0)).unwrap(), 0.16, epsilon = 1e-12);
    }

    #[test]
    fn gradient_loss_matches_forward_loss() {
        let t = ScoreMatrix::from_upper(4, &[0.3, 0.8, 0.1, 0.6, 0.2, 0.9]).unwrap();
        let r = ScoreMatrix::from_upper(4, &[0.9, 0.1, 0.4, 0.7, 0.3, 0.5]).unwrap();
        let p = ModelParams::init(6, FlowMode::Scalar, 42);
        let c = cfg(1e-3, 1e-3);
        let (value, _) = gradients(&t, &r, &p, &c).unwrap();
        let direct = loss(&fuse(&t, &r, &p).unwrap(), &c).unwrap();
        assert_abs_diff_eq!(value, direct, epsilon = 1e-12);
    }

    #[test]
    fn zero_topic_gives_zero_flow_gradient() {
        // X vanishes identically, so the reciprocal-mean term has to be off.
        let t = ScoreMatrix::zeros(4);
        let r = ScoreMatrix::from_upper(4, &[0.9, 0.1, 0.4, 0.7, 0.3, 0.5]).unwrap();
        let p = ModelParams::init(5, FlowMode::Scalar, 1);
        let (_, g) = gradients(&t, &r, &p, &cfg(1e-3, 0.0)).unwrap();
        assert_eq!(g.w_col, vec![0.0]);
        assert_eq!(g.w_row, vec![0.0]);
        assert!(matches!(gradients(&t, &r, &p, &cfg(1e-3, 1e-3)), Err(Error::DegenerateMean { .. })));
    }

    #[test]
    fn gradient_is_zero_outside_slice() {
        let t = ScoreMatrix::from_upper(3, &[0.3, 0.8, 0.1]).unwrap();
        let r = ScoreMatrix::from_upper(3, &[0.9, 0.1, 0.4]).unwrap();
        let p = ModelParams::init(5, FlowMode::Scalar, 2);
        let (_, g) = gradients(&t, &r, &p, &cfg(1e-3, 1e-3)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i >= 3 || j >= 3 {
                    assert_eq!(g.w_left[i * 5 + j], 0.0);
                    assert_eq!(g.w_right[i * 5 + j], 0.0);
                }
            }
        }
    }
}
