use super::{FusedPair, ModelParams};
use crate::matrix::check_same_n;
use crate::scoring::minmax;
use crate::{Result, ScoreMatrix};

/// Dense `n x n` row-major product.
pub(crate) fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub(crate) fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

/// Topic information flow into each pair `(i, j)`:
/// the column sum of `A_top` from row `i` down, weighted by `w_col`, plus
/// the row sum of `A_top` up to column `j`, weighted by `w_row`.
pub fn local_flow(a_top: &ScoreMatrix, p: &ModelParams) -> ScoreMatrix {
    let n = a_top.n();
    let t = a_top.dense();
    ScoreMatrix::from_fn(n, |i, j| {
        let (i, j) = (i - 1, j - 1);
        let col: f64 = (i..n).map(|k| p.col_weight(k) * t[k * n + j]).sum();
        let row: f64 = (0..=j).map(|k| p.row_weight(k) * t[i * n + k]).sum();
        col + row
    })
}

/// Entrywise product of the flow matrix and the rhetorical matrix.
pub fn local_rhetorical(w_re: &ScoreMatrix, a_rhe: &ScoreMatrix) -> Result<ScoreMatrix> {
    w_re.zip_upper(a_rhe, |a, b| a * b)
}

/// `W_R * A_top`, strictly-upper part.
///
/// The product of two strictly-upper matrices has a zero superdiagonal.
pub fn rhetoric_enhanced_topic(w_r: &ScoreMatrix, a_top: &ScoreMatrix) -> Result<ScoreMatrix> {
    check_same_n(w_r, a_top)?;
    let n = w_r.n();
    Ok(ScoreMatrix::from_dense_upper(n, matmul(w_r.dense(), a_top.dense(), n)))
}

/// `W_left * A_top * W_right + A_rhe` on the leading `n x n` parameter
/// block, strictly-upper part. The lower triangle and diagonal of the
/// product are discarded.
pub fn topic_assisted_rhetorical(a_top: &ScoreMatrix, a_rhe: &ScoreMatrix, p: &ModelParams) -> Result<ScoreMatrix> {
    check_same_n(a_top, a_rhe)?;
    let n = a_top.n();
    p.check_len(n)?;
    let left = p.slice(&p.w_left, n);
    let right = p.slice(&p.w_right, n);
    let mut prod = matmul(&matmul(&left, a_top.dense(), n), &right, n);
    for (v, r) in prod.iter_mut().zip(a_rhe.dense()) {
        *v += r;
    }
    Ok(ScoreMatrix::from_dense_upper(n, prod))
}

/// Both fused matrices for one dialogue.
pub fn fuse(a_top: &ScoreMatrix, a_rhe: &ScoreMatrix, p: &ModelParams) -> Result<FusedPair> {
    check_same_n(a_top, a_rhe)?;
    p.check_len(a_top.n())?;
    let w_re = local_flow(a_top, p);
    let w_r = local_rhetorical(&w_re, a_rhe)?;
    Ok(FusedPair {
        a_top_rhe: rhetoric_enhanced_topic(&w_r, a_top)?,
        a_rhe_top: topic_assisted_rhetorical(a_top, a_rhe, p)?,
    })
}

/// Entrywise mean of the fused pair, before normalization.
pub fn fused_mean(f: &FusedPair) -> ScoreMatrix {
    f.a_top_rhe
        .zip_upper(&f.a_rhe_top, |a, b| (a + b) / 2.0)
        .expect("fused pair with mismatched dimensions")
}

/// Entrywise mean of the fused pair, min-max normalized.
pub fn common_matrix(f: &FusedPair) -> ScoreMatrix {
    minmax(&fused_mean(f), 1e-12)
}
