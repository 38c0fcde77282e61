//! Strictly upper-triangular score matrices.
//!
//! A `ScoreMatrix` of dimension `n` holds one real score for every utterance
//! pair `(i, j)` with `1 <= i < j <= n`. Everything on or below the diagonal
//! is a structural zero: it is never stored as data and never enters
//! statistics.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    // Dense row-major n x n storage, 0-based. Lower triangle and diagonal
    // are kept at exactly 0.0.
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn zeros(n: usize) -> Self {
        ScoreMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Matrix with the same value on every strictly-upper cell.
    pub fn constant(n: usize, value: f64) -> Self {
        Self::from_fn(n, |_, _| value)
    }

    /// Builds a matrix from a closure over 1-based pairs `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i + 1, j + 1);
                assert!(v.is_finite(), "non-finite score at ({}, {})", i + 1, j + 1);
                m.data[i * n + j] = v;
            }
        }
        m
    }

    /// Builds a matrix from its row-major upper entries.
    pub fn from_upper(n: usize, entries: &[f64]) -> Result<Self> {
        let expected = pair_count(n);
        if entries.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite upper entry at position {pos}")));
        }
        let mut it = entries.iter();
        Ok(Self::from_fn(n, |_, _| *it.next().unwrap()))
    }

    /// Keeps only the strictly-upper part of a dense row-major `n x n` buffer.
    pub fn from_dense_upper(n: usize, mut dense: Vec<f64>) -> Self {
        assert_eq!(dense.len(), n * n, "dense buffer has wrong length");
        for i in 0..n {
            for j in 0..=i {
                dense[i * n + j] = 0.0;
            }
            for j in i + 1..n {
                assert!(dense[i * n + j].is_finite(), "non-finite score at ({}, {})", i + 1, j + 1);
            }
        }
        ScoreMatrix { n, data: dense }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Score of pair `(i, j)`, 1-based. Returns 0 for `i >= j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i >= 1 && j >= 1 && i <= self.n && j <= self.n, "index out of range");
        self.data[(i - 1) * self.n + (j - 1)]
    }

    /// Sets pair `(i, j)`, 1-based. Panics unless `i < j` and the value is finite.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i >= 1 && i < j && j <= self.n, "({i}, {j}) is not a strictly-upper cell");
        assert!(value.is_finite(), "non-finite score");
        self.data[(i - 1) * self.n + (j - 1)] = value;
    }

    /// Dense 0-based row-major view, including the structural zeros.
    pub fn dense(&self) -> &[f64] {
        &self.data
    }

    /// Row-major list of the strictly-upper entries, length n(n-1)/2.
    pub fn upper_entries(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            out.extend_from_slice(&self.data[i * n + i + 1..(i + 1) * n]);
        }
        out
    }

    /// Applies `f` to every strictly-upper entry.
    pub fn map_upper(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(self.n, |i, j| f(self.get(i, j)))
    }

    /// Combines two matrices of equal dimension entrywise on the upper triangle.
    pub fn zip_upper(&self, other: &ScoreMatrix, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        check_same_n(self, other)?;
        Ok(Self::from_fn(self.n, |i, j| f(self.get(i, j), other.get(i, j))))
    }

    /// Leading `k x k` block.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.n);
        Self::from_fn(k, |i, j| self.get(i, j))
    }

    pub fn is_strictly_upper(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..=i).all(|j| self.data[i * n + j] == 0.0))
            && self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &ScoreMatrix) -> Result<f64> {
        check_same_n(self, other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn check_same_n(a: &ScoreMatrix, b: &ScoreMatrix) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: b.n,
        });
    }
    Ok(())
}

/// Number of strictly-upper cells of an `n x n` matrix.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

pub fn upper_entries(m: &ScoreMatrix) -> Vec<f64> {
    m.upper_entries()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
}

/// Population mean and standard deviation over the strictly-upper entries.
pub fn mat_stats(m: &ScoreMatrix) -> Stats {
    population_stats(&m.upper_entries())
}

pub(crate) fn population_stats(values: &[f64]) -> Stats {
    if values.is_empty() {
        return Stats { mean: 0.0, std: 0.0 };
    }
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len;
    Stats {
        mean,
        std: var.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn upper_entries_row_major() {
        let m = ScoreMatrix::from_upper(2, &[0.5]).unwrap();
        assert_eq!(m.upper_entries(), vec![0.5]);

        let mut m = ScoreMatrix::zeros(3);
        m.set(1, 2, 0.2);
        m.set(1, 3, 0.4);
        m.set(2, 3, 0.6);
        assert_eq!(upper_entries(&m), vec![0.2, 0.4, 0.6]);

        assert_eq!(ScoreMatrix::zeros(3).upper_entries(), vec![0.0; 3]);
    }

    #[test]
    fn stats_over_upper_only() {
        let m = ScoreMatrix::from_upper(3, &[0.1, 0.3, 0.5]).unwrap();
        let s = mat_stats(&m);
        assert_abs_diff_eq!(s.mean, 0.3, epsilon = 1e-12);
        // sqrt(((0.2)^2 + 0 + (0.2)^2) / 3)
        assert_abs_diff_eq!(s.std, (0.08f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.std, 0.1633, epsilon = 1e-4);

        let c = mat_stats(&ScoreMatrix::constant(5, 0.7));
        assert_abs_diff_eq!(c.mean, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(c.std, 0.0, epsilon = 1e-12);

        let single = mat_stats(&ScoreMatrix::from_upper(2, &[0.5]).unwrap());
        assert_eq!(single, Stats { mean: 0.5, std: 0.0 });
    }

    #[test]
    fn from_upper_rejects_bad_length() {
        assert!(matches!(
            ScoreMatrix::from_upper(3, &[0.1, 0.2]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    #[should_panic]
    fn set_rejects_lower_cell() {
        ScoreMatrix::zeros(3).set(2, 1, 1.0);
    }

    #[test]
    fn dense_upper_discards_lower() {
        let m = ScoreMatrix::from_dense_upper(2, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.dense(), &[0.0, 2.0, 0.0, 0.0]);
        assert!(m.is_strictly_upper());
    }

    proptest::proptest! {
        #[test]
        fn stats_invariant_under_replication(values in proptest::collection::vec(0.0f64..1.0, 1..20), copies in 1usize..4) {
            let base = population_stats(&values);
            let repeated: Vec<f64> = values.iter().cycle().take(values.len() * copies).copied().collect();
            let rep = population_stats(&repeated);
            proptest::prop_assert!((base.mean - rep.mean).abs() < 1e-12);
            proptest::prop_assert!((base.std - rep.std).abs() < 1e-9);
        }
    }
}
