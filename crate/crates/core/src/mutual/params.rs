use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the column/row flow weights are shared across positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    /// One scalar weight for all columns and one for all rows.
    #[default]
    Scalar,
    /// One weight per summation index `k`, `n_max` of each.
    PerIndex,
}

/// Learnable weights of the two aggregators.
///
/// `w_left`/`w_right` are `n_max x n_max`, row-major; a dialogue of length
/// `n` uses their leading `n x n` block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_max: usize,
    pub flow_mode: FlowMode,
    pub w_col: Vec<f64>,
    pub w_row: Vec<f64>,
    pub w_left: Vec<f64>,
    pub w_right: Vec<f64>,
}

impl ModelParams {
    /// Training initialization: unit flow weights, identity transforms plus
    /// uniform noise in `[-0.01, 0.01]` drawn from `seed`.
    pub fn init(n_max: usize, flow_mode: FlowMode, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noisy_identity = || {
            let mut m = identity(n_max);
            for v in m.iter_mut() {
                *v += rng.random_range(-0.01..=0.01);
            }
            m
        };
        let w_left = noisy_identity();
        let w_right = noisy_identity();
        let len = flow_len(n_max, flow_mode);
        ModelParams {
            n_max,
            flow_mode,
            w_col: vec![1.0; len],
            w_row: vec![1.0; len],
            w_left,
            w_right,
        }
    }

    /// Identity transforms and zero flow weights. Under these parameters the
    /// rhetoric-enhanced topic matrix vanishes and the topic-assisted
    /// rhetorical matrix is the plain sum of the two inputs.
    pub fn simple_incorporation(n_max: usize) -> Self {
        ModelParams {
            n_max,
            flow_mode: FlowMode::Scalar,
            w_col: vec![0.0],
            w_row: vec![0.0],
            w_left: identity(n_max),
            w_right: identity(n_max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let len = flow_len(self.n_max, self.flow_mode);
        let sq = self.n_max * self.n_max;
        if self.w_col.len() != len || self.w_row.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: self.w_col.len().max(self.w_row.len()),
            });
        }
        if self.w_left.len() != sq || self.w_right.len() != sq {
            return Err(Error::DimensionMismatch {
                expected: sq,
                found: self.w_left.len().max(self.w_right.len()),
            });
        }
        if self.values().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite model parameter".into()));
        }
        Ok(())
    }

    pub(crate) fn col_weight(&self, k: usize) -> f64 {
        match self.flow_mode {
            FlowMode::Scalar => self.w_col[0],
            FlowMode::PerIndex => self.w_col[k],
        }
    }

    pub(crate) fn row_weight(&self, k: usize) -> f64 {
        match self.flow_mode {
            FlowMode::Scalar => self.w_row[0],
            FlowMode::PerIndex => self.w_row[k],
        }
    }

    /// Leading `n x n` block of a stored `n_max x n_max` matrix.
    pub(crate) fn slice(&self, full: &[f64], n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.extend_from_slice(&full[i * self.n_max..i * self.n_max + n]);
        }
        out
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::DialogueTooLong { n, max: self.n_max });
        }
        Ok(())
    }

    /// All parameters in a fixed order: w_col, w_row, w_left, w_right.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.w_col
            .iter()
            .chain(&self.w_row)
            .chain(&self.w_left)
            .chain(&self.w_right)
            .copied()
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.w_col
            .iter_mut()
            .chain(self.w_row.iter_mut())
            .chain(self.w_left.iter_mut())
            .chain(self.w_right.iter_mut())
    }

    pub fn num_values(&self) -> usize {
        self.w_col.len() + self.w_row.len() + self.w_left.len() + self.w_right.len()
    }
}

fn flow_len(n_max: usize, mode: FlowMode) -> usize {
    match mode {
        FlowMode::Scalar => 1,
        FlowMode::PerIndex => n_max,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Gradient of the loss with respect to every entry of [`ModelParams`].
/// Entries outside the dialogue's `n x n` block are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrads {
    pub w_col: Vec<f64>,
    pub w_row: Vec<f64>,
    pub w_left: Vec<f64>,
    pub w_right: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(p: &ModelParams) -> Self {
        ParamGrads {
            w_col: vec![0.0; p.w_col.len()],
            w_row: vec![0.0; p.w_row.len()],
            w_left: vec![0.0; p.w_left.len()],
            w_right: vec![0.0; p.w_right.len()],
        }
    }

    /// Same order as [`ModelParams::values`].
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.w_col
            .iter()
            .chain(&self.w_row)
            .chain(&self.w_left)
            .chain(&self.w_right)
            .copied()
    }
}

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(learning_rate: f64, num_params: usize) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ParamGrads) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);
        for (((p, g), m), v) in params
            .values_mut()
            .zip(grads.values())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}
