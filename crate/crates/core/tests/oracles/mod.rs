//! Independent reference implementations used by the integration tests and
//! the acceptance suite. Nothing here calls the code it checks beyond the
//! forward computation.
#![allow(dead_code)]

use dialstruct::mutual::{fuse, gradients, loss, FlowMode, ModelParams, TrainConfig};
use dialstruct::{DependencyStructure, ScoreMatrix, Segmentation};
use rand::Rng;

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> ScoreMatrix {
    ScoreMatrix::from_fn(n, |_, _| rng.random_range(0.0..1.0))
}

/// Parameters with every entry uniform in `[-1, 1]`.
pub fn random_params<R: Rng>(rng: &mut R, n_max: usize, mode: FlowMode) -> ModelParams {
    let mut p = ModelParams::init(n_max, mode, 0);
    for v in p.values_mut() {
        *v = rng.random_range(-1.0..=1.0);
    }
    p
}

fn set_value(p: &mut ModelParams, idx: usize, value: f64) {
    *p.values_mut().nth(idx).unwrap() = value;
}

/// Loss at the given parameters, or `None` where it is undefined or not
/// smooth (a mean at the guard, or a zero spread).
fn smooth_loss(t: &ScoreMatrix, r: &ScoreMatrix, p: &ModelParams, cfg: &TrainConfig) -> Option<f64> {
    let f = fuse(t, r, p).ok()?;
    for m in [&f.a_top_rhe, &f.a_rhe_top] {
        let s = dialstruct::mat_stats(m);
        if s.std < 1e-6 || s.mean.abs() < 1e-3 {
            return None;
        }
    }
    loss(&f, cfg).ok()
}

pub struct GradCheck {
    /// Parameters compared.
    pub checked: usize,
    /// Largest relative error among entries above the absolute floor.
    pub worst_relative: f64,
    pub failures: usize,
}

/// Compares the analytic gradient with central differences of step `h`.
/// Returns `None` when the instance sits on a non-smooth point.
pub fn check_gradient(
    t: &ScoreMatrix,
    r: &ScoreMatrix,
    p: &ModelParams,
    cfg: &TrainConfig,
    h: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Option<GradCheck> {
    smooth_loss(t, r, p, cfg)?;
    let (_, grads) = gradients(t, r, p, cfg).ok()?;
    let analytic: Vec<f64> = grads.values().collect();
    let base: Vec<f64> = p.values().collect();
    let mut out = GradCheck {
        checked: 0,
        worst_relative: 0.0,
        failures: 0,
    };
    let mut q = p.clone();
    for (idx, &a) in analytic.iter().enumerate() {
        set_value(&mut q, idx, base[idx] + h);
        let up = smooth_loss(t, r, &q, cfg)?;
        set_value(&mut q, idx, base[idx] - h);
        let down = smooth_loss(t, r, &q, cfg)?;
        set_value(&mut q, idx, base[idx]);
        let fd = (up - down) / (2.0 * h);
        let diff = (a - fd).abs();
        out.checked += 1;
        if diff <= abs_floor {
            continue;
        }
        let rel = diff / a.abs().max(fd.abs());
        out.worst_relative = out.worst_relative.max(rel);
        if rel > rel_tol {
            out.failures += 1;
        }
    }
    Some(out)
}

/// Every rightward projective tree over `n` utterances, by enumerating all
/// head tables and keeping the ones without crossing arcs.
pub fn all_trees(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut heads = vec![0usize; n.saturating_sub(1)];
    fn rec(j: usize, n: usize, heads: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if j > n {
            if projective(heads) {
                out.push(heads.clone());
            }
            return;
        }
        for h in 1..j {
            heads[j - 2] = h;
            rec(j + 1, n, heads, out);
        }
    }
    rec(2, n, &mut heads, &mut out);
    out
}

/// Arcs `(h1, d1)` and `(h2, d2)` cross when exactly one endpoint of one
/// lies strictly inside the other's span.
fn projective(heads: &[usize]) -> bool {
    let arcs: Vec<(usize, usize)> = heads.iter().enumerate().map(|(k, &h)| (h, k + 2)).collect();
    for &(a, b) in &arcs {
        for &(c, d) in &arcs {
            if a < c && c < b && b < d {
                return false;
            }
        }
    }
    true
}

pub fn tree_score(m: &ScoreMatrix, heads: &[usize]) -> f64 {
    heads.iter().enumerate().map(|(k, &h)| m.get(h, k + 2)).sum()
}

pub fn brute_force_best(m: &ScoreMatrix) -> f64 {
    all_trees(m.n())
        .iter()
        .map(|h| tree_score(m, h))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Every segmentation of `n` utterances.
pub fn all_segmentations(n: usize) -> Vec<Segmentation> {
    (0u32..1 << (n - 1))
        .map(|mask| Segmentation::new(n, (1..n).filter(|g| mask & (1 << (g - 1)) != 0)).unwrap())
        .collect()
}

/// Pk from its textbook definition: probe pairs `(i, i + k)` over 1-based
/// positions, same-segment indicator by explicit boundary search.
pub fn reference_pk(gold: &Segmentation, pred: &Segmentation, k: usize) -> f64 {
    let n = gold.n();
    let same = |s: &Segmentation, i: usize, j: usize| !s.boundaries().iter().any(|&g| g >= i && g < j);
    let windows = n - k;
    let errors = (1..=windows)
        .filter(|&i| same(gold, i, i + k) != same(pred, i, i + k))
        .count();
    errors as f64 / windows as f64
}

pub fn reference_wd(gold: &Segmentation, pred: &Segmentation, k: usize) -> f64 {
    let n = gold.n();
    let count = |s: &Segmentation, i: usize, j: usize| s.boundaries().iter().filter(|&&g| g >= i && g < j).count();
    let windows = n - k;
    let errors = (1..=windows)
        .filter(|&i| count(gold, i, i + k) != count(pred, i, i + k))
        .count();
    errors as f64 / windows as f64
}

pub fn tree_is_valid(t: &DependencyStructure) -> bool {
    DependencyStructure::new(t.n(), t.arcs().iter().copied()).is_ok()
}
