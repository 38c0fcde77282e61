use crate::{Arc, DependencyStructure, ScoreMatrix};

/// Maximum-score projective tree over utterances `1..=n`, rooted at
/// utterance 1, with rightward arcs only. A single utterance yields the
/// empty tree.
///
/// With no leftward arcs the usual left-facing items collapse to single
/// words, so the span table only needs right-headed items:
///
/// * `complete[s][t]`: `s` heads a subtree covering exactly `s..=t`;
/// * `incomplete[s][t]`: same, with `t` attached directly to `s`,
///   i.e. `complete[s][t - 1] + score(s, t)`.
///
/// `complete[s][t]` picks the last child `r` of `s`:
/// `incomplete[s][r] + complete[r][t]`. Ties prefer the larger `r`, which
/// attaches `t` to the smaller head.
pub fn eisner(common: &ScoreMatrix) -> DependencyStructure {
    let n = common.n();
    assert!(n >= 1, "eisner needs at least one utterance");
    let score = |h: usize, d: usize| common.dense()[h * n + d];

    let mut complete = vec![0.0f64; n * n];
    let mut incomplete = vec![f64::NEG_INFINITY; n * n];
    let mut split = vec![0usize; n * n];

    for width in 1..n {
        for s in 0..n - width {
            let t = s + width;
            incomplete[s * n + t] = complete[s * n + t - 1] + score(s, t);
            let mut best = f64::NEG_INFINITY;
            let mut best_r = t;
            for r in (s + 1..=t).rev() {
                let v = incomplete[s * n + r] + complete[r * n + t];
                if v > best {
                    best = v;
                    best_r = r;
                }
            }
            complete[s * n + t] = best;
            split[s * n + t] = best_r;
        }
    }

    let mut arcs = Vec::with_capacity(n - 1);
    let mut stack = vec![(0usize, n - 1)];
    while let Some((s, t)) = stack.pop() {
        if s == t {
            continue;
        }
        let r = split[s * n + t];
        arcs.push(Arc::new(s + 1, r + 1));
        stack.push((s, r - 1));
        stack.push((r, t));
    }
    DependencyStructure::new(n, arcs).expect("eisner produced an invalid tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::validate_tree;

    #[test]
    fn two_utterances_forced() {
        let t = eisner(&ScoreMatrix::from_upper(2, &[-3.0]).unwrap());
        assert_eq!(t.arcs(), &[Arc::new(1, 2)]);
    }

    #[test]
    fn three_utterance_example() {
        let m = ScoreMatrix::from_upper(3, &[0.9, 0.8, 0.1]).unwrap();
        let t = eisner(&m);
        assert_eq!(t.heads(), vec![1, 1]);
        assert!((t.score(&m) - 1.7).abs() < 1e-12);
        validate_tree(3, t.arcs()).unwrap();
    }

    #[test]
    fn chain_when_adjacent_dominates() {
        let m = ScoreMatrix::from_fn(5, |i, j| if j == i + 1 { 1.0 } else { 0.0 });
        assert_eq!(eisner(&m).heads(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn ties_prefer_smaller_head() {
        let t = eisner(&ScoreMatrix::zeros(4));
        assert_eq!(t.heads(), vec![1, 1, 1]);
    }
}
