mod oracles;

use dialstruct::metrics::{pk, window_diff, SegEvalConfig};
use oracles::{all_segmentations, reference_pk, reference_wd};

#[test]
fn pk_and_wd_match_reference_exhaustively() {
    for n in 2..=7 {
        let segs = all_segmentations(n);
        for gold in &segs {
            for k in 1..n {
                let cfg = SegEvalConfig { k: Some(k) };
                for pred in &segs {
                    let p = pk(gold, pred, &cfg).unwrap();
                    let w = window_diff(gold, pred, &cfg).unwrap();
                    assert_eq!(p, reference_pk(gold, pred, k));
                    assert_eq!(w, reference_wd(gold, pred, k));
                }
            }
        }
    }
}

#[test]
fn window_diff_never_below_pk() {
    // A Pk error means one side has a boundary in the window and the other
    // has none, so the counts differ too.
    for n in 2..=7 {
        let segs = all_segmentations(n);
        for gold in &segs {
            for pred in &segs {
                for k in [None, Some(1), Some(n - 1)] {
                    let cfg = SegEvalConfig { k };
                    assert!(window_diff(gold, pred, &cfg).unwrap() >= pk(gold, pred, &cfg).unwrap());
                }
            }
        }
    }
}
