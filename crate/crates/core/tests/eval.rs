mod common;

use eatradar::dataset_io::{Class, LabelSequence, Segment, SegmentSet};
use eatradar::eval::{cohen_kappa, evaluate_meal, frame_confusion, iou, segment_match, EvalReport};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seg() -> impl Strategy<Value = Segment> {
    (0u32..200, 1u32..80).prop_map(|(s, l)| Segment::new(Class::Eating, s, s + l))
}

proptest! {
    #[test]
    fn iou_is_a_bounded_symmetric_overlap(a in seg(), b in seg()) {
        let x = iou(&a, &b).unwrap();
        prop_assert_eq!(x, iou(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert_eq!(x == 1.0, a == b);
        prop_assert_eq!(x == 0.0, a.end <= b.start || b.end <= a.start);
    }

    #[test]
    fn true_positives_shrink_as_k_grows(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = common::segments(&common::random_labels(&mut rng, 120, 15));
        let pred = common::segments(&common::random_labels(&mut rng, 120, 15));
        let mut last = (u64::MAX, u64::MAX);
        for k in [0.05, 0.1, 0.25, 0.5, 0.75, 0.95] {
            let o = segment_match(&gt, &pred, k).unwrap();
            let tp = (o.eating.tp, o.drinking.tp);
            prop_assert!(tp.0 <= last.0 && tp.1 <= last.1);
            last = tp;
            for c in [Class::Eating, Class::Drinking] {
                let n = o.counts(c);
                let n_gt = gt.of_class(c).count() as u64;
                let n_pred = pred.of_class(c).count() as u64;
                prop_assert!(n.tp <= n_gt.min(n_pred));
                // every segment is accounted for once, a sub-threshold pair once for both
                prop_assert!(n.tp + n.fp + n.fn_ <= n_gt + n_pred);
                prop_assert!(n.tp + n.fp + n.fn_ >= n_gt.max(n_pred));
            }
        }
    }

    #[test]
    fn kappa_matches_direct_formula(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = common::random_labels(&mut rng, 300, 20);
        let pred = common::random_labels(&mut rng, 300, 20);
        let k = cohen_kappa(&frame_confusion(&gt, &pred).unwrap()).unwrap();
        prop_assert!((k - common::kappa_oracle(&gt.labels, &pred.labels)).abs() < 1e-9);
    }
}

#[test]
fn matcher_agrees_with_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..300 {
        let gt = common::segments(&common::random_labels(&mut rng, 60, 8));
        let pred = common::segments(&common::random_labels(&mut rng, 60, 8));
        for k in [0.1, 0.25, 0.5] {
            assert_eq!(segment_match(&gt, &pred, k).unwrap(), common::brute_force_outcome(&gt, &pred, k));
        }
    }
}

#[test]
fn pooled_counts_are_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let reports: Vec<EvalReport> = (0..4)
        .map(|_| {
            let gt = common::random_labels(&mut rng, 200, 25);
            let pred = common::random_labels(&mut rng, 200, 25);
            evaluate_meal(&gt, &pred, &[0.1, 0.5]).unwrap()
        })
        .collect();
    let pooled = EvalReport::pooled(&reports).unwrap();
    assert_eq!(pooled.confusion.total(), 800);
    let tp: u64 = reports.iter().map(|r| r.outcome(0.5).unwrap().eating.tp).sum();
    assert_eq!(pooled.outcome(0.5).unwrap().eating.tp, tp);
    assert!(EvalReport::pooled(std::iter::empty()).is_none());
}

#[test]
fn invalid_inputs_are_rejected() {
    let a = LabelSequence::new(vec![Class::Other; 10], 25.0);
    let b = LabelSequence::new(vec![Class::Other; 11], 25.0);
    assert!(frame_confusion(&a, &b).is_err());
    let set = SegmentSet::new(vec![Segment::new(Class::Eating, 0, 5)]);
    assert!(segment_match(&set, &set, 0.0).is_err());
    assert!(segment_match(&set, &set, 1.0).is_err());
    let overlapping = SegmentSet::new(vec![Segment::new(Class::Eating, 0, 5), Segment::new(Class::Drinking, 4, 8)]);
    assert!(segment_match(&overlapping, &set, 0.5).is_err());
    let other = SegmentSet::new(vec![Segment::new(Class::Other, 0, 5)]);
    assert!(segment_match(&other, &set, 0.5).is_err());
}
