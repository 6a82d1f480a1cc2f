//! Property tests for the evaluation metrics.

use proptest::prelude::*;

use detseg_core::geometry::{BoundingBox, Detection};
use detseg_core::metrics::{average_precision, ciou_loss, iou, match_detections, EvalImage};

fn arb_box() -> impl Strategy<Value = BoundingBox> {
    (0.0..100.0f64, 0.0..100.0f64, 0.1..50.0f64, 0.1..50.0f64)
        .prop_map(|(x, y, w, h)| BoundingBox::new(x, y, x + w, y + h).unwrap())
}

fn arb_detection() -> impl Strategy<Value = Detection> {
    (arb_box(), 0.001..1.0f64).prop_map(|(b, s)| Detection::new(b, s, 0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn iou_is_symmetric_and_translation_invariant(
        a in arb_box(),
        b in arb_box(),
        tx in -50.0..50.0f64,
        ty in -50.0..50.0f64,
    ) {
        prop_assert!((iou(&a, &b) - iou(&b, &a)).abs() < 1e-12);
        let shift = |bx: &BoundingBox| {
            BoundingBox::new(bx.x_min + tx, bx.y_min + ty, bx.x_max + tx, bx.y_max + ty).unwrap()
        };
        prop_assert!((iou(&shift(&a), &shift(&b)) - iou(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn iou_self_is_one_and_ciou_self_is_zero(a in arb_box()) {
        prop_assert_eq!(iou(&a, &a), 1.0);
        prop_assert_eq!(ciou_loss(&a, &a), 0.0);
    }

    #[test]
    fn ciou_loss_is_non_negative_and_bounded(a in arb_box(), b in arb_box()) {
        let loss = ciou_loss(&a, &b);
        // CIoU in [-1, 1] gives loss in [0, 2]; the penalty terms keep it
        // finite for every valid box pair.
        prop_assert!(loss.is_finite());
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&loss), "loss {loss}");
    }
}

proptest! {
    // The matching invariant is cheap; run the full thousand the module
    // contract asks for.
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matching_counts_partition_inputs(
        dets in prop::collection::vec(arb_detection(), 0..12),
        gts in prop::collection::vec(arb_box(), 0..8),
        tau in 0.05..1.0f64,
    ) {
        let m = match_detections(&dets, &gts, tau);
        prop_assert_eq!(m.true_positives + m.false_negatives, gts.len());
        prop_assert_eq!(m.true_positives + m.false_positives, dets.len());
        prop_assert_eq!(m.flags.len(), dets.len());
        // Flags arrive sorted by descending score.
        for pair in m.flags.windows(2) {
            prop_assert!(pair[0].score >= pair[1].score);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn ap_is_monotone_non_increasing_in_tau(
        dets in prop::collection::vec(arb_detection(), 0..15),
        gts in prop::collection::vec(arb_box(), 1..8),
    ) {
        let images = vec![EvalImage { dets, gts }];
        let mut last = f64::INFINITY;
        for tau in [0.3, 0.5, 0.75, 0.95] {
            let ap = average_precision(&images, tau).unwrap();
            prop_assert!(ap <= last + 1e-12, "AP rose from {last} to {ap} at tau {tau}");
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ap));
            last = ap;
        }
    }
}
