//! Property tests for manifest serialization and box/mask geometry.

use proptest::prelude::*;

use detseg_core::geometry::BoundingBox;
use detseg_core::manifest::{
    parse_manifest, serialize_manifest, AnnotationRecord, CapturePeriod, Manifest, Split,
};
use detseg_core::mask::{mask_to_global, MaskRaster};

fn arb_split() -> impl Strategy<Value = Split> {
    prop_oneof![Just(Split::Train), Just(Split::Val), Just(Split::Test)]
}

fn arb_period() -> impl Strategy<Value = Option<CapturePeriod>> {
    prop_oneof![
        Just(None),
        Just(Some(CapturePeriod::Day)),
        Just(Some(CapturePeriod::DuskDawn)),
        Just(Some(CapturePeriod::Night)),
    ]
}

/// In-bounds boxes so parsing does not clamp (round-trip must be identity).
fn arb_box(w: u32, h: u32) -> impl Strategy<Value = BoundingBox> {
    let (wf, hf) = (w as f64, h as f64);
    (0.0..wf, 0.0..hf).prop_flat_map(move |(x0, y0)| {
        (Just(x0), Just(y0), x0..wf, y0..hf)
            .prop_map(|(x0, y0, x1, y1)| BoundingBox::new(x0, y0, x1, y1).unwrap())
    })
}

fn arb_record(index: usize) -> impl Strategy<Value = AnnotationRecord> {
    ((16u32..256), (16u32..256)).prop_flat_map(move |(w, h)| {
        (
            prop::collection::vec(arb_box(w, h), 0..5),
            arb_period(),
            0usize..10,
        )
            .prop_map(move |(gt_boxes, capture_period, group)| AnnotationRecord {
                image_id: format!("img_{index:04}"),
                file: format!("images/img_{index:04}.pgm"),
                width: w,
                height: h,
                group_id: format!("vid_{group:02}"),
                gt_boxes,
                condition_tags: None,
                capture_period,
            })
    })
}

fn arb_manifest(max_records: usize) -> impl Strategy<Value = Manifest> {
    (arb_split(), 0..=max_records).prop_flat_map(|(split, n)| {
        (0..n)
            .map(arb_record)
            .collect::<Vec<_>>()
            .prop_map(move |records| Manifest { split, records })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_serialize_round_trips(m in arb_manifest(50)) {
        let text = serialize_manifest(&m);
        let parsed = parse_manifest(&text).unwrap();
        prop_assert_eq!(parsed.manifest, m);
        prop_assert_eq!(parsed.clamp_warnings, 0);
    }

    #[test]
    fn clamp_is_idempotent_and_shrinks_area(
        x0 in -200.0..200.0f64,
        y0 in -200.0..200.0f64,
        dx in 0.0..200.0f64,
        dy in 0.0..200.0f64,
        w in 1u32..150,
        h in 1u32..150,
    ) {
        let b = BoundingBox::new(x0, y0, x0 + dx, y0 + dy).unwrap();
        let once = b.clamp(w, h);
        prop_assert_eq!(once, once.clamp(w, h));
        prop_assert!(once.area() <= b.area() + 1e-12);
        prop_assert!(once.x_min >= 0.0 && once.y_min >= 0.0);
        prop_assert!(once.x_max <= w as f64 && once.y_max <= h as f64);
    }

    #[test]
    fn global_placement_preserves_bits_fully_inside(
        ox in 0i32..20,
        oy in 0i32..20,
        mw in 1u32..12,
        mh in 1u32..12,
        pattern in prop::collection::vec(any::<bool>(), 1..144),
    ) {
        let bits: Vec<bool> = (0..(mw * mh) as usize)
            .map(|i| pattern[i % pattern.len()])
            .collect();
        let mask = MaskRaster::new(ox, oy, mw, mh, bits).unwrap();
        let (fw, fh) = (ox as u32 + mw + 20, oy as u32 + mh + 20);
        let global = mask_to_global(&mask, fw, fh).unwrap();
        prop_assert_eq!(global.set_count(), mask.set_count());
    }
}
