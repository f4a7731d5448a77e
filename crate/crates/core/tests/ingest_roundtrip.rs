use proptest::prelude::*;

use trackdur::datamodel::{Box3D, Detection, Frame, Sequence};
use trackdur::ingest::{emit_tracks, parse_tracks, ParseOptions};
use trackdur::synthgen::{gen_scene, SceneSpec};

// Values on the 1e-6 grid survive emit/parse exactly.
fn micro(lo: i64, hi: i64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|k| k as f64 / 1e6)
}

fn detection() -> impl Strategy<Value = Detection> {
    (
        (micro(-50_000_000, 50_000_000), micro(-50_000_000, 50_000_000), micro(0, 3_000_000)),
        (micro(1, 5_000_000), micro(1, 5_000_000), micro(1, 5_000_000)),
        micro(-3_140_000, 3_140_000),
        0u32..3,
        micro(0, 1_000_001),
        prop::option::of((micro(-9_000_000, 9_000_000), micro(-9_000_000, 9_000_000))),
    )
        .prop_map(|((x, y, z), (w, l, h), yaw, class, conf, vel)| {
            let mut d = Detection::new(Box3D::new([x, y, z], w, l, h, yaw).unwrap(), class, conf, None);
            d.velocity = vel.map(|(vx, vy)| [vx, vy]);
            d
        })
}

fn sequence() -> impl Strategy<Value = Sequence> {
    prop::collection::btree_map(0u64..200, prop::collection::vec((1u64..40, detection()), 1..6), 0..12).prop_map(
        |frames| {
            let frames = frames
                .into_iter()
                .filter_map(|(index, dets)| {
                    let mut dets: Vec<Detection> = dets
                        .into_iter()
                        .map(|(id, mut d)| {
                            d.track_id = Some(id);
                            d
                        })
                        .collect();
                    dets.sort_by_key(|d| (d.class_id, d.track_id));
                    dets.dedup_by_key(|d| (d.class_id, d.track_id));
                    (!dets.is_empty()).then(|| Frame::new(index, dets))
                })
                .collect();
            Sequence::new("rt", 30.0).with_frames(frames)
        },
    )
}

fn emit(seq: &Sequence) -> Vec<u8> {
    let mut buf = Vec::new();
    emit_tracks(seq, &mut buf).unwrap();
    buf
}

proptest! {
    #[test]
    fn emit_then_parse_is_identity(seq in sequence()) {
        let text = emit(&seq);
        let back = parse_tracks(text.as_slice(), &ParseOptions::tracks(30.0).scene("rt")).unwrap();
        prop_assert_eq!(&back, &seq);
        prop_assert_eq!(emit(&back), text);
    }
}

#[test]
fn long_sequence_round_trips() {
    let gt = gen_scene(&SceneSpec {
        n_objects: 6,
        duration_s: 300.0,
        fps: 30.0,
        seed: 11,
        ..SceneSpec::default()
    })
    .unwrap();
    assert_eq!(gt.frames.len(), 9000);
    let text = emit(&gt);
    let back = parse_tracks(text.as_slice(), &ParseOptions::tracks(30.0)).unwrap();
    assert_eq!(back.frames.len(), 9000);
    assert_eq!(back.detection_count(), gt.detection_count());
    for (a, b) in back.frames.iter().zip(&gt.frames) {
        assert_eq!(a.index, b.index);
        for (p, q) in a.detections.iter().zip(&b.detections) {
            assert_eq!(p.track_id, q.track_id);
            for (u, v) in [(p.bbox.x, q.bbox.x), (p.bbox.y, q.bbox.y), (p.bbox.yaw, q.bbox.yaw)] {
                assert!((u - v).abs() <= 5e-7, "{u} vs {v}");
            }
        }
    }
    assert_eq!(emit(&back), text);
}
