use eatradar::dataset_io::{
    frame_labels_to_segments, intervals_to_frame_labels, make_folds, read_annotations, read_cube, write_annotations,
    write_cube, Class, CubeHeader, CubeKind, CubeReader, Interval, IntervalTrack, Payload,
};
use num_complex::Complex32;
use proptest::prelude::*;
use std::collections::HashSet;

fn dims_for(kind: CubeKind) -> BoxedStrategy<Vec<u32>> {
    match kind {
        CubeKind::RawComplex => proptest::collection::vec(1u32..5, 4).boxed(),
        CubeKind::RdReal => proptest::collection::vec(1u32..7, 3).boxed(),
        _ => proptest::collection::vec(1u32..9, 2).boxed(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cubes_round_trip(
        (kind, dims) in prop_oneof![Just(CubeKind::RawComplex), Just(CubeKind::RdReal), Just(CubeKind::DtReal)]
            .prop_flat_map(|k| (Just(k), dims_for(k))),
        fps in 1f32..100.0,
        seed in any::<u32>(),
        chunk in 1usize..4,
    ) {
        let header = CubeHeader::new(kind, dims.clone(), fps);
        let n = header.element_count();
        let value = |i: usize| ((i as u32).wrapping_mul(2654435761).wrapping_add(seed) as f32) / 1e6 - 2000.0;
        let payload = match kind {
            CubeKind::RawComplex => Payload::Complex((0..n).map(|i| Complex32::new(value(i), -value(i + n))).collect()),
            _ => Payload::Real((0..n).map(value).collect()),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.eatr");
        write_cube(&path, &header, &payload).unwrap();
        prop_assert_eq!(std::fs::metadata(&path).unwrap().len(), 32 + header.payload_bytes());
        let (h, p) = read_cube(&path).unwrap();
        prop_assert_eq!(&h, &header);
        prop_assert_eq!(&p, &payload);

        // streaming in chunks yields the same elements
        let mut r = CubeReader::open(&path).unwrap();
        let mut count = 0;
        while r.frames_remaining() > 0 {
            count += r.read_frames(chunk).unwrap().len();
        }
        prop_assert_eq!(count, n);
    }

    #[test]
    fn labels_track_interval_edges(
        raw in proptest::collection::vec((0.05f64..4.0, 0.5f64..6.0, any::<bool>()), 1..8),
    ) {
        let fps = 25.0f32;
        let mut t = 0.3;
        let mut entries = Vec::new();
        for (gap, len, drink) in raw {
            let start = t + gap;
            let class = if drink { Class::Drinking } else { Class::Eating };
            entries.push(Interval::new(start, start + len, class));
            t = start + len;
        }
        let n = (t * fps as f64).ceil() as u32 + 5;
        let track = IntervalTrack::new(entries.clone()).unwrap();
        let labels = intervals_to_frame_labels(&track, n, fps);
        for iv in &entries {
            let (a, b) = (iv.start * fps as f64, iv.end * fps as f64);
            let inside = (a.round() as usize + 1)..(b.round() as usize).saturating_sub(1);
            for f in inside {
                prop_assert_eq!(labels.labels[f], iv.class);
            }
        }
        // adjacent same-class intervals may merge; every boundary stays within a frame
        for s in frame_labels_to_segments(&labels).segments {
            let near = |x: f64, frame: u32| (x * fps as f64 - frame as f64).abs() <= 1.0;
            prop_assert!(entries.iter().any(|iv| near(iv.start, s.start)));
            prop_assert!(entries.iter().any(|iv| near(iv.end, s.end)));
        }
    }

    #[test]
    fn folds_partition_meals(groups in 1usize..9, per in 1usize..5, val in 0u32..3, seed in any::<u64>()) {
        let ids: Vec<String> = (0..groups * per).map(|i| format!("m{i}")).collect();
        prop_assume!((val as usize) <= ids.len() - per);
        let plan = make_folds(&ids, groups as u32, val, seed).unwrap();
        plan.validate().unwrap();
        let tested: HashSet<&String> = plan.folds.iter().flat_map(|f| &f.test).collect();
        prop_assert_eq!(tested.len(), ids.len());
        for f in &plan.folds {
            prop_assert_eq!(f.test.len() + f.val.len() + f.train.len(), ids.len());
        }
    }
}

#[test]
fn annotation_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let track = IntervalTrack::new(vec![
        Interval::new(4.5, 9.25, Class::Drinking),
        Interval::new(0.1, 2.0, Class::Eating),
    ])
    .unwrap();
    write_annotations(&path, &track).unwrap();
    assert_eq!(read_annotations(&path).unwrap(), track);
    std::fs::write(&path, "start_s,end_s,label\n1,2,snacking\n").unwrap();
    assert!(read_annotations(&path).is_err());
}

#[test]
fn corrupt_cubes_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.eatr");
    let header = CubeHeader::new(CubeKind::RdReal, vec![2, 2, 2], 25.0);
    write_cube(&path, &header, &Payload::Real(vec![0.0; 8])).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
    assert!(read_cube(&path).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    std::fs::write(&path, &bad).unwrap();
    assert!(read_cube(&path).is_err());
    assert!(write_cube(&path, &header, &Payload::Real(vec![0.0; 7])).is_err());
}
