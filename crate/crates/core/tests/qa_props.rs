use std::collections::BTreeSet;

use gustqa_core::fixtures;
use gustqa_core::geo::{LocationKind, LocationRecord, MatchedBy, SpatialIndex};
use gustqa_core::grid::{synth_grid, SyntheticSpec};
use gustqa_core::qa::{
    generate_dataset, read_jsonl, split_dataset, write_jsonl, GenConfig, NamedPoint, NamedPoints, QAMeta, QARecord,
    QType, Split,
};
use gustqa_core::render::{render, BeaufortTable, ColorGroup, RenderConfig};
use gustqa_core::spot::{run_spot, PixelFrame, SpotConfig};
use gustqa_core::GeoPoint;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn named_corpus(n: u64) -> Vec<NamedPoints> {
    let land = SpatialIndex::build(fixtures::land(), 5.0);
    let ocean = SpatialIndex::build(fixtures::ocean(), 5.0);
    let table = BeaufortTable::default();
    let rc = RenderConfig { width: 360, height: 180, ..Default::default() };
    (0..n)
        .map(|seed| {
            let grid = synth_grid(&SyntheticSpec::random_storms(seed, 45, 90), seed).unwrap();
            let img = render(&grid, &rc, &table);
            let res = run_spot(
                &img,
                &format!("images/img{seed:03}.png"),
                &ColorGroup::ALL,
                &SpotConfig::default(),
                &table,
                &PixelFrame::globe(360, 180),
            )
            .unwrap();
            NamedPoints::from_spot(&res, &land, &ocean, 1.0)
        })
        .collect()
}

#[test]
fn verification_answers_agree_with_red_sets() {
    let corpus = named_corpus(20);
    let (records, stats) = generate_dataset(&corpus, &fixtures::gazetteer(), &GenConfig::default()).unwrap();
    assert_eq!(stats.images, 20);
    let mut checked = 0;
    for np in &corpus {
        let red = np.names(ColorGroup::Red, None);
        for r in records.iter().filter(|r| r.image == np.image && r.qtype == QType::Verification) {
            let loc = r.meta.location.as_ref().unwrap();
            match r.answer.as_str() {
                "True" => assert!(red.contains(loc), "{loc} not red in {}", np.image),
                "False" => assert!(!red.contains(loc), "{loc} is red in {}", np.image),
                other => panic!("unexpected answer {other}"),
            }
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn geo_answers_land_on_the_stated_color() {
    let corpus = named_corpus(6);
    let (records, _) = generate_dataset(&corpus, &fixtures::gazetteer(), &GenConfig::default()).unwrap();
    let frame = PixelFrame::globe(360, 180);
    let table = BeaufortTable::default();
    let rc = RenderConfig { width: 360, height: 180, ..Default::default() };
    for seed in 0..6u64 {
        let img = render(&synth_grid(&SyntheticSpec::random_storms(seed, 45, 90), seed).unwrap(), &rc, &table);
        let image = format!("images/img{seed:03}.png");
        for r in records.iter().filter(|r| r.image == image && r.qtype == QType::GeoIndexing) {
            let coord = r.meta.coordinate.unwrap();
            let (x, y) = frame.geo_to_pixel(coord).unwrap();
            let group = table.band_of_rgb(img.get(x, y)).unwrap().group;
            assert_eq!(Some(group), r.meta.color);
        }
    }
}

#[test]
fn full_generation_is_deterministic_and_sized() {
    let corpus = named_corpus(5);
    let cfg = GenConfig { seed: 17, ..Default::default() };
    let (a, sa) = generate_dataset(&corpus, &fixtures::gazetteer(), &cfg).unwrap();
    let (b, _) = generate_dataset(&corpus, &fixtures::gazetteer(), &cfg).unwrap();
    assert_eq!(a, b);
    if sa.warnings.is_empty() {
        assert_eq!(a.len(), 5 * 29);
    }
    let splits: BTreeSet<(String, Split)> = a.iter().map(|r| (r.image.clone(), r.split)).collect();
    assert_eq!(splits.len(), 5, "one split per image");
}

#[test]
fn split_sizes_at_corpus_scale() {
    let ids: Vec<String> = (0..8760).map(|i| format!("era5-{i:05}")).collect();
    let s = split_dataset(&ids, [7, 1, 2], 0);
    let n = |x| s.values().filter(|v| **v == x).count() * 29;
    assert_eq!((n(Split::Train), n(Split::Val), n(Split::Test)), (177_828, 25_404, 50_808));
}

fn arb_record() -> impl Strategy<Value = QARecord> {
    (
        "[a-z0-9-]{1,20}",
        "\\PC{0,40}",
        "\\PC{0,80}",
        prop::sample::select(QType::ALL.to_vec()),
        prop::sample::select(vec![Split::Train, Split::Val, Split::Test]),
        proptest::option::of((-90.0f64..90.0, -180.0f64..180.0)),
        proptest::option::of(prop::sample::select(ColorGroup::ALL.to_vec())),
    )
        .prop_map(|(id, question, answer, qtype, split, coord, color)| QARecord {
            image: format!("images/{id}.png"),
            id,
            split,
            qtype,
            question,
            answer,
            meta: QAMeta {
                color,
                coordinate: coord.map(|(a, b)| GeoPoint::new(a, b)),
                location: Some("Tasman Sea".into()),
                kind: Some(LocationKind::Ocean),
                variant: None,
            },
        })
}

proptest! {
    #[test]
    fn jsonl_round_trip(records in proptest::collection::vec(arb_record(), 0..40)) {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &records).unwrap();
        prop_assert_eq!(buf.iter().filter(|b| **b == b'\n').count(), records.len());
        let back: Vec<QARecord> = read_jsonl(buf.as_slice()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn splits_partition_images(n in 1usize..300, seed in 0u64..50) {
        let ids: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
        let s = split_dataset(&ids, [7, 1, 2], seed);
        prop_assert_eq!(s.len(), n);
        let val = s.values().filter(|v| **v == Split::Val).count();
        let test = s.values().filter(|v| **v == Split::Test).count();
        prop_assert_eq!(val, n / 10);
        prop_assert_eq!(test, n * 2 / 10);
    }
}

#[test]
fn jsonl_round_trip_thousand() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let records: Vec<QARecord> = (0..1000).map(|_| arb_record().new_tree(&mut runner).unwrap().current()).collect();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &records).unwrap();
    let back: Vec<QARecord> = read_jsonl(buf.as_slice()).unwrap();
    assert_eq!(back, records);
}

#[test]
fn named_points_json_round_trip() {
    let np = NamedPoints {
        image: "a.png".into(),
        points: vec![NamedPoint {
            color: ColorGroup::Red,
            point: GeoPoint::new(-40.5, 160.25),
            location: LocationRecord {
                name: "Tasman Sea".into(),
                kind: LocationKind::Ocean,
                admin_parent: Some("Pacific Ocean".into()),
                matched_by: MatchedBy::Containment,
            },
        }],
        unknown_dropped: 2,
    };
    assert_eq!(NamedPoints::from_json(&np.to_json()).unwrap(), np);
}
