mod oracles;

use std::collections::BTreeSet;

use oracles::{mask_from_rows, mask_rows};
use vt_core::fixture::SIGN_WORDS;
use vt_core::render::FontBook;
use vt_core::synth::{check_sample, corpus_sample, generate_corpus, skeletonize, CorpusSpec, ManifestRecord};
use vt_core::{BinaryMask, SceneImage};

fn subset(a: &BinaryMask, b: &BinaryMask) -> bool {
    (0..a.height()).all(|y| (0..a.width()).all(|x| !a.get(x, y) || b.get(x, y)))
}

#[test]
fn rectangle_thins_to_its_medial_line() {
    let rect = BinaryMask::from_fn(20, 5, |_, _| true);
    let mut expected = vec!["....................".to_string(); 5];
    expected[2] = "..###############...".into();
    assert_eq!(mask_rows(&skeletonize(&rect)), expected);
    assert_eq!(skeletonize(&rect), oracles::zhang_suen(&rect));
}

/// Shapes on which plain thinning keeps every component, so the guarded
/// version must agree with it exactly.
fn fixtures() -> Vec<BinaryMask> {
    let mut v = vec![
        BinaryMask::new(6, 6),
        mask_from_rows(&["........", ".######.", "........"]),
        mask_from_rows(&["#.....", ".#....", "..#...", "...#..", "....#."]),
        BinaryMask::from_fn(5, 20, |_, _| true),
        BinaryMask::from_fn(7, 7, |_, _| true),
        BinaryMask::from_fn(9, 3, |_, _| true),
        mask_from_rows(&[
            "...........",
            ".###.......",
            ".###.......",
            ".###.......",
            ".###.......",
            ".########..",
            ".########..",
            ".########..",
            "...........",
        ]),
        mask_from_rows(&[
            "...........",
            "....###....",
            "....###....",
            "....###....",
            ".#########.",
            ".#########.",
            ".#########.",
            "....###....",
            "....###....",
            "....###....",
            "...........",
        ]),
    ];
    // square ring three pixels wide
    v.push(BinaryMask::from_fn(15, 15, |x, y| {
        let inside = (1..14).contains(&x) && (1..14).contains(&y);
        let hole = (4..11).contains(&x) && (4..11).contains(&y);
        inside && !hole
    }));
    v
}

#[test]
fn skeleton_fixtures_match_reference_thinning() {
    for m in fixtures() {
        let reference = oracles::zhang_suen(&m);
        assert_eq!(
            reference.components().1,
            m.components().1,
            "fixture must be safe for plain thinning"
        );
        let got = skeletonize(&m);
        assert_eq!(mask_rows(&got), mask_rows(&reference));
    }
    let stroke = mask_from_rows(&["........", ".######.", "........"]);
    assert_eq!(skeletonize(&stroke), stroke);
    assert!(skeletonize(&BinaryMask::new(6, 6)).is_empty());
}

#[test]
fn thick_two_pixel_strokes_keep_their_components() {
    let bar = BinaryMask::from_fn(12, 4, |x, y| (1..11).contains(&x) && (1..3).contains(&y));
    let sk = skeletonize(&bar);
    assert!(!sk.is_empty());
    assert!(subset(&sk, &bar));
    assert_eq!(sk.components().1, 1);
}

pub fn spec(count: usize, seed: u64) -> CorpusSpec {
    CorpusSpec {
        count,
        vocab_src: SIGN_WORDS.iter().map(|p| p.0.to_string()).collect(),
        vocab_tgt: SIGN_WORDS.iter().map(|p| p.1.to_string()).collect(),
        fonts: FontBook::default(),
        backgrounds: vec![SceneImage::from_fn("photo", 64, 48, |x, y| {
            [(x * 4) as u8, (y * 5) as u8, 90]
        })],
        seed,
        translation_ratio: 0.5,
    }
}

#[test]
fn samples_satisfy_invariants() {
    let spec = spec(200, 11);
    let mut plain_agrees = 0;
    for i in 0..spec.count {
        let (s, _) = corpus_sample(&spec, i).unwrap();
        check_sample(&s).unwrap_or_else(|e| panic!("sample {i}: {e}"));
        assert_eq!(s.i_s.dims(), s.t_t.dims());
        assert!(subset(&s.t_sk, &s.mask_t));
        let reference = oracles::zhang_suen(&s.mask_t);
        if reference.components().1 == s.mask_t.components().1 {
            assert_eq!(s.t_sk, reference, "sample {i}");
            plain_agrees += 1;
        }
    }
    assert!(plain_agrees > 0);
}

#[test]
fn corpus_files_recount() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec(120, 4);
    let records = generate_corpus(&spec, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    let lines: Vec<ManifestRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines, records);
    assert_eq!(lines.len(), 120);
    let mut kinds = BTreeSet::new();
    for r in &lines {
        kinds.insert(
            serde_json::to_value(&r.background).unwrap()["kind"]
                .as_str()
                .unwrap()
                .to_string(),
        );
        assert_eq!(r.files.len(), 8);
        for f in r.files.values() {
            let img = SceneImage::load_png(dir.path().join(f)).unwrap();
            assert_eq!(img.dims(), (r.width, r.height));
        }
        // regenerating from the recorded seed and style gives the same pair
        let (s, _) = corpus_sample(&spec, r.index).unwrap();
        assert_eq!((s.seed, &s.style), (r.seed, &r.style));
    }
    assert_eq!(kinds.len(), 3, "{kinds:?}");

    let again = tempfile::tempdir().unwrap();
    generate_corpus(&spec, again.path()).unwrap();
    assert_eq!(
        text,
        std::fs::read_to_string(again.path().join("manifest.jsonl")).unwrap()
    );
}

#[test]
fn zero_count_writes_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert!(generate_corpus(&spec(0, 1), dir.path()).unwrap().is_empty());
    assert_eq!(std::fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap(), "");
}
