//! One line per acceptance criterion. Runs without the libtest harness so the
//! report is always printed; exits non-zero when any criterion fails.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use vt_core::compositor::{composite, otsu_threshold};
use vt_core::evaluator::{aggregate, bleu, vt_score, EvalError, ImageScore, MethodInfo};
use vt_core::fixture::SIGN_WORDS;
use vt_core::layout::spline::NaturalSpline;
use vt_core::layout::{group_layout, LayoutConfig, LayoutPlan};
use vt_core::pipeline::RunManifest;
use vt_core::render::FontBook;
use vt_core::synth::{check_sample, corpus_sample, skeletonize, CorpusSpec};
use vt_core::{BBox, BinaryMask, SceneImage, WordObservation};
use vt_rating::{Criterion, RatingService, StudyDef, Submission};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn report(name: &str, check: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match &outcome {
        Ok(detail) => println!("PASS  {name}: {detail}"),
        Err(detail) => println!("FAIL  {name}: {detail}"),
    }
    outcome.is_ok()
}

fn vt() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vt"));
    c.env("VT_LOG", "error");
    c
}

fn vt_ok(args: &[&str]) -> Result<String, String> {
    let o = vt().args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!(
            "vt {} exited {:?}: {}",
            args[0],
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&o.stdout).into_owned())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tree(dir: &Path, skip: &[&str]) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, skip: &[&str], out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, skip, out);
            } else if !skip.iter().any(|n| p.file_name().unwrap() == *n) {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, skip, &mut out);
    out
}

fn otsu_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let hists: Vec<[u64; 256]> = (0..1000)
        .map(|_| {
            let mut h = [0u64; 256];
            if rng.gen_bool(0.5) {
                h.iter_mut().for_each(|c| *c = rng.gen_range(0..1000));
            } else {
                for _ in 0..rng.gen_range(2..8) {
                    h[rng.gen_range(0..256)] += rng.gen_range(1..100_000);
                }
            }
            h
        })
        .collect();
    let start = Instant::now();
    let got: Vec<Option<u8>> = hists.iter().map(|h| otsu_threshold(h).ok()).collect();
    let secs = start.elapsed().as_secs_f64();
    let agree = hists.iter().zip(&got).filter(|(h, t)| oracles::otsu(h) == **t).count();
    ensure!(agree == 1000, "{agree}/1000 agree");
    ensure!(secs < 1.0, "{secs:.3}s");
    Ok(format!("1000/1000 agree, {:.1} ms", secs * 1e3))
}

fn spline_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let sets: Vec<(Vec<f64>, Vec<f64>)> = (0..200)
        .map(|_| {
            let n = rng.gen_range(3..=10);
            let mut x = rng.gen_range(-500.0..500.0);
            let knots = (0..n)
                .map(|_| {
                    x += rng.gen_range(0.5..120.0);
                    x
                })
                .collect();
            (knots, (0..n).map(|_| rng.gen_range(-300.0..300.0)).collect())
        })
        .collect();
    let start = Instant::now();
    let (mut worst_knot, mut worst_end, mut worst_oracle) = (0f64, 0f64, 0f64);
    for (x, y) in &sets {
        let sp = NaturalSpline::new(x, y).map_err(|e| e.to_string())?;
        for (k, v) in x.iter().zip(y) {
            worst_knot = worst_knot.max((sp.eval(*k) - v).abs());
        }
        let n = x.len();
        worst_end = worst_end
            .max(sp.second_derivative(x[0]).abs())
            .max(sp.second_derivative(x[n - 1]).abs());
        let m = oracles::spline_moments(x, y);
        for (a, b) in sp.second_derivatives().iter().zip(&m) {
            worst_oracle = worst_oracle.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(worst_knot < 1e-9, "knot residual {worst_knot:e}");
    ensure!(worst_end < 1e-6, "end curvature {worst_end:e}");
    ensure!(
        worst_oracle < 1e-6,
        "moments differ from dense solve by {worst_oracle:e}"
    );
    ensure!(secs < 1.0, "{secs:.3}s");
    Ok(format!(
        "200 sets, max knot residual {worst_knot:.1e}, max end |S''| {worst_end:.1e}, {:.1} ms",
        secs * 1e3
    ))
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn bleu_oracle() -> Outcome {
    let start = Instant::now();
    let cases = [
        (bleu(&toks("a b c d"), &[toks("a b x d")], 1), 75.0),
        (bleu(&toks("a b"), &[toks("a b c d")], 1), 36.79),
        (bleu(&toks("x y z"), &[toks("x y z")], 1), 100.0),
    ];
    for (got, want) in cases {
        let got = got.map_err(|e| e.to_string())?;
        ensure!((got - want).abs() < 0.01, "hand case {got} != {want}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0f64;
    let rand_toks = |rng: &mut ChaCha8Rng, vocab: usize| -> Vec<String> {
        (0..rng.gen_range(1..12))
            .map(|_| format!("t{}", rng.gen_range(0..vocab)))
            .collect()
    };
    for _ in 0..500 {
        let vocab = rng.gen_range(2..8);
        let cand = rand_toks(&mut rng, vocab);
        let refs: Vec<Vec<String>> = (0..rng.gen_range(1..=3)).map(|_| rand_toks(&mut rng, vocab)).collect();
        for n in [1, 2] {
            match bleu(&cand, &refs, n) {
                Ok(b) => worst = worst.max((b - oracles::bleu(&cand, &refs, n)).abs()),
                Err(EvalError::OrderUndefined(2)) => ensure!(refs.iter().all(|r| r.len() < 2), "spurious undefined"),
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(worst < 1e-9, "max deviation {worst:e}");
    ensure!(secs < 5.0, "{secs:.3}s");
    Ok(format!(
        "3 hand cases, 500 random pairs, max deviation {worst:.1e}, {:.1} ms",
        secs * 1e3
    ))
}

fn vt_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..100 {
        let x = rng.gen_range(0.0..100.0);
        ensure!((vt_score(x, x).unwrap() - x).abs() < 1e-9, "vt({x},{x}) != {x}");
    }
    for _ in 0..20 {
        let p = rng.gen_range(0.0..100.0);
        ensure!(vt_score(0.0, p).unwrap() == 0.0, "vt(0,{p}) != 0");
    }
    let v = vt_score(20.54, 53.79).unwrap();
    ensure!((v - 29.73).abs() < 0.01, "vt(20.54, 53.79) = {v}");
    let scores = [
        ImageScore::new("a", 10.0, Some(5.0), 90.0).unwrap(),
        ImageScore::new("b", 80.0, None, 20.0).unwrap(),
        ImageScore::new("c", 40.0, Some(30.0), 60.0).unwrap(),
    ];
    let row = aggregate(MethodInfo::default(), &scores).map_err(|e| e.to_string())?;
    let mean = [(5.0, 90.0), (80.0, 20.0), (30.0, 60.0)]
        .iter()
        .map(|(t, p)| 2.0 * t * p / (t + p))
        .sum::<f64>()
        / 3.0;
    ensure!(
        (row.vt - mean).abs() < 1e-9,
        "corpus vt {} != mean of image scores {mean}",
        row.vt
    );
    Ok(format!(
        "fixed points ok, vt(20.54, 53.79) = {v:.2}, corpus vt = per-image mean {mean:.4}"
    ))
}

fn composition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for i in 0..100 {
        let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
        let bg = SceneImage::from_fn("bg", w, h, |_, _| rng.gen());
        let fg = SceneImage::from_fn("fg", w, h, |_, _| rng.gen());
        let density: f64 = rng.gen();
        let mask = BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(density));
        let out = composite(&bg, &fg, &mask, false).map_err(|e| e.to_string())?;
        ensure!(
            out.pixels() == oracles::composite(&bg, &fg, &mask).pixels(),
            "triple {i} differs from oracle"
        );
        for y in 0..h {
            for x in 0..w {
                ensure!(
                    mask.get(x, y) || out.get(x, y) == bg.get(x, y),
                    "triple {i}: ({x},{y}) changed outside mask"
                );
            }
        }
        ensure!(
            composite(&out, &fg, &mask, false).unwrap() == out,
            "triple {i} not idempotent"
        );
    }
    Ok("100 triples bit-exact, unmasked pixels preserved, idempotent".into())
}

fn word_name(i: usize) -> String {
    format!(
        "w{}{}",
        (b'a' + (i / 26) as u8) as char,
        (b'a' + (i % 26) as u8) as char
    )
}

fn layout_grouping() -> Outcome {
    let words = |boxes: &[BBox]| -> Vec<WordObservation> {
        boxes
            .iter()
            .enumerate()
            .map(|(i, b)| WordObservation::new(*b, &word_name(i), 1.0))
            .collect()
    };
    let index: BTreeMap<String, usize> = (0..400).map(|i| (word_name(i), i)).collect();
    let partition = |plan: &LayoutPlan| -> oracles::Partition {
        plan.paragraphs
            .iter()
            .map(|p| {
                p.lines
                    .iter()
                    .map(|l| l.words.iter().map(|w| index[&w.text]).collect::<BTreeSet<_>>())
                    .collect()
            })
            .collect()
    };
    let cfg = LayoutConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut multi = 0;
    for set in 0..300 {
        let mut boxes = Vec::new();
        let mut y = rng.gen_range(0..40);
        for _ in 0..rng.gen_range(1..6) {
            let h = rng.gen_range(10..30u32);
            let mut x = rng.gen_range(0..80);
            for _ in 0..rng.gen_range(1..5) {
                let w = rng.gen_range(10..80u32);
                let jitter = rng.gen_range(-(h as i32) / 2..=h as i32 / 2);
                let hh = (h as i32 + rng.gen_range(-4..=4)).max(4) as u32;
                boxes.push(BBox::new(x, y + jitter, w, hh));
                x += w as i32 + rng.gen_range(0..(3 * h as i32));
            }
            y += h as i32 + rng.gen_range(0..(2 * h as i32));
        }
        let plan = group_layout(&words(&boxes), &cfg).map_err(|e| e.to_string())?;
        let got = partition(&plan);
        ensure!(got == oracles::group(&boxes), "set {set} differs from closure oracle");
        let flat: Vec<usize> = got.iter().flatten().flatten().copied().collect();
        ensure!(
            flat.len() == boxes.len() && flat.iter().copied().collect::<BTreeSet<_>>().len() == boxes.len(),
            "set {set} is not a partition"
        );
        multi += plan.paragraphs.iter().filter(|p| p.lines.len() > 1).count();
        let mut shuffled = words(&boxes);
        shuffled.shuffle(&mut rng);
        ensure!(
            group_layout(&shuffled, &cfg).unwrap() == plan,
            "set {set} depends on input order"
        );
        let (dx, dy) = (rng.gen_range(-50..50), rng.gen_range(-50..50));
        let moved: Vec<BBox> = boxes.iter().map(|b| BBox::new(b.x + dx, b.y + dy, b.w, b.h)).collect();
        ensure!(
            partition(&group_layout(&words(&moved), &cfg).unwrap()) == got,
            "set {set} not translation invariant"
        );
    }
    Ok(format!(
        "300 sets match closure oracle, {multi} multi-line paragraphs, order and translation invariant"
    ))
}

fn closed_loop() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fx = dir.path().join("fx");
    vt_ok(&["fixtures", "--out", s(&fx), "--count", "20", "--seed", "7"])?;
    let out = dir.path().join("run");
    let start = Instant::now();
    vt_ok(&[
        "translate",
        "--config",
        s(&fx.join("config.json")),
        "--input-manifest",
        s(&fx.join("inputs.jsonl")),
        "--out",
        s(&out),
    ])?;
    let secs = start.elapsed().as_secs_f64();
    let report = dir.path().join("report.json");
    vt_ok(&[
        "eval",
        "--outputs",
        s(&out),
        "--refs",
        s(&fx.join("refs.jsonl")),
        "--report",
        s(&report),
        "--config",
        s(&fx.join("config.json")),
    ])?;
    let r: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    let bleu1 = r["rows"][0]["bleu1"].as_f64().ok_or("report has no bleu1")?;
    ensure!((bleu1 - 100.0).abs() <= 0.1, "corpus BLEU-1 {bleu1}");

    let manifest: RunManifest =
        serde_json::from_slice(&std::fs::read(out.join("run_manifest.json")).unwrap()).map_err(|e| e.to_string())?;
    ensure!(manifest.entries.len() == 20, "{} entries", manifest.entries.len());
    let mut checked = 0u64;
    for e in &manifest.entries {
        let input = SceneImage::load_png(fx.join(&e.input_path)).map_err(|e| e.to_string())?;
        let output = SceneImage::load_png(out.join(e.output_path.as_ref().ok_or("missing output")?))
            .map_err(|e| e.to_string())?;
        ensure!(input.dims() == output.dims(), "{}: dimensions changed", e.image_id);
        let regions: Vec<BBox> = e
            .words
            .iter()
            .map(|w| w.bbox)
            .chain(e.placements.iter().map(|p| p.position))
            .collect();
        for y in 0..input.height() {
            for x in 0..input.width() {
                if !regions.iter().any(|b| b.contains(x as i32, y as i32)) {
                    ensure!(
                        input.get(x, y) == output.get(x, y),
                        "{}: pixel ({x},{y}) changed",
                        e.image_id
                    );
                    checked += 1;
                }
            }
        }
    }
    ensure!(secs < 10.0, "batch took {secs:.2}s");
    Ok(format!(
        "BLEU-1 {bleu1:.2}, {checked} untouched pixels identical, batch {secs:.2}s"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fx = dir.path().join("fx");
    vt_ok(&["fixtures", "--out", s(&fx), "--count", "20", "--seed", "11"])?;
    let mut runs = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "4")] {
        let out = dir.path().join(name);
        vt_ok(&[
            "translate",
            "--config",
            s(&fx.join("config.json")),
            "--input-manifest",
            s(&fx.join("inputs.jsonl")),
            "--out",
            s(&out),
            "--seed",
            "5",
            "--workers",
            workers,
        ])?;
        runs.push(tree(&out, &["timings.jsonl"]));
    }
    ensure!(runs[0] == runs[1], "translate runs differ");
    let translated = runs[0].len();

    let src = dir.path().join("src.txt");
    let tgt = dir.path().join("tgt.txt");
    std::fs::write(
        &src,
        SIGN_WORDS.iter().map(|p| format!("{}\n", p.0)).collect::<String>(),
    )
    .unwrap();
    std::fs::write(
        &tgt,
        SIGN_WORDS.iter().map(|p| format!("{}\n", p.1)).collect::<String>(),
    )
    .unwrap();
    let mut corpora = Vec::new();
    let mut secs = Vec::new();
    for name in ["s1", "s2"] {
        let out = dir.path().join(name);
        let start = Instant::now();
        vt_ok(&[
            "synth",
            "--count",
            "1000",
            "--vocab-src",
            s(&src),
            "--vocab-tgt",
            s(&tgt),
            "--out",
            s(&out),
            "--seed",
            "42",
            "--translation-ratio",
            "0.5",
        ])?;
        secs.push(start.elapsed().as_secs_f64());
        corpora.push(tree(&out, &[]));
    }
    ensure!(corpora[0] == corpora[1], "synth runs differ");
    Ok(format!(
        "translate: {translated} files identical across runs; synth 1000: {} files identical ({:.1}s, {:.1}s)",
        corpora[0].len(),
        secs[0],
        secs[1]
    ))
}

/// The shapes on which plain thinning keeps every component.
fn skeleton_fixtures() -> Vec<BinaryMask> {
    use oracles::mask_from_rows;
    let mut v = vec![
        BinaryMask::new(6, 6),
        mask_from_rows(&["........", ".######.", "........"]),
        mask_from_rows(&["#.....", ".#....", "..#...", "...#..", "....#."]),
        BinaryMask::from_fn(5, 20, |_, _| true),
        BinaryMask::from_fn(20, 5, |_, _| true),
        BinaryMask::from_fn(7, 7, |_, _| true),
        BinaryMask::from_fn(9, 3, |_, _| true),
        BinaryMask::from_fn(11, 9, |x, y| {
            (1..4).contains(&x) && (1..8).contains(&y) || (1..9).contains(&x) && (5..8).contains(&y)
        }),
        BinaryMask::from_fn(11, 11, |x, y| {
            (4..7).contains(&x) && (1..10).contains(&y) || (1..10).contains(&x) && (4..7).contains(&y)
        }),
    ];
    v.push(BinaryMask::from_fn(15, 15, |x, y| {
        (1..14).contains(&x) && (1..14).contains(&y) && !((4..11).contains(&x) && (4..11).contains(&y))
    }));
    v
}

fn datagen() -> Outcome {
    let rect = BinaryMask::from_fn(20, 5, |_, _| true);
    let row = &oracles::mask_rows(&skeletonize(&rect))[2];
    ensure!(row == "..###############...", "20x5 rectangle thins to {row}");
    let fixtures = skeleton_fixtures();
    for (i, m) in fixtures.iter().enumerate() {
        ensure!(
            skeletonize(m) == oracles::zhang_suen(m),
            "fixture {i} differs from thinning oracle"
        );
    }
    let spec = CorpusSpec {
        count: 1000,
        vocab_src: SIGN_WORDS.iter().map(|p| p.0.to_string()).collect(),
        vocab_tgt: SIGN_WORDS.iter().map(|p| p.1.to_string()).collect(),
        fonts: FontBook::default(),
        backgrounds: vec![SceneImage::from_fn("photo", 64, 48, |x, y| {
            [(x * 4) as u8, (y * 5) as u8, 90]
        })],
        seed: 2024,
        translation_ratio: 0.5,
    };
    let start = Instant::now();
    let samples: Vec<_> = (0..spec.count).map(|i| corpus_sample(&spec, i).map(|p| p.0)).collect();
    let rate = spec.count as f64 / start.elapsed().as_secs_f64();
    for (i, s) in samples.iter().enumerate() {
        let s = s.as_ref().map_err(|e| format!("sample {i}: {e}"))?;
        check_sample(s).map_err(|e| format!("sample {i}: {e}"))?;
    }
    ensure!(rate >= 50.0, "{rate:.0} samples/s");
    Ok(format!(
        "1000/1000 samples consistent, {} skeleton fixtures match, {rate:.0} samples/s",
        fixtures.len()
    ))
}

fn rating_replay() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let methods: Vec<String> = (1..=7).map(|i| format!("B-{i}")).collect();
    let mut map = BTreeMap::new();
    std::fs::create_dir_all(dir.path().join("inputs")).unwrap();
    for m in &methods {
        let d = dir.path().join("runs").join(m);
        std::fs::create_dir_all(&d).unwrap();
        for i in 0..10 {
            std::fs::write(d.join(format!("img{i:02}.png")), m.as_bytes()).unwrap();
            std::fs::write(dir.path().join("inputs").join(format!("img{i:02}.png")), b"src").unwrap();
        }
        map.insert(m.clone(), PathBuf::from("runs").join(m));
    }
    let def = StudyDef {
        id: "acceptance".into(),
        seed: 17,
        log: None,
        inputs: Some("inputs".into()),
        methods: map,
        images: None,
        criteria: Criterion::ALL.to_vec(),
    };
    let study = vt_rating::Study::from_def(def, dir.path()).map_err(|e| e.to_string())?;
    let svc = RatingService::open(study.clone()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut sheet: Vec<(String, String, Criterion, f64)> = Vec::new();
    for r in ["r1", "r2", "r3", "r4"] {
        while let Some(t) = svc.next_task(r).map_err(|e| e.to_string())? {
            let t = t.clone();
            let score = rng.gen_range(1..=4i64);
            svc.submit(Submission {
                rater_id: r.into(),
                task_id: t.task_id.clone(),
                score,
                timestamp: Some(0),
            })
            .map_err(|e| e.to_string())?;
            sheet.push((r.into(), t.method_id, t.criterion, score as f64));
        }
    }
    let summary = svc.summarize().map_err(|e| e.to_string())?;
    let mut worst = 0f64;
    for m in &methods {
        for c in Criterion::ALL {
            let cells: Vec<f64> = sheet.iter().filter(|x| &x.1 == m && x.2 == c).map(|x| x.3).collect();
            let recount = cells.iter().sum::<f64>() / cells.len() as f64;
            let row = summary.row(m, c).ok_or(format!("missing row {m} {c}"))?;
            ensure!(
                row.count == cells.len(),
                "{m} {c}: count {} != {}",
                row.count,
                cells.len()
            );
            worst = worst.max((row.mean - recount).abs());
        }
    }
    ensure!(worst < 1e-12, "max deviation {worst:e}");
    drop(svc);
    let replayed = RatingService::open(study.clone())
        .map_err(|e| e.to_string())?
        .summarize()
        .unwrap();
    ensure!(replayed == summary, "replayed summary differs");
    {
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new().append(true).open(&study.log_path).unwrap();
        f.write_all(br#"{"rater_id":"r9","task_"#).unwrap();
    }
    let recovered = RatingService::open(study)
        .map_err(|e| e.to_string())?
        .summarize()
        .unwrap();
    ensure!(recovered == summary, "summary after torn write differs");
    Ok(format!(
        "{} ratings, max deviation from recount {worst:.1e}, replay and torn-write replay identical",
        sheet.len()
    ))
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("otsu exactness", otsu_exactness),
        ("spline correctness", spline_correctness),
        ("bleu oracle", bleu_oracle),
        ("vt score suite", vt_suite),
        ("composition guarantees", composition),
        ("layout grouping", layout_grouping),
        ("closed-loop end-to-end", closed_loop),
        ("determinism", determinism),
        ("datagen invariants", datagen),
        ("rating replay", rating_replay),
    ];
    let passed = checks.iter().filter(|(name, f)| report(name, f)).count();
    println!("acceptance: {passed}/{} criteria passed", checks.len());
    if passed != checks.len() {
        std::process::exit(1);
    }
}
