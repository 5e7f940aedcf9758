//! Synthetic annotated sign images with a bilingual lexicon and reference
//! translations, for closed-loop runs of the stub pipeline.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adapters::{AdapterBinding, AdapterBindings, Annotation};
use crate::layout::{allocate_lines, group_layout, LayoutConfig};
use crate::pipeline::{write_jsonl, InputRecord, PipelineConfig, PipelineError};
use crate::render::FontFace;
use crate::scene::{BBox, LangCode, SceneImage, WordObservation};

/// English sign words and their Hindi translations.
pub const SIGN_WORDS: [(&str, &str); 36] = [
    ("EXIT", "निकास"),
    ("GATE", "द्वार"),
    ("METRO", "मेट्रो"),
    ("STATION", "स्टेशन"),
    ("WATER", "पानी"),
    ("TICKET", "टिकट"),
    ("PLATFORM", "प्लेटफार्म"),
    ("ENTRY", "प्रवेश"),
    ("PARKING", "पार्किंग"),
    ("HOSPITAL", "अस्पताल"),
    ("SCHOOL", "विद्यालय"),
    ("MARKET", "बाजार"),
    ("ROAD", "सड़क"),
    ("NORTH", "उत्तर"),
    ("SOUTH", "दक्षिण"),
    ("EAST", "पूर्व"),
    ("WEST", "पश्चिम"),
    ("BANK", "बैंक"),
    ("POLICE", "पुलिस"),
    ("TOILET", "शौचालय"),
    ("LEFT", "बाएं"),
    ("RIGHT", "दाएं"),
    ("STOP", "रुको"),
    ("BUS", "बस"),
    ("TRAIN", "रेलगाड़ी"),
    ("OFFICE", "कार्यालय"),
    ("HOTEL", "होटल"),
    ("FOOD", "भोजन"),
    ("HELP", "सहायता"),
    ("CITY", "शहर"),
    ("PARK", "पार्क"),
    ("LIBRARY", "पुस्तकालय"),
    ("MUSEUM", "संग्रहालय"),
    ("BRIDGE", "पुल"),
    ("RIVER", "नदी"),
    ("TEMPLE", "मंदिर"),
];

pub fn lexicon_tsv() -> String {
    SIGN_WORDS.iter().map(|(s, t)| format!("{s}\t{t}\n")).collect()
}

/// One generated scene with its ground truth.
#[derive(Debug, Clone)]
pub struct FixtureScene {
    pub image: SceneImage,
    pub annotations: Vec<Annotation>,
    /// Translation in reading order.
    pub reference: String,
}

/// Reference translations of one image, as read by `vt eval --refs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefRecord {
    pub image_id: String,
    pub references: Vec<String>,
}

fn contrasting(rng: &mut ChaCha8Rng, dark_bg: bool) -> [u8; 3] {
    if dark_bg {
        [
            rng.gen_range(200..=255),
            rng.gen_range(200..=255),
            rng.gen_range(160..=255),
        ]
    } else {
        [rng.gen_range(0..60), rng.gen_range(0..60), rng.gen_range(0..90)]
    }
}

/// A sign: one or two text blocks of one to three lines, words left aligned,
/// sometimes ending in a number, over a gradient.
pub fn fixture_scene(id: &str, seed: u64) -> FixtureScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(s) = try_scene(id, &mut rng) {
            return s;
        }
    }
}

fn try_scene(id: &str, rng: &mut ChaCha8Rng) -> Option<FixtureScene> {
    let face = FontFace::Builtin;
    let (w, h) = (360u32, 220u32);
    let dark = rng.gen_bool(0.5);
    let (c0, c1) = if dark {
        (
            [rng.gen_range(0..60), rng.gen_range(20..80), rng.gen_range(40..110)],
            [rng.gen_range(0..50); 3],
        )
    } else {
        (
            [
                rng.gen_range(190..=255),
                rng.gen_range(190..=255),
                rng.gen_range(170..=240),
            ],
            [rng.gen_range(200..=250); 3],
        )
    };
    let mut image = SceneImage::from_fn(id, w, h, |x, y| {
        let t = (x + y) as f64 / (w + h) as f64;
        [0, 1, 2].map(|c| (c0[c] as f64 * (1.0 - t) + c1[c] as f64 * t).round() as u8)
    });

    let mut words: Vec<WordObservation> = Vec::new();
    let mut reference = Vec::new();
    let blocks = rng.gen_range(1..=2);
    let mut top = rng.gen_range(8..20);
    for _ in 0..blocks {
        let px = rng.gen_range(18..=26u32);
        let color = contrasting(rng, dark);
        let left = rng.gen_range(6..30);
        let lines = rng.gen_range(1..=3);
        for _ in 0..lines {
            let n = rng.gen_range(1..=3);
            let mut x = left;
            let picks: Vec<&(&str, &str)> = SIGN_WORDS.choose_multiple(rng, n).collect();
            let mut line_words: Vec<(String, String)> =
                picks.iter().map(|(s, t)| (s.to_string(), t.to_string())).collect();
            if rng.gen_bool(0.2) {
                let num = rng.gen_range(1..100).to_string();
                line_words.push((num.clone(), num));
            }
            for (src, tgt) in line_words {
                let cov = face.rasterize(&src, px as f32).ok()?;
                let b = BBox::new(x, top, cov.width, cov.height);
                if b.right() > w as i32 - 4 || b.bottom() > h as i32 - 4 {
                    return None;
                }
                for yy in 0..cov.height {
                    for xx in 0..cov.width {
                        if cov.get(xx, yy) > 0.5 {
                            image.put(b.x as u32 + xx, b.y as u32 + yy, color);
                        }
                    }
                }
                words.push(WordObservation::new(b, &src, 1.0));
                reference.push(tgt);
                x = b.right() + (px / 2) as i32;
            }
            top += (px + px / 4) as i32;
        }
        // blocks sit well apart
        top += (px * 2) as i32;
    }
    if !well_formed(&words) {
        return None;
    }
    Some(FixtureScene {
        image,
        annotations: words
            .iter()
            .map(|w| Annotation {
                bbox: w.bbox,
                text: w.text.clone(),
            })
            .collect(),
        reference: reference.join(" "),
    })
}

/// Rejects layouts where grouping would reorder the text or where a
/// word-for-word translation would be reallocated across lines.
fn well_formed(words: &[WordObservation]) -> bool {
    let Ok(plan) = group_layout(words, &LayoutConfig::default()) else {
        return false;
    };
    let mut order = Vec::new();
    for p in &plan.paragraphs {
        let tokens: Vec<String> = p.words().map(|w| w.text.clone()).collect();
        let alloc = allocate_lines(&tokens, p);
        if alloc.iter().zip(&p.lines).any(|(a, l)| a.len() != l.words.len()) {
            return false;
        }
        order.extend(p.words().map(|w| w.bbox));
    }
    // numbers only at line ends, so reading order is unaffected
    order.extend(plan.passthrough.iter().map(|w| w.bbox));
    let original: Vec<BBox> = words.iter().map(|w| w.bbox).collect();
    let translatable_in_order: Vec<BBox> = original
        .iter()
        .copied()
        .filter(|b| !plan.passthrough.iter().any(|p| p.bbox == *b))
        .collect();
    order[..translatable_in_order.len()] == translatable_in_order[..]
}

/// Writes `count` scenes plus `inputs.jsonl`, `refs.jsonl`, `lexicon.tsv`
/// and an all-stub `config.json` under `dir`.
pub fn write_fixture_set(dir: &Path, count: usize, seed: u64) -> Result<Vec<FixtureScene>, PipelineError> {
    std::fs::create_dir_all(dir.join("images"))?;
    let scenes: Vec<FixtureScene> = (0..count)
        .map(|i| fixture_scene(&format!("scene{i:03}"), seed.wrapping_add(i as u64)))
        .collect();
    let mut inputs = Vec::new();
    let mut refs = Vec::new();
    for s in &scenes {
        let rel = format!("images/{}.png", s.image.id());
        s.image.save_png(dir.join(&rel))?;
        inputs.push(InputRecord {
            image: rel.into(),
            id: Some(s.image.id().to_string()),
            annotations: s.annotations.clone(),
            references: vec![s.reference.clone()],
        });
        refs.push(RefRecord {
            image_id: s.image.id().to_string(),
            references: vec![s.reference.clone()],
        });
    }
    write_jsonl(dir.join("inputs.jsonl"), &inputs)?;
    write_jsonl(dir.join("refs.jsonl"), &refs)?;
    std::fs::write(dir.join("lexicon.tsv"), lexicon_tsv())?;
    let mut cfg = PipelineConfig::new(LangCode::En, LangCode::Hi);
    cfg.adapters = AdapterBindings {
        translator: AdapterBinding::stub().with_option("lexicon", "lexicon.tsv"),
        ..AdapterBindings::all_stubs()
    };
    cfg.feathering = false;
    cfg.seed = seed;
    cfg.method.id = "stub-oracle".into();
    cfg.method.str_model = "oracle".into();
    cfg.method.mt_model = "lexicon".into();
    cfg.method.sts_model = "recolor".into();
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
    Ok(scenes)
}
