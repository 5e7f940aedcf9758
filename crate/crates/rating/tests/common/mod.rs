#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use vt_rating::{Criterion, Study, StudyDef};

pub fn method_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("B-{i}")).collect()
}

/// Writes placeholder images for every method and image and returns the study.
pub fn fixture_study(dir: &Path, methods: usize, images: usize, seed: u64) -> Study {
    let mut map = BTreeMap::new();
    std::fs::create_dir_all(dir.join("inputs")).unwrap();
    for m in method_ids(methods) {
        let d = dir.join("runs").join(&m);
        std::fs::create_dir_all(&d).unwrap();
        for i in 0..images {
            std::fs::write(d.join(format!("img{i:02}.png")), format!("{m}/img{i:02}")).unwrap();
        }
        map.insert(m.clone(), PathBuf::from("runs").join(&m));
    }
    for i in 0..images {
        std::fs::write(
            dir.join("inputs").join(format!("img{i:02}.png")),
            format!("src/img{i:02}"),
        )
        .unwrap();
    }
    let def = StudyDef {
        id: "study".into(),
        seed,
        log: Some("ratings.jsonl".into()),
        inputs: Some("inputs".into()),
        methods: map,
        images: None,
        criteria: Criterion::ALL.to_vec(),
    };
    std::fs::write(dir.join("study.json"), serde_json::to_string_pretty(&def).unwrap()).unwrap();
    Study::load(dir.join("study.json")).unwrap()
}
