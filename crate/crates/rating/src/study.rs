//! Study definitions and the per-rater task schedule.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::RatingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    TQ,
    R,
    PQ,
    SSP,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::TQ, Criterion::R, Criterion::PQ, Criterion::SSP];

    /// Translation and style judgements need the source next to the output.
    pub fn mode(self) -> Mode {
        match self {
            Criterion::TQ | Criterion::SSP => Mode::Pair,
            Criterion::R | Criterion::PQ => Mode::Single,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::TQ => "TQ",
            Criterion::R => "R",
            Criterion::PQ => "PQ",
            Criterion::SSP => "SSP",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Pair,
}

/// Study file contents. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyDef {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    /// Ratings log; defaults to `{id}.ratings.jsonl` next to the study file.
    #[serde(default)]
    pub log: Option<PathBuf>,
    /// Directory of source images `{image_id}.png`, needed for pair tasks.
    #[serde(default)]
    pub inputs: Option<PathBuf>,
    /// Method id to a directory of outputs `{image_id}.png`.
    pub methods: BTreeMap<String, PathBuf>,
    /// Defaults to the images present in every method directory.
    #[serde(default)]
    pub images: Option<Vec<String>>,
    #[serde(default = "all_criteria")]
    pub criteria: Vec<Criterion>,
}

fn all_criteria() -> Vec<Criterion> {
    Criterion::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTask {
    pub task_id: String,
    pub method_id: String,
    pub image_id: String,
    pub criterion: Criterion,
    pub mode: Mode,
    pub input_url: Option<String>,
    pub output_url: String,
}

/// What a rater sees: the task without its method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskView {
    pub task_id: String,
    pub image_id: String,
    pub criterion: Criterion,
    pub mode: Mode,
    pub input_url: Option<String>,
    pub output_url: String,
}

impl From<&RatingTask> for TaskView {
    fn from(t: &RatingTask) -> Self {
        TaskView {
            task_id: t.task_id.clone(),
            image_id: t.image_id.clone(),
            criterion: t.criterion,
            mode: t.mode,
            input_url: t.input_url.clone(),
            output_url: t.output_url.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageRole {
    Input,
    Output,
}

/// A loaded study: tasks in canonical order plus the files behind them.
#[derive(Debug, Clone)]
pub struct Study {
    pub id: String,
    pub seed: u64,
    pub log_path: PathBuf,
    tasks: Vec<RatingTask>,
    index: HashMap<String, usize>,
    inputs: Option<PathBuf>,
    methods: BTreeMap<String, PathBuf>,
}

pub fn task_id(study: &str, method: &str, image: &str, criterion: Criterion) -> String {
    let digest = Sha256::digest(format!("{study}\n{method}\n{image}\n{criterion}").as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Permutation of `0..n` for one rater, keyed by the study seed.
pub fn rater_order(seed: u64, rater_id: &str, n: usize) -> Vec<usize> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(rater_id.as_bytes());
    let key: [u8; 32] = h.finalize().into();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::from_seed(key));
    order
}

fn valid_id(s: &str) -> bool {
    !s.is_empty() && !s.contains(['/', '\\']) && s != "." && s != ".."
}

impl Study {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RatingError> {
        let path = path.as_ref();
        let def: StudyDef = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_def(def, base)
    }

    pub fn from_def(def: StudyDef, base: &Path) -> Result<Self, RatingError> {
        let bad = |m: String| RatingError::InvalidStudy(m);
        if !valid_id(&def.id) {
            return Err(bad(format!("study id {:?}", def.id)));
        }
        if def.methods.is_empty() {
            return Err(bad("no methods".into()));
        }
        if def.criteria.is_empty() {
            return Err(bad("no criteria".into()));
        }
        let mut criteria = def.criteria.clone();
        criteria.sort();
        criteria.dedup();
        let methods: BTreeMap<String, PathBuf> = def.methods.iter().map(|(m, d)| (m.clone(), base.join(d))).collect();
        let inputs = def.inputs.as_ref().map(|d| base.join(d));
        let images = match def.images {
            Some(v) => v,
            None => common_images(&methods)?,
        };
        if images.is_empty() {
            return Err(bad("no images".into()));
        }
        let needs_input = criteria.iter().any(|c| c.mode() == Mode::Pair);
        if needs_input && inputs.is_none() {
            return Err(bad("pair-mode criteria need an inputs directory".into()));
        }
        for image in &images {
            if !valid_id(image) {
                return Err(bad(format!("image id {image:?}")));
            }
            for (m, dir) in &methods {
                let p = dir.join(format!("{image}.png"));
                if !p.is_file() {
                    return Err(bad(format!("method {m} has no output {}", p.display())));
                }
            }
            if let (true, Some(dir)) = (needs_input, &inputs) {
                let p = dir.join(format!("{image}.png"));
                if !p.is_file() {
                    return Err(bad(format!("missing input {}", p.display())));
                }
            }
        }

        let mut tasks = Vec::new();
        let mut index = HashMap::new();
        for m in methods.keys() {
            for image in &images {
                for &c in &criteria {
                    let id = task_id(&def.id, m, image, c);
                    if index.insert(id.clone(), tasks.len()).is_some() {
                        return Err(bad(format!("duplicate task {m}/{image}/{c}")));
                    }
                    let url = |role: &str| format!("/images/{}/{id}/{role}.png", def.id);
                    tasks.push(RatingTask {
                        task_id: id.clone(),
                        method_id: m.clone(),
                        image_id: image.clone(),
                        criterion: c,
                        mode: c.mode(),
                        input_url: (c.mode() == Mode::Pair).then(|| url("input")),
                        output_url: url("output"),
                    });
                }
            }
        }
        let log_path = match def.log {
            Some(p) => base.join(p),
            None => base.join(format!("{}.ratings.jsonl", def.id)),
        };
        Ok(Study {
            id: def.id,
            seed: def.seed,
            log_path,
            tasks,
            index,
            inputs,
            methods,
        })
    }

    pub fn tasks(&self) -> &[RatingTask] {
        &self.tasks
    }

    pub fn task(&self, task_id: &str) -> Option<&RatingTask> {
        self.index.get(task_id).map(|&i| &self.tasks[i])
    }

    pub(crate) fn task_index(&self, task_id: &str) -> Option<usize> {
        self.index.get(task_id).copied()
    }

    /// File behind an image URL of a task.
    pub fn image_path(&self, task_id: &str, role: ImageRole) -> Option<PathBuf> {
        let t = self.task(task_id)?;
        let file = format!("{}.png", t.image_id);
        match role {
            ImageRole::Output => Some(self.methods[&t.method_id].join(file)),
            ImageRole::Input if t.mode == Mode::Pair => self.inputs.as_ref().map(|d| d.join(file)),
            ImageRole::Input => None,
        }
    }
}

fn common_images(methods: &BTreeMap<String, PathBuf>) -> Result<Vec<String>, RatingError> {
    let mut common: Option<Vec<String>> = None;
    for dir in methods.values() {
        let mut names = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "png") {
                if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                    names.push(stem.to_string());
                }
            }
        }
        common = Some(match common {
            None => names,
            Some(prev) => prev.into_iter().filter(|n| names.contains(n)).collect(),
        });
    }
    let mut v = common.unwrap_or_default();
    v.sort();
    Ok(v)
}
