//! End-to-end image translation: detect, recognize, filter, group, translate,
//! allocate, place, erase, synthesize, compose, paste. Also batch runs with
//! their manifests and the evaluation of a finished run.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapters::{AdapterBindings, AdapterError, Adapters, Annotation, CallContext, OracleStore};
use crate::compositor::{composite, extract_foreground_mask, CompositeError};
use crate::evaluator::{aggregate, compute_tq, CorpusReport, EvalError, ImageScore, MethodInfo, ReferenceSet};
use crate::layout::{
    allocate_lines, apply_crop_action, group_layout, overflow_height_scale, plan_line, LayoutConfig, LayoutError, Line,
    PlacementEntry, PlacementPlan,
};
use crate::render::{render_black_on_gray, FontFace, RenderError, RENDER_GRAY};
use crate::scene::{BBox, BinaryMask, LangCode, SceneError, SceneImage, WordObservation};
use crate::token_filter::{FilterError, TokenClass, TokenFilter};

/// A recognized box with its text and confidence.
type Recognized = (BBox, String, f64);

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("missing input {0}")]
    MissingInput(PathBuf),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error(transparent)]
    Image(#[from] SceneError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Composite(#[from] CompositeError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn default_true() -> bool {
    true
}

fn default_workers() -> usize {
    1
}

/// JSON configuration of a translation run. Relative paths resolve against
/// the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
    #[serde(default = "AdapterBindings::all_stubs")]
    pub adapters: AdapterBindings,
    #[serde(default)]
    pub layout: LayoutConfig,
    /// Token filtering, grouping, allocation and spline placement; off means
    /// every word is translated and placed on its own.
    #[serde(default = "default_true")]
    pub design_enhancements: bool,
    /// On for real output; fixtures and tests turn it off.
    #[serde(default = "default_true")]
    pub feathering: bool,
    /// TTF/OTF used for target renders; the built-in face when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font: Option<PathBuf>,
    /// `class<TAB>pattern` overrides for the token filter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_patterns: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub method: MethodInfo,
}

impl PipelineConfig {
    pub fn new(src_lang: LangCode, tgt_lang: LangCode) -> Self {
        Self {
            src_lang,
            tgt_lang,
            adapters: AdapterBindings::all_stubs(),
            layout: LayoutConfig::default(),
            design_enhancements: true,
            feathering: true,
            font: None,
            token_patterns: None,
            output_dir: None,
            seed: 0,
            workers: 1,
            method: MethodInfo::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.src_lang == self.tgt_lang {
            return Err(PipelineError::Config("src_lang and tgt_lang must differ".into()));
        }
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageStatus {
    Ok,
    SkippedNoText,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub request_id: String,
    pub op: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Kept out of the manifest file so reruns compare byte for byte; see
    /// `timings.jsonl`.
    #[serde(skip)]
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LayoutSummary {
    pub paragraphs: usize,
    pub lines: usize,
    pub passthrough: usize,
}

/// Manifest record of one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub image_id: String,
    pub input_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    pub status: ImageStatus,
    pub words: Vec<WordObservation>,
    pub layout: LayoutSummary,
    pub placements: Vec<PlacementEntry>,
    /// Text visible in the output image and where: rendered placements plus
    /// source words left untouched.
    pub output_annotations: Vec<Annotation>,
    pub failed_words: usize,
    pub calls: Vec<CallRecord>,
}

impl ImageEntry {
    fn new(image_id: &str, input_path: &str) -> Self {
        Self {
            image_id: image_id.to_string(),
            input_path: input_path.to_string(),
            output_path: None,
            status: ImageStatus::Ok,
            words: Vec::new(),
            layout: LayoutSummary::default(),
            placements: Vec::new(),
            output_annotations: Vec::new(),
            failed_words: 0,
            calls: Vec::new(),
        }
    }

    /// Number of logged calls per op.
    pub fn call_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for c in &self.calls {
            *m.entry(c.op.clone()).or_insert(0) += 1;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub method: MethodInfo,
    pub design_enhancements: bool,
    pub seed: u64,
    pub entries: Vec<ImageEntry>,
}

impl RunManifest {
    pub fn failed(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, ImageStatus::Failed(_)))
            .count()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub const RUN_MANIFEST: &str = "run_manifest.json";
pub const TIMINGS: &str = "timings.jsonl";
pub const IMAGES_DIR: &str = "images";

/// One line of an input manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    /// Image path, relative to the manifest's directory.
    pub image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Ground-truth words for the oracle adapters.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Annotation>,
    /// Reference translations (one per annotator).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<String>,
}

impl InputRecord {
    pub fn image_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| {
            self.image
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(PipelineError::from))
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<(), PipelineError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

/// Collects call records for one image.
struct CallLog<'a> {
    image_id: &'a str,
    records: parking_lot::Mutex<Vec<CallRecord>>,
}

impl<'a> CallLog<'a> {
    fn new(image_id: &'a str) -> Self {
        Self {
            image_id,
            records: parking_lot::Mutex::new(Vec::new()),
        }
    }

    fn request_id(&self, op: &str, k: usize) -> String {
        format!("{}:{op}:{k}", self.image_id)
    }

    fn call<T>(
        &self,
        op: &str,
        k: usize,
        f: impl FnOnce(&str) -> Result<T, AdapterError>,
    ) -> (CallRecord, Result<T, AdapterError>) {
        let id = self.request_id(op, k);
        let t0 = Instant::now();
        let r = f(&id);
        let rec = CallRecord {
            request_id: id,
            op: op.to_string(),
            ok: r.is_ok(),
            error: r.as_ref().err().map(|e| e.to_string()),
            elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
        };
        (rec, r)
    }

    /// Sequential call, logged immediately.
    fn run<T>(&self, op: &str, k: usize, f: impl FnOnce(&str) -> Result<T, AdapterError>) -> Result<T, AdapterError> {
        let (rec, r) = self.call(op, k, f);
        self.records.lock().push(rec);
        r
    }

    fn extend(&self, recs: impl IntoIterator<Item = CallRecord>) {
        self.records.lock().extend(recs);
    }

    fn into_records(self) -> Vec<CallRecord> {
        self.records.into_inner()
    }
}

/// Source words re-rendered together; the unit of failure.
struct Unit {
    words: Vec<WordObservation>,
    entries: Vec<PlacementEntry>,
    text_height: u32,
    failed: bool,
}

impl Unit {
    fn failed(words: Vec<WordObservation>) -> Self {
        Self {
            words,
            entries: Vec::new(),
            text_height: 0,
            failed: true,
        }
    }
}

/// A configured translator of images.
pub struct Pipeline {
    cfg: PipelineConfig,
    adapters: Adapters,
    face: FontFace,
    filter: TokenFilter,
    oracle: Option<Arc<OracleStore>>,
}

impl Pipeline {
    pub fn new(
        cfg: PipelineConfig,
        adapters: Adapters,
        face: FontFace,
        filter: TokenFilter,
    ) -> Result<Self, PipelineError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            adapters,
            face,
            filter,
            oracle: None,
        })
    }

    /// Builds adapters, font and filter from the config; relative paths
    /// resolve against `base_dir`. Stub detection and recognition read `oracle`.
    pub fn from_config(cfg: PipelineConfig, oracle: Arc<OracleStore>, base_dir: &Path) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let adapters = Adapters::from_bindings(&cfg.adapters, oracle.clone(), base_dir)?;
        let face = match &cfg.font {
            Some(p) => FontFace::load(base_dir.join(p))?,
            None => FontFace::Builtin,
        };
        let filter = match &cfg.token_patterns {
            Some(p) => TokenFilter::from_override_file(base_dir.join(p))?,
            None => TokenFilter::default(),
        };
        let mut p = Self::new(cfg, adapters, face, filter)?;
        p.oracle = Some(oracle);
        Ok(p)
    }

    pub fn with_oracle(mut self, oracle: Arc<OracleStore>) -> Self {
        self.oracle = Some(oracle);
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn adapters(&self) -> &Adapters {
        &self.adapters
    }

    fn ctx(&self, request_id: &str, image_id: &str) -> CallContext {
        CallContext::new(request_id, image_id, self.cfg.src_lang, self.cfg.tgt_lang)
    }

    /// Translates the text of one image. Adapter failures are recorded in the
    /// entry; the image fails when more than half of its words fail.
    pub fn translate_image(&self, img: &SceneImage) -> (SceneImage, ImageEntry) {
        let image_id = img.id().to_string();
        let mut entry = ImageEntry::new(&image_id, "");
        let log = CallLog::new(&image_id);
        let out = match self.translate_logged(img, &mut entry, &log) {
            Ok(out) => out,
            Err(e) => {
                entry.status = ImageStatus::Failed(e.to_string());
                entry.failed_words = entry.words.len();
                entry.output_annotations = source_annotations(&entry.words);
                img.clone()
            }
        };
        entry.calls = log.into_records();
        (out, entry)
    }

    fn translate_logged(
        &self,
        img: &SceneImage,
        entry: &mut ImageEntry,
        log: &CallLog<'_>,
    ) -> Result<SceneImage, PipelineError> {
        let image_id = img.id();
        let boxes = log.run("detect", 0, |id| {
            self.adapters.detector.detect(img, &self.ctx(id, image_id))
        })?;

        // recognition fans out; results keep detection order
        let recognized: Vec<(CallRecord, Result<Recognized, AdapterError>)> = boxes
            .par_iter()
            .enumerate()
            .map(|(k, b)| {
                log.call("recognize", k, |id| {
                    let crop = img.crop(*b)?;
                    let (text, conf) = self
                        .adapters
                        .recognizer
                        .recognize(&crop, &self.ctx(id, image_id).with_box(*b))?;
                    Ok((*b, text, conf))
                })
            })
            .collect();
        let mut unrecognized = 0;
        let mut words = Vec::new();
        for (rec, r) in recognized {
            log.extend([rec]);
            match r {
                Ok((b, text, conf)) if !text.trim().is_empty() => {
                    let mut w = WordObservation::new(b, &text, conf);
                    w.token_class = if self.cfg.design_enhancements {
                        self.filter.classify(&w.text)?
                    } else {
                        TokenClass::Translatable
                    };
                    words.push(w);
                }
                Ok(_) => {}
                Err(_) => unrecognized += 1,
            }
        }
        entry.words = words.clone();
        if words.is_empty() {
            if unrecognized > 0 {
                entry.failed_words = unrecognized;
                return Err(PipelineError::Config(format!(
                    "none of {unrecognized} detected words recognized"
                )));
            }
            entry.status = ImageStatus::SkippedNoText;
            return Ok(img.clone());
        }

        let units = if self.cfg.design_enhancements {
            self.plan_paragraphs(&words, img.dims(), entry, log)?
        } else {
            self.plan_words(&words, img.dims(), log)
        };

        // one erase over every word that will be re-rendered
        let mut mask = BinaryMask::new(img.width(), img.height());
        for u in units.iter().filter(|u| !u.failed) {
            for w in &u.words {
                mask.fill_box(w.bbox);
            }
        }
        let mut units = units;
        let erased = if mask.is_empty() {
            None
        } else {
            match log.run("erase", 0, |id| {
                self.adapters.eraser.erase(img, &mask, &self.ctx(id, image_id))
            }) {
                Ok(e) => Some(e),
                Err(_) => {
                    units.iter_mut().for_each(|u| u.failed = true);
                    None
                }
            }
        };

        // synthesize every placement, in parallel, in plan order
        let jobs: Vec<(usize, usize)> = units
            .iter()
            .enumerate()
            .filter(|(_, u)| !u.failed)
            .flat_map(|(ui, u)| (0..u.entries.len()).map(move |ei| (ui, ei)))
            .collect();
        let synthesized: Vec<(CallRecord, Result<SceneImage, AdapterError>)> = jobs
            .par_iter()
            .enumerate()
            .map(|(k, &(ui, ei))| {
                let u = &units[ui];
                let e = &u.entries[ei];
                log.call("synthesize", k, |id| {
                    let style = apply_crop_action(&img.crop(e.source_crop)?, e.crop_action, e.position.w);
                    let render = target_render(&self.face, &e.target_text, e.position.w, e.position.h, u.text_height)
                        .map_err(|err| AdapterError::BadRequest(err.to_string()))?;
                    let fg = self.adapters.synthesizer.synthesize(
                        &style,
                        &render,
                        &self.ctx(id, image_id).with_box(e.position),
                    )?;
                    Ok(if fg.dims() == render.dims() {
                        fg
                    } else {
                        fg.resize_nearest(render.width(), render.height())
                    })
                })
            })
            .collect();
        let mut foregrounds: BTreeMap<(usize, usize), SceneImage> = BTreeMap::new();
        for (&(ui, ei), (rec, r)) in jobs.iter().zip(synthesized) {
            log.extend([rec]);
            match r {
                Ok(fg) => {
                    foregrounds.insert((ui, ei), fg);
                }
                Err(_) => units[ui].failed = true,
            }
        }

        // erased pixels go back only where the unit as a whole succeeded
        let mut canvas = img.clone();
        if let Some(erased) = &erased {
            for u in units.iter().filter(|u| !u.failed) {
                for w in &u.words {
                    canvas.paste_in_place(&erased.crop(w.bbox)?, w.bbox)?;
                }
            }
        }
        for (ui, u) in units.iter().enumerate().filter(|(_, u)| !u.failed) {
            for (ei, e) in u.entries.iter().enumerate() {
                let fg = &foregrounds[&(ui, ei)];
                let bg = canvas.crop(e.position)?;
                let fg_mask = extract_foreground_mask(fg);
                let patch = composite(&bg, fg, &fg_mask, self.cfg.feathering)?;
                canvas.paste_in_place(&patch, e.position)?;
            }
        }

        let total = words.len() + unrecognized;
        let mut failed = unrecognized;
        for u in &units {
            if u.failed {
                failed += u.words.len();
                entry.output_annotations.extend(source_annotations(&u.words));
            } else {
                entry.placements.extend(u.entries.iter().cloned());
                entry.output_annotations.extend(u.entries.iter().map(|e| Annotation {
                    bbox: e.position,
                    text: e.target_text.clone(),
                }));
            }
        }
        entry.failed_words = failed;
        if failed * 2 > total {
            entry.status = ImageStatus::Failed(format!("{failed} of {total} words failed"));
        }
        Ok(canvas)
    }

    /// Paragraph mode: one translation per paragraph, tokens spread over its
    /// lines; pass-through tokens are re-rendered as they are.
    fn plan_paragraphs(
        &self,
        words: &[WordObservation],
        dims: (u32, u32),
        entry: &mut ImageEntry,
        log: &CallLog<'_>,
    ) -> Result<Vec<Unit>, PipelineError> {
        let plan = group_layout(words, &self.cfg.layout)?;
        entry.layout = LayoutSummary {
            paragraphs: plan.paragraphs.len(),
            lines: plan.paragraphs.iter().map(|p| p.lines.len()).sum(),
            passthrough: plan.passthrough.len(),
        };
        let image_id = log.image_id;
        let mut units = Vec::new();
        for (k, para) in plan.paragraphs.iter().enumerate() {
            let translated = log.run("translate", k, |id| {
                self.adapters
                    .translator
                    .translate(&para.text(), &self.ctx(id, image_id))
            });
            let tokens: Vec<String> = match &translated {
                Ok(t) => t.split_whitespace().map(String::from).collect(),
                Err(_) => Vec::new(),
            };
            if tokens.is_empty() {
                units.extend(para.lines.iter().map(|l| Unit::failed(l.words.clone())));
                continue;
            }
            for (line, line_tokens) in para.lines.iter().zip(allocate_lines(&tokens, para)) {
                units.push(self.place_on_line(line, &line_tokens, dims)?);
            }
        }
        for w in &plan.passthrough {
            units.push(self.place_on_line(&Line::new(vec![w.clone()]), std::slice::from_ref(&w.text), dims)?);
        }
        Ok(units)
    }

    /// Word mode: each word translated on its own and placed in its own box.
    fn plan_words(&self, words: &[WordObservation], dims: (u32, u32), log: &CallLog<'_>) -> Vec<Unit> {
        let image_id = log.image_id;
        let results: Vec<(CallRecord, Result<String, AdapterError>)> = words
            .par_iter()
            .enumerate()
            .map(|(k, w)| {
                log.call("translate", k, |id| {
                    self.adapters.translator.translate(&w.text, &self.ctx(id, image_id))
                })
            })
            .collect();
        let mut units = Vec::new();
        for (w, (rec, r)) in words.iter().zip(results) {
            log.extend([rec]);
            let text = r
                .map(|t| t.split_whitespace().collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            let unit = if text.is_empty() {
                Unit::failed(vec![w.clone()])
            } else {
                self.place_on_line(&Line::new(vec![w.clone()]), &[text], dims)
                    .unwrap_or_else(|_| Unit::failed(vec![w.clone()]))
            };
            units.push(unit);
        }
        units
    }

    fn place_on_line(&self, line: &Line, tokens: &[String], dims: (u32, u32)) -> Result<Unit, PipelineError> {
        if tokens.is_empty() {
            // the line's text moved to other lines; it is only erased
            return Ok(Unit {
                words: line.words.clone(),
                entries: Vec::new(),
                text_height: 0,
                failed: false,
            });
        }
        let h = line.height.max(1.0);
        let natural: f64 = tokens.iter().map(|t| self.face.measure(t, h as f32) as f64).sum();
        let scale = overflow_height_scale(natural, line.bbox().w as f64, &self.cfg.layout);
        let px = (h * scale).max(1.0);
        let widths: Vec<f64> = tokens.iter().map(|t| self.face.measure(t, px as f32) as f64).collect();
        let entries = plan_line(line, tokens, &widths, &self.cfg.layout)?;
        let entries = PlacementPlan { entries }.clamp_to(dims.0, dims.1).entries;
        Ok(Unit {
            words: line.words.clone(),
            entries,
            text_height: px.round().max(1.0) as u32,
            failed: false,
        })
    }

    /// Translates every input, writing `images/{id}.png`, `run_manifest.json`
    /// and `timings.jsonl` under `out`. Input paths resolve against `base_dir`.
    pub fn run_batch(&self, inputs: &[InputRecord], base_dir: &Path, out: &Path) -> Result<RunManifest, PipelineError> {
        std::fs::create_dir_all(out.join(IMAGES_DIR))?;
        if let Some(oracle) = &self.oracle {
            for r in inputs {
                if !r.annotations.is_empty() {
                    oracle.insert(r.image_id(), r.annotations.clone());
                }
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let entries: Vec<Result<ImageEntry, PipelineError>> =
            pool.install(|| inputs.par_iter().map(|r| self.run_one(r, base_dir, out)).collect());
        let entries = entries.into_iter().collect::<Result<Vec<_>, _>>()?;
        let manifest = RunManifest {
            method: MethodInfo {
                design_enhancements: self.cfg.design_enhancements,
                ..self.cfg.method.clone()
            },
            design_enhancements: self.cfg.design_enhancements,
            seed: self.cfg.seed,
            entries,
        };
        std::fs::write(out.join(RUN_MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
        let timings: Vec<serde_json::Value> = manifest
            .entries
            .iter()
            .flat_map(|e| &e.calls)
            .map(|c| serde_json::json!({"request_id": c.request_id, "elapsed_ms": c.elapsed_ms}))
            .collect();
        write_jsonl(out.join(TIMINGS), &timings)?;
        Ok(manifest)
    }

    fn run_one(&self, r: &InputRecord, base_dir: &Path, out: &Path) -> Result<ImageEntry, PipelineError> {
        let id = r.image_id();
        let path = base_dir.join(&r.image);
        let input_path = r.image.to_string_lossy().into_owned();
        let img = match SceneImage::load_png(&path) {
            Ok(img) => img.with_id(&id),
            Err(e) => {
                let mut entry = ImageEntry::new(&id, &input_path);
                entry.status = ImageStatus::Failed(format!("{}: {e}", PipelineError::MissingInput(path)));
                return Ok(entry);
            }
        };
        let (output, mut entry) = self.translate_image(&img);
        entry.input_path = input_path;
        let rel = format!("{IMAGES_DIR}/{id}.png");
        output.save_png(out.join(&rel))?;
        entry.output_path = Some(rel);
        Ok(entry)
    }
}

fn source_annotations(words: &[WordObservation]) -> Vec<Annotation> {
    words
        .iter()
        .map(|w| Annotation {
            bbox: w.bbox,
            text: w.text.clone(),
        })
        .collect()
}

/// Black text `text_height` pixels tall, vertically centered on a gray box.
pub fn target_render(
    face: &FontFace,
    text: &str,
    width: u32,
    height: u32,
    text_height: u32,
) -> Result<SceneImage, RenderError> {
    let th = text_height.clamp(1, height.max(1));
    let glyphs = render_black_on_gray(face, text, width, th)?;
    if th == height {
        return Ok(glyphs);
    }
    let mut canvas = SceneImage::filled("render", width, height, [RENDER_GRAY; 3]);
    let top = ((height - th) / 2) as i32;
    canvas
        .paste_in_place(&glyphs, BBox::new(0, top, width, th))
        .expect("render fits its box");
    Ok(canvas)
}

/// Scores a finished run: each output image is read back through the
/// adapters (stub recognition reads the run's own output annotations), TQ
/// comes from BLEU against the references and PQ from the quality scorer.
pub fn evaluate_run(
    run_dir: &Path,
    refs: &[ReferenceSet],
    adapters: &Adapters,
    oracle: &OracleStore,
    tgt: LangCode,
    normalize: bool,
) -> Result<CorpusReport, PipelineError> {
    let manifest = RunManifest::load(run_dir.join(RUN_MANIFEST))?;
    let by_id: BTreeMap<&str, &ImageEntry> = manifest.entries.iter().map(|e| (e.image_id.as_str(), e)).collect();
    let mut scores = Vec::with_capacity(refs.len());
    for r in refs {
        let entry = by_id
            .get(r.image_id.as_str())
            .ok_or_else(|| PipelineError::Config(format!("no output for reference image {}", r.image_id)))?;
        let path = entry
            .output_path
            .as_ref()
            .ok_or_else(|| PipelineError::Config(format!("image {} has no output", r.image_id)))?;
        oracle.insert(&r.image_id, entry.output_annotations.clone());
        let output = SceneImage::load_png(run_dir.join(path))?.with_id(&r.image_id);
        let (b1, b2) = compute_tq(&output, r, adapters, tgt, normalize)?;
        let ctx = CallContext::new(format!("eval-{}", r.image_id), &r.image_id, tgt, tgt);
        let pq = adapters.scorer.score_quality(&output, &ctx)?;
        scores.push(ImageScore::new(&r.image_id, b1, b2, pq)?);
    }
    let mut method = manifest.method.clone();
    method.design_enhancements = manifest.design_enhancements;
    let row = aggregate(method, &scores)?;
    Ok(CorpusReport {
        rows: vec![row],
        images: scores,
    })
}

/// Reference sets from input records that carry references.
pub fn references_from_inputs(inputs: &[InputRecord], lang: LangCode) -> Vec<ReferenceSet> {
    inputs
        .iter()
        .filter(|r| !r.references.is_empty())
        .map(|r| ReferenceSet::from_texts(r.image_id(), &r.references, lang))
        .collect()
}
