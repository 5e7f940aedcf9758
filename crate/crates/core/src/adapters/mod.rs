//! Contracts for the external models (detector, recognizer, translator,
//! background eraser, foreground synthesizer, quality scorer), deterministic
//! in-process stubs, and clients for models served over the wire protocol.

pub mod remote;
pub mod stub;
pub mod wire;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{BBox, BinaryMask, LangCode, SceneError, SceneImage};
pub use remote::{HttpTransport, ProcessTransport, RemoteAdapter, Transport};
pub use stub::{
    Annotation, LaplacianScorer, LexiconTranslator, OracleDetector, OracleRecognizer, OracleStore, RecolorSynthesizer,
    RingMedianEraser, StubService,
};
pub use wire::{AdapterRequest, AdapterResponse, Op};

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("adapter unavailable: {0}")]
    Unavailable(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("adapter reported failure: {0}")]
    Remote(String),
    #[error("no annotation for {image_id} at {bbox:?}")]
    NoAnnotation { image_id: String, bbox: Option<BBox> },
    #[error("empty text")]
    EmptyText,
    #[error("dimension mismatch: image {image:?}, mask {mask:?}")]
    DimensionMismatch { image: (u32, u32), mask: (u32, u32) },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Image(#[from] SceneError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-call metadata. `image_id` names the full scene; `bbox` locates a crop in it.
#[derive(Debug, Clone, PartialEq)]
pub struct CallContext {
    pub request_id: String,
    pub image_id: String,
    pub bbox: Option<BBox>,
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
}

impl CallContext {
    pub fn new(request_id: impl Into<String>, image_id: impl Into<String>, src: LangCode, tgt: LangCode) -> Self {
        Self {
            request_id: request_id.into(),
            image_id: image_id.into(),
            bbox: None,
            src_lang: src,
            tgt_lang: tgt,
        }
    }

    pub fn with_box(mut self, bbox: BBox) -> Self {
        self.bbox = Some(bbox);
        self
    }
}

pub trait Detector: Send + Sync {
    fn detect(&self, img: &SceneImage, ctx: &CallContext) -> Result<Vec<BBox>, AdapterError>;
}

pub trait Recognizer: Send + Sync {
    /// Text and confidence in `[0, 1]`.
    fn recognize(&self, crop: &SceneImage, ctx: &CallContext) -> Result<(String, f64), AdapterError>;
}

pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, ctx: &CallContext) -> Result<String, AdapterError>;
}

pub trait Eraser: Send + Sync {
    fn erase(&self, img: &SceneImage, mask: &BinaryMask, ctx: &CallContext) -> Result<SceneImage, AdapterError>;
}

pub trait Synthesizer: Send + Sync {
    /// Colored target text on gray(128), sized like `target_render`.
    fn synthesize(
        &self,
        source_crop: &SceneImage,
        target_render: &SceneImage,
        ctx: &CallContext,
    ) -> Result<SceneImage, AdapterError>;
}

pub trait QualityScorer: Send + Sync {
    /// No-reference quality in `[0, 100]`.
    fn score_quality(&self, img: &SceneImage, ctx: &CallContext) -> Result<f64, AdapterError>;
}

/// Clamps detected boxes into the image, dropping those fully outside.
pub fn clamp_boxes(boxes: Vec<BBox>, img: &SceneImage) -> Vec<BBox> {
    boxes
        .into_iter()
        .filter_map(|b| {
            let c = b.clamp_to(img.width(), img.height());
            match c {
                Some(c) if c != b => log::warn!("detected box {b:?} clamped to {c:?} in {}", img.id()),
                None => log::warn!("detected box {b:?} lies outside {}; dropped", img.id()),
                _ => {}
            }
            c
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdapterKind {
    Stub,
    Process,
    Http,
}

/// How one model role is provided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterBinding {
    pub kind: AdapterKind,
    /// Program and arguments, for `process`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
    /// Base URL, for `http`; requests go to `{url}/v1/{op}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_pool")]
    pub pool: usize,
    #[serde(default)]
    pub options: serde_json::Map<String, serde_json::Value>,
}

fn default_timeout() -> f64 {
    30.0
}

fn default_pool() -> usize {
    1
}

impl AdapterBinding {
    pub fn stub() -> Self {
        Self {
            kind: AdapterKind::Stub,
            command: None,
            url: None,
            timeout_secs: default_timeout(),
            pool: default_pool(),
            options: Default::default(),
        }
    }

    pub fn with_option(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.options.insert(key.to_string(), value.into());
        self
    }
}

/// Role → binding. Every role must be bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterBindings {
    pub detector: AdapterBinding,
    pub recognizer: AdapterBinding,
    pub translator: AdapterBinding,
    pub eraser: AdapterBinding,
    pub synthesizer: AdapterBinding,
    pub quality_scorer: AdapterBinding,
}

impl AdapterBindings {
    pub fn all_stubs() -> Self {
        Self {
            detector: AdapterBinding::stub(),
            recognizer: AdapterBinding::stub(),
            translator: AdapterBinding::stub(),
            eraser: AdapterBinding::stub(),
            synthesizer: AdapterBinding::stub(),
            quality_scorer: AdapterBinding::stub(),
        }
    }
}

/// The six bound models.
#[derive(Clone)]
pub struct Adapters {
    pub detector: Arc<dyn Detector>,
    pub recognizer: Arc<dyn Recognizer>,
    pub translator: Arc<dyn Translator>,
    pub eraser: Arc<dyn Eraser>,
    pub synthesizer: Arc<dyn Synthesizer>,
    pub scorer: Arc<dyn QualityScorer>,
}

impl Adapters {
    /// All-stub set around `oracle` with the given lexicon translator.
    pub fn stubs(oracle: Arc<OracleStore>, translator: LexiconTranslator) -> Self {
        Self {
            detector: Arc::new(OracleDetector::new(oracle.clone())),
            recognizer: Arc::new(OracleRecognizer::new(oracle)),
            translator: Arc::new(translator),
            eraser: Arc::new(RingMedianEraser),
            synthesizer: Arc::new(RecolorSynthesizer),
            scorer: Arc::new(LaplacianScorer),
        }
    }

    /// Builds every role from its binding. Relative paths in stub options
    /// (`lexicon`) resolve against `base_dir`.
    pub fn from_bindings(
        bindings: &AdapterBindings,
        oracle: Arc<OracleStore>,
        base_dir: &Path,
    ) -> Result<Self, AdapterError> {
        fn remote(b: &AdapterBinding) -> Result<Option<Arc<RemoteAdapter>>, AdapterError> {
            Ok(match b.kind {
                AdapterKind::Stub => None,
                _ => Some(Arc::new(RemoteAdapter::from_binding(b)?)),
            })
        }
        let translator: Arc<dyn Translator> = match remote(&bindings.translator)? {
            Some(r) => r,
            None => {
                let lex = match bindings.translator.options.get("lexicon").and_then(|v| v.as_str()) {
                    Some(p) => LexiconTranslator::from_file(base_dir.join(p))?,
                    None => LexiconTranslator::default(),
                };
                Arc::new(lex)
            }
        };
        Ok(Self {
            detector: match remote(&bindings.detector)? {
                Some(r) => r,
                None => Arc::new(OracleDetector::new(oracle.clone())),
            },
            recognizer: match remote(&bindings.recognizer)? {
                Some(r) => r,
                None => Arc::new(OracleRecognizer::new(oracle.clone())),
            },
            translator,
            eraser: match remote(&bindings.eraser)? {
                Some(r) => r,
                None => Arc::new(RingMedianEraser),
            },
            synthesizer: match remote(&bindings.synthesizer)? {
                Some(r) => r,
                None => Arc::new(RecolorSynthesizer),
            },
            scorer: match remote(&bindings.quality_scorer)? {
                Some(r) => r,
                None => Arc::new(LaplacianScorer),
            },
        })
    }
}
