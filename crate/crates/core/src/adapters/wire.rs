//! JSON messages exchanged with external model processes and services.
//!
//! Requests and responses travel as one JSON object per line over a child
//! process's stdin/stdout, or as the body of `POST /v1/{op}`. Images are
//! base64-encoded PNG.

use std::collections::BTreeMap;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::AdapterError;
use crate::scene::{BBox, BinaryMask, LangCode, SceneImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Detect,
    Recognize,
    Translate,
    Erase,
    Synthesize,
    ScoreQuality,
}

impl Op {
    pub const ALL: [Op; 6] = [
        Op::Detect,
        Op::Recognize,
        Op::Translate,
        Op::Erase,
        Op::Synthesize,
        Op::ScoreQuality,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Op::Detect => "detect",
            Op::Recognize => "recognize",
            Op::Translate => "translate",
            Op::Erase => "erase",
            Op::Synthesize => "synthesize",
            Op::ScoreQuality => "score_quality",
        }
    }

    /// Image and text fields a request for this op must carry.
    pub fn required_fields(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Op::Detect => (&["image"], &[]),
            Op::Recognize => (&["crop"], &[]),
            Op::Translate => (&[], &["text"]),
            Op::Erase => (&["image", "mask"], &[]),
            Op::Synthesize => (&["source_crop", "target_render"], &[]),
            Op::ScoreQuality => (&["image"], &[]),
        }
    }
}

impl std::str::FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Op::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown op {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub request_id: String,
    pub op: Op,
    #[serde(default)]
    pub images: BTreeMap<String, String>,
    #[serde(default)]
    pub texts: BTreeMap<String, String>,
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
}

impl AdapterRequest {
    pub fn new(request_id: impl Into<String>, op: Op, src_lang: LangCode, tgt_lang: LangCode) -> Self {
        Self {
            request_id: request_id.into(),
            op,
            images: BTreeMap::new(),
            texts: BTreeMap::new(),
            src_lang,
            tgt_lang,
        }
    }

    pub fn with_image(mut self, name: &str, img: &SceneImage) -> Result<Self, AdapterError> {
        self.images.insert(name.to_string(), encode_image(img)?);
        Ok(self)
    }

    pub fn with_mask(mut self, name: &str, mask: &BinaryMask) -> Result<Self, AdapterError> {
        self.images
            .insert(name.to_string(), encode_image(&mask.to_image("mask"))?);
        Ok(self)
    }

    pub fn with_text(mut self, name: &str, text: impl Into<String>) -> Self {
        self.texts.insert(name.to_string(), text.into());
        self
    }

    /// Checks that the op's required fields are present.
    pub fn validate(&self) -> Result<(), AdapterError> {
        let (images, texts) = self.op.required_fields();
        for f in images {
            if !self.images.contains_key(*f) {
                return Err(AdapterError::BadRequest(format!(
                    "{} request lacks image {f:?}",
                    self.op.as_str()
                )));
            }
        }
        for f in texts {
            if !self.texts.contains_key(*f) {
                return Err(AdapterError::BadRequest(format!(
                    "{} request lacks text {f:?}",
                    self.op.as_str()
                )));
            }
        }
        Ok(())
    }

    pub fn image(&self, name: &str) -> Result<SceneImage, AdapterError> {
        let b64 = self
            .images
            .get(name)
            .ok_or_else(|| AdapterError::BadRequest(format!("missing image {name:?}")))?;
        decode_image(name, b64).map_err(|e| AdapterError::BadRequest(e.to_string()))
    }

    pub fn text(&self, name: &str) -> Result<&str, AdapterError> {
        self.texts
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| AdapterError::BadRequest(format!("missing text {name:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub request_id: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Vec<BBox>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texts: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AdapterResponse {
    pub fn ok(request_id: impl Into<String>) -> Self {
        Self {
            request_id: request_id.into(),
            ok: true,
            ..Default::default()
        }
    }

    pub fn failure(request_id: impl Into<String>, error: impl Into<String>) -> Self {
        Self {
            request_id: request_id.into(),
            ok: false,
            error: Some(error.into()),
            ..Default::default()
        }
    }

    pub fn with_text(mut self, name: &str, text: impl Into<String>) -> Self {
        self.texts
            .get_or_insert_with(BTreeMap::new)
            .insert(name.to_string(), text.into());
        self
    }

    pub fn with_image(mut self, name: &str, img: &SceneImage) -> Result<Self, AdapterError> {
        self.images
            .get_or_insert_with(BTreeMap::new)
            .insert(name.to_string(), encode_image(img)?);
        Ok(self)
    }

    /// Ok payload check for `op`: the op-specific field must be present.
    pub fn validate_for(&self, op: Op, request_id: &str) -> Result<(), AdapterError> {
        if self.request_id != request_id {
            return Err(AdapterError::Malformed(format!(
                "response id {:?} does not echo request id {request_id:?}",
                self.request_id
            )));
        }
        if !self.ok {
            return Err(AdapterError::Remote(
                self.error.clone().unwrap_or_else(|| "unspecified error".into()),
            ));
        }
        let present = match op {
            Op::Detect => self.boxes.is_some(),
            Op::Recognize => self.texts.as_ref().is_some_and(|t| t.contains_key("text")) && self.score.is_some(),
            Op::Translate => self.texts.as_ref().is_some_and(|t| t.contains_key("text")),
            Op::Erase | Op::Synthesize => self.images.as_ref().is_some_and(|i| i.contains_key("image")),
            Op::ScoreQuality => self.score.is_some(),
        };
        if present {
            Ok(())
        } else {
            Err(AdapterError::Malformed(format!(
                "ok {} response lacks its payload",
                op.as_str()
            )))
        }
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        self.texts.as_ref()?.get(name).map(String::as_str)
    }

    pub fn image(&self, name: &str) -> Result<SceneImage, AdapterError> {
        let b64 = self
            .images
            .as_ref()
            .and_then(|i| i.get(name))
            .ok_or_else(|| AdapterError::Malformed(format!("missing image {name:?}")))?;
        decode_image(name, b64).map_err(|e| AdapterError::Malformed(e.to_string()))
    }
}

pub fn encode_image(img: &SceneImage) -> Result<String, AdapterError> {
    Ok(STANDARD.encode(img.encode_png()?))
}

pub fn decode_image(id: &str, b64: &str) -> Result<SceneImage, AdapterError> {
    let bytes = STANDARD
        .decode(b64.trim())
        .map_err(|e| AdapterError::Malformed(format!("bad base64: {e}")))?;
    Ok(SceneImage::decode_png(id, &bytes)?)
}
