//! Scene-text translation: layout analysis, placement, composition,
//! evaluation and synthetic training data.

pub mod adapters;
pub mod compositor;
pub mod evaluator;
pub mod fixture;
pub mod layout;
pub mod pipeline;
pub mod render;
pub mod scene;
pub mod synth;
pub mod token_filter;

pub use scene::{BBox, BinaryMask, LangCode, SceneError, SceneImage, WordObservation};
pub use token_filter::{classify_token, TokenClass, TokenFilter};
