//! Classifies recognized tokens as translatable text or pass-through content
//! (numbers, web addresses, email addresses).

use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NUMERIC_PATTERN: &str = r"[+-]?[0-9]+([.,:/-][0-9]+)*%?";
pub const URL_PATTERN: &str = r"(?i)(https?://)?([a-z0-9-]+\.)+[a-z]{2,}(/[^\s]*)?";
pub const EMAIL_PATTERN: &str = r"(?i)[^\s@]+@([a-z0-9-]+\.)+[a-z]{2,}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    #[default]
    Translatable,
    Numeric,
    Url,
    Email,
}

impl TokenClass {
    pub fn is_translatable(&self) -> bool {
        matches!(self, TokenClass::Translatable)
    }
}

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("empty token")]
    EmptyToken,
    #[error("pattern file line {line}: {reason}")]
    BadPatternLine { line: usize, reason: String },
    #[error("invalid pattern: {0}")]
    Regex(#[from] regex::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Anchored full-token patterns, checked in precedence order Email > Url > Numeric.
#[derive(Debug, Clone)]
pub struct TokenFilter {
    email: Regex,
    url: Regex,
    numeric: Regex,
}

fn anchored(p: &str) -> Result<Regex, regex::Error> {
    Regex::new(&format!("^(?:{p})$"))
}

impl Default for TokenFilter {
    fn default() -> Self {
        Self::new(EMAIL_PATTERN, URL_PATTERN, NUMERIC_PATTERN).expect("built-in patterns compile")
    }
}

impl TokenFilter {
    pub fn new(email: &str, url: &str, numeric: &str) -> Result<Self, FilterError> {
        Ok(Self {
            email: anchored(email)?,
            url: anchored(url)?,
            numeric: anchored(numeric)?,
        })
    }

    /// Reads `class<TAB>pattern` lines; classes not mentioned keep their default pattern.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn from_override_file(path: impl AsRef<Path>) -> Result<Self, FilterError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_override_str(&text)
    }

    pub fn from_override_str(text: &str) -> Result<Self, FilterError> {
        let mut email = EMAIL_PATTERN.to_string();
        let mut url = URL_PATTERN.to_string();
        let mut numeric = NUMERIC_PATTERN.to_string();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((class, pattern)) = line.split_once('\t') else {
                return Err(FilterError::BadPatternLine {
                    line: i + 1,
                    reason: "expected class<TAB>pattern".into(),
                });
            };
            let slot = match class.trim().to_ascii_lowercase().as_str() {
                "email" => &mut email,
                "url" => &mut url,
                "numeric" => &mut numeric,
                other => {
                    return Err(FilterError::BadPatternLine {
                        line: i + 1,
                        reason: format!("unknown class {other:?}"),
                    })
                }
            };
            *slot = pattern.to_string();
        }
        Self::new(&email, &url, &numeric)
    }

    pub fn classify(&self, text: &str) -> Result<TokenClass, FilterError> {
        if text.is_empty() {
            return Err(FilterError::EmptyToken);
        }
        Ok(if self.email.is_match(text) {
            TokenClass::Email
        } else if self.url.is_match(text) {
            TokenClass::Url
        } else if self.numeric.is_match(text) {
            TokenClass::Numeric
        } else {
            TokenClass::Translatable
        })
    }
}

/// Classification with the built-in patterns.
pub fn classify_token(text: &str) -> Result<TokenClass, FilterError> {
    static DEFAULT: OnceLock<TokenFilter> = OnceLock::new();
    DEFAULT.get_or_init(TokenFilter::default).classify(text)
}
