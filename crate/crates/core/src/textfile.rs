//! Line reader shared by the plain-text config formats.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            message: message.into(),
        }
    }
}

/// Yields `(line_number, content)` with `#` comments stripped, surrounding
/// whitespace trimmed and blank lines skipped. Line numbers start at 1.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        (!content.is_empty()).then_some((idx + 1, content))
    })
}

/// Splits a `key=value` line, trimming both sides.
pub(crate) fn split_pair(line: usize, content: &str) -> Result<(&str, &str), ConfigError> {
    let (key, value) = content
        .split_once('=')
        .ok_or_else(|| ConfigError::new(line, format!("expected key=value, got {content:?}")))?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() || value.is_empty() {
        return Err(ConfigError::new(line, "empty key or value"));
    }
    Ok((key, value))
}
