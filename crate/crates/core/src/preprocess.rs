//! Identifier preprocessing: decomposition, normalization and filtering.
//!
//! A raw WSDL name such as `ASessionId_02` becomes the word list
//! `["session", "identity"]`:
//!
//! 1. *decompose* splits on case changes and non-letter characters, folding
//!    diacritics (`A`, `Session`, `Id`);
//! 2. *normalize* lowercases and expands whole-token abbreviations
//!    (`a`, `session`, `identity`);
//! 3. *filter* drops stop-words (`session`, `identity`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::model::Word;
use crate::textfile::{content_lines, split_pair, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Decompose,
    Normalize,
    Filter,
}

/// Subset of the three preprocessing stages.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StageSet(u8);

impl StageSet {
    pub const NONE: StageSet = StageSet(0);
    pub const ALL: StageSet = StageSet(0b111);

    const fn bit(stage: Stage) -> u8 {
        match stage {
            Stage::Decompose => 1,
            Stage::Normalize => 2,
            Stage::Filter => 4,
        }
    }

    pub const fn with(self, stage: Stage) -> StageSet {
        StageSet(self.0 | StageSet::bit(stage))
    }

    pub const fn without(self, stage: Stage) -> StageSet {
        StageSet(self.0 & !StageSet::bit(stage))
    }

    pub const fn contains(self, stage: Stage) -> bool {
        self.0 & StageSet::bit(stage) != 0
    }
}

impl FromIterator<Stage> for StageSet {
    fn from_iter<I: IntoIterator<Item = Stage>>(iter: I) -> Self {
        iter.into_iter().fold(StageSet::NONE, StageSet::with)
    }
}

impl fmt::Debug for StageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stages: Vec<Stage> = [Stage::Decompose, Stage::Normalize, Stage::Filter]
            .into_iter()
            .filter(|s| self.contains(*s))
            .collect();
        f.debug_set().entries(stages).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    /// Lowercase abbreviation → full word.
    pub abbreviations: BTreeMap<String, Word>,
    pub stop_words: BTreeSet<String>,
    pub enabled_stages: StageSet,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            abbreviations: BTreeMap::new(),
            stop_words: BTreeSet::new(),
            enabled_stages: StageSet::ALL,
        }
    }
}

impl PreprocessConfig {
    pub fn new(abbreviations: BTreeMap<String, Word>, stop_words: BTreeSet<String>) -> Self {
        PreprocessConfig {
            abbreviations,
            stop_words,
            enabled_stages: StageSet::ALL,
        }
    }

    /// The abbreviation and stop-word lists bundled with the crate.
    pub fn shipped() -> Self {
        PreprocessConfig::new(
            parse_abbreviations(crate::defaults::ABBREVIATIONS)
                .expect("bundled abbreviation list is valid"),
            parse_stop_words(crate::defaults::STOP_WORDS).expect("bundled stop-word list is valid"),
        )
    }

    pub fn with_stages(mut self, stages: StageSet) -> Self {
        self.enabled_stages = stages;
        self
    }
}

/// Parses `abbr=expansion` lines. Keys are matched case-insensitively, so
/// both sides are lowercased; the expansion must be a single word.
pub fn parse_abbreviations(text: &str) -> Result<BTreeMap<String, Word>, ConfigError> {
    let mut map = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let (key, value) = split_pair(line, content)?;
        let key = key.to_lowercase();
        let value = Word::new(value.to_lowercase())
            .map_err(|e| ConfigError::new(line, e.to_string()))?;
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError::new(line, format!("duplicate abbreviation {key:?}")));
        }
    }
    Ok(map)
}

/// Parses a one-word-per-line stop list.
pub fn parse_stop_words(text: &str) -> Result<BTreeSet<String>, ConfigError> {
    let mut set = BTreeSet::new();
    for (line, content) in content_lines(text) {
        if content.split_whitespace().count() != 1 {
            return Err(ConfigError::new(line, format!("expected one word, got {content:?}")));
        }
        set.insert(content.to_lowercase());
    }
    Ok(set)
}

/// Strips diacritics: canonical decomposition, then combining marks removed.
fn fold_diacritics(raw: &str) -> impl Iterator<Item = char> + '_ {
    raw.nfd().filter(|c| !is_combining_mark(*c))
}

/// Splits a raw identifier into letter-only segments, keeping their case.
pub fn decompose(raw: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut run: Vec<char> = Vec::new();
    for c in fold_diacritics(raw).chain(std::iter::once(' ')) {
        if c.is_ascii_alphabetic() {
            run.push(c);
        } else if !run.is_empty() {
            split_case_run(&run, &mut tokens);
            run.clear();
        }
    }
    tokens
}

fn split_case_run(run: &[char], out: &mut Vec<String>) {
    let mut start = 0;
    for i in 1..run.len() {
        let (prev, cur) = (run[i - 1], run[i]);
        let lower_to_upper = prev.is_ascii_lowercase() && cur.is_ascii_uppercase();
        // "XMLParser": split before the last capital of an acronym run.
        let acronym_end = prev.is_ascii_uppercase()
            && cur.is_ascii_uppercase()
            && run.get(i + 1).is_some_and(char::is_ascii_lowercase);
        if lower_to_upper || acronym_end {
            out.push(run[start..i].iter().collect());
            start = i;
        }
    }
    out.push(run[start..].iter().collect());
}

/// Lowercases each token and expands whole-token abbreviations.
pub fn normalize(tokens: &[String], config: &PreprocessConfig) -> Vec<Word> {
    tokens
        .iter()
        .filter_map(|token| {
            let lower = token.to_ascii_lowercase();
            match config.abbreviations.get(&lower) {
                Some(full) => Some(full.clone()),
                None => Word::new(lower).ok(),
            }
        })
        .collect()
}

/// Drops stop-words, preserving the order of the survivors.
pub fn filter(words: &[Word], config: &PreprocessConfig) -> Vec<Word> {
    words
        .iter()
        .filter(|w| !config.stop_words.contains(w.as_str()))
        .cloned()
        .collect()
}

/// Runs the enabled stages in the fixed order decompose, normalize, filter.
///
/// Lowercasing always happens. Without decomposition the whole name, minus
/// its non-letters, is a single token.
pub fn preprocess(raw: &str, config: &PreprocessConfig) -> Vec<Word> {
    let stages = config.enabled_stages;
    let tokens = if stages.contains(Stage::Decompose) {
        decompose(raw)
    } else {
        let whole: String = fold_diacritics(raw)
            .filter(char::is_ascii_alphabetic)
            .collect();
        if whole.is_empty() {
            Vec::new()
        } else {
            vec![whole]
        }
    };
    let words = if stages.contains(Stage::Normalize) {
        normalize(&tokens, config)
    } else {
        tokens
            .into_iter()
            .map(|t| Word::from_valid(t.to_ascii_lowercase()))
            .collect()
    };
    if stages.contains(Stage::Filter) {
        filter(&words, config)
    } else {
        words
    }
}
