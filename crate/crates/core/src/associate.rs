//! Word → ontology concept lookup.
//!
//! A [`Lexicon`] holds ranked senses per word and always answers with the
//! top-ranked one. An [`OverrideMap`] pins a concept for words whose top
//! sense is known to be wrong in the web-service domain (`user` is not a
//! disease).

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::model::{Concept, Word};
use crate::textfile::{content_lines, split_pair, ConfigError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("lexicon is not valid UTF-8")]
    InvalidUtf8,
    #[error("line {line}: malformed lexicon line: {message}")]
    MalformedLexiconLine { line: usize, message: String },
    #[error("line {line}: duplicate sense {rank} for {word:?}")]
    DuplicateSense {
        line: usize,
        word: String,
        rank: usize,
    },
    #[error("senses of {word:?} are not ranked 1..k")]
    NonContiguousRanks { word: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashMap<String, Vec<Concept>>,
    ontology_tag: String,
}

impl Lexicon {
    pub fn ontology_tag(&self) -> &str {
        &self.ontology_tag
    }

    /// Senses of `word` in rank order.
    pub fn senses(&self, word: &str) -> Option<&[Concept]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The demo lexicon bundled with the crate.
    pub fn demo() -> Self {
        load_lexicon(
            crate::defaults::DEMO_LEXICON.as_bytes(),
            crate::defaults::ONTOLOGY_TAG,
        )
        .expect("bundled demo lexicon is valid")
    }
}

/// Parses a `word<TAB>rank<TAB>concept` document.
pub fn load_lexicon(document: &[u8], ontology_tag: &str) -> Result<Lexicon, LexiconError> {
    let text = std::str::from_utf8(document).map_err(|_| LexiconError::InvalidUtf8)?;
    let mut ranked: BTreeMap<String, BTreeMap<usize, String>> = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let malformed = |message: String| LexiconError::MalformedLexiconLine { line, message };
        let fields: Vec<&str> = content.split('\t').map(str::trim).collect();
        let [word, rank, concept] = fields[..] else {
            return Err(malformed(format!(
                "expected 3 tab-separated fields, got {}",
                fields.len()
            )));
        };
        if word.is_empty() || concept.is_empty() {
            return Err(malformed("empty word or concept".into()));
        }
        let rank: usize = match rank.parse() {
            Ok(r) if r >= 1 => r,
            _ => return Err(malformed(format!("invalid rank {rank:?}"))),
        };
        let word = word.to_lowercase();
        let senses = ranked.entry(word.clone()).or_default();
        if senses.insert(rank, concept.to_string()).is_some() {
            return Err(LexiconError::DuplicateSense { line, word, rank });
        }
    }

    let mut entries = HashMap::with_capacity(ranked.len());
    for (word, senses) in ranked {
        if senses.keys().copied().ne(1..=senses.len()) {
            return Err(LexiconError::NonContiguousRanks { word });
        }
        let concepts = senses
            .into_values()
            .map(|id| Concept::new(id, ontology_tag))
            .collect();
        entries.insert(word, concepts);
    }
    Ok(Lexicon {
        entries,
        ontology_tag: ontology_tag.to_string(),
    })
}

/// Concepts selected a priori for specific words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverrideMap {
    entries: HashMap<String, Concept>,
}

impl OverrideMap {
    pub fn new() -> Self {
        OverrideMap::default()
    }

    pub fn insert(&mut self, word: &str, concept: Concept) {
        self.entries.insert(word.to_lowercase(), concept);
    }

    pub fn get(&self, word: &str) -> Option<&Concept> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `word=Concept` lines.
    pub fn parse(text: &str, ontology_tag: &str) -> Result<Self, ConfigError> {
        let mut map = OverrideMap::new();
        for (line, content) in content_lines(text) {
            let (word, concept) = split_pair(line, content)?;
            if map.get(&word.to_lowercase()).is_some() {
                return Err(ConfigError::new(line, format!("duplicate override {word:?}")));
            }
            map.insert(word, Concept::new(concept, ontology_tag));
        }
        Ok(map)
    }
}

/// Override first, then the lexicon's top-ranked sense.
pub fn associate<'a>(
    word: &Word,
    lexicon: &'a Lexicon,
    overrides: &'a OverrideMap,
) -> Option<&'a Concept> {
    overrides
        .get(word.as_str())
        .or_else(|| lexicon.senses(word.as_str()).and_then(<[Concept]>::first))
}

/// Associates each word in turn, keeping only the hits.
pub fn associate_words(
    words: &[Word],
    lexicon: &Lexicon,
    overrides: &OverrideMap,
) -> Vec<(Word, Concept)> {
    words
        .iter()
        .filter_map(|w| associate(w, lexicon, overrides).map(|c| (w.clone(), c.clone())))
        .collect()
}
