//! Configuration files bundled with the crate.

pub const ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");
pub const STOP_WORDS: &str = include_str!("../data/stopwords.txt");
pub const DEMO_LEXICON: &str = include_str!("../data/demo-lexicon.tsv");

/// Ontology tag attached to concepts from the demo lexicon.
pub const ONTOLOGY_TAG: &str = "SUMO";

pub const URI_PREFIX: &str = "http://www.ontologyportal.org/SUMO.owl#";
