//! Automatic semantic annotation of WSDL web-service parameters.
//!
//! The pipeline reads WSDL 1.1 documents ([`ingest`]), splits parameter and
//! type names into clean words ([`preprocess`]), maps words to ontology
//! concepts through a ranked lexicon ([`associate`]), falls back to type
//! names and complex-type structure when a name yields nothing
//! ([`explore`]), and writes SAWSDL-annotated copies plus a JSON report
//! ([`writer`]). [`metrics`] reruns the pipeline with functionalities
//! switched on one at a time.
//!
//! ```
//! use wsannot_core::{preprocess, PreprocessConfig};
//!
//! let words = preprocess("ASessionId_02", &PreprocessConfig::shipped());
//! let words: Vec<&str> = words.iter().map(|w| w.as_str()).collect();
//! assert_eq!(words, ["session", "identity"]);
//! ```

pub mod associate;
pub mod defaults;
pub mod explore;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod preprocess;
mod textfile;
pub mod writer;

pub use associate::{associate, associate_words, load_lexicon, Lexicon, LexiconError, OverrideMap};
pub use explore::{annotate_description, annotate_parameter, Annotator, Exploration, ExplorerConfig};
pub use ingest::{load_corpus, parse_wsdl, resolve_type, Corpus, CorpusError, IngestError, IngestWarning};
pub use metrics::{run_ablation, word_frequency, AblationReport, AblationStage, SuccessRate, WordFrequencyRow};
pub use model::{
    is_builtin, Annotation, AnnotationEntry, Concept, Direction, Operation, Parameter, QName, SourceKind,
    SubParameter, TypeDefinition, TypeKind, Word, WsDescription,
};
pub use preprocess::{decompose, filter, normalize, preprocess, PreprocessConfig, Stage, StageSet};
pub use textfile::ConfigError;
pub use writer::{write_report, write_sawsdl, WriteError, WriterConfig};
