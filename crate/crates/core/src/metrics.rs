//! Staged evaluation over a corpus.
//!
//! [`run_ablation`] re-annotates the corpus five times, enabling one more
//! pipeline functionality each time. [`word_frequency`] counts the words
//! the full pipeline looked up and shows what each one maps to.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::associate::{associate, Lexicon, OverrideMap};
use crate::explore::{Annotator, ExplorerConfig};
use crate::ingest::Corpus;
use crate::model::{Concept, Direction, Word};
use crate::preprocess::{PreprocessConfig, Stage, StageSet};

/// `annotated / total`, with 0/0 reported as 0.0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessRate {
    pub total: usize,
    pub annotated: usize,
    pub rate: f64,
}

impl SuccessRate {
    pub fn new(annotated: usize, total: usize) -> Self {
        assert!(annotated <= total, "{annotated} annotated out of {total}");
        let rate = if total == 0 {
            0.0
        } else {
            annotated as f64 / total as f64
        };
        SuccessRate {
            total,
            annotated,
            rate,
        }
    }
}

/// The five cumulative configurations, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AblationStage {
    NoPreprocessing,
    Decomposition,
    Normalization,
    Filtering,
    TypeExplorer,
}

impl AblationStage {
    pub const ALL: [AblationStage; 5] = [
        AblationStage::NoPreprocessing,
        AblationStage::Decomposition,
        AblationStage::Normalization,
        AblationStage::Filtering,
        AblationStage::TypeExplorer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationStage::NoPreprocessing => "NoPreprocessing",
            AblationStage::Decomposition => "+Decomposition",
            AblationStage::Normalization => "+Normalization",
            AblationStage::Filtering => "+Filtering",
            AblationStage::TypeExplorer => "+TypeExplorer",
        }
    }

    pub fn preprocess_stages(self) -> StageSet {
        let stages = StageSet::NONE;
        match self {
            AblationStage::NoPreprocessing => stages,
            AblationStage::Decomposition => stages.with(Stage::Decompose),
            AblationStage::Normalization => stages.with(Stage::Decompose).with(Stage::Normalize),
            AblationStage::Filtering | AblationStage::TypeExplorer => StageSet::ALL,
        }
    }

    /// Type names and structure are only consulted in the last stage.
    pub fn explorer(self, max_depth: usize) -> ExplorerConfig {
        let with_types = self == AblationStage::TypeExplorer;
        ExplorerConfig {
            max_depth,
            type_names_enabled: with_types,
            type_explorer_enabled: with_types,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub stage_name: String,
    pub annotated: usize,
    pub total: usize,
    pub rate: f64,
    pub input: SuccessRate,
    pub output: SuccessRate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub counting: &'static str,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn row(&self, stage: AblationStage) -> &AblationRow {
        &self.rows[AblationStage::ALL.iter().position(|s| *s == stage).expect("known stage")]
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }

    /// Aligned plain-text table, one line per stage.
    pub fn to_table(&self) -> String {
        let header = ("Stage", "Annotated", "Total", "Proportion");
        let width = self
            .rows
            .iter()
            .map(|r| r.stage_name.len())
            .chain([header.0.len()])
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        writeln!(out, "# parameters counted per occurrence (inputs and outputs)").unwrap();
        writeln!(out, "{:<width$}  {:>9}  {:>6}  {:>10}", header.0, header.1, header.2, header.3).unwrap();
        for row in &self.rows {
            writeln!(
                out,
                "{:<width$}  {:>9}  {:>6}  {:>9.2}%",
                row.stage_name,
                row.annotated,
                row.total,
                row.rate * 100.0
            )
            .unwrap();
        }
        out
    }
}

/// Counts annotated parameters under one configuration.
pub fn count_annotated(corpus: &Corpus, annotator: &Annotator) -> (SuccessRate, SuccessRate, SuccessRate) {
    let per_description: Vec<[(usize, usize); 2]> = corpus
        .descriptions
        .par_iter()
        .map(|desc| {
            let mut counts = [(0, 0); 2];
            for param in desc.parameters() {
                let slot = &mut counts[(param.direction == Direction::Output) as usize];
                slot.1 += 1;
                slot.0 += annotator.annotate_parameter(param, desc).is_annotated() as usize;
            }
            counts
        })
        .collect();
    let mut totals = [(0, 0); 2];
    for counts in per_description {
        for (acc, c) in totals.iter_mut().zip(counts) {
            acc.0 += c.0;
            acc.1 += c.1;
        }
    }
    (
        SuccessRate::new(totals[0].0 + totals[1].0, totals[0].1 + totals[1].1),
        SuccessRate::new(totals[0].0, totals[0].1),
        SuccessRate::new(totals[1].0, totals[1].1),
    )
}

/// Annotates the corpus under each cumulative stage configuration.
///
/// `preprocess` supplies the abbreviation and stop-word lists; its
/// `enabled_stages` is replaced per stage.
pub fn run_ablation(
    corpus: &Corpus,
    lexicon: &Lexicon,
    overrides: &OverrideMap,
    preprocess: &PreprocessConfig,
    max_depth: usize,
) -> AblationReport {
    let rows = AblationStage::ALL
        .par_iter()
        .map(|stage| {
            let config = preprocess.clone().with_stages(stage.preprocess_stages());
            let annotator = Annotator::new(lexicon, overrides, &config, stage.explorer(max_depth));
            let (all, input, output) = count_annotated(corpus, &annotator);
            AblationRow {
                stage_name: stage.name().to_string(),
                annotated: all.annotated,
                total: all.total,
                rate: all.rate,
                input,
                output,
            }
        })
        .collect();
    AblationReport {
        counting: "per-occurrence",
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordFrequencyRow {
    pub word: Word,
    pub occurrences: usize,
    pub concept: Option<Concept>,
}

/// Counts every word the annotator looked up, across all parameters and
/// all levels it reached. Sorted by count descending, then word.
pub fn word_frequency(corpus: &Corpus, annotator: &Annotator) -> Vec<WordFrequencyRow> {
    let counts: BTreeMap<Word, usize> = corpus
        .descriptions
        .par_iter()
        .map(|desc| {
            let mut local: BTreeMap<Word, usize> = BTreeMap::new();
            for exploration in annotator.explore_description(desc) {
                for word in exploration.consulted {
                    *local.entry(word).or_default() += 1;
                }
            }
            local
        })
        .reduce(BTreeMap::new, |mut acc, local| {
            for (word, n) in local {
                *acc.entry(word).or_default() += n;
            }
            acc
        });
    let mut rows: Vec<WordFrequencyRow> = counts
        .into_iter()
        .map(|(word, occurrences)| {
            let concept = associate(&word, annotator.lexicon, annotator.overrides).cloned();
            WordFrequencyRow {
                word,
                occurrences,
                concept,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.occurrences.cmp(&a.occurrences).then_with(|| a.word.cmp(&b.word)));
    rows
}

/// `word,occurrences,concept` with a header line; the concept column is
/// empty for words without one.
pub fn word_frequency_csv(rows: &[WordFrequencyRow]) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["word", "occurrences", "concept"])
        .expect("in-memory write");
    for row in rows {
        let occurrences = row.occurrences.to_string();
        let concept = row.concept.as_ref().map(|c| c.id.as_str()).unwrap_or("");
        writer
            .write_record([row.word.as_str(), occurrences.as_str(), concept])
            .expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}
