//! Test-only second pipeline used as an oracle for ablation counts and word
//! frequencies.
//!
//! Shares nothing with the library's preprocessing, lookup or traversal
//! code: names are tokenized with a regex, the lexicon is read straight
//! from its TSV text, and subparameter levels come from shortest type
//! distances computed by Bellman-Ford relaxation instead of a frontier
//! walk. Only the parsed [`WsDescription`] is shared.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use regex::Regex;
use unicode_normalization::UnicodeNormalization;
use wsannot_core::{QName, TypeKind, WsDescription};

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub abbreviations: HashMap<String, String>,
    pub stop_words: BTreeSet<String>,
    /// word → rank-1 concept
    pub lexicon: HashMap<String, String>,
    pub overrides: HashMap<String, String>,
    pub max_depth: usize,
}

impl OracleConfig {
    /// Reads the raw config texts without the library's parsers.
    pub fn from_texts(abbreviations: &str, stop_words: &str, lexicon: &str, overrides: &str, max_depth: usize) -> Self {
        let clean = |text: &str| -> Vec<String> {
            text.lines()
                .map(|l| l.split('#').next().unwrap().trim().to_string())
                .filter(|l| !l.is_empty())
                .collect()
        };
        let pairs = |text: &str| -> HashMap<String, String> {
            clean(text)
                .into_iter()
                .map(|l| {
                    let mut it = l.splitn(2, '=');
                    let k = it.next().unwrap().trim().to_lowercase();
                    let v = it.next().unwrap().trim().to_string();
                    (k, v)
                })
                .collect()
        };
        let mut lex = HashMap::new();
        for line in clean(lexicon) {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols[1].trim() == "1" {
                lex.insert(cols[0].trim().to_lowercase(), cols[2].trim().to_string());
            }
        }
        OracleConfig {
            abbreviations: pairs(abbreviations)
                .into_iter()
                .map(|(k, v)| (k, v.to_lowercase()))
                .collect(),
            stop_words: clean(stop_words).into_iter().map(|s| s.to_lowercase()).collect(),
            lexicon: lex,
            overrides: pairs(overrides),
            max_depth,
        }
    }

    fn concept(&self, word: &str) -> Option<&String> {
        self.overrides.get(word).or_else(|| self.lexicon.get(word))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleStage {
    pub decompose: bool,
    pub normalize: bool,
    pub filter: bool,
    pub types: bool,
}

pub const STAGES: [OracleStage; 5] = [
    OracleStage { decompose: false, normalize: false, filter: false, types: false },
    OracleStage { decompose: true, normalize: false, filter: false, types: false },
    OracleStage { decompose: true, normalize: true, filter: false, types: false },
    OracleStage { decompose: true, normalize: true, filter: true, types: false },
    OracleStage { decompose: true, normalize: true, filter: true, types: true },
];

fn ascii_fold(raw: &str) -> String {
    raw.nfd()
        .filter(|c| unicode_normalization::char::canonical_combining_class(*c) == 0 && !is_mark(*c))
        .collect()
}

fn is_mark(c: char) -> bool {
    // Combining Diacritical Marks and their supplements/extended blocks.
    matches!(c as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

fn tokens(raw: &str) -> Vec<String> {
    let word = Regex::new(r"[A-Z]+[a-z]*|[a-z]+").unwrap();
    let folded = ascii_fold(raw);
    let mut out = Vec::new();
    for m in word.find_iter(&folded) {
        let s = m.as_str();
        let upper = s.chars().take_while(|c| c.is_ascii_uppercase()).count();
        if upper >= 2 && upper < s.len() {
            // "XMLParser" matched whole: the last capital starts the next word.
            out.push(s[..upper - 1].to_string());
            out.push(s[upper - 1..].to_string());
        } else {
            out.push(s.to_string());
        }
    }
    out
}

pub fn words(raw: &str, stage: OracleStage, cfg: &OracleConfig) -> Vec<String> {
    let toks: Vec<String> = if stage.decompose {
        tokens(raw)
    } else {
        let whole: String = ascii_fold(raw).chars().filter(|c| c.is_ascii_alphabetic()).collect();
        if whole.is_empty() { vec![] } else { vec![whole] }
    };
    toks.into_iter()
        .map(|t| t.to_lowercase())
        .map(|t| {
            if stage.normalize {
                cfg.abbreviations.get(&t).cloned().unwrap_or(t)
            } else {
                t
            }
        })
        .filter(|t| !(stage.filter && cfg.stop_words.contains(t)))
        .collect()
}

/// Shortest distance from `root` to every ComplexSequence type reachable
/// through member types.
fn distances(desc: &WsDescription, root: &QName) -> BTreeMap<QName, usize> {
    let is_seq = |q: &QName| desc.types.get(q).is_some_and(|t| t.kind == TypeKind::ComplexSequence);
    let mut dist = BTreeMap::new();
    if !is_seq(root) {
        return dist;
    }
    dist.insert(root.clone(), 0usize);
    loop {
        let mut changed = false;
        let snapshot: Vec<(QName, usize)> = dist.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for (t, d) in snapshot {
            for sub in &desc.types[&t].subparameters {
                if is_seq(&sub.type_ref) {
                    let cur = dist.get(&sub.type_ref).copied().unwrap_or(usize::MAX);
                    if d + 1 < cur {
                        dist.insert(sub.type_ref.clone(), d + 1);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

fn custom_type_name(desc: &WsDescription, q: &QName) -> Option<String> {
    let def = desc.types.get(q)?;
    let custom = !matches!(def.kind, TypeKind::Builtin | TypeKind::Unknown);
    (custom && !def.anonymous).then(|| def.name.local_name.clone())
}

/// Word lists of each search step in order; the search stops at the first
/// step with a hit.
fn steps(desc: &WsDescription, name: &str, type_ref: &QName, stage: OracleStage, cfg: &OracleConfig) -> Vec<Vec<String>> {
    let mut out = vec![words(name, stage, cfg)];
    if !stage.types {
        return out;
    }
    if let Some(t) = custom_type_name(desc, type_ref) {
        out.push(words(&t, stage, cfg));
    }
    let dist = distances(desc, type_ref);
    for level in 1..=cfg.max_depth {
        let members: Vec<_> = dist
            .iter()
            .filter(|(_, d)| **d + 1 == level)
            .flat_map(|(t, _)| desc.types[t].subparameters.iter())
            .collect();
        if members.is_empty() {
            break;
        }
        out.push(members.iter().flat_map(|m| words(&m.name, stage, cfg)).collect());
        out.push(
            members
                .iter()
                .filter_map(|m| custom_type_name(desc, &m.type_ref))
                .flat_map(|t| words(&t, stage, cfg))
                .collect(),
        );
    }
    out
}

pub struct OracleOutcome {
    pub annotated: bool,
    pub consulted: Vec<String>,
}

pub fn search(desc: &WsDescription, name: &str, type_ref: &QName, stage: OracleStage, cfg: &OracleConfig) -> OracleOutcome {
    let mut consulted = Vec::new();
    for step in steps(desc, name, type_ref, stage, cfg) {
        let hit = step.iter().any(|w| cfg.concept(w).is_some());
        consulted.extend(step);
        if hit {
            return OracleOutcome { annotated: true, consulted };
        }
    }
    OracleOutcome { annotated: false, consulted }
}

/// (annotated, total) per stage.
pub fn ablation(descs: &[WsDescription], cfg: &OracleConfig) -> Vec<(usize, usize)> {
    STAGES
        .iter()
        .map(|stage| {
            let mut annotated = 0;
            let mut total = 0;
            for desc in descs {
                for op in &desc.operations {
                    for p in op.inputs.iter().chain(&op.outputs) {
                        total += 1;
                        annotated += search(desc, &p.name, &p.type_ref, *stage, cfg).annotated as usize;
                    }
                }
            }
            (annotated, total)
        })
        .collect()
}

/// word → (occurrences, concept) under the full pipeline.
pub fn word_counts(descs: &[WsDescription], cfg: &OracleConfig) -> BTreeMap<String, (usize, Option<String>)> {
    let mut counts: BTreeMap<String, (usize, Option<String>)> = BTreeMap::new();
    for desc in descs {
        for op in &desc.operations {
            for p in op.inputs.iter().chain(&op.outputs) {
                for w in search(desc, &p.name, &p.type_ref, STAGES[4], cfg).consulted {
                    let concept = cfg.concept(&w).cloned();
                    counts.entry(w).or_insert((0, concept)).0 += 1;
                }
            }
        }
    }
    counts
}

/// Random in-memory corpora and configs for property tests.
pub mod gen {
    use std::collections::BTreeMap;

    use proptest::prelude::*;
    use wsannot_core::model::Declaration;
    use wsannot_core::{Direction, Operation, Parameter, QName, SubParameter, TypeDefinition, TypeKind, WsDescription};

    pub const PIECES: &[&str] = &[
        "city", "user", "name", "id", "no", "parameter", "body", "a", "the", "zzz", "qux", "date", "code",
        "xml", "value", "key", "singer", "info", "detail", "username",
    ];

    #[derive(Debug, Clone)]
    pub struct Texts {
        pub abbreviations: String,
        pub stop_words: String,
        pub lexicon: String,
        pub overrides: String,
    }

    fn style(pieces: Vec<&'static str>, style: u8, digits: bool) -> String {
        let mut out = String::new();
        for (i, p) in pieces.iter().enumerate() {
            match style % 4 {
                0 => out.push_str(p),
                1 => {
                    if i > 0 {
                        out.push('_');
                    }
                    out.push_str(p);
                }
                2 => {
                    let mut s = p.to_string();
                    if i > 0 || style >= 4 {
                        s[..1].make_ascii_uppercase();
                    }
                    out.push_str(&s);
                }
                _ => out.push_str(&p.to_uppercase()),
            }
        }
        if digits {
            out.push_str("_02");
        }
        out
    }

    pub fn identifier() -> impl Strategy<Value = String> {
        (prop::collection::vec(prop::sample::select(PIECES), 1..4), 0u8..8, any::<bool>())
            .prop_map(|(p, s, d)| style(p, s, d))
    }

    pub fn texts() -> impl Strategy<Value = Texts> {
        (
            prop::collection::btree_set(prop::sample::select(PIECES), 0..12),
            prop::collection::btree_set(prop::sample::select(PIECES), 0..5),
            any::<bool>(),
            prop::collection::btree_set(prop::sample::select(PIECES), 0..3),
        )
            .prop_map(|(lex, stops, abbr, ovr)| Texts {
                abbreviations: if abbr { "id=identity\nno=number\n".into() } else { String::new() },
                stop_words: stops.iter().map(|s| format!("{s}\n")).collect(),
                lexicon: lex
                    .iter()
                    .chain(["identity", "number"].iter())
                    .map(|w| format!("{w}\t1\tC{w}\n{w}\t2\tAlt{w}\n"))
                    .collect(),
                overrides: ovr.iter().map(|w| format!("{w}=Pinned{w}\n")).collect(),
            })
    }

    const TNS: &str = "urn:gen";

    fn type_ref(pick: usize, names: &[QName]) -> QName {
        match pick % (names.len() + 2) {
            0 => QName::xsd("string"),
            1 => QName::new(TNS, "missing"),
            k => names[k - 2].clone(),
        }
    }

    #[derive(Debug, Clone)]
    struct RawType {
        kind: u8,
        anonymous: bool,
        base_name: String,
        members: Vec<(String, usize)>,
    }

    fn raw_type() -> impl Strategy<Value = RawType> {
        (
            0u8..6,
            prop::bool::weighted(0.2),
            identifier(),
            prop::collection::vec((identifier(), any::<usize>()), 1..4),
        )
            .prop_map(|(kind, anonymous, base_name, members)| RawType { kind, anonymous, base_name, members })
    }

    pub fn description(index: usize) -> impl Strategy<Value = WsDescription> {
        (
            prop::collection::vec(raw_type(), 0..5),
            prop::collection::vec((identifier(), any::<usize>(), any::<bool>()), 1..7),
        )
            .prop_map(move |(raw_types, params)| {
                // Digits separate words, so the suffix only makes names unique.
                let names: Vec<QName> = raw_types
                    .iter()
                    .enumerate()
                    .map(|(i, raw)| QName::new(TNS, format!("{}_{i}", raw.base_name)))
                    .collect();
                let mut types = BTreeMap::new();
                for (raw, name) in raw_types.into_iter().zip(&names) {
                    let name = name.clone();
                    let kind = match raw.kind {
                        0..=2 => TypeKind::ComplexSequence,
                        3 => TypeKind::CustomSimple,
                        4 => TypeKind::EmptyComplex,
                        _ => TypeKind::ComplexOther,
                    };
                    let subparameters = if kind == TypeKind::ComplexSequence {
                        raw.members
                            .into_iter()
                            .map(|(m, pick)| SubParameter { name: m, type_ref: type_ref(pick, &names) })
                            .collect()
                    } else {
                        vec![]
                    };
                    types.insert(name.clone(), TypeDefinition { name, kind, subparameters, anonymous: raw.anonymous });
                }
                let mut inputs = Vec::new();
                let mut outputs = Vec::new();
                for (j, (pname, pick, out)) in params.into_iter().enumerate() {
                    let direction = if out { Direction::Output } else { Direction::Input };
                    let p = Parameter {
                        name: pname.clone(),
                        direction,
                        type_ref: type_ref(pick, &names),
                        param_id: format!("gen{index}#op/{j}"),
                        declaration: Declaration::Part { message: "m".into(), part: pname },
                    };
                    if out { outputs.push(p) } else { inputs.push(p) }
                }
                WsDescription {
                    source_id: format!("gen{index}"),
                    operations: vec![Operation { name: "op".into(), inputs, outputs }],
                    types,
                }
            })
    }

    pub fn corpus() -> impl Strategy<Value = Vec<WsDescription>> {
        (1usize..5).prop_flat_map(|n| (0..n).map(description).collect::<Vec<_>>())
    }
}
