//! Staged concept search for a single parameter.
//!
//! The parameter name is tried first. If it yields no concept, the custom
//! type name is tried, then the type structure is walked one level at a
//! time: all member names of a level, then all custom member type names of
//! that level, then the next level. The search stops at the first step that
//! produces at least one concept, and every entry of the resulting
//! [`Annotation`] comes from that step.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::associate::{associate_words, Lexicon, OverrideMap};
use crate::ingest::Corpus;
use crate::model::{
    Annotation, AnnotationEntry, Parameter, QName, SourceKind, SubParameter, TypeDefinition, TypeKind,
    Word, WsDescription,
};
use crate::preprocess::{preprocess, PreprocessConfig};

pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplorerConfig {
    /// Deepest subparameter level visited.
    pub max_depth: usize,
    /// Try the parameter's own custom type name after the name fails.
    pub type_names_enabled: bool,
    /// Walk complex type structure after depth 0 fails.
    pub type_explorer_enabled: bool,
}

impl Default for ExplorerConfig {
    fn default() -> Self {
        ExplorerConfig {
            max_depth: DEFAULT_MAX_DEPTH,
            type_names_enabled: true,
            type_explorer_enabled: true,
        }
    }
}

impl ExplorerConfig {
    /// Parameter names only: no type information at all.
    pub fn names_only() -> Self {
        ExplorerConfig {
            type_names_enabled: false,
            type_explorer_enabled: false,
            ..ExplorerConfig::default()
        }
    }
}

/// Outcome of one search, with every word that was looked up on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub annotation: Annotation,
    pub consulted: Vec<Word>,
}

/// Everything a search reads. Cheap to copy; shares its tables.
#[derive(Debug, Clone, Copy)]
pub struct Annotator<'a> {
    pub lexicon: &'a Lexicon,
    pub overrides: &'a OverrideMap,
    pub preprocess: &'a PreprocessConfig,
    pub explorer: ExplorerConfig,
}

struct Search<'s> {
    annotator: Annotator<'s>,
    consulted: Vec<Word>,
    entries: Vec<AnnotationEntry>,
}

impl Search<'_> {
    /// Preprocesses and associates one name; hits are added as entries.
    fn try_name(&mut self, raw: &str, source: SourceKind, path: &[String]) {
        let words = preprocess(raw, self.annotator.preprocess);
        let hits = associate_words(&words, self.annotator.lexicon, self.annotator.overrides);
        self.consulted.extend(words);
        self.entries.extend(hits.into_iter().map(|(word, concept)| AnnotationEntry {
            concept,
            word,
            source,
            path: path.to_vec(),
            depth: path.len(),
        }));
    }

    fn found(&self) -> bool {
        !self.entries.is_empty()
    }
}

impl<'a> Annotator<'a> {
    pub fn new(
        lexicon: &'a Lexicon,
        overrides: &'a OverrideMap,
        preprocess: &'a PreprocessConfig,
        explorer: ExplorerConfig,
    ) -> Self {
        Annotator {
            lexicon,
            overrides,
            preprocess,
            explorer,
        }
    }

    pub fn annotate_parameter(&self, param: &Parameter, desc: &WsDescription) -> Annotation {
        self.explore_parameter(param, desc).annotation
    }

    pub fn explore_parameter(&self, param: &Parameter, desc: &WsDescription) -> Exploration {
        let mut search = Search {
            annotator: *self,
            consulted: Vec::new(),
            entries: Vec::new(),
        };
        self.run(&mut search, param, desc);
        Exploration {
            annotation: Annotation {
                param_id: param.param_id.clone(),
                entries: search.entries,
            },
            consulted: search.consulted,
        }
    }

    fn run(&self, search: &mut Search, param: &Parameter, desc: &WsDescription) {
        search.try_name(&param.name, SourceKind::ParameterName, &[]);
        if search.found() {
            return;
        }

        let root = desc.lookup_type(&param.type_ref);
        if self.explorer.type_names_enabled {
            if let Some(def) = root.filter(|d| d.has_custom_name()) {
                search.try_name(&def.name.local_name, SourceKind::TypeName, &[]);
                if search.found() {
                    return;
                }
            }
        }
        if !self.explorer.type_explorer_enabled {
            return;
        }
        let Some(root) = root.filter(|d| d.kind == TypeKind::ComplexSequence) else {
            return;
        };

        let mut visited: HashSet<&QName> = HashSet::from([&root.name]);
        let mut frontier: Vec<(Vec<String>, &SubParameter)> = root
            .subparameters
            .iter()
            .map(|sub| (vec![sub.name.clone()], sub))
            .collect();
        let mut depth = 1;
        while !frontier.is_empty() && depth <= self.explorer.max_depth {
            for (path, sub) in &frontier {
                if !sub.name.is_empty() {
                    search.try_name(&sub.name, SourceKind::SubParameterName, path);
                }
            }
            if search.found() {
                return;
            }

            let member_types: Vec<Option<&TypeDefinition>> = frontier
                .iter()
                .map(|(_, sub)| desc.lookup_type(&sub.type_ref))
                .collect();
            for ((path, _), def) in frontier.iter().zip(&member_types) {
                if let Some(def) = def.filter(|d| d.has_custom_name()) {
                    search.try_name(&def.name.local_name, SourceKind::SubParameterTypeName, path);
                }
            }
            if search.found() {
                return;
            }

            let mut next = Vec::new();
            for ((path, _), def) in frontier.iter().zip(&member_types) {
                let Some(def) = def.filter(|d| d.kind == TypeKind::ComplexSequence) else {
                    continue;
                };
                if !visited.insert(&def.name) {
                    continue;
                }
                for child in &def.subparameters {
                    let mut child_path = path.clone();
                    child_path.push(child.name.clone());
                    next.push((child_path, child));
                }
            }
            frontier = next;
            depth += 1;
        }
    }

    /// One annotation per parameter, in document order.
    pub fn annotate_description(&self, desc: &WsDescription) -> Vec<Annotation> {
        desc.parameters()
            .map(|p| self.annotate_parameter(p, desc))
            .collect()
    }

    pub fn explore_description(&self, desc: &WsDescription) -> Vec<Exploration> {
        desc.parameters()
            .map(|p| self.explore_parameter(p, desc))
            .collect()
    }

    /// Annotates every description in parallel; output order follows input
    /// order.
    pub fn annotate_corpus(&self, corpus: &Corpus) -> Vec<Vec<Annotation>> {
        corpus
            .descriptions
            .par_iter()
            .map(|d| self.annotate_description(d))
            .collect()
    }
}

/// Free-function form of [`Annotator::annotate_parameter`].
pub fn annotate_parameter(
    param: &Parameter,
    desc: &WsDescription,
    config: &ExplorerConfig,
    lexicon: &Lexicon,
    overrides: &OverrideMap,
    preprocess_config: &PreprocessConfig,
) -> Annotation {
    Annotator::new(lexicon, overrides, preprocess_config, *config).annotate_parameter(param, desc)
}

pub fn annotate_description(
    desc: &WsDescription,
    config: &ExplorerConfig,
    lexicon: &Lexicon,
    overrides: &OverrideMap,
    preprocess_config: &PreprocessConfig,
) -> Vec<Annotation> {
    Annotator::new(lexicon, overrides, preprocess_config, *config).annotate_description(desc)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::associate::load_lexicon;
    use crate::model::{Concept, Declaration, Direction};

    const TNS: &str = "urn:t";

    fn q(local: &str) -> QName {
        QName::new(TNS, local)
    }

    fn complex(name: &str, members: &[(&str, QName)]) -> TypeDefinition {
        TypeDefinition {
            name: q(name),
            kind: if members.is_empty() {
                TypeKind::EmptyComplex
            } else {
                TypeKind::ComplexSequence
            },
            subparameters: members
                .iter()
                .map(|(n, t)| SubParameter {
                    name: n.to_string(),
                    type_ref: t.clone(),
                })
                .collect(),
            anonymous: false,
        }
    }

    fn desc_with(name: &str, type_ref: QName, types: Vec<TypeDefinition>) -> (WsDescription, Parameter) {
        let param = Parameter {
            name: name.into(),
            direction: Direction::Input,
            type_ref,
            param_id: format!("t#op/input/{name}"),
            declaration: Declaration::Part {
                message: "m".into(),
                part: name.into(),
            },
        };
        let desc = WsDescription {
            source_id: "t".into(),
            operations: vec![crate::model::Operation {
                name: "op".into(),
                inputs: vec![param.clone()],
                outputs: vec![],
            }],
            types: types.into_iter().map(|t| (t.name.clone(), t)).collect::<BTreeMap<_, _>>(),
        };
        (desc, param)
    }

    fn lexicon(lines: &str) -> Lexicon {
        load_lexicon(lines.as_bytes(), "SUMO").unwrap()
    }

    fn stops(list: &[&str]) -> PreprocessConfig {
        PreprocessConfig::new(BTreeMap::new(), list.iter().map(|s| s.to_string()).collect())
    }

    fn category_with_detail_type() -> (WsDescription, Parameter) {
        desc_with(
            "category",
            q("categoryDetail"),
            vec![complex(
                "categoryDetail",
                &[("singer", QName::xsd("string")), ("composer", QName::xsd("string"))],
            )],
        )
    }

    #[test]
    fn nested_member_names_annotate_parent() {
        let (desc, param) = category_with_detail_type();
        let lex = Lexicon::demo();
        let none = OverrideMap::new();
        let cfg = stops(&["category"]);
        let ann = Annotator::new(&lex, &none, &cfg, ExplorerConfig::default()).annotate_parameter(&param, &desc);
        assert_eq!(ann.entries.len(), 2);
        for (entry, (name, concept)) in ann.entries.iter().zip([("singer", "Musician"), ("composer", "Artist")]) {
            assert_eq!(entry.source, SourceKind::SubParameterName);
            assert_eq!(entry.depth, 1);
            assert_eq!(entry.path, [name]);
            assert_eq!(entry.concept, Concept::new(concept, "SUMO"));
        }

        let ann = Annotator::new(&lex, &none, &stops(&[]), ExplorerConfig::default())
            .annotate_parameter(&param, &desc);
        assert_eq!(ann.level(), Some((SourceKind::ParameterName, 0)));
    }

    #[test]
    fn name_hit_stops_search() {
        let (desc, param) = desc_with("password", QName::xsd("string"), vec![]);
        let lex = Lexicon::demo();
        let none = OverrideMap::new();
        let cfg = stops(&[]);
        let ann = annotate_parameter(&param, &desc, &ExplorerConfig::default(), &lex, &none, &cfg);
        assert_eq!(ann.entries.len(), 1);
        assert_eq!(ann.entries[0].concept.id, "LinguisticExpression");
        assert_eq!(ann.level(), Some((SourceKind::ParameterName, 0)));
        assert!(ann.entries[0].path.is_empty());
    }

    #[test]
    fn builtin_miss_fails() {
        let (desc, param) = desc_with("x", QName::xsd("string"), vec![]);
        let lex = Lexicon::demo();
        let none = OverrideMap::new();
        let ann = annotate_parameter(&param, &desc, &ExplorerConfig::default(), &lex, &none, &stops(&[]));
        assert!(!ann.is_annotated());
    }

    #[test]
    fn empty_complex_fails() {
        let (desc, param) = desc_with("data", q("DataBody"), vec![complex("DataBody", &[])]);
        let lex = lexicon("data\t1\tX\nbody\t1\tY\n");
        let none = OverrideMap::new();
        let ann = annotate_parameter(&param, &desc, &ExplorerConfig::default(), &lex, &none, &stops(&["data", "body"]));
        assert!(!ann.is_annotated());
    }

    #[test]
    fn type_name_after_name_words_without_concepts() {
        let (desc, param) = desc_with("qwerty", q("CityInfo"), vec![complex("CityInfo", &[("zip", QName::xsd("string"))])]);
        let lex = Lexicon::demo();
        let none = OverrideMap::new();
        let cfg = stops(&[]);
        let ann = annotate_parameter(&param, &desc, &ExplorerConfig::default(), &lex, &none, &cfg);
        assert_eq!(ann.level(), Some((SourceKind::TypeName, 0)));
        assert_eq!(ann.entries[0].concept.id, "City");

        let off = ExplorerConfig::names_only();
        assert!(!annotate_parameter(&param, &desc, &off, &lex, &none, &cfg).is_annotated());
    }

    #[test]
    fn member_type_names_then_second_level() {
        let types = vec![
            complex("Wrapper", &[("a", q("Hotel")), ("b", q("Inner"))]),
            TypeDefinition {
                name: q("Hotel"),
                kind: TypeKind::CustomSimple,
                subparameters: vec![],
                anonymous: false,
            },
            complex("Inner", &[("city", QName::xsd("string"))]),
        ];
        let (desc, param) = desc_with("x", q("Wrapper"), types);
        let lex = Lexicon::demo();
        let none = OverrideMap::new();
        let cfg = stops(&["a", "b", "wrapper"]);
        let ann = annotate_parameter(&param, &desc, &ExplorerConfig::default(), &lex, &none, &cfg);
        assert_eq!(ann.level(), Some((SourceKind::SubParameterTypeName, 1)));
        assert_eq!(ann.entries[0].path, ["a"]);
        assert_eq!(ann.entries[0].concept.id, "Hotel");

        // Without the custom simple type, level 2 is reached through Inner.
        let mut desc2 = desc.clone();
        desc2.types.remove(&q("Hotel"));
        let ann = annotate_parameter(&param, &desc2, &ExplorerConfig::default(), &lex, &none, &cfg);
        assert_eq!(ann.level(), Some((SourceKind::SubParameterName, 2)));
        assert_eq!(ann.entries[0].path, ["b", "city"]);

        let shallow = ExplorerConfig { max_depth: 1, ..ExplorerConfig::default() };
        assert!(!annotate_parameter(&param, &desc2, &shallow, &lex, &none, &cfg).is_annotated());
    }

    #[test]
    fn cyclic_types_terminate() {
        let types = vec![
            complex("Node", &[("next", q("Node")), ("other", q("Peer"))]),
            complex("Peer", &[("back", q("Node"))]),
        ];
        let (desc, param) = desc_with("x", q("Node"), types);
        let lex = lexicon("");
        let none = OverrideMap::new();
        let cfg = ExplorerConfig { max_depth: usize::MAX, ..ExplorerConfig::default() };
        let exploration = Annotator::new(&lex, &none, &stops(&[]), cfg).explore_parameter(&param, &desc);
        assert!(!exploration.annotation.is_annotated());
        // x; Node; level 1: next other, Node Peer; level 2: back, Node.
        let words: Vec<_> = exploration.consulted.iter().map(Word::as_str).collect();
        assert_eq!(words, ["x", "node", "next", "other", "node", "peer", "back", "node"]);
    }

    #[test]
    fn overrides_apply_at_every_level() {
        let (desc, param) = category_with_detail_type();
        let lex = Lexicon::demo();
        let mut ovr = OverrideMap::new();
        ovr.insert("singer", Concept::new("Human", "SUMO"));
        let ann = annotate_parameter(&param, &desc, &ExplorerConfig::default(), &lex, &ovr, &stops(&["category"]));
        assert_eq!(ann.entries[0].concept.id, "Human");
    }

    #[test]
    fn annotate_description_follows_document_order() {
        let (desc, _) = category_with_detail_type();
        let lex = Lexicon::demo();
        let none = OverrideMap::new();
        let cfg = stops(&[]);
        let anns = annotate_description(&desc, &ExplorerConfig::default(), &lex, &none, &cfg);
        assert_eq!(anns.len(), 1);
        let empty = WsDescription {
            source_id: "e".into(),
            operations: vec![],
            types: BTreeMap::new(),
        };
        assert!(annotate_description(&empty, &ExplorerConfig::default(), &lex, &none, &cfg).is_empty());
    }
}
