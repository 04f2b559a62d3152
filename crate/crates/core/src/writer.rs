//! SAWSDL output and the JSON annotation report.
//!
//! Annotated copies are produced by splicing attributes into the original
//! bytes rather than re-serializing the tree, so comments, formatting and
//! everything the parser skipped survive untouched.

use std::collections::HashMap;

use roxmltree::{Node, NodeId};
use serde::Serialize;
use thiserror::Error;

use crate::ingest::{decode, is_wsdl, is_xsd, parse_document, parse_wsdl, schemas, target_namespace, Corpus, IngestError};
use crate::metrics::SuccessRate;
use crate::model::{Annotation, Declaration, Direction, Parameter, SourceKind, Word, WsDescription};

pub const SAWSDL_NS: &str = "http://www.w3.org/ns/sawsdl";
const MODEL_REFERENCE: &str = "modelReference";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WriteError {
    #[error("document does not match its description: {0}")]
    StructureMismatch(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("invalid URI prefix {0:?}: expected an absolute URI")]
    InvalidUriPrefix(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriterConfig {
    uri_prefix: String,
    pub report_pretty: bool,
}

impl WriterConfig {
    pub fn new(uri_prefix: impl Into<String>) -> Result<Self, WriteError> {
        let uri_prefix = uri_prefix.into();
        if !is_absolute_uri(&uri_prefix) {
            return Err(WriteError::InvalidUriPrefix(uri_prefix));
        }
        Ok(WriterConfig {
            uri_prefix,
            report_pretty: true,
        })
    }

    pub fn uri_prefix(&self) -> &str {
        &self.uri_prefix
    }
}

impl Default for WriterConfig {
    fn default() -> Self {
        WriterConfig::new(crate::defaults::URI_PREFIX).expect("default prefix is valid")
    }
}

/// `scheme:rest` with an RFC 3986 scheme and no characters that would need
/// escaping inside a space-separated attribute list.
fn is_absolute_uri(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c))
        && !rest.is_empty()
        && !s.chars().any(|c| c.is_whitespace() || c.is_control() || "<>\"{}|\\^`".contains(c))
}

fn escape_attribute(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn find_declaration<'a, 'i>(root: Node<'a, 'i>, declaration: &Declaration) -> Option<Node<'a, 'i>> {
    match declaration {
        Declaration::Part { message, part } => root
            .children()
            .filter(|n| is_wsdl(*n, "message") && n.attribute("name") == Some(message.as_str()))
            .flat_map(|m| m.children())
            .find(|n| is_wsdl(*n, "part") && n.attribute("name") == Some(part.as_str())),
        Declaration::Element(name) => schemas(root)
            .filter(|s| target_namespace(*s) == name.namespace_uri)
            .flat_map(|s| s.children())
            .find(|n| is_xsd(*n, "element") && n.attribute("name") == Some(name.local_name.as_str())),
    }
}

/// Byte offset just past an element's tag name in `<tag ...`.
fn after_tag_name(text: &str, node: Node) -> usize {
    let start = node.range().start + 1;
    let len = text[start..]
        .find(|c: char| c.is_whitespace() || c == '/' || c == '>')
        .unwrap_or(0);
    start + len
}

fn choose_prefix(root: Node, targets: &[Node]) -> (String, bool) {
    if let Some(existing) = root.lookup_prefix(SAWSDL_NS).filter(|p| !p.is_empty()) {
        let usable = targets
            .iter()
            .all(|t| t.lookup_namespace_uri(Some(existing)) == Some(SAWSDL_NS));
        if usable {
            return (existing.to_string(), false);
        }
    }
    let used: std::collections::HashSet<&str> = root
        .descendants()
        .filter(Node::is_element)
        .flat_map(|n| n.namespaces().filter_map(|ns| ns.name()).collect::<Vec<_>>())
        .collect();
    let prefix = std::iter::once("sawsdl".to_string())
        .chain((2..).map(|n| format!("sawsdl{n}")))
        .find(|p| !used.contains(p.as_str()))
        .expect("unbounded candidates");
    (prefix, true)
}

/// Adds `modelReference` attributes for every annotated parameter.
///
/// Concepts found through subparameters are attached to the root
/// parameter's declaration. Existing references are kept and extended
/// without duplicates, so re-writing an output is a no-op.
pub fn write_sawsdl(
    original: &[u8],
    desc: &WsDescription,
    annotations: &[Annotation],
    config: &WriterConfig,
) -> Result<Vec<u8>, WriteError> {
    let reparsed = parse_wsdl(&desc.source_id, original)?.description;
    if reparsed.operations != desc.operations {
        return Err(WriteError::StructureMismatch(format!(
            "operations of {} differ from the supplied description",
            desc.source_id
        )));
    }

    let (text, offset) = decode(original)?;
    let doc = parse_document(text)?;
    let root = doc.root_element();
    let params: HashMap<&str, &Parameter> = desc.parameters().map(|p| (p.param_id.as_str(), p)).collect();

    let mut targets: Vec<(NodeId, Vec<String>)> = Vec::new();
    for annotation in annotations.iter().filter(|a| a.is_annotated()) {
        let param = params.get(annotation.param_id.as_str()).ok_or_else(|| {
            WriteError::StructureMismatch(format!("unknown parameter {}", annotation.param_id))
        })?;
        let node = find_declaration(root, &param.declaration).ok_or_else(|| {
            WriteError::StructureMismatch(format!("declaration of {} not found", param.param_id))
        })?;
        let slot = match targets.iter().position(|(id, _)| *id == node.id()) {
            Some(i) => &mut targets[i].1,
            None => {
                targets.push((node.id(), Vec::new()));
                &mut targets.last_mut().expect("just pushed").1
            }
        };
        for concept in annotation.concepts() {
            let uri = format!("{}{}", config.uri_prefix, concept.id);
            if !slot.contains(&uri) {
                slot.push(uri);
            }
        }
    }

    let nodes: Vec<Node> = targets.iter().map(|(id, _)| doc.get_node(*id).expect("node of this document")).collect();
    let (prefix, declare) = choose_prefix(root, &nodes);

    // (position, removed length, insertion)
    let mut edits: Vec<(usize, usize, String)> = Vec::new();
    if declare {
        edits.push((after_tag_name(text, root), 0, format!(" xmlns:{prefix}=\"{SAWSDL_NS}\"")));
    }
    for (node, (_, uris)) in nodes.iter().zip(&targets) {
        let existing = node
            .attributes()
            .find(|a| a.namespace() == Some(SAWSDL_NS) && a.name() == MODEL_REFERENCE);
        match existing {
            Some(attr) => {
                let mut merged: Vec<&str> = attr.value().split_whitespace().collect();
                for uri in uris {
                    if !merged.contains(&uri.as_str()) {
                        merged.push(uri);
                    }
                }
                let range = attr.range_value();
                edits.push((range.start, range.len(), escape_attribute(&merged.join(" "))));
            }
            None => edits.push((
                after_tag_name(text, *node),
                0,
                format!(" {prefix}:{MODEL_REFERENCE}=\"{}\"", escape_attribute(&uris.join(" "))),
            )),
        }
    }

    // Apply back to front so earlier offsets stay valid.
    edits.sort_by_key(|(pos, _, _)| std::cmp::Reverse(*pos));
    let mut out = original.to_vec();
    for (pos, removed, insertion) in edits {
        let at = offset + pos;
        out.splice(at..at + removed, insertion.into_bytes());
    }
    Ok(out)
}

#[derive(Serialize)]
struct EntryRecord<'a> {
    concept: &'a str,
    ontology: &'a str,
    word: &'a Word,
    source: SourceKind,
    path: &'a [String],
    depth: usize,
}

#[derive(Serialize)]
struct ParameterRecord<'a> {
    param_id: &'a str,
    direction: Direction,
    status: &'static str,
    entries: Vec<EntryRecord<'a>>,
}

#[derive(Serialize)]
struct Summary {
    total: usize,
    annotated: usize,
    rate: f64,
    input: SuccessRate,
    output: SuccessRate,
}

#[derive(Serialize)]
struct SkipRecord<'a> {
    source: &'a str,
    error: String,
}

#[derive(Serialize)]
struct WarningRecord<'a> {
    source: &'a str,
    message: String,
}

#[derive(Serialize)]
struct Report<'a> {
    counting: &'static str,
    summary: Summary,
    parameters: Vec<ParameterRecord<'a>>,
    skipped: Vec<SkipRecord<'a>>,
    warnings: Vec<WarningRecord<'a>>,
}

/// Serializes annotations as JSON. `annotations[i]` belongs to
/// `corpus.descriptions[i]`, parameter for parameter.
///
/// Field order is fixed by the record types, so the same input always
/// yields the same bytes.
pub fn write_report(corpus: &Corpus, annotations: &[Vec<Annotation>], pretty: bool) -> Vec<u8> {
    let mut parameters = Vec::new();
    let mut counts = [(0usize, 0usize); 2];
    for (desc, anns) in corpus.descriptions.iter().zip(annotations) {
        for (param, ann) in desc.parameters().zip(anns) {
            let slot = &mut counts[(param.direction == Direction::Output) as usize];
            slot.1 += 1;
            slot.0 += ann.is_annotated() as usize;
            parameters.push(ParameterRecord {
                param_id: &param.param_id,
                direction: param.direction,
                status: if ann.is_annotated() { "annotated" } else { "failed" },
                entries: ann
                    .entries
                    .iter()
                    .map(|e| EntryRecord {
                        concept: &e.concept.id,
                        ontology: &e.concept.ontology,
                        word: &e.word,
                        source: e.source,
                        path: &e.path,
                        depth: e.depth,
                    })
                    .collect(),
            });
        }
    }
    let all = SuccessRate::new(counts[0].0 + counts[1].0, counts[0].1 + counts[1].1);
    let report = Report {
        counting: "per-occurrence",
        summary: Summary {
            total: all.total,
            annotated: all.annotated,
            rate: all.rate,
            input: SuccessRate::new(counts[0].0, counts[0].1),
            output: SuccessRate::new(counts[1].0, counts[1].1),
        },
        parameters,
        skipped: corpus
            .skipped
            .iter()
            .map(|s| SkipRecord {
                source: &s.source_id,
                error: s.error.to_string(),
            })
            .collect(),
        warnings: corpus
            .warnings
            .iter()
            .map(|(source, w)| WarningRecord {
                source,
                message: w.to_string(),
            })
            .collect(),
    };
    let mut bytes = if pretty {
        serde_json::to_vec_pretty(&report)
    } else {
        serde_json::to_vec(&report)
    }
    .expect("report serializes");
    bytes.push(b'\n');
    bytes
}
