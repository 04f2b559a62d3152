//! WSDL 1.1 reader.
//!
//! Extracts every portType operation's input and output message parts as
//! [`Parameter`]s and every type declared in the inline `wsdl:types`
//! schemas as a [`TypeDefinition`]. Bindings, services and policies are
//! skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use roxmltree::{Document, Node, ParsingOptions};
use thiserror::Error;

use crate::model::{
    is_xsd_namespace, Declaration, Direction, Operation, Parameter, QName, SubParameter,
    TypeDefinition, TypeKind, WsDescription,
};

pub const WSDL_NS: &str = "http://schemas.xmlsoap.org/wsdl/";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("not a WSDL 1.1 document (root element is {0})")]
    NotWsdl(String),
    #[error("cannot read file: {0}")]
    Io(String),
}

/// Non-fatal problems found while parsing a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    /// The operation was skipped.
    MissingMessage { operation: String, message: String },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::MissingMessage { operation, message } => write!(
                f,
                "operation {operation:?} references undeclared message {message:?}; skipped"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParsedWsdl {
    pub description: WsDescription,
    pub warnings: Vec<IngestWarning>,
    /// Namespaces named by `xsd:import` in the inline schemas.
    pub imported_namespaces: BTreeSet<String>,
}

/// Decodes the document text, tolerating a UTF-8 byte order mark.
///
/// Returns the text and the byte offset of its start within `document`.
pub(crate) fn decode(document: &[u8]) -> Result<(&str, usize), IngestError> {
    const BOM: &[u8] = b"\xEF\xBB\xBF";
    let (offset, body) = match document.strip_prefix(BOM) {
        Some(rest) => (BOM.len(), rest),
        None => (0, document),
    };
    let text = std::str::from_utf8(body)
        .map_err(|e| IngestError::MalformedXml(format!("invalid UTF-8: {e}")))?;
    Ok((text, offset))
}

pub(crate) fn parse_document(text: &str) -> Result<Document<'_>, IngestError> {
    let options = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    Document::parse_with_options(text, options).map_err(|e| IngestError::MalformedXml(e.to_string()))
}

pub(crate) fn is_wsdl(node: Node, local: &str) -> bool {
    node.is_element() && node.tag_name().name() == local && node.tag_name().namespace() == Some(WSDL_NS)
}

pub(crate) fn is_xsd(node: Node, local: &str) -> bool {
    node.is_element()
        && node.tag_name().name() == local
        && node.tag_name().namespace().is_some_and(is_xsd_namespace)
}

pub(crate) fn schemas<'a, 'i>(root: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    root.children()
        .filter(|n| is_wsdl(*n, "types"))
        .flat_map(|types| types.children().filter(|n| is_xsd(*n, "schema")))
}

pub(crate) fn target_namespace(schema: Node) -> String {
    schema.attribute("targetNamespace").unwrap_or_default().to_string()
}

/// Resolves a prefixed attribute value such as `tns:categoryDetail` against
/// the namespace bindings in scope at `node`.
fn resolve_qname(node: Node, value: &str) -> Option<QName> {
    let value = value.trim();
    let (prefix, local) = match value.split_once(':') {
        Some((p, l)) => (Some(p), l),
        None => (None, value),
    };
    if local.is_empty() {
        return None;
    }
    let namespace = match node.lookup_namespace_uri(prefix) {
        Some(uri) => uri.to_string(),
        None => match prefix {
            Some(p) => format!("urn:unbound-prefix:{p}"),
            None => String::new(),
        },
    };
    Some(QName::new(namespace, local))
}

fn any_type() -> QName {
    QName::xsd("anyType")
}

/// A reference that can never resolve: `#` is not legal in an NCName.
fn dangling(name: &QName) -> QName {
    QName::new(name.namespace_uri.clone(), format!("{}#unresolved", name.local_name))
}

#[derive(Clone, Copy)]
struct Located<'a, 'i> {
    node: Node<'a, 'i>,
    target_ns: &'a str,
}

struct SchemaReader<'a, 'i> {
    elements: BTreeMap<QName, Located<'a, 'i>>,
    named_types: Vec<(QName, Located<'a, 'i>)>,
    /// Global element → (parameter name, type reference).
    element_cache: HashMap<QName, (String, QName)>,
    types: BTreeMap<QName, TypeDefinition>,
    anonymous_count: usize,
}

impl<'a, 'i> SchemaReader<'a, 'i> {
    fn new(schemas: &'a [(Node<'a, 'i>, String)]) -> Self {
        let mut elements = BTreeMap::new();
        let mut named_types = Vec::new();
        for (schema, tns) in schemas {
            for child in schema.children().filter(Node::is_element) {
                let Some(name) = child.attribute("name") else {
                    continue;
                };
                let qname = QName::new(tns.as_str(), name);
                let located = Located {
                    node: child,
                    target_ns: tns.as_str(),
                };
                if is_xsd(child, "element") {
                    elements.entry(qname).or_insert(located);
                } else if is_xsd(child, "complexType") || is_xsd(child, "simpleType") {
                    named_types.push((qname, located));
                }
            }
        }
        SchemaReader {
            elements,
            named_types,
            element_cache: HashMap::new(),
            types: BTreeMap::new(),
            anonymous_count: 0,
        }
    }

    fn read_all(mut self) -> BTreeMap<QName, TypeDefinition> {
        for (name, located) in std::mem::take(&mut self.named_types) {
            if self.types.contains_key(&name) {
                continue;
            }
            self.define(located, name, false);
        }
        let globals: Vec<QName> = self.elements.keys().cloned().collect();
        for name in globals {
            self.global_element(&name);
        }
        self.types
    }

    fn define(&mut self, located: Located<'a, 'i>, name: QName, anonymous: bool) {
        let def = if is_xsd(located.node, "simpleType") {
            TypeDefinition {
                name: name.clone(),
                kind: TypeKind::CustomSimple,
                subparameters: Vec::new(),
                anonymous,
            }
        } else {
            // Register first so recursive references see the name.
            self.types.insert(
                name.clone(),
                TypeDefinition {
                    name: name.clone(),
                    kind: TypeKind::ComplexOther,
                    subparameters: Vec::new(),
                    anonymous,
                },
            );
            self.complex_type(located, name.clone(), anonymous)
        };
        self.types.insert(name, def);
    }

    fn complex_type(&mut self, located: Located<'a, 'i>, name: QName, anonymous: bool) -> TypeDefinition {
        let content: Vec<Node> = located
            .node
            .children()
            .filter(|n| {
                n.is_element()
                    && !["annotation", "attribute", "attributeGroup", "anyAttribute"]
                        .iter()
                        .any(|skip| is_xsd(*n, skip))
            })
            .collect();
        let (kind, subparameters) = match content.as_slice() {
            [] => (TypeKind::EmptyComplex, Vec::new()),
            [seq] if is_xsd(*seq, "sequence") => {
                let mut members = Vec::new();
                let mut other_content = false;
                self.sequence_members(Located { node: *seq, target_ns: located.target_ns }, &name, &mut members, &mut other_content);
                match (members.is_empty(), other_content) {
                    (false, _) => (TypeKind::ComplexSequence, members),
                    (true, false) => (TypeKind::EmptyComplex, Vec::new()),
                    (true, true) => (TypeKind::ComplexOther, Vec::new()),
                }
            }
            _ => (TypeKind::ComplexOther, Vec::new()),
        };
        TypeDefinition {
            name,
            kind,
            subparameters,
            anonymous,
        }
    }

    /// Collects `xsd:element` members, flattening nested sequences.
    fn sequence_members(
        &mut self,
        seq: Located<'a, 'i>,
        owner: &QName,
        members: &mut Vec<SubParameter>,
        other_content: &mut bool,
    ) {
        for child in seq.node.children().filter(Node::is_element) {
            if is_xsd(child, "element") {
                let (name, type_ref) =
                    self.local_element(Located { node: child, target_ns: seq.target_ns }, owner);
                members.push(SubParameter { name, type_ref });
            } else if is_xsd(child, "sequence") {
                self.sequence_members(Located { node: child, target_ns: seq.target_ns }, owner, members, other_content);
            } else if !is_xsd(child, "annotation") {
                *other_content = true;
            }
        }
    }

    fn local_element(&mut self, located: Located<'a, 'i>, owner: &QName) -> (String, QName) {
        let node = located.node;
        if let Some(reference) = node.attribute("ref").and_then(|r| resolve_qname(node, r)) {
            return match self.global_element(&reference) {
                Some(found) => found,
                None => (reference.local_name.clone(), dangling(&reference)),
            };
        }
        let name = node.attribute("name").unwrap_or_default().to_string();
        let context = if name.is_empty() { owner.local_name.clone() } else { name.clone() };
        let type_ref = self.element_type(located, &context);
        (name, type_ref)
    }

    fn global_element(&mut self, name: &QName) -> Option<(String, QName)> {
        if let Some(found) = self.element_cache.get(name) {
            return Some(found.clone());
        }
        let located = *self.elements.get(name)?;
        let node = located.node;
        let type_ref = match node.attribute("type").and_then(|t| resolve_qname(node, t)) {
            Some(t) => t,
            None => match self.inline_type(node) {
                Some(inline) => {
                    let anon = self.anonymous_name(located, &name.local_name);
                    self.element_cache
                        .insert(name.clone(), (name.local_name.clone(), anon.clone()));
                    self.define(Located { node: inline, target_ns: located.target_ns }, anon.clone(), true);
                    anon
                }
                None => any_type(),
            },
        };
        let entry = (name.local_name.clone(), type_ref);
        self.element_cache.insert(name.clone(), entry.clone());
        Some(entry)
    }

    fn element_type(&mut self, located: Located<'a, 'i>, context: &str) -> QName {
        let node = located.node;
        if let Some(t) = node.attribute("type") {
            return resolve_qname(node, t).unwrap_or_else(any_type);
        }
        match self.inline_type(node) {
            Some(inline) => {
                let anon = self.anonymous_name(located, context);
                self.define(Located { node: inline, target_ns: located.target_ns }, anon.clone(), true);
                anon
            }
            None => any_type(),
        }
    }

    fn inline_type(&self, element: Node<'a, 'i>) -> Option<Node<'a, 'i>> {
        element
            .children()
            .find(|n| is_xsd(*n, "complexType") || is_xsd(*n, "simpleType"))
    }

    fn anonymous_name(&mut self, located: Located<'a, 'i>, context: &str) -> QName {
        self.anonymous_count += 1;
        QName::new(
            located.target_ns,
            format!("{context}#anon{}", self.anonymous_count),
        )
    }
}

/// Parses one WSDL document.
pub fn parse_wsdl(source_id: &str, document: &[u8]) -> Result<ParsedWsdl, IngestError> {
    let (text, _) = decode(document)?;
    let doc = parse_document(text)?;
    let root = doc.root_element();
    if !is_wsdl(root, "definitions") {
        return Err(IngestError::NotWsdl(format!(
            "{{{}}}{}",
            root.tag_name().namespace().unwrap_or_default(),
            root.tag_name().name()
        )));
    }

    let schema_nodes: Vec<(Node, String)> = schemas(root).map(|s| (s, target_namespace(s))).collect();
    let imported_namespaces = schema_nodes
        .iter()
        .flat_map(|(s, _)| s.children().filter(|n| is_xsd(*n, "import")))
        .filter_map(|n| n.attribute("namespace"))
        .map(str::to_string)
        .collect();

    let mut reader = SchemaReader::new(&schema_nodes);
    let mut messages: HashMap<&str, Vec<Node>> = HashMap::new();
    for message in root.children().filter(|n| is_wsdl(*n, "message")) {
        if let Some(name) = message.attribute("name") {
            let parts = message.children().filter(|n| is_wsdl(*n, "part")).collect();
            messages.entry(name).or_insert(parts);
        }
    }

    let mut warnings = Vec::new();
    let mut operations = Vec::new();
    let mut ids = HashSet::new();
    for port_type in root.children().filter(|n| is_wsdl(*n, "portType")) {
        for op in port_type.children().filter(|n| is_wsdl(*n, "operation")) {
            let Some(op_name) = op.attribute("name").filter(|n| !n.is_empty()) else {
                continue;
            };
            let mut operation = Operation {
                name: op_name.to_string(),
                inputs: Vec::new(),
                outputs: Vec::new(),
            };
            let mut missing = None;
            for io in op.children().filter(|n| is_wsdl(*n, "input") || is_wsdl(*n, "output")) {
                let direction = if io.tag_name().name() == "input" {
                    Direction::Input
                } else {
                    Direction::Output
                };
                let message_ref = io.attribute("message").unwrap_or_default();
                let local = message_ref.rsplit(':').next().unwrap_or_default();
                let Some(parts) = messages.get(local) else {
                    missing = Some(message_ref.to_string());
                    break;
                };
                for part in parts {
                    let param = part_parameter(&mut reader, *part, local, direction, source_id, op_name, &mut ids);
                    match direction {
                        Direction::Input => operation.inputs.push(param),
                        Direction::Output => operation.outputs.push(param),
                    }
                }
            }
            match missing {
                Some(message) => warnings.push(IngestWarning::MissingMessage {
                    operation: op_name.to_string(),
                    message,
                }),
                None => operations.push(operation),
            }
        }
    }

    Ok(ParsedWsdl {
        description: WsDescription {
            source_id: source_id.to_string(),
            operations,
            types: reader.read_all(),
        },
        warnings,
        imported_namespaces,
    })
}

fn part_parameter(
    reader: &mut SchemaReader,
    part: Node,
    message: &str,
    direction: Direction,
    source_id: &str,
    operation: &str,
    ids: &mut HashSet<String>,
) -> Parameter {
    let part_name = part.attribute("name").unwrap_or_default().to_string();
    let part_decl = Declaration::Part {
        message: message.to_string(),
        part: part_name.clone(),
    };
    let (name, type_ref, declaration) =
        if let Some(element) = part.attribute("element").and_then(|e| resolve_qname(part, e)) {
            match reader.global_element(&element) {
                Some((name, type_ref)) => (name, type_ref, Declaration::Element(element)),
                None => (element.local_name.clone(), dangling(&element), part_decl),
            }
        } else {
            let type_ref = part
                .attribute("type")
                .and_then(|t| resolve_qname(part, t))
                .unwrap_or_else(any_type);
            (part_name, type_ref, part_decl)
        };
    let base = format!("{source_id}#{operation}/{}/{name}", direction.as_str());
    let mut param_id = base.clone();
    let mut n = 1;
    while !ids.insert(param_id.clone()) {
        n += 1;
        param_id = format!("{base}~{n}");
    }
    Parameter {
        name,
        direction,
        type_ref,
        param_id,
        declaration,
    }
}

/// Convenience wrapper over [`WsDescription::resolve_type`].
pub fn resolve_type(description: &WsDescription, type_ref: &QName) -> TypeDefinition {
    description.resolve_type(type_ref)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub source_id: String,
    pub error: IngestError,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("no input file could be parsed ({} skipped)", skipped.len())]
    EmptyCorpus { skipped: Vec<SkippedFile> },
}

/// A batch of parsed descriptions, in input order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub descriptions: Vec<WsDescription>,
    /// Input bytes exactly as read, keyed by source id.
    pub raw_documents: BTreeMap<String, Vec<u8>>,
    pub skipped: Vec<SkippedFile>,
    pub warnings: Vec<(String, IngestWarning)>,
}

impl Corpus {
    /// Builds a corpus from in-memory documents. Documents that fail to
    /// parse are recorded in `skipped`; an all-failed batch is an error.
    pub fn from_documents(documents: Vec<(String, Vec<u8>)>) -> Result<Corpus, CorpusError> {
        let results: Vec<(String, Vec<u8>, Result<ParsedWsdl, IngestError>)> = documents
            .into_par_iter()
            .map(|(id, bytes)| {
                let parsed = parse_wsdl(&id, &bytes);
                (id, bytes, parsed)
            })
            .collect();
        Corpus::assemble(results.into_iter().map(|(id, bytes, parsed)| (id, Ok(bytes), parsed)))
    }

    fn assemble(
        results: impl Iterator<Item = (String, Result<Vec<u8>, IngestError>, Result<ParsedWsdl, IngestError>)>,
    ) -> Result<Corpus, CorpusError> {
        let mut corpus = Corpus::default();
        let mut imports = Vec::new();
        for (source_id, bytes, parsed) in results {
            match bytes.and_then(|b| parsed.map(|p| (b, p))) {
                Ok((bytes, parsed)) => {
                    corpus
                        .warnings
                        .extend(parsed.warnings.into_iter().map(|w| (source_id.clone(), w)));
                    imports.push(parsed.imported_namespaces);
                    corpus.descriptions.push(parsed.description);
                    corpus.raw_documents.insert(source_id, bytes);
                }
                Err(error) => corpus.skipped.push(SkippedFile { source_id, error }),
            }
        }
        if corpus.descriptions.is_empty() {
            return Err(CorpusError::EmptyCorpus {
                skipped: corpus.skipped,
            });
        }
        corpus.resolve_imports(&imports);
        Ok(corpus)
    }

    /// Copies type definitions for imported namespaces from the other
    /// documents of the batch. The first definition in input order wins.
    fn resolve_imports(&mut self, imports: &[BTreeSet<String>]) {
        if imports.iter().all(BTreeSet::is_empty) {
            return;
        }
        let mut pool: BTreeMap<QName, TypeDefinition> = BTreeMap::new();
        for desc in &self.descriptions {
            for (name, def) in &desc.types {
                pool.entry(name.clone()).or_insert_with(|| def.clone());
            }
        }
        for (desc, namespaces) in self.descriptions.iter_mut().zip(imports) {
            for (name, def) in &pool {
                if namespaces.contains(&name.namespace_uri) && !desc.types.contains_key(name) {
                    desc.types.insert(name.clone(), def.clone());
                }
            }
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.descriptions.iter().map(WsDescription::parameter_count).sum()
    }
}

/// Reads and parses every file. Unreadable or unparseable files are
/// recorded in the skip list and never abort the batch.
pub fn load_corpus<P: AsRef<Path> + Sync>(paths: &[P]) -> Result<Corpus, CorpusError> {
    let mut seen = HashSet::new();
    let unique: Vec<PathBuf> = paths
        .iter()
        .map(|p| p.as_ref().to_path_buf())
        .filter(|p| seen.insert(p.clone()))
        .collect();
    let results: Vec<_> = unique
        .par_iter()
        .map(|path| {
            let source_id = path.display().to_string();
            match std::fs::read(path) {
                Ok(bytes) => {
                    let parsed = parse_wsdl(&source_id, &bytes);
                    (source_id, Ok(bytes), parsed)
                }
                Err(e) => {
                    let err = IngestError::Io(e.to_string());
                    (source_id, Err(err.clone()), Err(err))
                }
            }
        })
        .collect();
    Corpus::assemble(results.into_iter())
}
