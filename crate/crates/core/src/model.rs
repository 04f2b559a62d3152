//! Domain types shared by every stage of the annotation pipeline.
//!
//! Nothing here performs I/O. All values are immutable once built and can be
//! shared freely between worker threads.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// The W3C XML Schema namespace.
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema";

/// Pre-recommendation schema namespaces still found in older WSDL files.
pub const LEGACY_XSD_NS: [&str; 2] = [
    "http://www.w3.org/1999/XMLSchema",
    "http://www.w3.org/2000/10/XMLSchema",
];

/// XML Schema Part 2 primitive and derived datatypes, plus the two ur-types.
const XSD_BUILTINS: &[&str] = &[
    // ur-types
    "anyType",
    "anySimpleType",
    // primitive
    "string",
    "boolean",
    "decimal",
    "float",
    "double",
    "duration",
    "dateTime",
    "time",
    "date",
    "gYearMonth",
    "gYear",
    "gMonthDay",
    "gDay",
    "gMonth",
    "hexBinary",
    "base64Binary",
    "anyURI",
    "QName",
    "NOTATION",
    // derived
    "normalizedString",
    "token",
    "language",
    "NMTOKEN",
    "NMTOKENS",
    "Name",
    "NCName",
    "ID",
    "IDREF",
    "IDREFS",
    "ENTITY",
    "ENTITIES",
    "integer",
    "nonPositiveInteger",
    "negativeInteger",
    "long",
    "int",
    "short",
    "byte",
    "nonNegativeInteger",
    "unsignedLong",
    "unsignedInt",
    "unsignedShort",
    "unsignedByte",
    "positiveInteger",
    // legacy spellings from the 1999 draft
    "timeInstant",
    "timeDuration",
    "recurringDuration",
    "binary",
    "uriReference",
];

pub fn is_xsd_namespace(uri: &str) -> bool {
    uri == XSD_NS || LEGACY_XSD_NS.contains(&uri)
}

/// Namespace-qualified XML name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QName {
    pub namespace_uri: String,
    pub local_name: String,
}

impl QName {
    pub fn new(namespace_uri: impl Into<String>, local_name: impl Into<String>) -> Self {
        let local_name = local_name.into();
        debug_assert!(!local_name.is_empty(), "QName local part must not be empty");
        QName {
            namespace_uri: namespace_uri.into(),
            local_name,
        }
    }

    pub fn xsd(local_name: &str) -> Self {
        QName::new(XSD_NS, local_name)
    }
}

impl fmt::Display for QName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.namespace_uri.is_empty() {
            f.write_str(&self.local_name)
        } else {
            write!(f, "{{{}}}{}", self.namespace_uri, self.local_name)
        }
    }
}

/// True iff `name` is one of the XML Schema builtin datatypes.
pub fn is_builtin(name: &QName) -> bool {
    is_xsd_namespace(&name.namespace_uri) && XSD_BUILTINS.contains(&name.local_name.as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
        }
    }
}

/// Where a parameter was declared in the source document.
///
/// The writer uses this to find the element that receives the
/// `modelReference` attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Declaration {
    /// A `wsdl:part` inside the named `wsdl:message`.
    Part { message: String, part: String },
    /// A global `xsd:element` referenced by a part's `element` attribute.
    Element(QName),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub direction: Direction,
    pub type_ref: QName,
    /// Unique within a corpus run.
    pub param_id: String,
    pub declaration: Declaration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub name: String,
    pub inputs: Vec<Parameter>,
    pub outputs: Vec<Parameter>,
}

impl Operation {
    pub fn parameters(&self) -> impl Iterator<Item = &Parameter> {
        self.inputs.iter().chain(self.outputs.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TypeKind {
    Builtin,
    CustomSimple,
    ComplexSequence,
    ComplexOther,
    EmptyComplex,
    Unknown,
}

impl TypeKind {
    /// Kinds whose name was chosen by the service author.
    pub fn is_custom(self) -> bool {
        !matches!(self, TypeKind::Builtin | TypeKind::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubParameter {
    /// Empty for anonymous members.
    pub name: String,
    pub type_ref: QName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDefinition {
    pub name: QName,
    pub kind: TypeKind,
    pub subparameters: Vec<SubParameter>,
    /// Inline type with no name of its own; `name` is synthesized and must
    /// not be mined for words.
    pub anonymous: bool,
}

impl TypeDefinition {
    pub fn builtin(name: QName) -> Self {
        TypeDefinition {
            name,
            kind: TypeKind::Builtin,
            subparameters: Vec::new(),
            anonymous: false,
        }
    }

    pub fn unknown(name: QName) -> Self {
        TypeDefinition {
            name,
            kind: TypeKind::Unknown,
            subparameters: Vec::new(),
            anonymous: false,
        }
    }

    /// Whether the type name carries author-chosen words.
    pub fn has_custom_name(&self) -> bool {
        self.kind.is_custom() && !self.anonymous
    }
}

/// A parsed service description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsDescription {
    pub source_id: String,
    pub operations: Vec<Operation>,
    pub types: BTreeMap<QName, TypeDefinition>,
}

impl WsDescription {
    /// Every parameter in document order: operation by operation, inputs
    /// before outputs.
    pub fn parameters(&self) -> impl Iterator<Item = &Parameter> {
        self.operations.iter().flat_map(Operation::parameters)
    }

    pub fn parameter_count(&self) -> usize {
        self.operations
            .iter()
            .map(|op| op.inputs.len() + op.outputs.len())
            .sum()
    }

    /// Looks up a type reference. Never fails: builtins are synthesized and
    /// anything unresolved comes back as [`TypeKind::Unknown`].
    pub fn resolve_type(&self, type_ref: &QName) -> TypeDefinition {
        if let Some(def) = self.types.get(type_ref) {
            return def.clone();
        }
        if is_builtin(type_ref) {
            TypeDefinition::builtin(type_ref.clone())
        } else {
            TypeDefinition::unknown(type_ref.clone())
        }
    }

    pub(crate) fn lookup_type(&self, type_ref: &QName) -> Option<&TypeDefinition> {
        self.types.get(type_ref)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid word {0:?}: must be non-empty lowercase ASCII letters")]
pub struct InvalidWord(pub String);

/// A cleaned token: non-empty, lowercase ASCII letters only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(String);

impl Word {
    pub fn new(text: impl Into<String>) -> Result<Self, InvalidWord> {
        let text = text.into();
        if Word::is_valid(&text) {
            Ok(Word(text))
        } else {
            Err(InvalidWord(text))
        }
    }

    pub fn is_valid(text: &str) -> bool {
        !text.is_empty() && text.bytes().all(|b| b.is_ascii_lowercase())
    }

    pub(crate) fn from_valid(text: String) -> Self {
        debug_assert!(Word::is_valid(&text), "{text:?}");
        Word(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Concept {
    pub id: String,
    pub ontology: String,
}

impl Concept {
    pub fn new(id: impl Into<String>, ontology: impl Into<String>) -> Self {
        let id = id.into();
        debug_assert!(!id.is_empty());
        Concept {
            id,
            ontology: ontology.into(),
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// Which piece of the parameter's description a word was mined from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SourceKind {
    ParameterName,
    TypeName,
    SubParameterName,
    SubParameterTypeName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationEntry {
    pub concept: Concept,
    pub word: Word,
    pub source: SourceKind,
    /// Subparameter names from the root parameter down to the word's origin.
    pub path: Vec<String>,
    pub depth: usize,
}

/// Concepts found for one parameter. An empty entry list means failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub param_id: String,
    pub entries: Vec<AnnotationEntry>,
}

impl Annotation {
    pub fn failed(param_id: impl Into<String>) -> Self {
        Annotation {
            param_id: param_id.into(),
            entries: Vec::new(),
        }
    }

    pub fn is_annotated(&self) -> bool {
        !self.entries.is_empty()
    }

    /// The (source, depth) level shared by all entries, if any.
    pub fn level(&self) -> Option<(SourceKind, usize)> {
        self.entries.first().map(|e| (e.source, e.depth))
    }

    /// Distinct concepts in first-occurrence order.
    pub fn concepts(&self) -> Vec<&Concept> {
        let mut out: Vec<&Concept> = Vec::new();
        for entry in &self.entries {
            if !out.contains(&&entry.concept) {
                out.push(&entry.concept);
            }
        }
        out
    }
}
