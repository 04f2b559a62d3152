//! Shared inputs for the criterion benchmarks.

use std::path::PathBuf;

use wsannot_core::{load_corpus, Corpus};

/// The ten-file fixture corpus shipped with the core crate's tests.
pub fn fixture_corpus() -> Corpus {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/corpus");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .expect("fixture directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    paths.sort();
    load_corpus(&paths).expect("fixture corpus parses")
}

/// Identifiers in the styles seen in service descriptions.
pub const IDENTIFIERS: &[&str] = &[
    "ASessionId_02",
    "WhiteMovesNext",
    "Number3Format",
    "User_name",
    "custNo",
    "CitéCode",
    "getXMLHttpRequestResult",
    "ParameterBody",
];
