//! Command-line driver: `annotate`, `ablate` and `wordfreq` over a batch of
//! WSDL files.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wsannot_core::associate::load_lexicon;
use wsannot_core::defaults;
use wsannot_core::metrics::word_frequency_csv;
use wsannot_core::preprocess::{parse_abbreviations, parse_stop_words};
use wsannot_core::{
    load_corpus, run_ablation, word_frequency, write_report, write_sawsdl, Annotator, Corpus, CorpusError,
    ExplorerConfig, Lexicon, OverrideMap, PreprocessConfig, Stage, StageSet, WriterConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_FATAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wsannot", version, about = "Annotate WSDL parameters with ontology concepts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write SAWSDL-annotated copies and report.json.
    Annotate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        stages: StageArgs,
        /// Prefix turning concept ids into modelReference URIs.
        #[arg(long, default_value = defaults::URI_PREFIX)]
        uri_prefix: String,
    },
    /// Rerun the batch with functionalities enabled one at a time.
    Ablate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Count the words looked up in the lexicon.
    Wordfreq {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        stages: StageArgs,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// WSDL file or directory of *.wsdl files; repeatable.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// word<TAB>rank<TAB>concept lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// abbreviation=expansion lines.
    #[arg(long)]
    abbreviations: Option<PathBuf>,
    /// One stop word per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// word=Concept lines taking precedence over the lexicon.
    #[arg(long)]
    overrides: Option<PathBuf>,
    /// Deepest subparameter level the type explorer visits.
    #[arg(long, default_value_t = wsannot_core::explore::DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<NonZeroUsize>,
}

#[derive(Debug, Args)]
struct StageArgs {
    /// Comma list of decompose, normalize, filter, explorer; or "none".
    #[arg(long)]
    stages: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Stages {
    preprocess: StageSet,
    explorer: bool,
}

fn parse_stages(text: Option<&str>) -> Result<Stages> {
    let Some(text) = text else {
        return Ok(Stages {
            preprocess: StageSet::ALL,
            explorer: true,
        });
    };
    let mut stages = Stages {
        preprocess: StageSet::NONE,
        explorer: false,
    };
    let names: BTreeSet<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.contains("none") {
        if names.len() > 1 {
            bail!("--stages: \"none\" cannot be combined with other stages");
        }
        return Ok(stages);
    }
    if names.is_empty() {
        bail!("--stages: empty list (use \"none\" to disable everything)");
    }
    for name in names {
        match name {
            "decompose" => stages.preprocess = stages.preprocess.with(Stage::Decompose),
            "normalize" => stages.preprocess = stages.preprocess.with(Stage::Normalize),
            "filter" => stages.preprocess = stages.preprocess.with(Stage::Filter),
            "explorer" => stages.explorer = true,
            other => bail!("--stages: unknown stage {other:?}"),
        }
    }
    Ok(stages)
}

/// Configuration resolved from flags, the data directory next to the
/// executable, or the embedded defaults, in that order.
struct Settings {
    preprocess: PreprocessConfig,
    lexicon: Lexicon,
    overrides: OverrideMap,
}

fn data_file(name: &str) -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let path = exe.parent()?.join("data").join(name);
    path.is_file().then_some(path)
}

fn read_config(flag: Option<&Path>, name: &str, embedded: &str) -> Result<String> {
    match flag.map(Path::to_path_buf).or_else(|| data_file(name)) {
        Some(path) => std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display())),
        None => Ok(embedded.to_string()),
    }
}

fn load_settings(args: &CommonArgs) -> Result<Settings> {
    let abbreviations = read_config(args.abbreviations.as_deref(), "abbreviations.txt", defaults::ABBREVIATIONS)?;
    let stop_words = read_config(args.stopwords.as_deref(), "stopwords.txt", defaults::STOP_WORDS)?;
    let overrides = read_config(args.overrides.as_deref(), "overrides.txt", "")?;
    let lexicon = match args.lexicon.clone().or_else(|| data_file("lexicon.tsv")) {
        Some(path) => {
            let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            load_lexicon(&bytes, defaults::ONTOLOGY_TAG).with_context(|| format!("lexicon {}", path.display()))?
        }
        None => Lexicon::demo(),
    };
    Ok(Settings {
        preprocess: PreprocessConfig::new(
            parse_abbreviations(&abbreviations).context("abbreviations")?,
            parse_stop_words(&stop_words).context("stop words")?,
        ),
        lexicon,
        overrides: OverrideMap::parse(&overrides, defaults::ONTOLOGY_TAG).context("overrides")?,
    })
}

/// Files named directly plus the `*.wsdl` entries of named directories,
/// each directory listed in sorted order.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wsdl")))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn load(args: &CommonArgs) -> Result<Corpus> {
    let files = expand_inputs(&args.inputs)?;
    match load_corpus(&files) {
        Ok(corpus) => Ok(corpus),
        Err(CorpusError::EmptyCorpus { skipped }) => {
            for s in &skipped {
                eprintln!("skipped {}: {}", s.source_id, s.error);
            }
            bail!("no input file could be parsed ({} given)", files.len())
        }
    }
}

fn report_skips(corpus: &Corpus) -> i32 {
    for s in &corpus.skipped {
        eprintln!("skipped {}: {}", s.source_id, s.error);
    }
    for (source, warning) in &corpus.warnings {
        eprintln!("warning {source}: {warning}");
    }
    if corpus.skipped.is_empty() {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// `<stem>.sawsdl.wsdl`, with `-2`, `-3`, ... appended to repeated stems.
fn output_names<'a>(sources: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut used = BTreeSet::new();
    sources
        .map(|source| {
            let stem = Path::new(source)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "output".into());
            let mut name = format!("{stem}.sawsdl.wsdl");
            let mut n = 2;
            while !used.insert(name.clone()) {
                name = format!("{stem}-{n}.sawsdl.wsdl");
                n += 1;
            }
            name
        })
        .collect()
}

fn annotate(common: &CommonArgs, stages: Stages, uri_prefix: &str) -> Result<i32> {
    let writer = WriterConfig::new(uri_prefix)?;
    let settings = load_settings(common)?;
    let corpus = load(common)?;
    let mut status = report_skips(&corpus);
    let preprocess = settings.preprocess.clone().with_stages(stages.preprocess);
    let explorer = ExplorerConfig {
        max_depth: common.max_depth,
        type_names_enabled: stages.explorer,
        type_explorer_enabled: stages.explorer,
    };
    let annotator = Annotator::new(&settings.lexicon, &settings.overrides, &preprocess, explorer);
    let annotations = annotator.annotate_corpus(&corpus);

    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let names = output_names(corpus.descriptions.iter().map(|d| d.source_id.as_str()));
    for ((desc, anns), name) in corpus.descriptions.iter().zip(&annotations).zip(&names) {
        match write_sawsdl(&corpus.raw_documents[&desc.source_id], desc, anns, &writer) {
            Ok(bytes) => write_file(&common.out, name, &bytes)?,
            Err(e) => {
                eprintln!("not written {}: {e}", desc.source_id);
                status = EXIT_PARTIAL;
            }
        }
    }
    write_file(&common.out, "report.json", &write_report(&corpus, &annotations, writer.report_pretty))?;

    let annotated = annotations.iter().flatten().filter(|a| a.is_annotated()).count();
    let total = corpus.parameter_count();
    let rate = wsannot_core::SuccessRate::new(annotated, total);
    println!("annotated {annotated} of {total} parameters ({:.2}%)", rate.rate * 100.0);
    Ok(status)
}

fn ablate(common: &CommonArgs) -> Result<i32> {
    let settings = load_settings(common)?;
    let corpus = load(common)?;
    let status = report_skips(&corpus);
    let report = run_ablation(
        &corpus,
        &settings.lexicon,
        &settings.overrides,
        &settings.preprocess,
        common.max_depth,
    );
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    write_file(&common.out, "ablation.json", &report.to_json())?;
    std::io::stdout().write_all(report.to_table().as_bytes())?;
    Ok(status)
}

fn wordfreq(common: &CommonArgs, stages: Stages) -> Result<i32> {
    let settings = load_settings(common)?;
    let corpus = load(common)?;
    let status = report_skips(&corpus);
    let preprocess = settings.preprocess.clone().with_stages(stages.preprocess);
    let explorer = ExplorerConfig {
        max_depth: common.max_depth,
        type_names_enabled: stages.explorer,
        type_explorer_enabled: stages.explorer,
    };
    let annotator = Annotator::new(&settings.lexicon, &settings.overrides, &preprocess, explorer);
    let rows = word_frequency(&corpus, &annotator);
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    write_file(&common.out, "words.csv", &word_frequency_csv(&rows))?;
    println!("{} distinct words", rows.len());
    Ok(status)
}

fn dispatch(command: Command) -> Result<i32> {
    let common = match &command {
        Command::Annotate { common, .. } | Command::Ablate { common } | Command::Wordfreq { common, .. } => common,
    };
    let run = || match &command {
        Command::Annotate {
            common,
            stages,
            uri_prefix,
        } => annotate(common, parse_stages(stages.stages.as_deref())?, uri_prefix),
        Command::Ablate { common } => ablate(common),
        Command::Wordfreq { common, stages } => wordfreq(common, parse_stages(stages.stages.as_deref())?),
    };
    match common.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.get())
            .build()
            .context("starting worker pool")?
            .install(run),
        None => run(),
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code:
/// 0 on success, 1 when some inputs were skipped, 2 on fatal errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FATAL } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FATAL
        }
    }
}
