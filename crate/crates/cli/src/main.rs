//! `vt`: scene-text translation runs, evaluation, synthetic data, fixtures,
//! adapter servers and the rating service.

mod adapter_server;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use vt_core::adapters::{AdapterError, Adapters, LexiconTranslator, OracleStore, StubService};
use vt_core::evaluator::{CorpusReport, ReferenceSet};
use vt_core::fixture::{write_fixture_set, RefRecord};
use vt_core::pipeline::{evaluate_run, read_jsonl, ImageStatus, InputRecord, Pipeline, PipelineConfig, PipelineError};
use vt_core::render::{FontBook, RenderError};
use vt_core::synth::{generate_corpus, load_backgrounds, load_vocab, CorpusSpec, SynthError};
use vt_core::LangCode;
use vt_rating::server::AppState;
use vt_rating::{RatingError, RatingService, Study};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Rating(#[from] RatingError),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(name = "vt", version, about = "Scene-text visual translation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Translate every image of an input manifest.
    Translate(TranslateArgs),
    /// Score a finished run against reference translations.
    Eval(EvalArgs),
    /// Generate a paired synthetic word-image corpus.
    Synth(SynthArgs),
    /// Serve one or more rating studies over HTTP.
    ServeRatings(ServeRatingsArgs),
    /// Serve the stub adapters over the adapter wire protocol.
    AdapterServe(AdapterServeArgs),
    /// Write a synthetic annotated sign set with lexicon, references and config.
    Fixtures(FixturesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

impl OnOff {
    fn on(self) -> bool {
        matches!(self, OnOff::On)
    }
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long)]
    config: PathBuf,
    /// JSONL of {image, id?, annotations?, references?}; image paths are
    /// relative to this file.
    #[arg(long)]
    input_manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    design_enhancements: Option<OnOff>,
    #[arg(long, value_enum)]
    feathering: Option<OnOff>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    method_id: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Run directory; repeat for one report row per run.
    #[arg(long, required = true)]
    outputs: Vec<PathBuf>,
    /// JSONL of {image_id, references}.
    #[arg(long)]
    refs: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Adapter bindings and target language; all stubs and Hindi without it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pass recognized output text through the translator before BLEU.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long)]
    vocab_src: PathBuf,
    #[arg(long)]
    vocab_tgt: PathBuf,
    /// Directory of .ttf/.otf files; the built-in face when absent.
    #[arg(long)]
    fonts: Option<PathBuf>,
    /// Directory of background photos; textures and flat colors otherwise.
    #[arg(long)]
    backgrounds: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Share of pairs drawn from aligned vocabulary lines.
    #[arg(long, default_value_t = 0.0)]
    translation_ratio: f64,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ServeRatingsArgs {
    #[arg(long, required = true)]
    study: Vec<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
}

#[derive(Args)]
struct AdapterServeArgs {
    /// NDJSON requests on stdin, responses on stdout.
    #[arg(long, conflicts_with = "http")]
    stdio: bool,
    /// Listen address for `POST /v1/{op}`.
    #[arg(long)]
    http: Option<SocketAddr>,
    /// Source to target TSV for the translator.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Input manifest whose annotations feed oracle detection and recognition.
    #[arg(long)]
    annotations: Option<PathBuf>,
}

#[derive(Args)]
struct FixturesArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parent(p: &Path) -> &Path {
    p.parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
}

fn translate(a: TranslateArgs) -> Result<bool, CliError> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(v) = a.design_enhancements {
        cfg.design_enhancements = v.on();
    }
    if let Some(v) = a.feathering {
        cfg.feathering = v.on();
    }
    if let Some(v) = a.workers {
        cfg.workers = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.method_id {
        cfg.method.id = v;
    }
    let pipeline = Pipeline::from_config(cfg, Arc::new(OracleStore::new()), parent(&a.config))?;
    let inputs: Vec<InputRecord> = read_jsonl(&a.input_manifest)?;
    let run = pipeline.run_batch(&inputs, parent(&a.input_manifest), &a.out)?;
    let failed = run.failed();
    eprintln!(
        "translated {} of {} images into {}",
        run.entries.len() - failed,
        run.entries.len(),
        a.out.display()
    );
    for e in run
        .entries
        .iter()
        .filter(|e| matches!(e.status, ImageStatus::Failed(_)))
    {
        eprintln!("failed: {} ({:?})", e.image_id, e.status);
    }
    Ok(failed == 0)
}

fn eval(a: EvalArgs) -> Result<bool, CliError> {
    let (cfg, base) = match &a.config {
        Some(p) => (PipelineConfig::load(p)?, parent(p).to_path_buf()),
        None => (PipelineConfig::new(LangCode::En, LangCode::Hi), PathBuf::from(".")),
    };
    let tgt = cfg.tgt_lang;
    let refs: Vec<RefRecord> = read_jsonl(&a.refs)?;
    let refs: Vec<ReferenceSet> = refs
        .iter()
        .map(|r| ReferenceSet::from_texts(&r.image_id, &r.references, tgt))
        .collect();
    let oracle = Arc::new(OracleStore::new());
    let adapters = Adapters::from_bindings(&cfg.adapters, oracle.clone(), &base)?;
    let mut report = CorpusReport::default();
    for run in &a.outputs {
        let r = evaluate_run(run, &refs, &adapters, &oracle, tgt, a.normalize)?;
        report.rows.extend(r.rows);
        report.images.extend(r.images);
    }
    std::fs::write(&a.report, serde_json::to_string_pretty(&report)? + "\n")?;
    print!("{}", report.to_table());
    Ok(true)
}

fn synth(a: SynthArgs) -> Result<bool, CliError> {
    if !(0.0..=1.0).contains(&a.translation_ratio) {
        return Err(CliError::Usage("--translation-ratio must be in [0, 1]".into()));
    }
    let spec = CorpusSpec {
        count: a.count,
        vocab_src: load_vocab(&a.vocab_src)?,
        vocab_tgt: load_vocab(&a.vocab_tgt)?,
        fonts: match &a.fonts {
            Some(d) => FontBook::from_dir(d)?,
            None => FontBook::default(),
        },
        backgrounds: match &a.backgrounds {
            Some(d) => load_backgrounds(d)?,
            None => Vec::new(),
        },
        seed: a.seed,
        translation_ratio: a.translation_ratio,
    };
    let records = match a.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| generate_corpus(&spec, &a.out))?,
        None => generate_corpus(&spec, &a.out)?,
    };
    eprintln!("wrote {} samples to {}", records.len(), a.out.display());
    Ok(true)
}

fn serve_ratings(a: ServeRatingsArgs) -> Result<bool, CliError> {
    let services = a
        .study
        .iter()
        .map(|p| Study::load(p).and_then(RatingService::open))
        .collect::<Result<Vec<_>, _>>()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(vt_rating::server::serve(
        AppState::new(services),
        SocketAddr::new(a.host, a.port),
    ))?;
    Ok(true)
}

fn adapter_serve(a: AdapterServeArgs) -> Result<bool, CliError> {
    let oracle = Arc::new(OracleStore::new());
    if let Some(p) = &a.annotations {
        let inputs: Vec<InputRecord> = read_jsonl(p)?;
        for r in inputs {
            oracle.insert(r.image_id(), r.annotations);
        }
    }
    let lexicon = match &a.lexicon {
        Some(p) => LexiconTranslator::from_file(p)?,
        None => LexiconTranslator::default(),
    };
    let service = StubService::new(Adapters::stubs(oracle, lexicon));
    match (a.stdio, a.http) {
        (_, Some(addr)) => adapter_server::serve_http(service, addr)?,
        (true, None) => adapter_server::serve_stdio(&service)?,
        (false, None) => return Err(CliError::Usage("pass --stdio or --http ADDR".into())),
    }
    Ok(true)
}

fn fixtures(a: FixturesArgs) -> Result<bool, CliError> {
    let scenes = write_fixture_set(&a.out, a.count, a.seed)?;
    eprintln!("wrote {} scenes to {}", scenes.len(), a.out.display());
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VT_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Translate(a) => translate(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Synth(a) => synth(a),
        Cmd::ServeRatings(a) => serve_ratings(a),
        Cmd::AdapterServe(a) => adapter_serve(a),
        Cmd::Fixtures(a) => fixtures(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("vt: {e}");
            ExitCode::from(2)
        }
    }
}
