//! `leakaudit`: file-based pipeline over claim/evidence corpora.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 config/pattern error.

mod manifest;

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use leakaudit::corpus::{ingest_jsonl, ingest_multifc, validate, ColumnMap};
use leakaudit::detector::{index_statuses, read_statuses, write_statuses};
use leakaudit::probe::{
    evaluate_partitions, evaluate_same_claim_contrast, read_splits, resolve_ids, stratified_split,
    train, write_splits, InputMode, ProbeConfig, ProbeModel,
};
use leakaudit::report::{
    leak_stats, orphan_statuses, render, render_json, verdict_ratio_by_year_with, Format, Report,
    YearlyOptions,
};
use leakaudit::{ClaimLeakStatus, ClaimRecord, Dataset, Execution, LabelScheme, PatternSet};
use manifest::Manifest;
use serde_json::json;

#[derive(Parser)]
#[command(name = "leakaudit", version, about = "Audit fact-checking corpora for leaked evidence")]
struct Cli {
    /// Worker threads for claim-parallel stages (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a JSONL or MultiFC corpus into a canonical dataset.jsonl.
    Ingest(IngestArgs),
    /// Detect leaked snippets and compute leak and per-year verdict statistics.
    Audit(AuditArgs),
    /// Write a seeded stratified 70/10/20 train/dev/test split.
    Split(SplitArgs),
    /// Train and evaluate the lexical verdict probe.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Re-aggregate statistics from a dataset and existing leak statuses.
    Report(ReportArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["jsonl", "multifc"]))]
struct IngestArgs {
    /// JSONL dataset, one claim record per line.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    /// MultiFC-style claims TSV.
    #[arg(long, requires = "snippets")]
    multifc: Option<PathBuf>,
    /// Directory of per-claim snippet TSV files.
    #[arg(long)]
    snippets: Option<PathBuf>,
    /// Column map (TOML); defaults to the public MultiFC layout.
    #[arg(long)]
    colmap: Option<PathBuf>,
    /// Skip malformed JSONL lines instead of failing.
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Vocab {
    /// Pattern file (kind, id, pattern); defaults to the bundled set.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Label scheme file; defaults to the bundled scheme.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Restrict leak statistics to misinformation claims.
    #[arg(long)]
    misinfo_only: bool,
    /// Count OTHER verdicts in the per-year denominators.
    #[arg(long)]
    include_other: bool,
    /// Restrict the per-year table to one organization.
    #[arg(long)]
    org: Option<String>,
    /// Report formats to write.
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    format: Vec<Format>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    vocab: Vocab,
    #[command(flatten)]
    stats: StatsArgs,
    /// Match URL templates byte-for-byte instead of case-insensitively.
    #[arg(long)]
    strict_url_case: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    statuses: PathBuf,
    /// Label scheme file; defaults to the bundled scheme.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    stats: StatsArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Only split claims of this organization.
    #[arg(long)]
    org: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ProbeCommand {
    /// Train a probe on a split's train (and dev) ids.
    Train(TrainArgs),
    /// Evaluate on ALL / LEAKED / UNLEAKED test partitions.
    Eval(EvalArgs),
    /// Evaluate test claims with only leaked vs only unleaked snippets.
    Contrast(EvalArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Directory holding train/dev/test id lists.
    #[arg(long)]
    splits: PathBuf,
    /// Organization whose veracity scale is the label set.
    #[arg(long)]
    org: String,
    /// Label scheme file; defaults to the bundled scheme.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "snippets")]
    mode: InputMode,
    #[arg(long, default_value_t = 512)]
    token_budget: usize,
    #[arg(long, default_value_t = 8)]
    epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    learning_rate: f32,
    /// log2 of the feature-hash dimension.
    #[arg(long, default_value_t = 18)]
    hash_bits: u32,
    /// N-gram orders, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    ngrams: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    statuses: PathBuf,
    #[arg(long)]
    splits: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    format: Vec<Format>,
    #[arg(long)]
    out: PathBuf,
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Ok(ingest_jsonl(path, true)?)
}

fn load_labels(path: Option<&Path>) -> Result<LabelScheme> {
    Ok(match path {
        Some(p) => LabelScheme::load(p)?,
        None => LabelScheme::default(),
    })
}

fn load_statuses(path: &Path) -> Result<Vec<ClaimLeakStatus>> {
    let f = File::open(path).map_err(|e| leakaudit::Error::Io { path: path.into(), source: e })?;
    Ok(read_statuses(BufReader::new(f))?)
}

fn emit<R: Report + ?Sized>(
    m: &mut Manifest,
    out: &Path,
    stem: &str,
    report: &R,
    formats: &[Format],
) -> Result<()> {
    for &f in formats {
        let name = format!("{stem}.{}", f.extension());
        m.write(out, &name, render(report, f)?.as_bytes())?;
    }
    Ok(())
}

fn cmd_ingest(a: &IngestArgs, seed: u64) -> Result<()> {
    let (dataset, mut m) = if let Some(jsonl) = &a.jsonl {
        let mut m = Manifest::new("ingest", json!({"source": "jsonl", "lenient": a.lenient, "seed": seed}));
        m.input("jsonl", jsonl)?;
        (ingest_jsonl(jsonl, !a.lenient)?, m)
    } else {
        let tsv = a.multifc.as_ref().expect("clap enforces a source");
        let snippets = a.snippets.as_ref().expect("clap requires --snippets");
        let colmap = match &a.colmap {
            Some(p) => ColumnMap::load(p)?,
            None => ColumnMap::multifc_default(),
        };
        let mut m = Manifest::new(
            "ingest",
            json!({"source": "multifc", "colmap_hash": colmap.config_hash(), "seed": seed}),
        );
        let dataset = ingest_multifc(tsv, snippets, &colmap)?;
        m.input("claims", tsv)?;
        m.input("snippets", snippets)?;
        if let Some(p) = &a.colmap {
            m.input("colmap", p)?;
        }
        (dataset, m)
    };
    let report = validate(&dataset);
    prepare_out(&a.out)?;
    m.write(&a.out, "dataset.jsonl", dataset.to_jsonl_string().as_bytes())?;
    m.write(&a.out, "validation.json", render_json(&report)?.as_bytes())?;
    m.finish(&a.out)?;
    log::info!("{} claims, {} snippets", report.records, report.snippets);
    if report.is_fatal() {
        return Err(DataError(format!(
            "validation failed: {} duplicate ids, {} rank violations",
            report.duplicates, report.rank_violations
        ))
        .into());
    }
    Ok(())
}

fn stats_reports(
    m: &mut Manifest,
    out: &Path,
    d: &Dataset,
    statuses: &[ClaimLeakStatus],
    scheme: &LabelScheme,
    s: &StatsArgs,
) -> Result<()> {
    let stats = leak_stats(d, statuses, scheme, s.misinfo_only)?;
    emit(m, out, "stats", &stats, &s.format)?;
    let years = verdict_ratio_by_year_with(
        d,
        &YearlyOptions {
            include_other: s.include_other,
            organization: s.org.clone(),
        },
    );
    emit(m, out, "yearly", &years, &s.format)?;
    Ok(())
}

fn stats_config(s: &StatsArgs) -> serde_json::Value {
    json!({
        "misinfo_only": s.misinfo_only,
        "include_other": s.include_other,
        "org": s.org,
    })
}

fn cmd_audit(a: &AuditArgs, seed: u64) -> Result<()> {
    let patterns = match &a.vocab.patterns {
        Some(p) => PatternSet::load(p)?,
        None => PatternSet::default(),
    }
    .with_url_lowercasing(!a.strict_url_case);
    let scheme = load_labels(a.vocab.labels.as_deref())?;
    let d = load_dataset(&a.dataset)?;
    prepare_out(&a.out)?;
    let mut m = Manifest::new(
        "audit",
        json!({
            "patterns_hash": patterns.content_hash(),
            "strict_url_case": a.strict_url_case,
            "stats": stats_config(&a.stats),
            "seed": seed,
        }),
    );
    m.input("dataset", &a.dataset)?;
    if let Some(p) = &a.vocab.patterns {
        m.input("patterns", p)?;
    }
    if let Some(p) = &a.vocab.labels {
        m.input("labels", p)?;
    }
    let statuses = patterns.classify_dataset(&d, Execution::Parallel);
    let mut buf = Vec::new();
    write_statuses(&statuses, &mut buf)?;
    m.write(&a.out, "statuses.jsonl", &buf)?;
    stats_reports(&mut m, &a.out, &d, &statuses, &scheme, &a.stats)?;
    m.finish(&a.out)
}

fn cmd_report(a: &ReportArgs, seed: u64) -> Result<()> {
    let scheme = load_labels(a.labels.as_deref())?;
    let d = load_dataset(&a.dataset)?;
    let statuses = load_statuses(&a.statuses)?;
    let orphans = orphan_statuses(&d, &statuses);
    if !orphans.is_empty() {
        return Err(leakaudit::Error::Consistency(format!(
            "{} statuses have no claim in the dataset (first: {:?})",
            orphans.len(),
            orphans[0]
        ))
        .into());
    }
    prepare_out(&a.out)?;
    let mut m = Manifest::new("report", json!({"stats": stats_config(&a.stats), "seed": seed}));
    m.input("dataset", &a.dataset)?;
    m.input("statuses", &a.statuses)?;
    if let Some(p) = &a.labels {
        m.input("labels", p)?;
    }
    stats_reports(&mut m, &a.out, &d, &statuses, &scheme, &a.stats)?;
    emit(&mut m, &a.out, "validation", &validate(&d), &a.stats.format)?;
    m.finish(&a.out)
}

fn cmd_split(a: &SplitArgs, seed: u64) -> Result<()> {
    let d = load_dataset(&a.dataset)?;
    let org = a.org.as_deref().map(|o| o.trim().to_lowercase());
    let pool: Vec<&ClaimRecord> = d
        .records
        .iter()
        .filter(|r| org.as_deref().is_none_or(|o| r.organization == o))
        .collect();
    if pool.is_empty() {
        return Err(DataError("no claims to split".into()).into());
    }
    prepare_out(&a.out)?;
    let splits = stratified_split(&pool, seed);
    let mut m = Manifest::new("split", json!({"org": org, "seed": seed, "ratios": [0.7, 0.1, 0.2]}));
    m.input("dataset", &a.dataset)?;
    for p in write_splits(&splits, &a.out)? {
        let name = p.file_name().expect("split file name").to_string_lossy().into_owned();
        m.record_output(&a.out, &name)?;
    }
    m.finish(&a.out)
}

fn cmd_train(a: &TrainArgs, seed: u64) -> Result<()> {
    let scheme = load_labels(a.labels.as_deref())?;
    let mut cfg = ProbeConfig::for_organization(&scheme, &a.org)?;
    cfg.input_mode = a.mode;
    cfg.token_budget = a.token_budget;
    cfg.epochs = a.epochs;
    cfg.learning_rate = a.learning_rate;
    cfg.ngram_orders = a.ngrams.clone();
    if a.hash_bits > 31 {
        return Err(leakaudit::Error::Config(format!("--hash-bits {} exceeds 31", a.hash_bits)).into());
    }
    cfg.hash_dims = 1usize << a.hash_bits;
    cfg.seed = seed;
    cfg.validate()?;

    let d = load_dataset(&a.dataset)?;
    let splits = read_splits(&a.splits)?;
    let tr = resolve_ids(&d, &splits.train)?;
    let dv = resolve_ids(&d, &splits.dev)?;
    let mut model = train(&tr, &dv, &cfg)?;
    model.provenance.dataset_hash = Some(d.content_hash());
    if model.provenance.rejected_off_scale > 0 {
        log::warn!("{} off-scale records skipped", model.provenance.rejected_off_scale);
    }

    prepare_out(&a.out)?;
    let mut m = Manifest::new("probe train", json!({"probe": serde_json::to_value(&cfg)?}));
    m.input("dataset", &a.dataset)?;
    m.input("splits", &a.splits)?;
    if let Some(p) = &a.labels {
        m.input("labels", p)?;
    }
    m.write(&a.out, "model.bin", &model.to_bytes())?;
    m.write(&a.out, "training.json", render_json(&model.provenance)?.as_bytes())?;
    m.finish(&a.out)
}

fn cmd_eval(a: &EvalArgs, contrast: bool, seed: u64) -> Result<()> {
    let d = load_dataset(&a.dataset)?;
    let statuses = load_statuses(&a.statuses)?;
    let model = ProbeModel::load(&a.model)?;
    let splits = read_splits(&a.splits)?;
    let test = resolve_ids(&d, &splits.test)?;
    let idx = index_statuses(&statuses);
    prepare_out(&a.out)?;
    let name = if contrast { "probe contrast" } else { "probe eval" };
    let mut m = Manifest::new(name, json!({"model_hash": model.content_hash(), "seed": seed}));
    m.input("dataset", &a.dataset)?;
    m.input("statuses", &a.statuses)?;
    m.input("splits", &a.splits)?;
    m.input("model", &a.model)?;
    if contrast {
        let r = evaluate_same_claim_contrast(&model, &test, &idx)?;
        log::info!("contrast set: {} claims", r.claim_ids.len());
        emit(&mut m, &a.out, "contrast", &r, &a.format)?;
    } else {
        let r = evaluate_partitions(&model, &test, &idx)?;
        log::info!(
            "ALL {} / LEAKED {} / UNLEAKED {}",
            r.all.n_samples,
            r.leaked.n_samples,
            r.unleaked.n_samples
        );
        emit(&mut m, &a.out, "eval", &r, &a.format)?;
    }
    m.finish(&a.out)
}

/// A data problem detected by the CLI itself.
#[derive(Debug)]
struct DataError(String);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataError {}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<leakaudit::Error>() {
        Some(le) if le.is_config() => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build()?;
    let seed = cli.seed;
    pool.install(|| match &cli.command {
        Command::Ingest(a) => cmd_ingest(a, seed),
        Command::Audit(a) => cmd_audit(a, seed),
        Command::Split(a) => cmd_split(a, seed),
        Command::Probe(ProbeCommand::Train(a)) => cmd_train(a, seed),
        Command::Probe(ProbeCommand::Eval(a)) => cmd_eval(a, false, seed),
        Command::Probe(ProbeCommand::Contrast(a)) => cmd_eval(a, true, seed),
        Command::Report(a) => cmd_report(a, seed),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
