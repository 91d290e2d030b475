use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use dyad_align::alignment::{JsdMode, Metric, PairwiseContrast, TTestKind};
use dyad_align::analysis::{analyze, merge_reports, AnalysisConfig, GapReport, Resources};
use dyad_align::corpus::{self, Corpus, LoadOptions, SchemaVersion};
use dyad_align::dynamics::{self, TrajectoryMode};
use dyad_align::error::{Error, Result};
use dyad_align::lexicon::{tokenize, CategoryLexicon, GroupBinding};
use dyad_align::personality::{AdjectiveBank, TargetDistribution};
use dyad_align::simulator::backend::{BackendFactory, ScriptedFactory};
use dyad_align::simulator::config::NegotiationConfig;
use dyad_align::simulator::simulate_batch;
use dyad_align::textdist::{AlphaNormalization, EmbeddingStore, WmdCache};

#[derive(Parser)]
#[command(name = "dyad-align", version, about = "Simulate dispute dialogues and measure behavioral alignment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of simulated negotiations.
    Simulate(SimulateArgs),
    /// Validate a corpus file and print descriptive statistics.
    Ingest(IngestArgs),
    /// Attach an annotation file to a corpus.
    Attach(AttachArgs),
    /// Compute gap metrics between a human and an LLM corpus.
    Analyze(AnalyzeArgs),
    /// Merge gap reports into one comparison table.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Negotiation config JSON; built-in scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `scripted`, or `http` when built with the `http` feature.
    #[arg(long, default_value = "scripted")]
    backend: String,
    /// Script file for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value = "https://api.openai.com/v1")]
    base_url: String,
    #[arg(long, default_value = "OPENAI_API_KEY")]
    api_key_env: String,
    #[arg(long, default_value_t = 250)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Personality target distribution JSON; uniform when omitted.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Adjective bank CSV; bundled bank when omitted.
    #[arg(long)]
    adjectives: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    corpus: PathBuf,
    #[arg(long, default_value = "v1")]
    schema: String,
    /// Drop invalid dialogues instead of failing.
    #[arg(long)]
    skip_invalid: bool,
    /// Write the normalized corpus here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttachArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    human: PathBuf,
    #[arg(long)]
    llm: PathBuf,
    /// Comma-separated subset of lg_irp,lg_dispute,leg,atg,amg,sbg.
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<Metric>>,
    /// Category lexicon JSON; the bundled demo lexicon when omitted.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Feature binding JSON.
    #[arg(long)]
    binding: Option<PathBuf>,
    /// Word vectors (`.bin` word2vec binary or text). LEG is skipped without them.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value = "as_printed", value_parser = snake::<AlphaNormalization>)]
    alpha_normalization: AlphaNormalization,
    #[arg(long, default_value = "distance")]
    jsd_mode: JsdMode,
    #[arg(long)]
    dtw_normalize: bool,
    #[arg(long, default_value = "round")]
    trajectory_mode: TrajectoryMode,
    #[arg(long)]
    equal_variance: bool,
    #[arg(long, default_value = "cross", value_parser = snake::<PairwiseContrast>)]
    contrast: PairwiseContrast,
    /// Reservoir-sample at most this many pairs per pair set.
    #[arg(long)]
    max_pairs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Report JSON path; the text table goes next to it with a `.txt` extension.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write anger trajectories of both corpora as CSV.
    #[arg(long)]
    trajectories_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn snake<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load(path: &Path) -> Result<Corpus> {
    Ok(corpus::load_corpus(path, SchemaVersion::V1, LoadOptions::default())?.corpus)
}

fn simulate(a: SimulateArgs) -> Result<i32> {
    let config = match &a.config {
        Some(p) => NegotiationConfig::load(p)?,
        None => NegotiationConfig::default(),
    };
    let bank = match &a.adjectives {
        Some(p) => AdjectiveBank::load(p)?,
        None => AdjectiveBank::default(),
    };
    let target = match &a.targets {
        Some(p) => TargetDistribution::load(p)?,
        None => TargetDistribution::uniform(),
    };
    let factory: Box<dyn BackendFactory> = match a.backend.as_str() {
        "scripted" => {
            let script = a
                .script
                .as_ref()
                .ok_or_else(|| Error::Config("--script is required for the scripted backend".into()))?;
            Box::new(ScriptedFactory::load(script)?)
        }
        #[cfg(feature = "http")]
        "http" => Box::new(dyad_align::simulator::backend::HttpFactory {
            base_url: a.base_url.clone(),
            model: a
                .model
                .clone()
                .ok_or_else(|| Error::Config("--model is required for the http backend".into()))?,
            api_key_env: a.api_key_env.clone(),
        }),
        other => {
            let _ = (&a.model, &a.base_url, &a.api_key_env);
            return Err(Error::Config(format!("unknown or disabled backend `{other}`")));
        }
    };
    let batch = simulate_batch(&config, factory.as_ref(), &bank, &target, a.n, a.seed)?;
    write(&a.out, &batch.corpus.to_json_pretty()?)?;
    for f in &batch.failures {
        eprintln!("session {} failed: {}", f.session, f.error);
    }
    let stats = corpus::descriptive_stats(&batch.corpus)?;
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(if batch.failures.is_empty() { 0 } else { 2 })
}

fn ingest(a: IngestArgs) -> Result<i32> {
    let schema: SchemaVersion = a.schema.parse()?;
    let loaded = corpus::load_corpus(
        &a.corpus,
        schema,
        LoadOptions {
            skip_invalid: a.skip_invalid,
        },
    )?;
    for r in &loaded.rejected {
        eprintln!("rejected: {r}");
    }
    let c = &loaded.corpus;
    let annotated = c.dialogues().iter().filter(|d| d.is_annotated()).count();
    println!("{}: {} dialogues, {} annotated", c.label(), c.len(), annotated);
    match corpus::descriptive_stats(c) {
        Ok(stats) => println!("{}", serde_json::to_string_pretty(&stats)?),
        Err(e) => eprintln!("no descriptive statistics: {e}"),
    }
    if let Some(out) = &a.out {
        write(out, &c.to_json_pretty()?)?;
    }
    Ok(if loaded.rejected.is_empty() { 0 } else { 2 })
}

fn attach(a: AttachArgs) -> Result<i32> {
    let c = load(&a.corpus)?;
    let ann = corpus::load_annotations(&a.annotations)?;
    let n = ann.len();
    let merged = corpus::attach_annotations(&c, ann)?;
    write(&a.out, &merged.to_json_pretty()?)?;
    println!("attached {n} annotation set(s) to {}", merged.label());
    Ok(0)
}

fn vocabulary(corpora: &[&Corpus]) -> HashSet<String> {
    corpora
        .iter()
        .flat_map(|c| c.dialogues())
        .flat_map(|d| d.turns.iter())
        .flat_map(|u| tokenize(&u.text))
        .collect()
}

fn run_analyze(a: AnalyzeArgs) -> Result<i32> {
    let human = load(&a.human)?;
    let llm = load(&a.llm)?;
    let lexicon = match &a.lexicon {
        Some(p) => CategoryLexicon::load(p)?,
        None => CategoryLexicon::demo(),
    };
    let binding = match &a.binding {
        Some(p) => GroupBinding::load(p)?,
        None => GroupBinding::default(),
    };
    let store = match &a.embeddings {
        Some(p) => Some(EmbeddingStore::load(p, Some(&vocabulary(&[&human, &llm])))?),
        None => None,
    };
    let cache = WmdCache::from_env();
    let config = AnalysisConfig {
        metrics: a.metrics.clone().unwrap_or_else(|| Metric::ALL.to_vec()),
        k: a.k,
        alpha_normalization: a.alpha_normalization,
        jsd_mode: a.jsd_mode,
        dtw_normalize: a.dtw_normalize,
        trajectory_mode: a.trajectory_mode,
        ttest: if a.equal_variance { TTestKind::EqualVariance } else { TTestKind::Welch },
        contrast: a.contrast,
        max_pairs: a.max_pairs,
        ..Default::default()
    };
    let resources = Resources {
        lexicon: Some(&lexicon),
        binding: Some(&binding),
        embeddings: store.as_ref(),
        cache: cache.as_ref(),
    };
    let report = analyze(&human, &llm, resources, &config, a.seed, a.workers)?;
    let table = report.to_table();
    print!("{table}");
    if let Some(out) = &a.out {
        write(out, &report.to_json()?)?;
        write(&out.with_extension("txt"), &table)?;
    }
    if let Some(csv) = &a.trajectories_csv {
        let mut trajs = Vec::new();
        for c in [&human, &llm] {
            for d in c.dialogues().iter().filter(|d| d.is_annotated()) {
                trajs.extend(dynamics::trajectory(d, a.trajectory_mode)?);
            }
        }
        let mut buf = Vec::new();
        dynamics::write_csv(&trajs, &mut buf).map_err(|e| Error::io(csv, e))?;
        std::fs::write(csv, buf).map_err(|e| Error::io(csv, e))?;
    }
    Ok(report.exit_code())
}

fn report(a: ReportArgs) -> Result<i32> {
    let reports = a.reports.iter().map(|p| GapReport::load(p)).collect::<Result<Vec<_>>>()?;
    let table = merge_reports(&reports)?;
    print!("{table}");
    if let Some(out) = &a.out {
        write(out, &table)?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ingest(a) => ingest(a),
        Command::Attach(a) => attach(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
