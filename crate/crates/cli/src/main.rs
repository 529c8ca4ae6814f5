//! `expedition`: ingest, query, timeline, generate, replay and serve.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::BTreeSet;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use expedition_core::corpus::{ingest, SyntheticSpec};
use expedition_core::engine::QueryRequest;
use expedition_core::session::{replay, SessionExport};
use expedition_core::{Constraints, Engine, Index, MonthSpan, Params, RankError, RetrievalModel};

const INDEX_ENV: &str = "EXPEDITION_INDEX";

#[derive(Debug, Parser)]
#[command(name = "expedition", version, about = "Exploratory search over news archives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a JSONL corpus and build an index directory.
    Ingest {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank documents and print rank, score, doc_id, headline and month.
    Query(QueryCmd),
    /// Print the monthly profile and bursts for a query.
    Timeline(QueryCmd),
    /// Write a synthetic corpus with planted bursts.
    Generate(GenerateCmd),
    /// Re-run an exported session and verify its saved documents.
    Replay {
        export: PathBuf,
        #[arg(env = INDEX_ENV)]
        index: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Serve the REST API.
    Serve {
        #[arg(env = INDEX_ENV)]
        index: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Debug, Args)]
struct QueryCmd {
    /// `[indexdir] terms...`; without an index directory, `--index` or
    /// EXPEDITION_INDEX is used.
    #[arg(required = true, num_args = 1..)]
    args: Vec<String>,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, default_value = "TEXTUAL")]
    model: RetrievalModel,
    #[arg(long)]
    k: Option<usize>,
    /// `YYYY-MM..YYYY-MM` or `YYYY-MM`.
    #[arg(long)]
    time: Option<MonthSpan>,
    #[arg(long = "entity")]
    entities: Vec<String>,
    #[arg(long = "type")]
    types: Vec<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    burst_k: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct GenerateCmd {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    docs: usize,
    #[arg(long, default_value = "1990-01..2009-12")]
    span: MonthSpan,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    entities: usize,
    #[arg(long, default_value_t = 0.1)]
    topic_fraction: f64,
    /// `SPAN:term[,term...]:intensity`, e.g. `1995-03..1995-05:eruption:0.6`.
    #[arg(long = "burst", value_parser = parse_burst)]
    bursts: Vec<(MonthSpan, Vec<String>, f64)>,
}

fn parse_burst(s: &str) -> Result<(MonthSpan, Vec<String>, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [span, terms, intensity] = parts[..] else {
        return Err("expected SPAN:terms:intensity".into());
    };
    let span: MonthSpan = span.parse().map_err(|e| format!("{e}"))?;
    let terms = terms.split(',').map(str::to_string).collect();
    let intensity = intensity.parse().map_err(|e| format!("intensity: {e}"))?;
    Ok((span, terms, intensity))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {}", chain(&e));
            ExitCode::from(2)
        }
    }
}

/// The error and its causes, skipping causes already quoted by their parent.
fn chain(e: &anyhow::Error) -> String {
    let mut out = e.to_string();
    let mut last = out.clone();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !last.contains(&text) {
            out = format!("{out}: {text}");
        }
        last = text;
    }
    out
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Ingest { corpus, out } => run_ingest(&corpus, &out),
        Command::Query(cmd) => run_query(cmd),
        Command::Timeline(cmd) => run_timeline(cmd),
        Command::Generate(cmd) => run_generate(cmd),
        Command::Replay { export, index, json } => run_replay(&export, &index, json),
        Command::Serve { index, port, host } => run_serve(&index, SocketAddr::new(host, port)),
    }
}

fn load_engine(dir: &Path) -> Result<Engine, Failure> {
    let index = Index::load_dir(dir).with_context(|| format!("loading index from {}", dir.display()))?;
    Ok(Engine::new(index, Params::default()))
}

fn run_ingest(corpus: &Path, out: &Path) -> Outcome {
    let (corpus, report) = ingest(corpus)?;
    print!("{report}");
    let index = Index::build(&corpus).context("building index")?;
    index.save_dir(out)?;
    println!("index written to {}", out.display());
    Ok(())
}

impl QueryCmd {
    /// Splits the positionals into index directory and query terms.
    fn resolve(&self) -> Result<(PathBuf, String), Failure> {
        let (index, terms) = match (&self.index, self.args.split_first()) {
            (Some(dir), _) => (dir.clone(), &self.args[..]),
            (None, Some((first, rest))) if Path::new(first).exists() => (PathBuf::from(first), rest),
            (None, _) => match std::env::var_os(INDEX_ENV) {
                Some(dir) => (PathBuf::from(dir), &self.args[..]),
                None => {
                    return Err(Failure::Usage(format!(
                        "no index directory: pass it first, use --index, or set {INDEX_ENV}"
                    )))
                }
            },
        };
        if terms.is_empty() {
            return Err(Failure::Usage("no query terms given".into()));
        }
        Ok((index, terms.join(" ")))
    }

    fn request(&self, q: String) -> QueryRequest {
        QueryRequest {
            q,
            model: self.model,
            constraints: Constraints {
                time: self.time,
                entities: self.entities.iter().cloned().collect(),
                article_types: self.types.iter().cloned().collect::<BTreeSet<_>>(),
            },
            prev: Vec::new(),
            k: self.k,
            alpha: self.alpha,
            gamma: self.gamma,
            burst_k: self.burst_k,
        }
    }
}

fn usage_on_empty(e: RankError) -> Failure {
    match e {
        RankError::EmptyQuery => Failure::Usage(e.to_string()),
        other => Failure::Data(other.into()),
    }
}

fn run_query(cmd: QueryCmd) -> Outcome {
    let (dir, q) = cmd.resolve()?;
    let engine = load_engine(&dir)?;
    let response = engine.search(&cmd.request(q)).map_err(usage_on_empty)?;
    for w in &response.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = std::io::stdout().lock();
    if cmd.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&response).context("serializing")?).context("stdout")?;
        return Ok(());
    }
    for r in &response.results {
        let month = expedition_core::Month::of_date(r.published);
        writeln!(out, "{}\t{:.6}\t{}\t{}\t{}", r.rank, r.score, r.doc_id, r.headline, month).context("stdout")?;
    }
    Ok(())
}

fn run_timeline(cmd: QueryCmd) -> Outcome {
    let (dir, q) = cmd.resolve()?;
    let engine = load_engine(&dir)?;
    let profile = engine.timeline(&cmd.request(q)).map_err(usage_on_empty)?;
    let mut out = std::io::stdout().lock();
    if cmd.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&profile).context("serializing")?).context("stdout")?;
        return Ok(());
    }
    if profile.no_data {
        eprintln!("warning: no documents match; the profile is empty");
    }
    for b in &profile.buckets {
        writeln!(out, "bucket\t{}\t{:.6}\t{:.6}\t{:.6}", b.month, b.p_pub, b.p_ref, b.p_combined).context("stdout")?;
    }
    for b in &profile.bursts {
        writeln!(
            out,
            "burst\t{}\t{}\t{}\t{}",
            b.start_month,
            b.end_month,
            b.peak_month,
            b.label_headlines.join(" | ")
        )
        .context("stdout")?;
    }
    Ok(())
}

fn run_generate(cmd: GenerateCmd) -> Outcome {
    let mut spec = SyntheticSpec::new(cmd.seed, cmd.docs, cmd.span).with_entities(cmd.entities);
    spec.topic_fraction = cmd.topic_fraction;
    for (span, terms, intensity) in &cmd.bursts {
        let terms: Vec<&str> = terms.iter().map(String::as_str).collect();
        spec = spec.with_burst(*span, &terms, *intensity);
    }
    let corpus = spec.generate().map_err(|e| Failure::Usage(e.to_string()))?;
    corpus.write(&cmd.out)?;
    println!("{} documents written to {}", corpus.len(), cmd.out.display());
    Ok(())
}

fn run_replay(export: &Path, dir: &Path, json: bool) -> Outcome {
    let raw = std::fs::read_to_string(export).with_context(|| format!("reading {}", export.display()))?;
    let export = SessionExport::from_json(&raw)?;
    let engine = load_engine(dir)?;
    let report = replay(&export, &engine);
    let mut out = std::io::stdout().lock();
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).context("serializing")?).context("stdout")?;
    } else {
        for s in &report.stages {
            let kind = if s.refined { "refined" } else { "ranked" };
            let status = match &s.error {
                Some(e) => format!("error: {e}"),
                None => format!("{} results", s.results.len()),
            };
            writeln!(out, "stage\t{}\t{}\t{kind}\t{status}\t{}", s.id, s.model.as_str(), s.query)
                .context("stdout")?;
        }
        for e in &report.corpus {
            let stage = e.stage.map_or("-".to_string(), |s| s.to_string());
            let status = if e.found { "verified" } else { "missing" };
            writeln!(out, "saved\t{}\t{stage}\t{status}", e.doc_id).context("stdout")?;
        }
        writeln!(out, "{}/{} saved documents verified", report.verified(), report.corpus.len()).context("stdout")?;
    }
    if !report.all_verified() {
        return Err(anyhow::anyhow!("{} saved documents could not be verified", report.corpus.len() - report.verified()).into());
    }
    Ok(())
}

fn run_serve(dir: &Path, addr: SocketAddr) -> Outcome {
    let engine = Arc::new(load_engine(dir)?);
    engine.warm();
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime
        .block_on(expedition_server::serve(engine, addr, |local| {
            println!("listening on http://{local}");
            let _ = std::io::stdout().flush();
        }))
        .with_context(|| format!("serving on {addr}"))?;
    Ok(())
}
