use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use futures::StreamExt;
use rhizome::agent::{ProviderConfig, ProviderKind};
use rhizome::pipeline::{execute_run, RunConfig, RunHandle, RunRegistry, Services, SourceConfig};
use rhizome::topography::EmbeddingConfig;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "rhizome", version, about = "Multi-lens literature mapping with heterodox re-entry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline once and write the cartography.
    Run(Box<RunArgs>),
    /// Serve the REST/SSE API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fixture,
    Live,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    zone: Option<String>,
    /// Per-source record limit.
    #[arg(long)]
    max_papers: Option<usize>,
    #[arg(long, value_enum)]
    llm: Option<Mode>,
    #[arg(long, env = "RHIZOME_LLM_ENDPOINT")]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Fixture root holding `llm/`, `sources/` and optionally `abs.csv`.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Source data mode; defaults to fixture when --fixtures is given.
    #[arg(long, value_enum)]
    sources: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dice_threshold: Option<f64>,
    #[arg(long)]
    centralization_threshold: Option<f64>,
    #[arg(long)]
    k_fraction: Option<f64>,
    #[arg(long)]
    max_jaccard: Option<f64>,
    #[arg(long)]
    top_m: Option<usize>,
    #[arg(long)]
    max_reentries: Option<u32>,
    /// Heterodox tradition to query on re-entry; repeatable.
    #[arg(long = "tradition")]
    traditions: Vec<String>,
    #[arg(long)]
    pair_cap: Option<usize>,
    #[arg(long)]
    void_gap_ratio: Option<f64>,
    #[arg(long)]
    isolation_jaccard: Option<f64>,
    #[arg(long)]
    min_cluster_size: Option<usize>,
    /// Journal ranking CSV with a `journal,rank` header.
    #[arg(long)]
    abs_table: Option<PathBuf>,
    /// Embedding sidecar base URL.
    #[arg(long, conflicts_with = "embeddings")]
    sidecar: Option<String>,
    /// Injected embedding matrix CSV (`paper_id,d0,...`).
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, env = "RHIZOME_MAILTO")]
    mailto: Option<String>,
    /// Save live responses as fixtures under this directory.
    #[arg(long)]
    record: Option<PathBuf>,
}

fn build_config(a: RunArgs) -> Result<RunConfig, String> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(zone) = a.zone {
        cfg.zone = zone;
    }
    macro_rules! set {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = a.$flag { cfg.$($field).+ = v; })*
        };
    }
    set!(
        max_papers => per_source_limit,
        seed => seed,
        dice_threshold => dice_threshold,
        centralization_threshold => centralization_threshold,
        k_fraction => k_fraction,
        max_jaccard => lens_rules.max_jaccard,
        max_reentries => max_reentries,
        pair_cap => pair_cap,
        void_gap_ratio => topography.void_gap_ratio,
        isolation_jaccard => topography.isolation_jaccard,
        min_cluster_size => topography.min_cluster_size,
    );
    if a.top_m.is_some() {
        cfg.top_m = a.top_m;
    }
    if !a.traditions.is_empty() {
        cfg.traditions = a.traditions;
    }
    if let Some(dir) = &a.fixtures {
        if cfg.abs_table.is_none() && dir.join("abs.csv").exists() {
            cfg.abs_table = Some(dir.join("abs.csv"));
        }
    }
    match a.llm {
        Some(Mode::Fixture) => {
            let dir = a.fixtures.as_ref().ok_or("--llm fixture needs --fixtures")?;
            cfg.provider = ProviderConfig::fixture(dir.join("llm"));
        }
        Some(Mode::Live) => {
            cfg.provider.kind = ProviderKind::LiveHttp;
        }
        None => {}
    }
    if let Some(endpoint) = a.endpoint {
        cfg.provider.endpoint = Some(endpoint);
    }
    if a.model.is_some() {
        cfg.provider.model_name = a.model;
    }
    let sources = a.sources.or(a.fixtures.as_ref().map(|_| Mode::Fixture));
    match sources {
        Some(Mode::Fixture) => {
            let dir = a.fixtures.as_ref().ok_or("--sources fixture needs --fixtures")?;
            cfg.source_data = SourceConfig::Fixture { dir: dir.join("sources") };
        }
        Some(Mode::Live) => cfg.source_data = SourceConfig::Live,
        None => {}
    }
    if a.abs_table.is_some() {
        cfg.abs_table = a.abs_table;
    }
    if let Some(url) = a.sidecar {
        cfg.embeddings = EmbeddingConfig::Sidecar { url, model: None };
    }
    if let Some(path) = a.embeddings {
        cfg.embeddings = EmbeddingConfig::Injected { path };
    }
    if a.mailto.is_some() {
        cfg.mailto = a.mailto;
    }
    if a.record.is_some() {
        cfg.record = a.record;
    }
    if a.out.is_some() {
        cfg.out = a.out;
    }
    Ok(cfg)
}

async fn run(args: RunArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(errors) = cfg.validate() {
        for e in errors {
            eprintln!("invalid config: {e}");
        }
        return ExitCode::from(2);
    }
    let services = match Services::from_config(&cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let handle = Arc::new(RunHandle::new(&uuid::Uuid::new_v4().to_string(), &cfg.zone));
    let mut events = handle.events.subscribe(0);
    let printer = tokio::spawn(async move {
        while let Some(Ok(e)) = events.next().await {
            let marker = e.reentry.map(|r| format!(" [re-entry {r}]")).unwrap_or_default();
            eprintln!("{:>4} {} {}{marker} {}", e.sequence, e.phase, e.kind, e.payload);
        }
    });
    let completed = execute_run(&handle, cfg, services).await;
    let _ = printer.await;
    if completed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Run(args) => run(*args).await,
        Command::Serve { port, host } => {
            let addr: SocketAddr = match format!("{host}:{port}").parse() {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("error: bad address: {e}");
                    return ExitCode::from(2);
                }
            };
            match rhizome::server::serve(addr, Arc::new(RunRegistry::default())).await {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
