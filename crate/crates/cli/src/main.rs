//! `xeval`: batch front end for the evaluation service. Every subcommand is
//! a client of the HTTP service; pass `--server` to use a running instance,
//! otherwise an ephemeral in-process server is started for the invocation.
//!
//! Exit codes: 0 success, 1 validation failure (error JSON on stderr),
//! 2 usage or configuration errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xeval_client::{Client, ClientError};
use xeval_gateway::{EndpointRole, GatewayConfig, GatewayMode, RetryPolicy};
use xeval_service::{ServerConfig, ServerHandle};

mod commands;
mod io;

#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError { code: "validation".into(), message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: "config".into(), message: message.into() }
    }

    fn exit_code(&self) -> u8 {
        if self.code == "config" {
            2
        } else {
            1
        }
    }
}

impl From<ClientError> for CliError {
    fn from(err: ClientError) -> Self {
        CliError {
            code: err.api_code().unwrap_or("transport").to_string(),
            message: err.to_string(),
        }
    }
}

impl From<xeval_service::ServiceError> for CliError {
    fn from(err: xeval_service::ServiceError) -> Self {
        CliError { code: err.code().to_string(), message: err.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "xeval", version, about = "Explainable translation evaluation pipeline")]
struct Cli {
    /// Base URL of a running service (e.g. http://127.0.0.1:8080).
    /// Without it, an in-process server is started for this invocation.
    #[arg(long, global = true)]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

/// Gateway/model configuration shared by the subcommands that reach a
/// model endpoint.
#[derive(Args, Debug, Default, Clone)]
struct GatewayArgs {
    /// Server configuration file (JSON); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replay recorded exchanges from this cassette (network-free).
    #[arg(long, value_name = "CASSETTE")]
    replay: Option<PathBuf>,
    /// Call the live endpoint and record exchanges into this cassette.
    #[arg(long, value_name = "CASSETTE", conflicts_with = "replay")]
    record: Option<PathBuf>,
    /// Call the live endpoint without recording.
    #[arg(long, conflicts_with_all = ["replay", "record"])]
    live: bool,
    /// Endpoint URL for live/record traffic.
    #[arg(long)]
    endpoint_url: Option<String>,
    /// Model name sent with live/record requests.
    #[arg(long)]
    model: Option<String>,
    /// Maximum in-flight requests.
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
}

impl GatewayArgs {
    /// Builds the gateway configuration for the role a subcommand talks to.
    fn resolve(&self, role: EndpointRole) -> Result<GatewayConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => ServerConfig::from_file(path).map_err(CliError::from)?.gateway,
            None => GatewayConfig {
                mode: GatewayMode::Replay,
                endpoints: BTreeMap::new(),
                cassettes: BTreeMap::new(),
                max_in_flight: self.max_in_flight,
                retry: RetryPolicy::default(),
            },
        };
        if let Some(path) = &self.replay {
            config.mode = GatewayMode::Replay;
            config.endpoints.clear();
            config.cassettes.insert(role, path.clone());
        } else if let Some(path) = &self.record {
            config.mode = GatewayMode::Record;
            config.cassettes.insert(role, path.clone());
        } else if self.live {
            config.mode = GatewayMode::Live;
        }

        if matches!(config.mode, GatewayMode::Live | GatewayMode::Record) {
            if let Some(url) = &self.endpoint_url {
                let entry = config.endpoints.entry(role).or_default();
                entry.url = url.clone();
                entry.model = self.model.clone().or(entry.model.take());
            }
            let entry = config.endpoints.get_mut(&role).ok_or_else(|| {
                CliError::config(format!(
                    "{} endpoint required: pass --endpoint-url or a --config file",
                    role.as_str()
                ))
            })?;
            if entry.url.is_empty() {
                return Err(CliError::config(format!("{} endpoint URL is empty", role.as_str())));
            }
            if entry.api_key.is_none() && entry.api_key_env.is_none() {
                entry.api_key = role_api_key(role);
            }
        } else if self.config.is_none() && self.replay.is_none() {
            return Err(CliError::config(
                "model access required: pass --replay, --record, --live, or --config",
            ));
        }
        Ok(config)
    }

    fn specified(&self) -> bool {
        self.config.is_some() || self.replay.is_some() || self.record.is_some() || self.live
    }
}

fn role_api_key(role: EndpointRole) -> Option<String> {
    let specific = format!("XEVAL_{}_API_KEY", role.as_str().to_uppercase());
    std::env::var(specific).ok().or_else(|| std::env::var("XEVAL_API_KEY").ok())
}

/// Decode-parameter flags for sampling subcommands.
#[derive(Args, Debug, Clone)]
struct DecodeArgs {
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long, default_value_t = 1.0)]
    top_p: f64,
    #[arg(long, default_value_t = 1)]
    n_samples: u32,
    #[arg(long, default_value_t = 1024)]
    max_tokens: u32,
}

impl DecodeArgs {
    fn params(&self) -> xeval_gateway::DecodeParams {
        xeval_gateway::DecodeParams {
            temperature: self.temperature,
            top_p: self.top_p,
            n_samples: self.n_samples,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        /// Server configuration file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the bind address from the config.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Send instances through the evaluator endpoint and parse the reports.
    Evaluate {
        #[arg(long = "in", value_name = "INSTANCES")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Parse mode for returned reports.
        #[arg(long, default_value = "strict")]
        mode: String,
        /// Instruction template file overriding the bundled one.
        #[arg(long)]
        template: Option<PathBuf>,
        #[command(flatten)]
        decode: DecodeArgs,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Score reports by severity-weighted error counting.
    Score {
        #[arg(long = "in", value_name = "REPORTS")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = -5)]
        major_weight: i64,
        #[arg(long, default_value_t = -1)]
        minor_weight: i64,
        /// Clamp scores below at this floor.
        #[arg(long)]
        clamp: Option<i64>,
        #[arg(long, default_value = "strict")]
        mode: String,
    },
    /// Run the deterministic failure-mode checks.
    Check {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long = "in", value_name = "SAMPLES")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Judge answers file; its Q1/Q2 extractions override heuristics.
        #[arg(long)]
        judge: Option<PathBuf>,
        #[arg(long)]
        case_fold: bool,
        #[arg(long, default_value = "strict")]
        mode: String,
    },
    /// Query the judge endpoint for every sampled report.
    Judge {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long = "in", value_name = "SAMPLES")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        decode: DecodeArgs,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Combine judge answers and check outcomes into feedback scores.
    Feedback {
        #[arg(long = "in", value_name = "SAMPLES")]
        input: PathBuf,
        #[arg(long)]
        checks: PathBuf,
        #[arg(long)]
        judge: PathBuf,
        /// Samples enriched with their feedback score.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-annotation details.
        #[arg(long)]
        details_out: Option<PathBuf>,
    },
    /// Build the pairwise ranking dataset from scored samples.
    Pairs {
        #[arg(long = "in", value_name = "SAMPLES")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Stats record (defaults to <out>.stats.json).
        #[arg(long)]
        stats_out: Option<PathBuf>,
    },
    /// Select the highest-reward sample per instance.
    Rerank {
        #[arg(long = "in", value_name = "SAMPLES")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Score samples through the reward endpoint first (requires
        /// --instances and gateway flags).
        #[arg(long)]
        score: bool,
        #[arg(long)]
        instances: Option<PathBuf>,
        #[command(flatten)]
        decode: DecodeArgs,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Correlate metric scores with human ratings, per domain.
    Metaeval {
        /// Metric score files (JSONL or TSV); repeatable.
        #[arg(long = "scores", required = true)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        ratings: PathBuf,
        /// Write the correlation report JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress the rendered table on stdout.
        #[arg(long)]
        no_table: bool,
    },
    /// Williams significance test between two metrics on shared ratings.
    Significance {
        #[arg(long)]
        scores_a: PathBuf,
        #[arg(long)]
        scores_b: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic data generation pipeline.
    #[command(subcommand)]
    Datagen(DatagenCommand),
}

#[derive(Subcommand)]
enum DatagenCommand {
    /// Expand seed domains into a domain list.
    Domains {
        /// Comma-separated seed domains.
        #[arg(long)]
        seeds: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Generate topics for each domain.
    Topics {
        #[arg(long)]
        domains: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Generate candidate sentences per topic and select one.
    Sentences {
        #[arg(long)]
        topics: PathBuf,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value = "English")]
        language: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Inject recipe-driven errors into raw texts.
    Inject {
        #[arg(long)]
        raw: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "Chinese")]
        source_lang: String,
        #[arg(long, default_value = "English")]
        target_lang: String,
        #[arg(long)]
        out: PathBuf,
        /// Manifest path (defaults to <out>.manifest.json).
        #[arg(long)]
        manifest_out: Option<PathBuf>,
        #[command(flatten)]
        decode: DecodeArgs,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Emit fine-tune records from synthetic records.
    Finetune {
        #[arg(long = "in", value_name = "SYNTHETIC")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        template: Option<PathBuf>,
    },
}

/// A connected client plus the embedded server to tear down, if any.
pub struct Session {
    pub client: Client,
    handle: Option<ServerHandle>,
}

impl Session {
    async fn close(self) {
        if let Some(handle) = self.handle {
            handle.stop().await;
        }
    }
}

/// Connects to `--server` or spawns an in-process server with the given
/// gateway configuration.
async fn connect(server: &Option<String>, gateway: GatewayConfig) -> Result<Session, CliError> {
    match server {
        Some(url) => Ok(Session { client: Client::new(url.clone()), handle: None }),
        None => {
            let config = ServerConfig { bind: "127.0.0.1:0".into(), gateway };
            let handle = xeval_service::spawn(config).await.map_err(CliError::from)?;
            let client = Client::new(handle.url());
            Ok(Session { client, handle: Some(handle) })
        }
    }
}

/// Gateway config for subcommands that never call a model endpoint.
fn offline_gateway() -> GatewayConfig {
    GatewayConfig {
        mode: GatewayMode::Replay,
        endpoints: BTreeMap::new(),
        cassettes: BTreeMap::new(),
        max_in_flight: 1,
        retry: RetryPolicy::default(),
    }
}

fn parse_mode(text: &str) -> Result<xeval_core::report::ParseMode, CliError> {
    match text {
        "strict" => Ok(xeval_core::report::ParseMode::Strict),
        "lenient" => Ok(xeval_core::report::ParseMode::Lenient),
        other => Err(CliError::config(format!("unknown parse mode {other:?}"))),
    }
}

async fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Serve { config, bind } => {
            let mut config = ServerConfig::from_file(&config).map_err(CliError::from)?;
            if let Some(bind) = bind {
                config.bind = bind;
            }
            tracing_subscriber::fmt()
                .with_writer(std::io::stderr)
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .init();
            xeval_service::run(config).await.map_err(CliError::from)
        }
        Command::Evaluate { input, out, mode, template, decode, gateway } => {
            let config = gateway.resolve(EndpointRole::Evaluator)?;
            let session = connect(&cli.server, config).await?;
            let result =
                commands::evaluate(&session.client, &input, &out, parse_mode(&mode)?, template, decode.params())
                    .await;
            session.close().await;
            result
        }
        Command::Score { input, out, major_weight, minor_weight, clamp, mode } => {
            let session = connect(&cli.server, offline_gateway()).await?;
            let result = commands::score(
                &session.client,
                &input,
                &out,
                major_weight,
                minor_weight,
                clamp,
                parse_mode(&mode)?,
            )
            .await;
            session.close().await;
            result
        }
        Command::Check { instances, input, out, judge, case_fold, mode } => {
            let session = connect(&cli.server, offline_gateway()).await?;
            let result = commands::check(
                &session.client,
                &instances,
                &input,
                &out,
                judge,
                case_fold,
                parse_mode(&mode)?,
            )
            .await;
            session.close().await;
            result
        }
        Command::Judge { instances, input, out, decode, gateway } => {
            let config = gateway.resolve(EndpointRole::Judge)?;
            let session = connect(&cli.server, config).await?;
            let result =
                commands::judge(&session.client, &instances, &input, &out, decode.params()).await;
            session.close().await;
            result
        }
        Command::Feedback { input, checks, judge, out, details_out } => {
            let session = connect(&cli.server, offline_gateway()).await?;
            let result =
                commands::feedback(&session.client, &input, &checks, &judge, &out, details_out)
                    .await;
            session.close().await;
            result
        }
        Command::Pairs { input, out, stats_out } => {
            let session = connect(&cli.server, offline_gateway()).await?;
            let result = commands::pairs(&session.client, &input, &out, stats_out).await;
            session.close().await;
            result
        }
        Command::Rerank { input, out, score, instances, decode, gateway } => {
            let config = if score {
                gateway.resolve(EndpointRole::Reward)?
            } else if gateway.specified() {
                return Err(CliError::config(
                    "gateway flags only apply with --score",
                ));
            } else {
                offline_gateway()
            };
            let session = connect(&cli.server, config).await?;
            let result = commands::rerank(
                &session.client,
                &input,
                &out,
                score,
                instances,
                decode.params(),
            )
            .await;
            session.close().await;
            result
        }
        Command::Metaeval { scores, ratings, out, no_table } => {
            let session = connect(&cli.server, offline_gateway()).await?;
            let result =
                commands::metaeval(&session.client, &scores, &ratings, out, !no_table).await;
            session.close().await;
            result
        }
        Command::Significance { scores_a, scores_b, ratings, out } => {
            let session = connect(&cli.server, offline_gateway()).await?;
            let result =
                commands::significance(&session.client, &scores_a, &scores_b, &ratings, out).await;
            session.close().await;
            result
        }
        Command::Datagen(datagen) => match datagen {
            DatagenCommand::Domains { seeds, count, out, gateway } => {
                let config = gateway.resolve(EndpointRole::Datagen)?;
                let session = connect(&cli.server, config).await?;
                let result = commands::datagen_domains(&session.client, &seeds, count, &out).await;
                session.close().await;
                result
            }
            DatagenCommand::Topics { domains, count, out, gateway } => {
                let config = gateway.resolve(EndpointRole::Datagen)?;
                let session = connect(&cli.server, config).await?;
                let result = commands::datagen_topics(&session.client, &domains, count, &out).await;
                session.close().await;
                result
            }
            DatagenCommand::Sentences { topics, count, language, seed, out, gateway } => {
                let config = gateway.resolve(EndpointRole::Datagen)?;
                let session = connect(&cli.server, config).await?;
                let result = commands::datagen_sentences(
                    &session.client,
                    &topics,
                    count,
                    &language,
                    seed,
                    &out,
                )
                .await;
                session.close().await;
                result
            }
            DatagenCommand::Inject {
                raw,
                seed,
                source_lang,
                target_lang,
                out,
                manifest_out,
                decode,
                gateway,
            } => {
                let config = gateway.resolve(EndpointRole::Datagen)?;
                let session = connect(&cli.server, config).await?;
                let result = commands::datagen_inject(
                    &session.client,
                    &raw,
                    seed,
                    &source_lang,
                    &target_lang,
                    &out,
                    manifest_out,
                    decode.params(),
                )
                .await;
                session.close().await;
                result
            }
            DatagenCommand::Finetune { input, out, template } => {
                let session = connect(&cli.server, offline_gateway()).await?;
                let result =
                    commands::datagen_finetune(&session.client, &input, &out, template).await;
                session.close().await;
                result
            }
        },
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let body = serde_json::json!({"error": {"code": err.code, "message": err.message}});
            eprintln!("{body}");
            ExitCode::from(err.exit_code())
        }
    }
}
