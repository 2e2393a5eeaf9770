use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use msgrewrite::bench::{self, CopyMode, EvalOptions, ReportFormat};
use msgrewrite::cascade::{self, ScoreKey, SweepOptions};
use msgrewrite::config::{load_config, process_env, AppConfig, ConfigOverrides, NliMode};
use msgrewrite::datagen::{self, DatagenOptions, HallucinationTemplate};
use msgrewrite::modelio::TextBackend;
use msgrewrite::reward::{heuristic_reward, RewardWeights, RewriteTask};
use msgrewrite::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "msgrewrite",
    version,
    about = "Message rewriting evaluation, data generation and cascade tools"
)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// On-device / generator model endpoint (http or https URL)
    #[arg(long, global = true, value_name = "URL")]
    endpoint: Option<String>,
    /// Bearer token for --endpoint
    #[arg(long, global = true, value_name = "TOKEN")]
    auth_token: Option<String>,
    /// Mock backend script (JSON) used instead of an endpoint
    #[arg(long, global = true, value_name = "PATH")]
    mock_script: Option<PathBuf>,
    /// Server model endpoint for the cascade
    #[arg(long, global = true, value_name = "URL")]
    server_endpoint: Option<String>,
    /// Mock script for the server model
    #[arg(long, global = true, value_name = "PATH")]
    server_mock_script: Option<PathBuf>,
    /// Judge model endpoint
    #[arg(long, global = true, value_name = "URL")]
    judge_endpoint: Option<String>,
    /// Mock script for the judge model
    #[arg(long, global = true, value_name = "PATH")]
    judge_mock_script: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score predictions against a dataset and print a metric report
    Eval(EvalArgs),
    /// Dataset statistics per task and overall
    Stats(StatsArgs),
    /// Generate rewrite pairs from seed queries and keep judge-approved ones
    Datagen(DatagenArgs),
    /// Re-judge existing pairs and keep unanimously approved ones
    Filter(FilterArgs),
    /// Build good/bad suffix-labeled training text from pairs
    SuffixData(SuffixDataArgs),
    /// Serve heuristic rewards over JSON lines on stdin/stdout
    RewardServer(RewardServerArgs),
    /// Route prompts through the on-device/server cascade
    Cascade(CascadeArgs),
    /// Replay a cascade log over a threshold grid
    Sweep(SweepArgs),
    /// Find the threshold that meets an on-device ratio target
    PickGamma(PickGammaArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file (default: stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("preds").required(true).args(["predictions", "copy"]))]
struct EvalArgs {
    /// Dataset JSONL: id, task, instruction, source, targets
    #[arg(long, value_name = "PATH")]
    dataset: PathBuf,
    /// Predictions JSONL: id, prediction
    #[arg(long, value_name = "PATH")]
    predictions: Option<PathBuf>,
    /// Baseline that copies the source or the first target
    #[arg(long, value_name = "source|target")]
    copy: Option<CopyMode>,
    /// System name shown in the report
    #[arg(long, default_value = "system")]
    system: String,
    /// Report format: json, csv or markdown
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
    /// Per-example metrics as JSONL
    #[arg(long, value_name = "PATH")]
    details: Option<PathBuf>,
    /// Compute success rate with the judge backend
    #[arg(long)]
    judge: bool,
    /// Judge votes per prediction
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Entailment scorer: stub or backend
    #[arg(long, value_name = "stub|backend")]
    nli: Option<NliArg>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long, value_name = "PATH")]
    dataset: PathBuf,
    /// Report format: json, csv or markdown
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
    /// Include NLI columns using the configured scorer
    #[arg(long)]
    with_nli: bool,
    /// Entailment scorer: stub or backend
    #[arg(long, value_name = "stub|backend")]
    nli: Option<NliArg>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DatagenArgs {
    /// Seed queries, one per line
    #[arg(long, value_name = "PATH")]
    seeds: PathBuf,
    /// Builtin template id or template file
    #[arg(long)]
    template: Option<String>,
    /// Judge votes per triple
    #[arg(long)]
    k: Option<usize>,
    /// Continuations sampled per seed
    #[arg(long)]
    continuations: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct FilterArgs {
    /// Pairs JSONL: instruction, source, target
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Judge votes per pair
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SuffixDataArgs {
    /// Pairs JSONL: instruction, source, target
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Judge votes per pair
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RewardServerArgs {
    /// Entailment scorer: stub or backend
    #[arg(long, value_name = "stub|backend")]
    nli: Option<NliArg>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("inputs").required(true).args(["prompt", "prompts"]))]
struct CascadeArgs {
    /// A single prompt
    #[arg(long)]
    prompt: Option<String>,
    /// JSONL with id, instruction, source (dataset files work)
    #[arg(long, value_name = "PATH")]
    prompts: Option<PathBuf>,
    /// Confidence threshold in [0, 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// On-device samples per prompt
    #[arg(long)]
    num_samples: Option<usize>,
    /// Write replayable log records here
    #[arg(long, value_name = "PATH")]
    log: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Cascade log JSONL
    #[arg(long, value_name = "PATH")]
    log: PathBuf,
    /// start:stop:step or a comma list
    #[arg(long, default_value = "0:1:0.01")]
    gammas: String,
    /// Score used for selection and thresholding: suffix or lm
    #[arg(long, default_value = "suffix")]
    key: ScoreKey,
    /// Best-of-n over the first n candidates only
    #[arg(long)]
    max_candidates: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PickGammaArgs {
    /// Cascade log JSONL
    #[arg(long, value_name = "PATH")]
    log: PathBuf,
    /// Required on-device ratio in [0, 1]
    #[arg(long)]
    target: f64,
    /// Score used for selection and thresholding: suffix or lm
    #[arg(long, default_value = "suffix")]
    key: ScoreKey,
}

#[derive(Debug, Clone, Copy)]
struct NliArg(NliMode);

impl std::str::FromStr for NliArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stub" => Ok(NliArg(NliMode::Stub)),
            "backend" => Ok(NliArg(NliMode::Backend)),
            other => Err(Error::InvalidArgument(format!(
                "unknown NLI mode `{other}` (stub or backend)"
            ))),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_output(out: &OutputArgs, content: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

impl Cli {
    pub fn run(self) -> Result<()> {
        let overrides = self.overrides();
        let mut config = load_config(self.global.config.as_deref(), &process_env(), &overrides)?;
        match self.command {
            Command::Eval(a) => eval(&mut config, a),
            Command::Stats(a) => stats(&mut config, a),
            Command::Datagen(a) => run_datagen(&config, a),
            Command::Filter(a) => filter(&config, a),
            Command::SuffixData(a) => suffix_data(&config, a),
            Command::RewardServer(a) => reward_server(&mut config, a),
            Command::Cascade(a) => run_cascade(&config, a),
            Command::Sweep(a) => sweep(a),
            Command::PickGamma(a) => pick_gamma(a),
        }
    }

    fn overrides(&self) -> ConfigOverrides {
        let g = &self.global;
        let mut o = ConfigOverrides {
            endpoint: g.endpoint.clone(),
            auth_token: g.auth_token.clone(),
            mock_script: g.mock_script.clone(),
            server_endpoint: g.server_endpoint.clone(),
            server_mock_script: g.server_mock_script.clone(),
            judge_endpoint: g.judge_endpoint.clone(),
            judge_mock_script: g.judge_mock_script.clone(),
            ..Default::default()
        };
        match &self.command {
            Command::Cascade(a) => {
                o.gamma = a.gamma;
                o.num_samples = a.num_samples;
            }
            Command::Datagen(a) => o.k = a.k,
            Command::Filter(a) => o.k = a.k,
            Command::SuffixData(a) => o.k = a.k,
            _ => {}
        }
        o
    }
}

fn eval(config: &mut AppConfig, a: EvalArgs) -> Result<()> {
    if let Some(NliArg(mode)) = a.nli {
        config.nli = mode;
    }
    let examples = bench::load_dataset(&a.dataset)?;
    let predictions = match (&a.predictions, a.copy) {
        (Some(path), _) => bench::parse_predictions(&read(path)?)?,
        (None, Some(mode)) => bench::copy_predictions(&examples, mode),
        (None, None) => unreachable!("clap requires one of --predictions/--copy"),
    };
    let scorer = config.nli_scorer()?;
    let judge = if a.judge { Some(config.judge_backend()?) } else { None };
    let options = EvalOptions {
        system: a.system,
        judge_k: a.k,
        judge_params: config.generation.clone(),
        ..Default::default()
    };
    let evaluation = bench::evaluate(&examples, &predictions, &scorer, judge.as_deref(), &options)?;
    if let Some(path) = &a.details {
        std::fs::write(path, bench::render_details(&evaluation.details))?;
    }
    let report = bench::render_report(std::slice::from_ref(&evaluation.row), &evaluation.details, a.format)?;
    write_output(&a.output, &report)
}

fn stats(config: &mut AppConfig, a: StatsArgs) -> Result<()> {
    if let Some(NliArg(mode)) = a.nli {
        config.nli = mode;
    }
    let examples = bench::load_dataset(&a.dataset)?;
    let scorer = if a.with_nli { Some(config.nli_scorer()?) } else { None };
    let stats = bench::dataset_stats(&examples, scorer.as_deref())?;
    write_output(&a.output, &bench::render_stats(&stats, a.format))
}

fn run_datagen(config: &AppConfig, a: DatagenArgs) -> Result<()> {
    let seeds = datagen::read_seeds(&read(&a.seeds)?);
    let template = HallucinationTemplate::resolve(a.template.as_deref().unwrap_or(&config.datagen.template))?;
    let continuations = a.continuations.unwrap_or(config.datagen.continuations);
    let options = DatagenOptions {
        template,
        k: config.datagen.k,
        generation: config.generation.with_samples(continuations),
        judge_params: config.generation.clone(),
    };
    let generator = config.backend.build("backend")?;
    let judge = config.judge_backend()?;
    let (records, summary) = datagen::run_datagen(&seeds, &*generator, &*judge, &options)?;
    eprintln!(
        "seeds {} continuations {} triples {} dropped {} duplicates {} kept {} rejected {}",
        summary.seeds,
        summary.continuations,
        summary.triples,
        summary.dropped_blocks,
        summary.duplicates,
        summary.kept,
        summary.rejected
    );
    write_output(&a.output, &datagen::to_jsonl(&records))
}

fn filter(config: &AppConfig, a: FilterArgs) -> Result<()> {
    let pairs = datagen::read_pairs(&read(&a.input)?)?;
    let judge = config.judge_backend()?;
    let kept = datagen::filter_pairs(&pairs, &*judge, config.datagen.k, &config.generation)?;
    eprintln!("kept {} of {}", kept.len(), pairs.len());
    write_output(&a.output, &datagen::to_jsonl(&kept))
}

fn suffix_data(config: &AppConfig, a: SuffixDataArgs) -> Result<()> {
    let pairs = datagen::read_pairs(&read(&a.input)?)?;
    let judge = config.judge_backend()?;
    let records = datagen::suffix_dataset(&pairs, &*judge, config.datagen.k, &config.generation, &config.suffix)?;
    let examples: Vec<_> = records.iter().map(|r| r.example()).collect();
    write_output(&a.output, &datagen::to_jsonl(&examples))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RewardRequest {
    #[serde(default)]
    id: serde_json::Value,
    task: RewriteTask,
    source: String,
    prediction: String,
    #[serde(default)]
    weights: Option<RewardWeights>,
}

#[derive(Serialize)]
struct RewardReply<'a, T: Serialize> {
    id: &'a serde_json::Value,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

/// One JSON reply per request line; a bad line yields an error reply and
/// the loop continues.
fn reward_server(config: &mut AppConfig, a: RewardServerArgs) -> Result<()> {
    if let Some(NliArg(mode)) = a.nli {
        config.nli = mode;
    }
    let scorer = config.nli_scorer()?;
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    let null = serde_json::Value::Null;
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<RewardRequest>(&line) {
            Err(e) => serde_json::to_string(&RewardReply {
                id: &null,
                body: ErrorBody { error: e.to_string() },
            }),
            Ok(req) => {
                let weights = req.weights.unwrap_or_else(|| config.reward.weights_for(req.task));
                match heuristic_reward(
                    req.task,
                    &req.source,
                    &req.prediction,
                    &scorer,
                    &config.reward.ngram,
                    Some(&weights),
                ) {
                    Ok(b) => serde_json::to_string(&RewardReply { id: &req.id, body: b }),
                    Err(e) => serde_json::to_string(&RewardReply {
                        id: &req.id,
                        body: ErrorBody { error: e.to_string() },
                    }),
                }
            }
        }
        .expect("serializable");
        writeln!(stdout, "{reply}")?;
        stdout.flush()?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct PromptLine {
    id: String,
    instruction: String,
    source: String,
}

#[derive(Serialize)]
struct DecisionLine<'a> {
    id: &'a str,
    origin: cascade::Origin,
    chosen_text: &'a str,
    suffix_score: f64,
    gamma: f64,
    candidates_considered: usize,
}

fn run_cascade(config: &AppConfig, a: CascadeArgs) -> Result<()> {
    let prompts: Vec<(String, String)> = match (&a.prompt, &a.prompts) {
        (Some(p), _) => vec![("prompt".into(), p.clone())],
        (None, Some(path)) => {
            let mut out = Vec::new();
            for (i, line) in read(path)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let p: PromptLine =
                    serde_json::from_str(line).map_err(|e| Error::Validation(format!("line {}: {e}", i + 1)))?;
                out.push((p.id, format!("{}\n{}", p.instruction, p.source)));
            }
            out
        }
        (None, None) => unreachable!("clap requires one of --prompt/--prompts"),
    };
    let device = config.backend.build("backend")?;
    let server: std::sync::Arc<dyn TextBackend> = config.server_backend()?;
    let mut decisions = String::new();
    let mut log = String::new();
    for (id, prompt) in &prompts {
        let d = cascade::route(prompt, &*device, &*server, &config.cascade, &config.suffix)?;
        let line = DecisionLine {
            id,
            origin: d.origin,
            chosen_text: &d.chosen_text,
            suffix_score: d.suffix_score,
            gamma: d.gamma,
            candidates_considered: d.candidates_considered,
        };
        decisions.push_str(&serde_json::to_string(&line).expect("serializable"));
        decisions.push('\n');
        log.push_str(&serde_json::to_string(&d.log_record(id)).expect("serializable"));
        log.push('\n');
    }
    if let Some(path) = &a.log {
        std::fs::write(path, log)?;
    }
    write_output(&a.output, &decisions)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let log = cascade::read_log(&read(&a.log)?)?;
    let gammas = cascade::parse_gamma_grid(&a.gammas)?;
    let options = SweepOptions {
        key: a.key,
        max_candidates: a.max_candidates,
    };
    let points = cascade::sweep_with(&log, &gammas, options)?;
    write_output(&a.output, &cascade::tradeoff_csv(&points))
}

fn pick_gamma(a: PickGammaArgs) -> Result<()> {
    let log = cascade::read_log(&read(&a.log)?)?;
    let gamma = cascade::pick_gamma_for_budget(&log, a.target, a.key)?;
    println!("{gamma}");
    Ok(())
}
