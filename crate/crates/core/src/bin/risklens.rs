use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use risklens::baseline::{perturb_explain, PerturbationSpec, DEFAULT_SAMPLES};
use risklens::explain::{self, trace_episode, TraceMode};
use risklens::graph::Metric;
use risklens::render::{load_trace_csv, render_heatmap, save_trace_csv};
use risklens::risk::{label_binary, risk_init, risk_iterate};
use risklens::toyenvs::{cliff_generate, grid_generate, GridMap};
use risklens::{persist, Error, Explanation, FeatureSchema, FitOptions, Result, TransitionGraph, TransitionLog, Verdict};

#[derive(Parser)]
#[command(name = "risklens", version, about = "Risk explanations from state-transition logs")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output path. Commands that print JSON write to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random-agent log on a gridworld map.
    GenGrid {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        max_steps: usize,
        /// Where to write the feature schema (default: next to the log).
        #[arg(long)]
        schema_out: Option<PathBuf>,
    },
    /// Generate a random-walk log in the continuous cliff world.
    GenCliff {
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        max_steps: usize,
        #[arg(long)]
        schema_out: Option<PathBuf>,
    },
    /// Build the ε-radius transition graph from a log.
    BuildGraph {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value = "euclidean")]
        metric: String,
    },
    /// Attach a risk labeling to a graph file (in place unless --out).
    LabelRisk {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        mode: RiskMode,
        #[arg(long, default_value_t = 0.01)]
        l: f64,
        #[arg(long, default_value_t = 50)]
        iters: u32,
    },
    /// Direction of risk around one state.
    Explain {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated raw state.
        #[arg(long)]
        state: String,
        #[arg(long)]
        depth: u32,
        /// Fit probabilistic risk with ridge instead of classifying.
        #[arg(long)]
        regression: bool,
        /// Report g in raw feature units.
        #[arg(long)]
        denormalize: bool,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Per-timestep distance to risk and direction of risk for an episode.
    TraceRisk {
        #[arg(long)]
        graph: PathBuf,
        /// Episode records in the log format.
        #[arg(long)]
        episode: PathBuf,
        /// Which episode of the file to trace (default: the first).
        #[arg(long)]
        episode_id: Option<String>,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        cap: u32,
        #[arg(long)]
        regression: bool,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Render a trace CSV as a PPM heatmap.
    Heatmap {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 5)]
        vscale: usize,
        /// Comma-separated feature names to leave out.
        #[arg(long, value_delimiter = ',')]
        exclude_features: Vec<String>,
    },
    /// Graph explanation next to the perturbation baseline on a grid map.
    CompareBaseline {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[command(flatten)]
        fit: FitArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RiskMode {
    Binary,
    Prob,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value_t = FitOptions::default().reg)]
    reg: f64,
    #[arg(long, default_value_t = FitOptions::default().step)]
    step: f64,
    #[arg(long, default_value_t = FitOptions::default().iterations)]
    fit_iters: u32,
}

impl FitArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            reg: self.reg,
            step: self.step,
            iterations: self.fit_iters,
        }
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum VerdictJson {
    Direction {
        g: Vec<f64>,
        features: Vec<String>,
        bias: f64,
        mode: explain::Mode,
        reachable_size: usize,
        risky_count: usize,
        query_clamped: bool,
    },
    NoDirection {
        no_direction: bool,
        reachable_size: usize,
        risky_count: usize,
    },
}

impl From<Verdict> for VerdictJson {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Direction(Explanation {
                g,
                features,
                bias,
                mode,
                reachable_size,
                risky_count,
                query_clamped,
            }) => VerdictJson::Direction {
                g,
                features,
                bias,
                mode,
                reachable_size,
                risky_count,
                query_clamped,
            },
            Verdict::NoDirection {
                reachable_size,
                risky_count,
            } => VerdictJson::NoDirection {
                no_direction: true,
                reachable_size,
                risky_count,
            },
        }
    }
}

#[derive(Serialize)]
struct Comparison {
    graph: VerdictJson,
    baseline: VerdictJson,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    kind: &'a str,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            let line = serde_json::to_string(&ErrorLine {
                error: &msg,
                kind: e.kind(),
            })
            .unwrap_or(msg);
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

fn require_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref()
        .ok_or_else(|| Error::InvalidFitOptions("--out is required for this command".into()))
}

fn parse_state(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| Error::MalformedRecord {
                line: 0,
                message: format!("bad state component '{s}'"),
            })
        })
        .collect()
}

fn schema_path(log_out: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| log_out.with_extension("schema.json"))
}

fn emit_json(value: &impl Serialize, out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn write_log(log: &TransitionLog, out: &Path, schema_out: Option<PathBuf>) -> Result<()> {
    log.save(out)?;
    log.schema().save(schema_path(out, schema_out))
}

fn run(cli: Cli) -> Result<()> {
    let Cli { seed, out, command } = cli;
    match command {
        Command::GenGrid {
            map,
            episodes,
            max_steps,
            schema_out,
        } => {
            let map = GridMap::load(map)?;
            let log = grid_generate(&map, episodes, max_steps, seed)?;
            write_log(&log, require_out(&out)?, schema_out)
        }
        Command::GenCliff {
            episodes,
            max_steps,
            schema_out,
        } => {
            let log = cliff_generate(episodes, max_steps, seed)?;
            write_log(&log, require_out(&out)?, schema_out)
        }
        Command::BuildGraph {
            log,
            schema,
            epsilon,
            metric,
        } => {
            let metric: Metric = metric.parse()?;
            let log = TransitionLog::ingest(log, FeatureSchema::load(schema)?)?;
            let graph = TransitionGraph::build(&log, epsilon, metric)?;
            persist::save(require_out(&out)?, &graph, &Default::default())
        }
        Command::LabelRisk {
            graph: path,
            mode,
            l,
            iters,
        } => {
            let (graph, mut risk) = persist::load(&path)?;
            match mode {
                RiskMode::Binary => risk.binary = Some(label_binary(&graph)),
                RiskMode::Prob => {
                    risk.probabilistic = Some(risk_iterate(&graph, &risk_init(&graph), l, iters)?)
                }
            }
            persist::save(out.as_deref().unwrap_or(&path), &graph, &risk)
        }
        Command::Explain {
            graph,
            state,
            depth,
            regression,
            denormalize,
            fit,
        } => {
            let (graph, risk) = persist::load(graph)?;
            let state = parse_state(&state)?;
            let verdict = if regression {
                explain::direction_of_risk_regression(
                    &graph,
                    risk.require_probabilistic()?,
                    &state,
                    depth,
                    &fit.options(),
                )?
            } else {
                explain::direction_of_risk(&graph, risk.require_binary()?, &state, depth, &fit.options())?
            };
            let verdict = match verdict {
                Verdict::Direction(e) if denormalize => {
                    Verdict::Direction(e.denormalized(graph.normalizer()))
                }
                v => v,
            };
            emit_json(&VerdictJson::from(verdict), &out)
        }
        Command::TraceRisk {
            graph,
            episode,
            episode_id,
            depth,
            cap,
            regression,
            fit,
        } => {
            let (graph, risk) = persist::load(graph)?;
            let log = TransitionLog::ingest(episode, graph.schema().clone())?;
            let episode = match &episode_id {
                Some(id) => log
                    .episode(id)
                    .ok_or_else(|| Error::InvalidLog(format!("no episode '{id}'")))?,
                None => log
                    .episodes()
                    .first()
                    .ok_or_else(|| Error::InvalidLog("episode file is empty".into()))?,
            };
            let states: Vec<&[f64]> = episode.states().collect();
            let mode = if regression {
                TraceMode::Regression(risk.require_probabilistic()?)
            } else {
                TraceMode::Classification
            };
            let trace = trace_episode(
                &graph,
                risk.require_binary()?,
                &states,
                depth,
                cap,
                mode,
                &fit.options(),
            )?;
            save_trace_csv(&trace, require_out(&out)?)
        }
        Command::Heatmap {
            trace,
            vscale,
            exclude_features,
        } => {
            let trace = load_trace_csv(trace)?;
            render_heatmap(&trace, vscale, &exclude_features)?.save(require_out(&out)?)
        }
        Command::CompareBaseline {
            graph,
            map,
            state,
            depth,
            samples,
            fit,
        } => {
            let (graph, risk) = persist::load(graph)?;
            let map = GridMap::load(map)?;
            let state = parse_state(&state)?;
            let options = fit.options();
            let ours = explain::direction_of_risk(&graph, risk.require_binary()?, &state, depth, &options)?;
            let spec = PerturbationSpec::uniform(state.len(), samples);
            let theirs = perturb_explain(&state, graph.schema().names(), &spec, &map, seed, &options)?;
            emit_json(
                &Comparison {
                    graph: ours.into(),
                    baseline: theirs.into(),
                },
                &out,
            )
        }
    }
}
