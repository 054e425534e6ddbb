//! `codelab` — run curriculum training, score checkpoints on the held-out
//! suite, tabulate corridor-MDP reachability, and export rendered designs.
//!
//! Every subcommand is deterministic under a fixed seed. Training artifacts
//! land under one output directory: the resolved config, `metrics.csv`
//! (byte-reproducible), `metrics.jsonl` (adds wall time), checkpoints, the
//! final evaluation table, and a manifest describing all of it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use codelab_core::chain::{
    approx, p_reach_bound, p_reach_bruteforce, p_reach_formula, parse_probability, OriginRule,
};
use codelab_core::gridenv::{GridDesign, Subtask, ALL_SUBTASKS};
use codelab_core::rng::RandomStream;
use codelab_core::webenv::render::render;
use codelab_core::webenv::{export_html, suite_design, RenderedSite, WebsiteDesign};
use codelab_trainer::checkpoint::{
    load_checkpoint, rebuild_generator, rebuild_learner, save_checkpoint, Checkpoint,
};
use codelab_trainer::eval::{evaluate_web_suite, grid_success_rate, WebPolicy};
use codelab_trainer::state::{GeneratorHandle, LearnerHandle};
use codelab_trainer::{Domain, Trainer, TrainingConfig, METRICS_SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "codelab", version, about = "Compositional environment-design laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a design curriculum and write metrics, checkpoints, and a manifest.
    Train(TrainArgs),
    /// Score a checkpointed agent on the held-out evaluation suite.
    Eval(EvalArgs),
    /// Tabulate chain-walk success: closed-form, stated bound, exact oracle.
    AnalyzeChain(AnalyzeChainArgs),
    /// Render a website design to a self-contained HTML page.
    ExportHtml(ExportHtmlArgs),
    /// Summarize designs from the suite, a JSON file, or a checkpointed policy.
    InspectDesign(InspectDesignArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Flat JSON config; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key (repeatable): --set gamma=0.95. String-typed
    /// keys take the value verbatim, everything else parses as JSON.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Curriculum algorithm: code, popregret_only, paired, minimax, dr, cl, alp.
    #[arg(long)]
    algo: Option<String>,
    /// Task domain: web or grid.
    #[arg(long)]
    domain: Option<String>,
    /// Regret/difficulty mixing weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// Episodes per agent per iteration.
    #[arg(long, value_name = "M")]
    m: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Episode-collection threads; metrics are identical at any width.
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated primitive names; omitted = the whole catalog.
    #[arg(long)]
    catalog: Option<String>,
    /// Run seed; falls back to CODE_LAB_SEED, then to the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for all artifacts.
    #[arg(long, default_value = "codelab-out")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint directory written by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Episodes per suite cell.
    #[arg(long)]
    episodes: Option<usize>,
    /// Agent index within the checkpointed population.
    #[arg(long, default_value_t = 0)]
    agent: usize,
    /// Evaluation seed; defaults to the checkpoint's training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the JSON table here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeChainArgs {
    /// Largest goal distance N (rows run 1..=n_max).
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// Largest slack L (budget N + 2L; rows run 0..=l_max).
    #[arg(long, default_value_t = 3)]
    l_max: usize,
    /// Comma-separated right-step probabilities (decimals or fractions).
    #[arg(long, default_value = "0.3,0.5,0.7")]
    p: String,
    /// What the left action does at the origin.
    #[arg(long, value_enum, default_value_t = OriginRuleArg::Stay)]
    origin_rule: OriginRuleArg,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OriginRuleArg {
    /// Left at the origin burns the step in place.
    Stay,
    /// Left at the origin is replaced by a right step.
    ForcedRight,
    /// The line continues below the origin.
    Unbounded,
}

impl From<OriginRuleArg> for OriginRule {
    fn from(arg: OriginRuleArg) -> Self {
        match arg {
            OriginRuleArg::Stay => OriginRule::Stay,
            OriginRuleArg::ForcedRight => OriginRule::ForcedRight,
            OriginRuleArg::Unbounded => OriginRule::Unbounded,
        }
    }
}

#[derive(Args)]
struct ExportHtmlArgs {
    /// Suite task name (with --level).
    #[arg(long, requires = "level", conflicts_with = "design")]
    task: Option<String>,
    /// Suite difficulty level 1-4.
    #[arg(long, requires = "task")]
    level: Option<usize>,
    /// A design JSON file instead of a suite page.
    #[arg(long)]
    design: Option<PathBuf>,
    /// Render seed (fixes field values and orderings).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the page here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectDesignArgs {
    /// Suite task name (with --level).
    #[arg(long, requires = "level", conflicts_with_all = ["design", "checkpoint"])]
    task: Option<String>,
    /// Suite difficulty level 1-4.
    #[arg(long, requires = "task")]
    level: Option<usize>,
    /// A design JSON file.
    #[arg(long, conflicts_with = "checkpoint")]
    design: Option<PathBuf>,
    /// Sample designs from this checkpoint's design policy.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Designs to sample from a checkpoint.
    #[arg(long, default_value_t = 3)]
    samples: usize,
    /// Seed for sampling and rendering.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train(args) => train(args),
        Command::Eval(args) => eval(args),
        Command::AnalyzeChain(args) => analyze_chain(args),
        Command::ExportHtml(args) => export_html_cmd(args),
        Command::InspectDesign(args) => inspect_design(args),
    }
}

// ------------------------------------------------------------------- train

fn resolve_config(args: &TrainArgs) -> Result<TrainingConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            TrainingConfig::from_json(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => TrainingConfig::default(),
    };
    for pair in &args.set {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("--set {pair:?} is not KEY=VALUE"))?;
        cfg.set(key, value)?;
    }
    if let Some(algo) = &args.algo {
        cfg.set("algo", algo)?;
    }
    if let Some(domain) = &args.domain {
        cfg.set("domain", domain)?;
    }
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if let Some(m) = args.m {
        cfg.episodes_per_agent = m;
    }
    if let Some(iterations) = args.iterations {
        cfg.iterations = iterations;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(catalog) = &args.catalog {
        cfg.catalog = catalog.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if cfg.seed.is_none() {
        if let Ok(text) = std::env::var("CODE_LAB_SEED") {
            let seed =
                text.parse().with_context(|| format!("CODE_LAB_SEED {text:?} is not a u64"))?;
            cfg.seed = Some(seed);
        }
    }
    cfg.require_seed()?;
    cfg.validate()?;
    Ok(cfg)
}

fn train(args: TrainArgs) -> Result<()> {
    let cfg = resolve_config(&args)?;
    let out = &args.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.json"), cfg.to_json())?;

    let iterations = cfg.iterations;
    let stride = (iterations / 10).max(1);
    let mut trainer = Trainer::new(cfg.clone())?;
    let mut checkpoints = Vec::new();

    while trainer.state.iter < iterations {
        match trainer.step() {
            Ok(record) => {
                if record.iter % stride == 0
                    || record.iter + 1 == iterations
                    || record.eval_success.is_some()
                {
                    let eval = record
                        .eval_success
                        .map(|s| format!(" eval {:.1}%", 100.0 * s))
                        .unwrap_or_default();
                    println!(
                        "iter {}/{iterations} regret {:.4} difficulty {:.4} non_skip {}{eval}",
                        record.iter, record.regret, record.difficulty, record.non_skip
                    );
                }
            }
            Err(err) => {
                // Keep everything collected so far before reporting the fault.
                trainer.log.write_dir(out)?;
                let abort = out.join("checkpoints").join("abort");
                save_checkpoint(&abort, &trainer.state)?;
                checkpoints.push(rel_path(&abort, out));
                write_manifest(out, &cfg, &trainer, &checkpoints, "aborted")?;
                return Err(err).context(format!(
                    "iteration {} failed; state saved to {}",
                    trainer.state.iter,
                    abort.display()
                ));
            }
        }
        if cfg.checkpoint_every > 0 && trainer.state.iter % cfg.checkpoint_every == 0 {
            let dir =
                out.join("checkpoints").join(format!("iter_{:06}", trainer.state.iter));
            save_checkpoint(&dir, &trainer.state)?;
            checkpoints.push(rel_path(&dir, out));
        }
    }

    trainer.log.write_dir(out)?;
    let final_dir = out.join("checkpoints").join("final");
    save_checkpoint(&final_dir, &trainer.state)?;
    checkpoints.push(rel_path(&final_dir, out));

    let (table_text, table_json) = final_eval(&cfg, &trainer)?;
    fs::write(out.join("eval.txt"), &table_text)?;
    fs::write(out.join("eval.json"), &table_json)?;
    println!("\nheld-out success of agent 0:\n{table_text}");

    write_manifest(out, &cfg, &trainer, &checkpoints, "complete")?;
    println!("artifacts in {}", out.display());
    Ok(())
}

/// Success of the first agent over the full held-out suite (web) or over
/// each dependency-closed subtask set (grid).
fn final_eval(cfg: &TrainingConfig, trainer: &Trainer) -> Result<(String, String)> {
    let agent = &trainer.state.agents[0];
    let base = RandomStream::from_seed(cfg.require_seed()?).child("eval");
    match &agent.learner {
        LearnerHandle::Web(learner) => {
            let policy = WebPolicy::Learner { learner, ps: &agent.ps };
            let table =
                evaluate_web_suite(&policy, cfg.eval_episodes, cfg.step_penalty, &base)?;
            Ok((table.render_text(), table.to_json()))
        }
        LearnerHandle::Grid(learner) => {
            let mut text = String::from("subtasks\tsuccess\n");
            let mut cells = serde_json::Map::new();
            let mut targets: Vec<(String, GridDesign)> = ALL_SUBTASKS
                .iter()
                .map(|&s| (subtask_name(s), GridDesign::closed([s])))
                .collect();
            targets.push(("full".into(), GridDesign::closed(ALL_SUBTASKS)));
            for (name, design) in targets {
                let rate = grid_success_rate(
                    learner,
                    &agent.ps,
                    &design,
                    cfg.eval_episodes,
                    cfg.grid_size,
                    cfg.grid_horizon,
                    cfg.step_penalty,
                    &base.child(&name),
                )?;
                writeln!(text, "{name}\t{:.1}", 100.0 * rate).expect("string write");
                cells.insert(name, serde_json::json!(rate));
            }
            let json = serde_json::to_string_pretty(&cells).expect("table serializes");
            Ok((text, json))
        }
    }
}

fn subtask_name(s: Subtask) -> String {
    serde_json::to_value(s)
        .expect("subtask serializes")
        .as_str()
        .expect("subtask serializes to a string")
        .to_string()
}

fn rel_path(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).unwrap_or(path).display().to_string()
}

fn write_manifest(
    out: &Path,
    cfg: &TrainingConfig,
    trainer: &Trainer,
    checkpoints: &[String],
    status: &str,
) -> Result<()> {
    let mut files = vec!["config.json", "metrics.csv", "metrics.jsonl"];
    if status == "complete" {
        files.push("eval.txt");
        files.push("eval.json");
    }
    let manifest = serde_json::json!({
        "metrics_schema_version": METRICS_SCHEMA_VERSION,
        "status": status,
        "algo": cfg.algo.name(),
        "domain": if cfg.domain == Domain::Web { "web" } else { "grid" },
        "seed": cfg.require_seed()?,
        "iterations_configured": cfg.iterations,
        "iterations_completed": trainer.state.iter,
        "files": files,
        "checkpoints": checkpoints,
    });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

// -------------------------------------------------------------------- eval

fn eval(args: EvalArgs) -> Result<()> {
    let ckpt = load_checkpoint(&args.checkpoint)?;
    let cfg = &ckpt.config;
    if args.agent >= ckpt.agents.len() {
        bail!("checkpoint has {} agents, no index {}", ckpt.agents.len(), args.agent);
    }
    let episodes = args.episodes.unwrap_or(cfg.eval_episodes);
    let seed = match args.seed {
        Some(seed) => seed,
        None => cfg.require_seed()?,
    };
    let base = RandomStream::from_seed(seed).child("eval");
    let (learner, ps) = rebuild_learner(cfg, &ckpt.agents[args.agent])?;

    let (text, json) = match &learner {
        LearnerHandle::Web(learner) => {
            let policy = WebPolicy::Learner { learner, ps: &ps };
            let table = evaluate_web_suite(&policy, episodes, cfg.step_penalty, &base)?;
            (table.render_text(), table.to_json())
        }
        LearnerHandle::Grid(learner) => {
            let design = GridDesign::closed(ALL_SUBTASKS);
            let rate = grid_success_rate(
                learner,
                &ps,
                &design,
                episodes,
                cfg.grid_size,
                cfg.grid_horizon,
                cfg.step_penalty,
                &base,
            )?;
            (
                format!("subtasks\tsuccess\nfull\t{:.1}\n", 100.0 * rate),
                serde_json::to_string_pretty(&serde_json::json!({ "full": rate }))?,
            )
        }
    };

    print!("{text}");
    println!("\n{json}");
    if let Some(path) = &args.json {
        fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

// ----------------------------------------------------------- analyze-chain

fn analyze_chain(args: AnalyzeChainArgs) -> Result<()> {
    if args.n_max == 0 {
        bail!("--n-max must be at least 1");
    }
    let ps = args
        .p
        .split(',')
        .map(parse_probability)
        .collect::<codelab_core::Result<Vec<_>>>()?;
    if ps.is_empty() {
        bail!("--p needs at least one probability");
    }
    let rule = OriginRule::from(args.origin_rule);

    let mut csv = String::from("N,L,p,formula,bound,bruteforce\n");
    for n in 1..=args.n_max {
        for l in 0..=args.l_max {
            for p in &ps {
                let formula = approx(&p_reach_formula(n, l, p));
                let bound = approx(&p_reach_bound(n, l, p));
                let brute = approx(&p_reach_bruteforce(n, l, p, rule)?);
                writeln!(csv, "{n},{l},{},{formula},{bound},{brute}", approx(p))
                    .expect("string write");
            }
        }
    }

    match &args.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(())
}

// ------------------------------------------------------------- export-html

fn load_design(args_task: &Option<String>, args_level: Option<usize>, file: &Option<PathBuf>) -> Result<WebsiteDesign> {
    match (args_task, file) {
        (Some(task), None) => {
            let level = args_level.expect("clap enforces --level with --task");
            Ok(suite_design(task, level)?)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading design {}", path.display()))?;
            Ok(WebsiteDesign::from_json(&text)?)
        }
        _ => bail!("pass either --task with --level, or --design FILE"),
    }
}

fn export_html_cmd(args: ExportHtmlArgs) -> Result<()> {
    let design = load_design(&args.task, args.level, &args.design)?;
    let mut stream = RandomStream::from_seed(args.seed).child("render");
    let site = render(&design, &mut stream)?;
    let html = export_html(&site);
    match &args.out {
        Some(path) => {
            fs::write(path, &html).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{html}"),
    }
    Ok(())
}

// ---------------------------------------------------------- inspect-design

fn inspect_design(args: InspectDesignArgs) -> Result<()> {
    if let Some(dir) = &args.checkpoint {
        return inspect_checkpoint_designs(dir, args.samples, args.seed);
    }
    let design = load_design(&args.task, args.level, &args.design)?;
    let mut stream = RandomStream::from_seed(args.seed).child("render");
    let site = render(&design, &mut stream)?;
    println!("{}", web_design_summary(&design, &site)?);
    Ok(())
}

fn inspect_checkpoint_designs(dir: &Path, samples: usize, seed: u64) -> Result<()> {
    let Checkpoint { config, generator, .. } = load_checkpoint(dir)?;
    let Some(saved) = generator else {
        bail!(
            "{}: checkpoint has no design policy ({} draws designs procedurally)",
            dir.display(),
            config.algo.name()
        );
    };
    let (handle, ps) = rebuild_generator(&config, &saved)?;
    let root = RandomStream::from_seed(seed);
    for i in 0..samples {
        let mut stream = root.child_indexed("sample", i as u64);
        match &handle {
            GeneratorHandle::Web(g) => {
                let rollout = g.sample(&ps, &mut stream)?;
                let site = render(&rollout.design, &mut root.child_indexed("render", i as u64))?;
                println!("{}", web_design_summary(&rollout.design, &site)?);
            }
            GeneratorHandle::Grid(g) => {
                let rollout = g.sample(&ps, &mut stream)?;
                println!("{}", rollout.design.to_json());
            }
        }
    }
    Ok(())
}

fn web_design_summary(design: &WebsiteDesign, site: &RenderedSite) -> Result<String> {
    let instruction: Vec<&str> =
        site.instruction.fields.iter().map(|(key, _)| key.as_str()).collect();
    let value = serde_json::json!({
        "pages": design.pages,
        "non_skip": design.non_skip_count(),
        "active": design.active_count(),
        "passive": design.passive_count(),
        "instruction": instruction,
        "design": serde_json::from_str::<serde_json::Value>(&design.to_json())?,
    });
    Ok(serde_json::to_string_pretty(&value)?)
}
