use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sirs_core::distributions::plus_shift;
use sirs_core::dynamics::{Engine, InitialState, SirsParams, StopRule};
use sirs_core::graphs::{configuration_model, LazyGwTree, MultiGraph};
use sirs_core::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use sirs_core::rng::{stream, SeedTable};

#[derive(Parser)]
#[command(name = "sirs", version, about = "SIRS epidemics on random graphs and Galton-Watson trees")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a configuration-model graph (edge list) or a tree prefix.
    Generate {
        #[arg(long)]
        n: Option<usize>,
        /// Write the first GENERATIONS levels of a Galton-Watson tree instead.
        #[arg(long)]
        tree: Option<usize>,
    },
    /// Run one trajectory, all vertices infected at time 0.
    Simulate {
        /// Edge list to run on; otherwise a graph is sampled from the config.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Write the event log (`time kind vertex [neighbor]`) here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Survival-time sweep over n and rates.
    Sweep,
    /// Heavy-tail versus light-tail comparison.
    Compare,
    /// Strong-survival curve on lazy trees.
    Tree,
    /// Structural expander pipeline.
    Expander,
    /// Dynamics probes with pass/fail verdicts.
    Probe,
}

fn load(global: &Global) -> Result<ExperimentConfig> {
    let path = global.config.as_ref().context("--config is required")?;
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(o) = &global.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn expect_kind(cfg: &ExperimentConfig, allowed: &[ExperimentKind]) -> Result<()> {
    if !allowed.contains(&cfg.kind) {
        bail!("config kind {} does not fit this subcommand", cfg.kind.name());
    }
    Ok(())
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

/// Breadth-first prefix of a lazy tree as `parent child` lines.
fn tree_prefix(cfg: &ExperimentConfig, generations: usize) -> Result<String> {
    let interior = cfg.distribution.as_ref().context("config has no distribution")?.build()?;
    let mut tree = LazyGwTree::new(plus_shift(&interior), interior, SeedTable::new(cfg.seed).replica_seed(0, 0))
        .with_budget(cfg.tree.node_budget);
    let mut frontier = vec![0usize];
    let mut text = String::new();
    for _ in 0..generations {
        let mut next = Vec::new();
        for &v in &frontier {
            for c in tree.expand(v)? {
                text.push_str(&format!("{v} {c}\n"));
                next.push(c);
            }
        }
        frontier = next;
    }
    Ok(text)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = &cli.global;
    let outcome = match cli.command {
        Command::Generate { n, tree } => {
            let cfg = load(g)?;
            let text = match tree {
                Some(generations) => tree_prefix(&cfg, generations)?,
                None => {
                    let n = n.or_else(|| cfg.grid.n.first().copied()).context("give --n or grid.n")?;
                    let mu = cfg.distribution.as_ref().context("config has no distribution")?.build()?;
                    let mut rng = SeedTable::new(cfg.seed).replica_stream(0, 0);
                    configuration_model(n, &mu, &mut rng).0.to_edge_list()
                }
            };
            write_text(g.out.as_deref(), &text)?;
            return Ok(ExitCode::SUCCESS);
        }
        Command::Simulate { graph, n, lambda, alpha, horizon, log } => {
            let cfg = g.config.as_ref().map(|_| load(g)).transpose()?;
            let seed = g.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
            let table = SeedTable::new(seed);
            let graph = match graph {
                Some(p) => MultiGraph::parse_edge_list(&fs::read_to_string(&p)?)?,
                None => {
                    let cfg = cfg.as_ref().context("give --graph or --config")?;
                    let n = n.or_else(|| cfg.grid.n.first().copied()).context("give --n or grid.n")?;
                    let mu = cfg.distribution.as_ref().context("config has no distribution")?.build()?;
                    configuration_model(n, &mu, &mut stream(table.child(1).master())).0
                }
            };
            let pick = |flag: Option<f64>, axis: Option<&Vec<f64>>, name: &str| -> Result<f64> {
                flag.or_else(|| axis.and_then(|v| v.first().copied())).with_context(|| format!("give --{name}"))
            };
            let lambda = pick(lambda, cfg.as_ref().map(|c| &c.grid.lambda), "lambda")?;
            let alpha = pick(alpha, cfg.as_ref().map(|c| &c.grid.alpha), "alpha")?;
            let horizon = horizon.or(cfg.as_ref().map(|c| c.horizon)).unwrap_or(1e4);
            let mut engine = Engine::new(&graph, SirsParams::new(lambda, alpha)?);
            if log.is_some() {
                engine.enable_log();
            }
            engine.reset(&InitialState::AllInfected, table.replica_seed(0, 0))?;
            let record = engine.run_until(&StopRule {
                horizon: Some(horizon),
                reinfections: None,
                event_budget: cfg.as_ref().and_then(|c| c.event_budget),
            });
            if let Some(p) = log {
                let lines: String = engine.take_log().iter().map(|e| e.log_line() + "\n").collect();
                fs::write(&p, lines).with_context(|| format!("writing {}", p.display()))?;
            }
            write_text(g.out.as_deref(), &(serde_json::to_string(&record)? + "\n"))?;
            return Ok(ExitCode::SUCCESS);
        }
        Command::Sweep => {
            let cfg = load(g)?;
            expect_kind(&cfg, &[ExperimentKind::SurvivalSweep])?;
            run_experiment(&cfg, g.threads)?
        }
        Command::Compare => {
            let cfg = load(g)?;
            expect_kind(&cfg, &[ExperimentKind::HeavyTailCompare])?;
            run_experiment(&cfg, g.threads)?
        }
        Command::Tree => {
            let cfg = load(g)?;
            expect_kind(&cfg, &[ExperimentKind::TreeStrongSurvival])?;
            run_experiment(&cfg, g.threads)?
        }
        Command::Expander => {
            let cfg = load(g)?;
            expect_kind(&cfg, &[ExperimentKind::ExpanderReport])?;
            run_experiment(&cfg, g.threads)?
        }
        Command::Probe => {
            let cfg = load(g)?;
            expect_kind(&cfg, &[ExperimentKind::LemmaProbe, ExperimentKind::StarScaling])?;
            run_experiment(&cfg, g.threads)?
        }
    };
    println!("{}", serde_json::to_string_pretty(&outcome)?);
    Ok(match outcome.passed() {
        Some(false) => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
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
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
