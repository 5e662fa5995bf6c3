use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hstrl::harness::golden::{golden_env, golden_trajectories, run_golden, GOLDEN_HIERARCHY_ADJ, GOLDEN_HIERARCHY_TXT};
use hstrl::harness::{
    curves_to_csv, emit_visit_matrix, learning_curve, mine_only, run_pipeline, stats_text, train_flat, write_artifacts,
    write_mined, write_visits, ExperimentConfig, Method, PipelineError, Stage,
};
use hstrl::miner::{rules_to_csv, trajectories_from_csv, trajectories_to_csv};

#[derive(Parser)]
#[command(name = "hstrl", version, about = "Mine task hierarchies from RL trajectories and learn with them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flat Q-learning on the target task.
    Train(Common),
    /// Collect (or read) trajectories and mine sequential rules.
    Mine(MineArgs),
    /// Mine rules and build the task hierarchy.
    BuildHst(MineArgs),
    /// Hierarchical learning with options learned from the mined hierarchy.
    RunHrl(Common),
    /// Paired flat and hierarchical runs with a Welch test.
    Experiment(Common),
    /// Run the 60-state golden maze and compare against the stored hierarchy.
    Golden(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    minsup: Option<f64>,
    #[arg(long)]
    minconf: Option<f64>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Restrict to one method: flat or hier.
    #[arg(long)]
    method: Option<Method>,
}

#[derive(Args, Clone)]
struct MineArgs {
    #[command(flatten)]
    common: Common,
    /// Trajectories as comma-separated encoded states, one per line.
    #[arg(long)]
    input: Option<PathBuf>,
}

fn config_error(e: impl ToString) -> PipelineError {
    PipelineError::new(Stage::Config, e.to_string())
}

fn load_config(c: &Common) -> Result<ExperimentConfig, PipelineError> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text).map_err(config_error)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = c.minsup {
        cfg.minsup = v;
    }
    if let Some(v) = c.minconf {
        cfg.minconf = v;
    }
    if let Some(v) = c.episodes {
        cfg.episodes = v;
    }
    if let Some(v) = c.runs {
        cfg.runs = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(m) = c.method {
        cfg.methods = vec![m];
    }
    cfg.validate().map_err(config_error)?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), PipelineError> {
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(dir.join(name), body))
        .map_err(|e| PipelineError::new(Stage::Write, format!("{name}: {e}")))
}

fn train(c: &Common) -> Result<(), PipelineError> {
    let cfg = load_config(c)?;
    let (q, records) = train_flat(&cfg)?;
    write(&c.out, "config.txt", &cfg.to_text())?;
    write(&c.out, "qtable.csv", &q.to_csv())?;
    let curve = learning_curve(&[records]);
    write(&c.out, "curves.csv", &curves_to_csv(&[("flat", &curve)]))?;
    println!("wrote {} episodes to {}", curve.len(), c.out.display());
    Ok(())
}

fn mine(a: &MineArgs, hierarchy: bool) -> Result<(), PipelineError> {
    let cfg = load_config(&a.common)?;
    let input = match &a.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            Some(trajectories_from_csv(&text).map_err(|e| PipelineError::new(Stage::Mine, e.to_string()))?)
        }
        None => None,
    };
    let (trajs, mined, visits) = mine_only(&cfg, input)?;
    let out = &a.common.out;
    write(out, "config.txt", &cfg.to_text())?;
    if hierarchy {
        write_mined(out, &trajs, &mined)?;
    } else {
        write(out, "transactions.csv", &trajectories_to_csv(&trajs))?;
        write(out, "rules.csv", &rules_to_csv(&mined.rules))?;
    }
    if let Some(v) = &visits {
        write_visits(out, v)?;
    }
    println!(
        "{} transactions, {} rules, {} subgoals",
        mined.transactions.len(),
        mined.rules.len(),
        mined.subgoals.len()
    );
    if hierarchy {
        print!("{}", mined.hierarchy.render());
    }
    Ok(())
}

fn experiment(c: &Common, only: Option<Method>) -> Result<(), PipelineError> {
    let mut cfg = load_config(c)?;
    if let Some(m) = only {
        cfg.methods = vec![m];
    }
    let a = run_pipeline(&cfg)?;
    write_artifacts(&c.out, &a)?;
    print!("{}", stats_text(&a));
    Ok(())
}

fn golden(c: &Common) -> Result<(), PipelineError> {
    let m = run_golden(c.minsup.unwrap_or(0.9), c.minconf.unwrap_or(0.9))?;
    let env = golden_env();
    let trajs = golden_trajectories(&env)?;
    write_mined(&c.out, &trajs, &m)?;
    write_visits(&c.out, &emit_visit_matrix(&trajs, &env))?;
    print!("{}", m.hierarchy.render());
    if m.hierarchy.render() != GOLDEN_HIERARCHY_TXT || m.hierarchy.to_adjacency() != GOLDEN_HIERARCHY_ADJ {
        return Err(PipelineError::new(Stage::Build, "hierarchy differs from the stored golden hierarchy"));
    }
    println!("hierarchy matches the stored golden hierarchy");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(c) => train(c),
        Command::Mine(a) => mine(a, false),
        Command::BuildHst(a) => mine(a, true),
        Command::RunHrl(c) => experiment(c, Some(Method::Hier)),
        Command::Experiment(c) => experiment(c, None),
        Command::Golden(c) => golden(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
