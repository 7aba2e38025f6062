use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sage_core::cli::{
    cmd_eval, cmd_evolve, cmd_genesis, cmd_navigate, input_grids, load_data, policy_for, prepare_training, resolve,
    CliError, DataLayout, PolicyName, RunConfig, RUN_ROOT_ENV,
};
use sage_core::evolution::EtaMode;
use sage_core::experience::ExperienceStore;
use sage_core::metrics::MetricsRow;
use sage_core::navigation::ExperienceMode;

#[derive(Parser)]
#[command(name = "sage", version, about = "Plan-in-sandbox task synthesis, policy evolution and navigation")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory that relative paths are resolved against.
    #[arg(long, global = true, env = RUN_ROOT_ENV)]
    run_root: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize and verify tasks and experience rules on grids.
    Genesis(GenesisArgs),
    /// Train the decision policy on a dataset.
    Evolve(EvolveArgs),
    /// Run navigation episodes and write metrics.
    Navigate(NavigateArgs),
    /// Recompute metrics from an episodes file.
    Eval(EvalArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset directory written by `genesis`.
    #[arg(long, default_value = "data")]
    data: PathBuf,
    /// Task file, if not `<data>/tasks.jsonl`.
    #[arg(long)]
    tasks: Option<PathBuf>,
    /// Rule file, if not `<data>/rules.json`.
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct GenesisArgs {
    /// Grid file (character map); repeatable.
    #[arg(long = "grid")]
    grids: Vec<PathBuf>,
    /// Generate this many seeded mazes instead of reading grids.
    #[arg(long, conflicts_with = "grids")]
    procedural: Option<usize>,
    /// Total number of accepted tasks, split evenly across grids.
    #[arg(long)]
    n_tasks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, or a `.jsonl` task file whose directory receives the other outputs.
    #[arg(long, default_value = "data")]
    out: PathBuf,
    /// Rule file, if not `rules.json` in the output directory.
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "evolve")]
    out: PathBuf,
    /// `dynamic` or `fixed:<p>`.
    #[arg(long)]
    eta: Option<EtaMode>,
    #[arg(long)]
    eps_exp: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Training seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Fraction of tasks held out for validation.
    #[arg(long)]
    val_fraction: Option<f64>,
}

#[derive(Args)]
struct NavigateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "navigate")]
    out: PathBuf,
    /// Checkpoint written by `evolve`; required by the linear policy.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Experience store to retrieve from, if not the dataset's rule file.
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long, value_enum)]
    policy: Option<PolicyName>,
    /// matched | mismatched | none | random
    #[arg(long)]
    experience: Option<ExperienceMode>,
    /// Number of episodes (one per task, in file order).
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Episodes file written by `navigate`.
    #[arg(long)]
    episodes: PathBuf,
    /// Metrics CSV to write; defaults to `metrics.csv` next to the episodes.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn layout(args: &DataArgs, root: Option<&Path>) -> DataLayout {
    let mut l = DataLayout::in_dir(resolve(&args.data, root));
    if let Some(t) = &args.tasks {
        l.tasks = resolve(t, root);
    }
    if let Some(r) = &args.rules {
        l.rules = resolve(r, root);
    }
    l
}

fn print_rows(rows: &[MetricsRow]) {
    println!("{:<28} {:>8} {:>8} {:>8} {:>8} {:>8}", "category", "episodes", "SR", "SPL", "SR*", "SPL*");
    let f = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    for r in rows {
        println!(
            "{:<28} {:>8} {:>8} {:>8} {:>8} {:>8}",
            r.category,
            r.episodes,
            f(r.sr),
            f(r.spl),
            f(r.sr_llm),
            f(r.spl_llm)
        );
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let root = cli.run_root.as_deref();
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(&resolve(p, root))?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Genesis(a) => {
            if let Some(n) = a.n_tasks {
                cfg.genesis.n_tasks = n;
            }
            if let Some(s) = a.seed {
                cfg.master_seed = s;
            }
            if let Some(n) = a.procedural {
                cfg.mazes = n;
            }
            let out = resolve(&a.out, root);
            let mut l = if out.extension().is_some_and(|e| e == "jsonl") {
                let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
                DataLayout {
                    tasks: out,
                    ..DataLayout::in_dir(dir)
                }
            } else {
                DataLayout::in_dir(out)
            };
            if let Some(r) = &a.rules {
                l.rules = resolve(r, root);
            }
            let files: Vec<PathBuf> = a.grids.iter().map(|g| resolve(g, root)).collect();
            let grids = input_grids(&cfg, &files)?;
            let stats = cmd_genesis(&cfg, &grids, &l)?;
            println!(
                "accepted {} of {} attempts on {} grids ({} rejected)",
                stats.total.accepted,
                stats.total.attempts,
                grids.len(),
                stats.total.total_rejected()
            );
        }
        Command::Evolve(a) => {
            if let Some(e) = a.eta {
                cfg.evolution.eta_mode = e;
            }
            if let Some(e) = a.eps_exp {
                cfg.evolution.eps_exp = e;
            }
            if let Some(s) = a.steps {
                cfg.evolution.training_steps = s;
            }
            if let Some(s) = a.seed {
                cfg.evolution.seed = s;
            }
            if let Some(lr) = a.learning_rate {
                cfg.evolution.learning_rate = lr;
            }
            if let Some(v) = a.val_fraction {
                cfg.val_fraction = v;
            }
            cfg.evolution.validate()?;
            let data = load_data(&layout(&a.data, root))?;
            let setup = prepare_training(&data, &cfg)?;
            let (policy, trace) = cmd_evolve(&cfg, &setup, &resolve(&a.out, root))?;
            println!(
                "{} steps on {} training / {} validation tasks; best validation reward {:.4}",
                trace.rows.len(),
                setup.train_idx.len(),
                setup.val_idx.len(),
                trace.final_validation
            );
            println!("weights {:?}", policy.w);
        }
        Command::Navigate(a) => {
            if let Some(p) = a.policy {
                cfg.policy = p;
            }
            if let Some(e) = a.experience {
                cfg.navigation.experience = e;
            }
            if let Some(n) = a.episodes {
                cfg.episodes = Some(n);
            }
            if let Some(s) = a.seed {
                cfg.navigation.seed = s;
            }
            let checkpoint = a.checkpoint.as_ref().map(|c| resolve(c, root));
            let policy = policy_for(cfg.policy, checkpoint.as_deref())?;
            let data = load_data(&layout(&a.data, root))?;
            let store = match &a.store {
                Some(s) => ExperienceStore::load(resolve(s, root))?,
                None => data.store.clone(),
            };
            let out = resolve(&a.out, root);
            let episodes = cmd_navigate(&cfg, &data, &store, &policy, &out)?;
            let rows = sage_core::metrics::read_report(std::fs::File::open(out.join("metrics.csv"))?)?;
            println!("{} episodes", episodes.len());
            print_rows(&rows);
        }
        Command::Eval(a) => {
            let episodes = resolve(&a.episodes, root);
            let out = match &a.out {
                Some(o) => resolve(o, root),
                None => episodes.with_file_name("metrics.csv"),
            };
            let eps = cmd_eval(&episodes, &out)?;
            let rows = sage_core::metrics::read_report(std::fs::File::open(&out)?)?;
            println!("{} episodes", eps.len());
            print_rows(&rows);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sage: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
