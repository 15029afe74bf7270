use std::env;
use std::fs;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bbeq::analytic::AnalyticProfile;
use bbeq::eval::{estimate_nashconv, EvalConfig};
use bbeq::games::{Blotto, Budgets, Game, GameSpec};
use bbeq::policy::Strategy;
use bbeq::prng::RngStream;
use bbeq::trainer::{self, Checkpoint, ExperimentConfig, Profile};
use clap::{Args, Parser, Subcommand};

/// Black-box equilibrium finding with randomized policy networks.
#[derive(Parser, Debug)]
#[command(name = "bbeq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a profile from a JSON config document.
    Train(TrainArgs),
    /// Train `trials` runs per noise dimension.
    Sweep(SweepArgs),
    /// Estimate NashConv of a checkpoint or a known equilibrium.
    Eval(EvalArgs),
    /// Sample actions from a checkpoint as CSV.
    DumpStrategy(DumpArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `$BBEQ_OUT/<run_id>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `paper` or `desk`.
    #[arg(long)]
    profile: Option<Profile>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    noise_dims: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Analytic profile name, inline JSON, or a path to a JSON game spec.
    #[arg(long)]
    game: Option<String>,
    /// `checkpoint:<path>` or `analytic:<kind>`.
    #[arg(long)]
    profile: String,
    #[arg(long)]
    obs_samples: Option<usize>,
    #[arg(long)]
    state_samples: Option<usize>,
    #[arg(long)]
    grid_resolution: Option<usize>,
    #[arg(long)]
    opponent_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; defaults to `$BBEQ_OUT/eval/<name>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Observations to condition on, `;`-separated, components `,`-separated.
    #[arg(long)]
    observations: Option<String>,
    #[arg(long, default_value_t = 0)]
    player: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure::Usage(e.to_string())
    }

    fn runtime(e: impl ToString) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn out_root() -> PathBuf {
    env::var_os("BBEQ_OUT").map_or_else(|| PathBuf::from("out"), PathBuf::from)
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(profile) = args.profile {
        cfg.profile = profile;
    }
    cfg.out_dir = Some(match (&args.out, &cfg.out_dir) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => dir.clone(),
        (None, None) => out_root().join(&cfg.run_id),
    });
    cfg.validate().map_err(Failure::usage)?;
    Ok(cfg)
}

fn cmd_train(args: TrainArgs) -> Outcome {
    let cfg = load_config(&args.run)?;
    let art = trainer::train(&cfg).map_err(Failure::runtime)?;
    let summary = serde_json::json!({
        "run_id": cfg.run_id,
        "dir": art.dir,
        "metrics": art.metrics,
        "nashconv": art.final_report.nashconv,
    });
    println!("{summary}");
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Outcome {
    let cfg = load_config(&args.run)?;
    let runs = trainer::sweep(&cfg, &args.noise_dims, args.trials).map_err(Failure::runtime)?;
    for art in runs {
        println!("{}", serde_json::json!({ "metrics": art.metrics, "nashconv": art.final_report.nashconv }));
    }
    Ok(())
}

fn parse_game(arg: &str) -> Result<GameSpec, Failure> {
    if let Ok(p) = arg.parse::<AnalyticProfile>() {
        return Ok(p.game());
    }
    if arg == "blotto_random" {
        return Ok(GameSpec::Blotto(Blotto {
            budgets: Budgets::Random,
            ..Blotto::symmetric(2, 3)
        }));
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::usage(format!("unknown game `{arg}` ({e})")))?
    };
    let game: GameSpec = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("game: {e}")))?;
    game.validate().map_err(Failure::usage)?;
    Ok(game)
}

fn cmd_eval(args: EvalArgs) -> Outcome {
    let game_arg = args.game.as_deref().map(parse_game).transpose()?;
    let mut cfg = EvalConfig::default();
    if let Some(n) = args.obs_samples {
        cfg.n_obs_samples = n;
    }
    if let Some(n) = args.state_samples {
        cfg.n_state_samples = n;
    }
    if let Some(n) = args.grid_resolution {
        cfg.grid_resolution = n;
    }
    if let Some(n) = args.opponent_samples {
        cfg.n_opponent_action_samples = n;
    }
    cfg.validate().map_err(Failure::usage)?;

    let stream = RngStream::new(args.seed, 0);
    let (name, report) = if let Some(kind) = args.profile.strip_prefix("analytic:") {
        let profile: AnalyticProfile = kind.parse().map_err(Failure::usage)?;
        let game = profile.game();
        if game_arg.as_ref().is_some_and(|g| *g != game) {
            return Err(Failure::usage(format!("analytic profile `{kind}` belongs to a different game")));
        }
        let strategies = profile.strategies();
        let refs: Vec<&dyn Strategy> = strategies.iter().map(|s| s as &dyn Strategy).collect();
        let report = estimate_nashconv(&game, &refs, &cfg, &stream).map_err(Failure::runtime)?;
        (kind.to_string(), report)
    } else if let Some(path) = args.profile.strip_prefix("checkpoint:") {
        let ck = Checkpoint::load(Path::new(path)).map_err(Failure::usage)?;
        let game = game_arg.unwrap_or_else(|| ck.game.clone());
        if game.n_players() != ck.policies().len() {
            return Err(Failure::usage("game and checkpoint disagree on the number of players"));
        }
        let refs: Vec<&dyn Strategy> = ck.policies().iter().map(|p| p as &dyn Strategy).collect();
        let report = estimate_nashconv(&game, &refs, &cfg, &stream).map_err(Failure::runtime)?;
        let stem = Path::new(path).file_stem().map_or("checkpoint".into(), |s| s.to_string_lossy().into_owned());
        (stem, report)
    } else {
        return Err(Failure::usage(format!(
            "--profile must be `checkpoint:<path>` or `analytic:<kind>`, got `{}`",
            args.profile
        )));
    };

    let csv_path = args.out.unwrap_or_else(|| out_root().join("eval").join(format!("{name}.csv")));
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
    }
    report.write_csv(&csv_path).map_err(Failure::runtime)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(Failure::runtime)?);
    Ok(())
}

fn parse_observations(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|obs| {
            obs.split(',')
                .filter(|c| !c.trim().is_empty())
                .map(|c| c.trim().parse::<f64>().map_err(|e| Failure::usage(format!("observation `{c}`: {e}"))))
                .collect()
        })
        .collect()
}

fn cmd_dump(args: DumpArgs) -> Outcome {
    let ck = Checkpoint::load(&args.checkpoint)
        .map_err(|e| Failure::usage(format!("cannot read checkpoint {}: {e}", args.checkpoint.display())))?;
    if args.player >= ck.policies().len() {
        return Err(Failure::usage(format!("player {} out of range", args.player)));
    }
    let observations = args.observations.as_deref().map(parse_observations).transpose()?;
    if let Some(list) = &observations {
        let want = ck.game.obs_dim(args.player);
        if let Some(bad) = list.iter().find(|o| o.len() != want) {
            return Err(Failure::usage(format!(
                "observation {bad:?} has {} components, player {} observes {want}",
                bad.len(),
                args.player
            )));
        }
    }
    let stream = trainer::strategy_stream(args.seed, ck.epoch);
    let write = |w: Box<dyn io::Write>| {
        trainer::write_strategy_samples(
            w,
            &ck.game,
            ck.policies(),
            &[args.player],
            args.samples,
            observations.as_deref(),
            &stream,
        )
        .map_err(Failure::runtime)
    };
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
            write(Box::new(BufWriter::new(file)))
        }
        None => write(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Eval(a) => cmd_eval(a),
        Command::DumpStrategy(a) => cmd_dump(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
