//! Experiment configuration, training runs, checkpoints and sweeps.
//!
//! A run writes into its output directory:
//!
//! - `metrics.csv`: one row per (epoch, player), epoch 0 being the
//!   initialized profile;
//! - `strategies/epoch_NNNN.csv`: sampled actions per player;
//! - `checkpoints/epoch_NNNN.json`: game and full training state;
//! - `config.json`: the resolved config, which reproduces the run.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::distributed::{run_distributed, run_sequential, AssignmentRule, Context, MembershipEvent, Snapshot};
use crate::dynamics::{DynamicsConfig, DynamicsKind};
use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::eval::{estimate_nashconv, EvalConfig, EvalReport};
use crate::games::{Auction, Game, GameSpec, PaymentRule, ValueStructure};
use crate::policy::{Policy, PolicyArchitecture, Strategy};
use crate::prng::RngStream;
use crate::utility::GameUtility;

const INIT_STREAM: u64 = 0x696e_6974;
const EVAL_STREAM: u64 = 0x6576_616c;
const STRATEGY_STREAM: u64 = 0x7374_7261;
const SWEEP_STREAM: u64 = 0x7377_6570;

pub const METRICS_HEADER: [&str; 9] = [
    "run_id",
    "epoch",
    "player",
    "utility",
    "best_response",
    "gap",
    "nashconv",
    "wall_ms",
    "seed",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 10^6 steps per epoch at learning rate 1e-6.
    #[default]
    Paper,
    /// 10^4 steps per epoch at a proportionally larger learning rate.
    Desk,
}

impl Profile {
    pub fn steps_per_epoch(self) -> u64 {
        match self {
            Profile::Paper => 1_000_000,
            Profile::Desk => 10_000,
        }
    }

    pub fn alpha(self) -> f64 {
        match self {
            Profile::Paper => 1e-6,
            Profile::Desk => 1e-4,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            _ => Err(Error::config("profile", format!("expected `paper` or `desk`, got `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Executor {
    /// Worker threads exchanging messages.
    #[default]
    Pool,
    /// The straight-line reference; identical results.
    Inline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub noise_dim: usize,
    pub hidden_layers: Vec<usize>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            noise_dim: 2,
            hidden_layers: vec![10, 10],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub kind: Option<DynamicsKind>,
    /// Learning rate; the profile's when unset.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run_id: String,
    pub seed: u64,
    pub profile: Profile,
    pub game: GameSpec,
    pub policy: PolicyConfig,
    pub estimator: EstimatorConfig,
    pub dynamics: DynamicsSection,
    /// Virtual workers; one per player when unset.
    pub n_workers: Option<usize>,
    pub assignment_rule: AssignmentRule,
    pub executor: Executor,
    /// Threads hosting the virtual workers.
    pub physical_workers: usize,
    pub membership: Vec<MembershipEvent>,
    pub epochs: u64,
    /// The profile's when unset.
    pub steps_per_epoch: Option<u64>,
    pub eval: EvalConfig,
    pub n_strategy_samples: usize,
    /// Record elapsed milliseconds in `wall_ms`; zero otherwise, which keeps
    /// the metrics file byte-reproducible.
    pub record_wall_time: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            run_id: "run".into(),
            seed: 0,
            profile: Profile::Paper,
            game: GameSpec::Auction(Auction::new(2, ValueStructure::Complete, PaymentRule::AllPay)),
            policy: PolicyConfig::default(),
            estimator: EstimatorConfig::default(),
            dynamics: DynamicsSection::default(),
            n_workers: None,
            assignment_rule: AssignmentRule::RoundRobin,
            executor: Executor::Pool,
            physical_workers: 1,
            membership: Vec::new(),
            epochs: 1,
            steps_per_epoch: None,
            eval: EvalConfig::default(),
            n_strategy_samples: 10_000,
            record_wall_time: false,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses a config document; errors name the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            Error::config(if key == "." { "<root>".into() } else { key }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn steps_per_epoch(&self) -> u64 {
        self.steps_per_epoch.unwrap_or(self.profile.steps_per_epoch())
    }

    pub fn dynamics(&self) -> DynamicsConfig {
        DynamicsConfig {
            kind: self.dynamics.kind.unwrap_or(DynamicsKind::Simultaneous),
            alpha: self.dynamics.alpha.unwrap_or(self.profile.alpha()),
            beta: self.dynamics.beta,
        }
    }

    pub fn n_workers(&self) -> usize {
        self.n_workers.unwrap_or(self.game.n_players())
    }

    /// Copy with `steps_per_epoch` and the learning rate pinned, so the
    /// echo does not depend on profile defaults.
    pub fn resolved(&self) -> Self {
        let mut cfg = self.clone();
        cfg.steps_per_epoch = Some(self.steps_per_epoch());
        cfg.dynamics.kind = Some(self.dynamics().kind);
        cfg.dynamics.alpha = Some(self.dynamics().alpha);
        cfg.n_workers = Some(self.n_workers());
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.game.validate()?;
        self.estimator.validate()?;
        self.dynamics().validate()?;
        self.eval.validate()?;
        if self.estimator.n_samples != 1 {
            return Err(Error::config(
                "estimator.n_samples",
                "training uses one direction per worker; add workers instead",
            ));
        }
        if self.epochs < 1 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.n_workers() < 1 {
            return Err(Error::config("n_workers", "must be at least 1"));
        }
        if self.physical_workers < 1 {
            return Err(Error::config("physical_workers", "must be at least 1"));
        }
        if self.n_strategy_samples < 1 {
            return Err(Error::config("n_strategy_samples", "must be at least 1"));
        }
        Ok(())
    }

    pub fn architectures(&self) -> Vec<PolicyArchitecture> {
        (0..self.game.n_players())
            .map(|i| PolicyArchitecture {
                obs_dim: self.game.obs_dim(i),
                noise_dim: self.policy.noise_dim,
                hidden_layers: self.policy.hidden_layers.clone(),
                action_dim: self.game.action_dim(i),
                head: self.game.head(i),
            })
            .collect()
    }

    /// He-initialized profile, one substream per player.
    pub fn initial_profile(&self) -> Vec<Policy> {
        let root = RngStream::new(self.seed, INIT_STREAM);
        self.architectures()
            .into_iter()
            .enumerate()
            .map(|(i, arch)| Policy::he_init(arch, &mut root.derive(&[i as u64])))
            .collect()
    }
}

/// A training snapshot together with the game it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub epoch: u64,
    pub game: GameSpec,
    pub state: Snapshot,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn policies(&self) -> &[Policy] {
        &self.state.profile
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub metrics: PathBuf,
    pub strategies: Vec<PathBuf>,
    pub checkpoints: Vec<PathBuf>,
    pub config_echo: PathBuf,
    /// Evaluation after the last epoch.
    pub final_report: EvalReport,
    pub reports: Vec<EvalReport>,
}

/// Evaluates `policies` with the run's evaluation stream, which is shared by
/// every epoch and independent of training.
pub fn evaluate(cfg: &ExperimentConfig, policies: &[Policy]) -> Result<EvalReport> {
    let strategies: Vec<&dyn Strategy> = policies.iter().map(|p| p as &dyn Strategy).collect();
    estimate_nashconv(&cfg.game, &strategies, &cfg.eval, &RngStream::new(cfg.seed, EVAL_STREAM))
}

/// Writes `n` sampled `(player, observation.., action..)` rows for each
/// listed player. Observations are drawn from the game unless
/// `observations` pins them, in which case each gets `n` rows.
pub fn write_strategy_samples<W: Write>(
    out: W,
    game: &dyn Game,
    policies: &[Policy],
    players: &[usize],
    n: usize,
    observations: Option<&[Vec<f64>]>,
    stream: &RngStream,
) -> Result<()> {
    let obs_dim = (0..game.n_players()).map(|i| game.obs_dim(i)).max().unwrap_or(0);
    let act_dim = (0..game.n_players()).map(|i| game.action_dim(i)).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["player".to_string()];
    header.extend((0..obs_dim).map(|k| format!("obs_{k}")));
    header.extend((0..act_dim).map(|k| format!("action_{k}")));
    w.write_record(&header)?;
    let mut row = |player: usize, obs: &[f64], action: &[f64]| -> Result<()> {
        let mut rec = vec![player.to_string()];
        rec.extend((0..obs_dim).map(|k| obs.get(k).map_or(String::new(), |x| x.to_string())));
        rec.extend((0..act_dim).map(|k| action.get(k).map_or(String::new(), |x| x.to_string())));
        w.write_record(&rec)?;
        Ok(())
    };
    for &i in players {
        let policy = policies.get(i).ok_or_else(|| Error::config("player", format!("no player {i}")))?;
        let mut s = stream.derive(&[i as u64]);
        match observations {
            Some(list) => {
                for obs in list {
                    for _ in 0..n {
                        row(i, obs, &policy.act(obs, &mut s))?;
                    }
                }
            }
            None => {
                for _ in 0..n {
                    let obs = game.observe(&game.sample_state(&mut s), i);
                    row(i, &obs, &policy.act(&obs, &mut s))?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io("<strategy samples>", e))?;
    Ok(())
}

/// Default seed-keyed stream for strategy samples at `epoch`.
pub fn strategy_stream(seed: u64, epoch: u64) -> RngStream {
    RngStream::new(seed, STRATEGY_STREAM).derive(&[epoch])
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    dir: PathBuf,
    metrics: csv::Writer<fs::File>,
    artifacts: (Vec<PathBuf>, Vec<PathBuf>, Vec<EvalReport>),
    started: Instant,
}

impl Run<'_> {
    fn record_epoch(&mut self, epoch: u64, state: &Snapshot) -> Result<()> {
        let cfg = self.cfg;
        let report = evaluate(cfg, &state.profile)?;
        let wall_ms = if cfg.record_wall_time {
            self.started.elapsed().as_millis()
        } else {
            0
        };
        for p in &report.players {
            self.metrics.write_record([
                cfg.run_id.clone(),
                epoch.to_string(),
                p.player.to_string(),
                p.utility.to_string(),
                p.best_response.to_string(),
                p.gap.to_string(),
                report.nashconv.to_string(),
                wall_ms.to_string(),
                cfg.seed.to_string(),
            ])?;
        }
        self.metrics.flush().map_err(|e| Error::io(self.dir.join("metrics.csv"), e))?;

        let strategy = self.dir.join("strategies").join(format!("epoch_{epoch:04}.csv"));
        let file = fs::File::create(&strategy).map_err(|e| Error::io(&strategy, e))?;
        let players: Vec<usize> = (0..state.profile.len()).collect();
        write_strategy_samples(
            std::io::BufWriter::new(file),
            &cfg.game,
            &state.profile,
            &players,
            cfg.n_strategy_samples,
            None,
            &strategy_stream(cfg.seed, epoch),
        )?;

        let checkpoint = self.dir.join("checkpoints").join(format!("epoch_{epoch:04}.json"));
        Checkpoint {
            epoch,
            game: cfg.game.clone(),
            state: state.clone(),
        }
        .save(&checkpoint)?;

        self.artifacts.0.push(strategy);
        self.artifacts.1.push(checkpoint);
        self.artifacts.2.push(report);
        Ok(())
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs `epochs × steps_per_epoch` iterations, evaluating and checkpointing
/// the initial profile and every epoch.
pub fn train(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let state = Snapshot::new(cfg.seed, cfg.initial_profile(), &cfg.dynamics(), cfg.n_workers());
    train_from(cfg, state, 0)
}

/// Continues a run from a checkpoint, appending to the run's metrics.
pub fn resume(cfg: &ExperimentConfig, checkpoint: &Checkpoint) -> Result<RunArtifacts> {
    cfg.validate()?;
    if checkpoint.game != cfg.game {
        return Err(Error::config("game", "checkpoint belongs to a different game"));
    }
    train_from(cfg, checkpoint.state.clone(), checkpoint.epoch + 1)
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&cfg.run_id))
}

fn train_from(cfg: &ExperimentConfig, mut state: Snapshot, first_epoch: u64) -> Result<RunArtifacts> {
    let dir = out_dir(cfg);
    create_dir(&dir.join("strategies"))?;
    create_dir(&dir.join("checkpoints"))?;
    let config_echo = dir.join("config.json");
    let mut echo = cfg.resolved();
    echo.out_dir = cfg.out_dir.clone();
    fs::write(&config_echo, echo.to_json()?).map_err(|e| Error::io(&config_echo, e))?;

    let metrics_path = dir.join("metrics.csv");
    let file = fs::OpenOptions::new()
        .create(true)
        .append(first_epoch > 0)
        .write(true)
        .truncate(first_epoch == 0)
        .open(&metrics_path)
        .map_err(|e| Error::io(&metrics_path, e))?;
    let mut metrics = csv::Writer::from_writer(file);
    if first_epoch == 0 {
        metrics.write_record(METRICS_HEADER)?;
    }
    let mut run = Run {
        cfg,
        dir: dir.clone(),
        metrics,
        artifacts: (Vec::new(), Vec::new(), Vec::new()),
        started: Instant::now(),
    };

    if first_epoch == 0 {
        run.record_epoch(0, &state)?;
    }
    let architectures = state.profile.clone();
    let utility = GameUtility::new(&cfg.game, &architectures, cfg.estimator.episodes_per_eval);
    let dynamics = cfg.dynamics();
    let ctx = Context {
        utility: &utility,
        estimator: &cfg.estimator,
        dynamics: &dynamics,
        rule: cfg.assignment_rule,
    };
    for epoch in first_epoch.max(1)..=cfg.epochs {
        match cfg.executor {
            Executor::Pool => run_distributed(&ctx, &mut state, cfg.steps_per_epoch(), cfg.physical_workers, &cfg.membership)?,
            Executor::Inline => run_sequential(&ctx, &mut state, cfg.steps_per_epoch(), &cfg.membership)?,
        };
        run.record_epoch(epoch, &state)?;
    }
    let (strategies, checkpoints, reports) = run.artifacts;
    let final_report = match reports.last() {
        Some(r) => r.clone(),
        None => evaluate(cfg, &state.profile)?,
    };
    Ok(RunArtifacts {
        dir,
        metrics: metrics_path,
        strategies,
        checkpoints,
        config_echo,
        final_report,
        reports,
    })
}

/// Seed of trial `trial` at noise dimension `noise_dim`.
pub fn sweep_seed(master: u64, noise_dim: usize, trial: usize) -> u64 {
    RngStream::new(master, SWEEP_STREAM)
        .derive(&[noise_dim as u64, trial as u64])
        .next_u64()
}

/// `trials` independent runs per noise dimension, each in
/// `<out>/noise_<d>/trial_<t>`.
pub fn sweep(base: &ExperimentConfig, noise_dims: &[usize], trials: usize) -> Result<Vec<RunArtifacts>> {
    if trials < 1 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let root = out_dir(base);
    let mut index = Vec::new();
    let mut runs = Vec::new();
    for &d in noise_dims {
        for t in 0..trials {
            let mut cfg = base.clone();
            cfg.seed = sweep_seed(base.seed, d, t);
            cfg.policy.noise_dim = d;
            cfg.run_id = format!("{}_noise{d}_trial{t}", base.run_id);
            cfg.out_dir = Some(root.join(format!("noise_{d}")).join(format!("trial_{t}")));
            let art = train(&cfg)?;
            index.push((d, t, cfg.seed, art.metrics.clone()));
            runs.push(art);
        }
    }
    let path = root.join("sweep.csv");
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut text = String::from("noise_dim,trial,seed,metrics\n");
    for (d, t, seed, m) in index {
        text.push_str(&format!("{d},{t},{seed},{}\n", m.display()));
    }
    f.write_all(text.as_bytes()).map_err(|e| Error::io(&path, e))?;
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            profile: Profile::Desk,
            steps_per_epoch: Some(20),
            epochs: 2,
            eval: EvalConfig {
                n_obs_samples: 5,
                n_state_samples: 10,
                grid_resolution: 10,
                ..EvalConfig::default()
            },
            n_strategy_samples: 7,
            out_dir: Some(dir.to_path_buf()),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_round_trips() {
        let cfg = ExperimentConfig::default().resolved();
        let text = cfg.to_json().unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn errors_name_the_key() {
        let err = ExperimentConfig::from_json(r#"{"estimator": {"sigmaa": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("estimator"), "{err}");
        assert!(err.to_string().contains("sigmaa"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"epochs": 0}"#).unwrap_err();
        assert!(err.to_string().contains("epochs"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"estimator": {"n_samples": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("estimator.n_samples"), "{err}");
    }

    #[test]
    fn profiles_resolve_defaults() {
        let paper = ExperimentConfig::default();
        assert_eq!(paper.steps_per_epoch(), 1_000_000);
        assert_eq!(paper.dynamics().alpha, 1e-6);
        let desk = ExperimentConfig {
            profile: Profile::Desk,
            ..ExperimentConfig::default()
        };
        assert_eq!(desk.steps_per_epoch(), 10_000);
        let pinned = ExperimentConfig {
            steps_per_epoch: Some(5),
            ..desk
        };
        assert_eq!(pinned.steps_per_epoch(), 5);
    }

    #[test]
    fn zero_steps_reproduce_the_initial_evaluation() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            steps_per_epoch: Some(0),
            epochs: 1,
            ..tiny(dir.path())
        };
        let art = train(&cfg).unwrap();
        assert_eq!(art.reports.len(), 2);
        assert_eq!(art.reports[0], art.reports[1]);
        assert_eq!(art.reports[0], evaluate(&cfg, &cfg.initial_profile()).unwrap());
    }

    #[test]
    fn every_metrics_epoch_has_a_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let art = train(&cfg).unwrap();
        let text = fs::read_to_string(&art.metrics).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), METRICS_HEADER.join(","));
        let epochs: Vec<u64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(epochs, vec![0, 0, 1, 1, 2, 2]);
        assert_eq!(art.checkpoints.len(), 3);
        for (e, c) in art.checkpoints.iter().enumerate() {
            assert_eq!(Checkpoint::load(c).unwrap().epoch, e as u64);
        }
        let strategy = fs::read_to_string(&art.strategies[1]).unwrap();
        assert_eq!(strategy.lines().count(), 1 + 2 * 7);
        let echo = ExperimentConfig::load(&art.config_echo).unwrap();
        assert_eq!(echo, cfg.resolved());
    }

    #[test]
    fn resume_matches_uninterrupted() {
        let full_dir = tempfile::tempdir().unwrap();
        let full = train(&tiny(full_dir.path())).unwrap();

        let part_dir = tempfile::tempdir().unwrap();
        let first = ExperimentConfig {
            epochs: 1,
            ..tiny(part_dir.path())
        };
        let art = train(&first).unwrap();
        let ck = Checkpoint::load(art.checkpoints.last().unwrap()).unwrap();
        let resumed = resume(&tiny(part_dir.path()), &ck).unwrap();

        let a = Checkpoint::load(full.checkpoints.last().unwrap()).unwrap();
        let b = Checkpoint::load(resumed.checkpoints.last().unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            fs::read(&full.metrics).unwrap(),
            fs::read(&resumed.metrics).unwrap()
        );
    }

    #[test]
    fn executors_agree() {
        let a_dir = tempfile::tempdir().unwrap();
        let b_dir = tempfile::tempdir().unwrap();
        let a = train(&tiny(a_dir.path())).unwrap();
        let b = train(&ExperimentConfig {
            executor: Executor::Inline,
            ..tiny(b_dir.path())
        })
        .unwrap();
        assert_eq!(
            Checkpoint::load(a.checkpoints.last().unwrap()).unwrap(),
            Checkpoint::load(b.checkpoints.last().unwrap()).unwrap()
        );
    }

    #[test]
    fn sweep_counts_and_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let base = ExperimentConfig {
            epochs: 1,
            steps_per_epoch: Some(5),
            ..tiny(dir.path())
        };
        let runs = sweep(&base, &[0, 2], 2).unwrap();
        assert_eq!(runs.len(), 4);
        let mut seeds: Vec<u64> = [0, 2]
            .iter()
            .flat_map(|&d| (0..2).map(move |t| sweep_seed(base.seed, d, t)))
            .collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 4);
        assert!(runs.iter().all(|r| r.metrics.exists()));
        assert!(dir.path().join("sweep.csv").exists());
    }
}
