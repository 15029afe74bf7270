//! Sampled NashConv.
//!
//! For each player `i` the evaluator draws observations `o_i`, then states
//! `ω | o_i` and opponent actions from the profile. The best-response value
//! is the mean over observations of the best grid action's mean payoff on
//! those samples; the player's own utility is measured on the very same
//! samples with the player's own policy action.
//!
//! Observation samples that are bitwise identical (complete-information
//! games, players with a constant observation) are pooled before the max,
//! which keeps the upward bias of a noisy max from growing with the number
//! of observation samples.

mod blotto;
mod grid;

pub use blotto::{blotto_best_response_enum, blotto_value};
pub use grid::{action_grid, compositions, linspace, simplex_grid};

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{play_episode, Game};
use crate::policy::Strategy;
use crate::prng::RngStream;

const OBS_KEY: u64 = 1;
const STATE_KEY: u64 = 2;
const GRID_KEY: u64 = 3;
const OWN_KEY: u64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub n_obs_samples: usize,
    pub n_state_samples: usize,
    /// Points per one-dimensional action grid.
    pub grid_resolution: usize,
    pub n_opponent_action_samples: usize,
    /// Integer partition size for simplex grids.
    pub simplex_resolution: usize,
    /// Points per dimension for multi-dimensional box grids.
    pub box_resolution: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_obs_samples: 100,
            n_state_samples: 300,
            grid_resolution: 100,
            n_opponent_action_samples: 1,
            simplex_resolution: 20,
            box_resolution: 20,
        }
    }
}

impl EvalConfig {
    /// Observation and state counts multiplied by `factor`.
    pub fn scaled(&self, factor: usize) -> Self {
        EvalConfig {
            n_obs_samples: self.n_obs_samples * factor,
            n_state_samples: self.n_state_samples * factor,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("eval.n_obs_samples", self.n_obs_samples),
            ("eval.n_state_samples", self.n_state_samples),
            ("eval.grid_resolution", self.grid_resolution),
            ("eval.n_opponent_action_samples", self.n_opponent_action_samples),
            ("eval.simplex_resolution", self.simplex_resolution),
            ("eval.box_resolution", self.box_resolution),
        ];
        for (key, n) in counts {
            if n < 1 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerGap {
    pub player: usize,
    pub utility: f64,
    pub best_response: f64,
    pub gap: f64,
    pub grid_points: usize,
    /// Distinct observations after pooling.
    pub observation_groups: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub players: Vec<PlayerGap>,
    pub nashconv: f64,
    pub n_obs_samples: usize,
    pub n_state_samples: usize,
    pub n_opponent_action_samples: usize,
    pub seed: u64,
    pub stream_id: u64,
}

impl EvalReport {
    pub fn gaps(&self) -> Vec<f64> {
        self.players.iter().map(|p| p.gap).collect()
    }

    /// One row per player.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "player",
            "utility",
            "best_response",
            "gap",
            "nashconv",
            "n_obs_samples",
            "n_state_samples",
            "seed",
        ])?;
        for p in &self.players {
            w.write_record([
                p.player.to_string(),
                p.utility.to_string(),
                p.best_response.to_string(),
                p.gap.to_string(),
                self.nashconv.to_string(),
                self.n_obs_samples.to_string(),
                self.n_state_samples.to_string(),
                self.seed.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// One conditional sample: a state and a full action profile, with the
/// evaluated player's own action in its slot.
struct Sample {
    state: Vec<f64>,
    actions: Vec<Vec<f64>>,
}

fn own_mean_payoff(game: &dyn Game, player: usize, samples: &[Sample], stream: &mut RngStream) -> f64 {
    let mut out = vec![0.0; game.n_players()];
    let mut total = 0.0;
    for s in samples {
        game.payoff_into(&s.state, &s.actions, stream, &mut out);
        total += out[player];
    }
    total / samples.len() as f64
}

/// Mean payoff of each grid action over `samples`, accumulated in fixed-size
/// chunks with one tie-breaking stream per chunk.
fn grid_means(
    game: &dyn Game,
    player: usize,
    samples: &[Sample],
    grid: &[Vec<f64>],
    chunk_stream: impl Fn(u64) -> RngStream + Sync,
) -> Vec<f64> {
    const CHUNK: usize = 4096;
    let partial: Vec<Vec<f64>> = samples
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut s = chunk_stream(c as u64);
            let mut sums = vec![0.0; grid.len()];
            for sample in chunk {
                game.add_grid_payoffs(player, &sample.state, &sample.actions, grid, &mut s, &mut sums);
            }
            sums
        })
        .collect();
    let mut total = vec![0.0; grid.len()];
    for p in partial {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    let n = samples.len() as f64;
    total.iter_mut().for_each(|t| *t /= n);
    total
}

fn player_gap(
    game: &dyn Game,
    strategies: &[&dyn Strategy],
    player: usize,
    cfg: &EvalConfig,
    root: &RngStream,
) -> PlayerGap {
    let observations: Vec<Vec<f64>> = (0..cfg.n_obs_samples)
        .map(|k| {
            let mut s = root.derive(&[OBS_KEY, player as u64, k as u64]);
            let state = game.sample_state(&mut s);
            game.observe(&state, player)
        })
        .collect();

    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (k, o) in observations.iter().enumerate() {
        groups.entry(o.iter().map(|x| x.to_bits()).collect()).or_default().push(k);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort_by_key(|g| g[0]);

    let per_group: Vec<(f64, f64, usize)> = groups
        .par_iter()
        .map(|members| {
            let obs = &observations[members[0]];
            let mut samples = Vec::with_capacity(members.len() * cfg.n_state_samples * cfg.n_opponent_action_samples);
            for &k in members {
                let mut s = root.derive(&[STATE_KEY, player as u64, k as u64]);
                for _ in 0..cfg.n_state_samples {
                    let state = game.sample_state_given_obs(player, obs, &mut s);
                    for _ in 0..cfg.n_opponent_action_samples {
                        let actions = strategies
                            .iter()
                            .enumerate()
                            .map(|(j, strat)| strat.act(&game.observe(&state, j), &mut s))
                            .collect();
                        samples.push(Sample {
                            state: state.clone(),
                            actions,
                        });
                    }
                }
            }
            let grid = action_grid(game, player, cfg, obs);
            let key = members[0] as u64;
            let best = grid_means(game, player, &samples, &grid, |c| root.derive(&[GRID_KEY, player as u64, key, c]))
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            let mut s = root.derive(&[OWN_KEY, player as u64, key]);
            let own = own_mean_payoff(game, player, &samples, &mut s);
            (best, own, grid.len())
        })
        .collect();

    let n = cfg.n_obs_samples as f64;
    let mut best_response = 0.0;
    let mut utility = 0.0;
    for (members, (b, u, _)) in groups.iter().zip(&per_group) {
        let w = members.len() as f64 / n;
        best_response += w * b;
        utility += w * u;
    }
    PlayerGap {
        player,
        utility,
        best_response,
        gap: best_response - utility,
        grid_points: per_group.first().map_or(0, |g| g.2),
        observation_groups: groups.len(),
    }
}

/// Estimates every player's utility gap. Deterministic in `stream`, which is
/// only used as a root for derived substreams.
pub fn estimate_nashconv(
    game: &dyn Game,
    strategies: &[&dyn Strategy],
    cfg: &EvalConfig,
    stream: &RngStream,
) -> Result<EvalReport> {
    cfg.validate()?;
    if strategies.len() != game.n_players() {
        return Err(Error::DimensionMismatch {
            what: "strategies",
            expected: game.n_players(),
            got: strategies.len(),
        });
    }
    let players: Vec<PlayerGap> = (0..game.n_players())
        .map(|i| player_gap(game, strategies, i, cfg, stream))
        .collect();
    let nashconv = players.iter().map(|p| p.gap).sum();
    Ok(EvalReport {
        players,
        nashconv,
        n_obs_samples: cfg.n_obs_samples,
        n_state_samples: cfg.n_state_samples,
        n_opponent_action_samples: cfg.n_opponent_action_samples,
        seed: stream.seed(),
        stream_id: stream.stream_id(),
    })
}

/// Monte Carlo mean payoff per player over `n_episodes` full episodes.
pub fn expected_utility(
    game: &dyn Game,
    strategies: &[&dyn Strategy],
    n_episodes: usize,
    stream: &RngStream,
) -> Vec<f64> {
    const CHUNK: usize = 10_000;
    let n = game.n_players();
    let chunks = n_episodes.div_ceil(CHUNK);
    let sums: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = stream.derive(&[c as u64]);
            let mut acc = vec![0.0; n];
            for _ in c * CHUNK..((c + 1) * CHUNK).min(n_episodes) {
                for (a, r) in acc.iter_mut().zip(play_episode(game, strategies, &mut s)) {
                    *a += r;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in sums {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.iter_mut().for_each(|t| *t /= n_episodes.max(1) as f64);
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{Auction, Blotto, PaymentRule, ValueStructure};
    use crate::prng::seed_stream;

    struct Fixed(Vec<f64>);
    impl Strategy for Fixed {
        fn act(&self, _: &[f64], _: &mut RngStream) -> Vec<f64> {
            self.0.clone()
        }
    }

    struct Linear(f64);
    impl Strategy for Linear {
        fn act(&self, obs: &[f64], _: &mut RngStream) -> Vec<f64> {
            vec![self.0 * obs[0]]
        }
    }

    struct UniformBid;
    impl Strategy for UniformBid {
        fn act(&self, _: &[f64], s: &mut RngStream) -> Vec<f64> {
            vec![s.next_f64()]
        }
    }

    fn small() -> EvalConfig {
        EvalConfig {
            n_obs_samples: 40,
            n_state_samples: 100,
            ..EvalConfig::default()
        }
    }

    #[test]
    fn grid_best_response_has_zero_gap() {
        let game = Blotto::symmetric(2, 3);
        let a = Fixed(vec![0.0, 0.5, 0.5]);
        let b = Fixed(vec![1.0, 0.0, 0.0]);
        let r = estimate_nashconv(&game, &[&a, &b], &small(), &seed_stream(2, 0)).unwrap();
        assert!(r.players.iter().all(|p| p.observation_groups == 1));
        assert_eq!(r.players[0].gap, 0.0);
        assert_eq!(r.players[0].utility, 2.0);
        // Player 1 can take two battlefields from (0, .5, .5), e.g. (.05, .95, 0).
        assert_eq!(r.players[1].best_response, 2.0);
        assert_eq!(r.players[1].gap, 1.0);
        assert_eq!(r.nashconv, r.gaps().iter().sum::<f64>());
    }

    #[test]
    fn zero_bids_are_exploitable() {
        let game = Auction::new(2, ValueStructure::Complete, PaymentRule::WinnerPay { k: 1 });
        let zero = Fixed(vec![0.0]);
        let r = estimate_nashconv(&game, &[&zero, &zero], &small(), &seed_stream(1, 0)).unwrap();
        assert!(r.nashconv > 0.3);
    }

    #[test]
    fn uniform_bidder_is_exploitable() {
        let game = Auction::new(2, ValueStructure::Ipv, PaymentRule::WinnerPay { k: 1 });
        let half = Linear(0.5);
        let r = estimate_nashconv(&game, &[&UniformBid, &half], &EvalConfig::default(), &seed_stream(3, 0)).unwrap();
        assert!(r.players[0].gap > 0.05, "{r:?}");
        assert!(r.players[0].observation_groups == 100);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let game = Auction::new(2, ValueStructure::Ipv, PaymentRule::AllPay);
        let half = Linear(0.5);
        let a = estimate_nashconv(&game, &[&half, &UniformBid], &small(), &seed_stream(4, 2)).unwrap();
        let b = estimate_nashconv(&game, &[&half, &UniformBid], &small(), &seed_stream(4, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed, 4);
        assert_eq!(a.stream_id, 2);
    }

    #[test]
    fn blotto_utilities_are_constant_sum() {
        let game = Blotto::symmetric(2, 3);
        let a = Fixed(vec![0.2, 0.3, 0.5]);
        let b = Fixed(vec![0.4, 0.4, 0.2]);
        let u = expected_utility(&game, &[&a, &b], 1000, &seed_stream(5, 0));
        assert_eq!(u[0] + u[1], 3.0);
    }

    #[test]
    fn zero_bids_split_the_value() {
        let game = Auction::new(2, ValueStructure::Complete, PaymentRule::WinnerPay { k: 1 });
        let zero = Fixed(vec![0.0]);
        let u = expected_utility(&game, &[&zero, &zero], 100_000, &seed_stream(6, 0));
        // E[v] = 1/2, each side wins half the time.
        assert!((u[0] - 0.25).abs() < 0.005);
        assert!((u[0] + u[1] - 0.5).abs() < 0.005);
    }

    #[test]
    fn config_rejects_zero_counts() {
        let cfg = EvalConfig {
            n_state_samples: 0,
            ..EvalConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
