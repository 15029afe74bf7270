//! Bayesian games with black-box payoffs.
//!
//! A game exposes the state distribution, per-player observations, the
//! conditional state sampler used by the best-response estimator, and a
//! payoff evaluator. States are flat `Vec<f64>`s whose layout is owned by
//! each game.

mod auction;
mod blotto;
mod chopstick;
mod visibility;

pub use auction::{Auction, PaymentRule, ValueStructure};
pub use blotto::{Blotto, Budgets};
pub use chopstick::Chopstick;
pub use visibility::Visibility;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::policy::{OutputHead, Strategy};
use crate::prng::RngStream;

/// Where a player's actions live; used to build best-response grids.
#[derive(Clone, Debug, PartialEq)]
pub enum ActionSpace {
    /// `[lo, hi]^dims`.
    Box { dims: usize, lo: f64, hi: f64 },
    /// `{a >= 0, sum(a) = budget}` in `parts` dimensions.
    Simplex { parts: usize, budget: BudgetSource },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BudgetSource {
    Fixed(f64),
    Observed(usize),
}

pub trait Game: Send + Sync {
    fn n_players(&self) -> usize;
    fn obs_dim(&self, player: usize) -> usize;
    fn action_dim(&self, player: usize) -> usize;
    fn head(&self, player: usize) -> OutputHead;
    fn action_space(&self, player: usize) -> ActionSpace;

    fn sample_state(&self, stream: &mut RngStream) -> Vec<f64>;
    fn observe(&self, state: &[f64], player: usize) -> Vec<f64>;
    /// Draws `state | observe(state, player) == observation`.
    fn sample_state_given_obs(&self, player: usize, observation: &[f64], stream: &mut RngStream) -> Vec<f64>;

    /// Writes every player's payoff into `out`. Ties draw from `stream`.
    fn payoff_into(&self, state: &[f64], actions: &[Vec<f64>], stream: &mut RngStream, out: &mut [f64]);

    fn payoff(&self, state: &[f64], actions: &[Vec<f64>], stream: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.n_players()];
        self.payoff_into(state, actions, stream, &mut out);
        out
    }

    /// Adds `player`'s payoff for each candidate action in `grid`, all other
    /// actions held at `actions`, to the matching entry of `sums`.
    fn add_grid_payoffs(
        &self,
        player: usize,
        state: &[f64],
        actions: &[Vec<f64>],
        grid: &[Vec<f64>],
        stream: &mut RngStream,
        sums: &mut [f64],
    ) {
        let mut profile = actions.to_vec();
        let mut out = vec![0.0; self.n_players()];
        for (g, sum) in grid.iter().zip(sums) {
            profile[player].clear();
            profile[player].extend_from_slice(g);
            self.payoff_into(state, &profile, stream, &mut out);
            *sum += out[player];
        }
    }
}

/// Serializable game selection; the config and checkpoint representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    Blotto(Blotto),
    Auction(Auction),
    Chopstick(Chopstick),
    Visibility(Visibility),
}

impl GameSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GameSpec::Blotto(g) => g.validate(),
            GameSpec::Auction(g) => g.validate(),
            GameSpec::Chopstick(_) => Ok(()),
            GameSpec::Visibility(g) => g.validate(),
        }
    }

    fn inner(&self) -> &dyn Game {
        match self {
            GameSpec::Blotto(g) => g,
            GameSpec::Auction(g) => g,
            GameSpec::Chopstick(g) => g,
            GameSpec::Visibility(g) => g,
        }
    }

    /// Short label used in file names and reports.
    pub fn label(&self) -> String {
        match self {
            GameSpec::Blotto(g) => format!(
                "blotto_{}p_{}j_{}",
                g.n_players,
                g.battlefields,
                if g.budgets == Budgets::Random { "random" } else { "fixed" }
            ),
            GameSpec::Auction(g) => format!("auction_{}", g.label()),
            GameSpec::Chopstick(_) => "chopstick".into(),
            GameSpec::Visibility(g) => format!("visibility_{}p", g.n_players),
        }
    }
}

impl Game for GameSpec {
    fn n_players(&self) -> usize {
        self.inner().n_players()
    }
    fn obs_dim(&self, player: usize) -> usize {
        self.inner().obs_dim(player)
    }
    fn action_dim(&self, player: usize) -> usize {
        self.inner().action_dim(player)
    }
    fn head(&self, player: usize) -> OutputHead {
        self.inner().head(player)
    }
    fn action_space(&self, player: usize) -> ActionSpace {
        self.inner().action_space(player)
    }
    fn sample_state(&self, stream: &mut RngStream) -> Vec<f64> {
        self.inner().sample_state(stream)
    }
    fn observe(&self, state: &[f64], player: usize) -> Vec<f64> {
        self.inner().observe(state, player)
    }
    fn sample_state_given_obs(&self, player: usize, observation: &[f64], stream: &mut RngStream) -> Vec<f64> {
        self.inner().sample_state_given_obs(player, observation, stream)
    }
    fn payoff_into(&self, state: &[f64], actions: &[Vec<f64>], stream: &mut RngStream, out: &mut [f64]) {
        self.inner().payoff_into(state, actions, stream, out)
    }
    fn add_grid_payoffs(
        &self,
        player: usize,
        state: &[f64],
        actions: &[Vec<f64>],
        grid: &[Vec<f64>],
        stream: &mut RngStream,
        sums: &mut [f64],
    ) {
        self.inner().add_grid_payoffs(player, state, actions, grid, stream, sums)
    }
}

/// Index of the winner among `bids`, breaking exact ties uniformly.
pub(crate) fn argmax_fair(bids: impl Iterator<Item = f64> + Clone, stream: &mut RngStream) -> usize {
    let max = bids.clone().fold(f64::NEG_INFINITY, f64::max);
    let tied = bids.clone().filter(|&b| b == max).count();
    let pick = if tied > 1 { stream.below(tied) } else { 0 };
    bids.enumerate()
        .filter(|&(_, b)| b == max)
        .nth(pick)
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// One full episode: sample a state, let every strategy act on its
/// observation, and evaluate payoffs.
pub fn play_episode(game: &dyn Game, strategies: &[&dyn Strategy], stream: &mut RngStream) -> Vec<f64> {
    let state = game.sample_state(stream);
    let actions: Vec<Vec<f64>> = strategies
        .iter()
        .enumerate()
        .map(|(i, s)| s.act(&game.observe(&state, i), stream))
        .collect();
    game.payoff(&state, &actions, stream)
}
