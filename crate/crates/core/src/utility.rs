//! Stochastic utility oracles over flat parameter vectors.

use crate::games::Game;
use crate::policy::Policy;
use crate::prng::RngStream;

/// Black-box access to each player's expected utility as a function of the
/// whole parameter profile. One call returns one noisy sample.
pub trait Utility: Sync {
    fn n_players(&self) -> usize;
    fn dim(&self, player: usize) -> usize;
    fn utility(&self, params: &[&[f64]], player: usize, stream: &mut RngStream) -> f64;
}

/// Utility of policy networks playing a game, averaged over a fixed number
/// of sampled episodes.
pub struct GameUtility<'a> {
    game: &'a dyn Game,
    policies: &'a [Policy],
    episodes: usize,
}

impl<'a> GameUtility<'a> {
    pub fn new(game: &'a dyn Game, policies: &'a [Policy], episodes: usize) -> Self {
        GameUtility {
            game,
            policies,
            episodes: episodes.max(1),
        }
    }
}

impl Utility for GameUtility<'_> {
    fn n_players(&self) -> usize {
        self.game.n_players()
    }

    fn dim(&self, player: usize) -> usize {
        self.policies[player].params.len()
    }

    fn utility(&self, params: &[&[f64]], player: usize, stream: &mut RngStream) -> f64 {
        let n = self.game.n_players();
        let mut out = vec![0.0; n];
        let mut actions = Vec::with_capacity(n);
        let mut total = 0.0;
        for _ in 0..self.episodes {
            let state = self.game.sample_state(stream);
            actions.clear();
            for (j, policy) in self.policies.iter().enumerate() {
                let obs = self.game.observe(&state, j);
                actions.push(policy.act_with(params[j], &obs, stream));
            }
            self.game.payoff_into(&state, &actions, stream, &mut out);
            total += out[player];
        }
        total / self.episodes as f64
    }
}
