use serde::{Deserialize, Serialize};

use super::{argmax_fair, ActionSpace, Game};
use crate::policy::OutputHead;
use crate::prng::RngStream;

pub const ITEMS: usize = 3;

/// Two bidders, three simultaneous first-price auctions. Owning two or more
/// items is worth 1, a single item is worth nothing; each bidder pays their
/// own bid on every item they win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chopstick {}

impl Game for Chopstick {
    fn n_players(&self) -> usize {
        2
    }

    fn obs_dim(&self, _player: usize) -> usize {
        0
    }

    fn action_dim(&self, _player: usize) -> usize {
        ITEMS
    }

    fn head(&self, _player: usize) -> OutputHead {
        OutputHead::absolute_value()
    }

    fn action_space(&self, _player: usize) -> ActionSpace {
        ActionSpace::Box {
            dims: ITEMS,
            lo: 0.0,
            hi: 1.0,
        }
    }

    fn sample_state(&self, _stream: &mut RngStream) -> Vec<f64> {
        Vec::new()
    }

    fn observe(&self, _state: &[f64], _player: usize) -> Vec<f64> {
        Vec::new()
    }

    fn sample_state_given_obs(&self, _player: usize, _observation: &[f64], _stream: &mut RngStream) -> Vec<f64> {
        Vec::new()
    }

    fn payoff_into(&self, _state: &[f64], actions: &[Vec<f64>], stream: &mut RngStream, out: &mut [f64]) {
        let mut won = [0usize; 2];
        let mut paid = [0.0f64; 2];
        for item in 0..ITEMS {
            let w = argmax_fair(actions.iter().map(|a| a[item]), stream);
            won[w] += 1;
            paid[w] += actions[w][item];
        }
        for i in 0..2 {
            let value = if won[i] >= 2 { 1.0 } else { 0.0 };
            out[i] = value - paid[i];
        }
    }

    fn add_grid_payoffs(
        &self,
        player: usize,
        _state: &[f64],
        actions: &[Vec<f64>],
        grid: &[Vec<f64>],
        stream: &mut RngStream,
        sums: &mut [f64],
    ) {
        let rival = &actions[1 - player];
        for (g, sum) in grid.iter().zip(sums) {
            let mut won = 0;
            let mut paid = 0.0;
            for item in 0..ITEMS {
                let win = if g[item] == rival[item] {
                    stream.below(2) == player
                } else {
                    g[item] > rival[item]
                };
                if win {
                    won += 1;
                    paid += g[item];
                }
            }
            *sum += if won >= 2 { 1.0 } else { 0.0 } - paid;
        }
    }
}
