use serde::{Deserialize, Serialize};

use super::{ActionSpace, Game};
use crate::error::{Error, Result};
use crate::policy::OutputHead;
use crate::prng::RngStream;

/// Each player picks `x_i` in `[0, 1]` and earns the distance to the next
/// higher point, or to 1 if theirs is the highest. Exact ties are ordered
/// uniformly at random.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Visibility {
    pub n_players: usize,
}

impl Default for Visibility {
    fn default() -> Self {
        Visibility { n_players: 2 }
    }
}

impl Visibility {
    pub fn validate(&self) -> Result<()> {
        if self.n_players < 2 {
            return Err(Error::config("game.n_players", "visibility needs at least 2 players"));
        }
        Ok(())
    }
}

impl Game for Visibility {
    fn n_players(&self) -> usize {
        self.n_players
    }

    fn obs_dim(&self, _player: usize) -> usize {
        0
    }

    fn action_dim(&self, _player: usize) -> usize {
        1
    }

    fn head(&self, _player: usize) -> OutputHead {
        OutputHead::identity().clamped(0.0, 1.0)
    }

    fn action_space(&self, _player: usize) -> ActionSpace {
        ActionSpace::Box {
            dims: 1,
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
        let n = self.n_players;
        if n == 2 {
            let (x, y) = (actions[0][0], actions[1][0]);
            let first_higher = x > y || (x == y && stream.coin());
            if first_higher {
                out[0] = 1.0 - x;
                out[1] = x - y;
            } else {
                out[0] = y - x;
                out[1] = 1.0 - y;
            }
            return;
        }
        let xs: Vec<f64> = actions.iter().map(|a| a[0]).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            let keys: Vec<u64> = (0..n).map(|_| stream.next_u64()).collect();
            order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(keys[a].cmp(&keys[b])));
        } else {
            order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        }
        for (rank, &i) in order.iter().enumerate() {
            out[i] = match order.get(rank + 1) {
                Some(&next) => xs[next] - xs[i],
                None => 1.0 - xs[i],
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::seed_stream;

    #[test]
    fn distance_to_next_point() {
        let g = Visibility::default();
        let r = g.payoff(&[], &[vec![0.2], vec![0.6]], &mut seed_stream(0, 0));
        assert!((r[0] - 0.4).abs() < 1e-15 && (r[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn three_players() {
        let g = Visibility { n_players: 3 };
        let r = g.payoff(&[], &[vec![0.5], vec![0.1], vec![0.9]], &mut seed_stream(0, 0));
        let want = [0.4, 0.4, 0.1];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_are_ordered_fairly() {
        for n in [2, 3] {
            let g = Visibility { n_players: n };
            let mut s = seed_stream(n as u64, 0);
            let trials = 100_000;
            let actions = vec![vec![0.3]; n];
            let top = (0..trials)
                .filter(|_| g.payoff(&[], &actions, &mut s)[0] > 0.5)
                .count() as f64
                / trials as f64;
            assert!((top - 1.0 / n as f64).abs() < 0.01, "n={n} top={top}");
        }
    }
}
