use serde::{Deserialize, Serialize};

use super::{argmax_fair, ActionSpace, BudgetSource, Game};
use crate::error::{Error, Result};
use crate::policy::{OutputHead, ScaleSource};
use crate::prng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BudgetsRepr", into = "BudgetsRepr")]
pub enum Budgets {
    Fixed(Vec<f64>),
    /// Drawn from `U[0, 1]` each episode and shown to every player.
    Random,
}

/// JSON form: an array of budgets or the string `"random"`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum BudgetsRepr {
    Fixed(Vec<f64>),
    Tag(String),
}

impl TryFrom<BudgetsRepr> for Budgets {
    type Error = String;
    fn try_from(r: BudgetsRepr) -> std::result::Result<Self, String> {
        match r {
            BudgetsRepr::Fixed(b) => Ok(Budgets::Fixed(b)),
            BudgetsRepr::Tag(t) if t == "random" => Ok(Budgets::Random),
            BudgetsRepr::Tag(t) => Err(format!("expected a budget list or \"random\", got \"{t}\"")),
        }
    }
}

impl From<Budgets> for BudgetsRepr {
    fn from(b: Budgets) -> Self {
        match b {
            Budgets::Fixed(v) => BudgetsRepr::Fixed(v),
            Budgets::Random => BudgetsRepr::Tag("random".into()),
        }
    }
}

/// Continuous Colonel Blotto. The state is the budget vector, which every
/// player observes; with fixed budgets it is constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blotto {
    pub n_players: usize,
    pub battlefields: usize,
    pub budgets: Budgets,
    /// `values[i][j]`: worth of battlefield `j` to player `i`.
    pub values: Vec<Vec<f64>>,
}

impl Blotto {
    /// Unit budgets and unit battlefield values.
    pub fn symmetric(n_players: usize, battlefields: usize) -> Self {
        Blotto {
            n_players,
            battlefields,
            budgets: Budgets::Fixed(vec![1.0; n_players]),
            values: vec![vec![1.0; battlefields]; n_players],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_players < 2 {
            return Err(Error::config("game.n_players", "blotto needs at least 2 players"));
        }
        if self.battlefields < 1 {
            return Err(Error::config("game.battlefields", "must be at least 1"));
        }
        if let Budgets::Fixed(b) = &self.budgets {
            if b.len() != self.n_players {
                return Err(Error::config("game.budgets", "one budget per player required"));
            }
            if b.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::config("game.budgets", "budgets must be positive"));
            }
        }
        if self.values.len() != self.n_players
            || self.values.iter().any(|row| row.len() != self.battlefields)
        {
            return Err(Error::config("game.values", "expected an n_players x battlefields matrix"));
        }
        if self.values.iter().flatten().any(|&v| !(v >= 0.0)) {
            return Err(Error::config("game.values", "values must be nonnegative"));
        }
        Ok(())
    }
}

impl Game for Blotto {
    fn n_players(&self) -> usize {
        self.n_players
    }

    fn obs_dim(&self, _player: usize) -> usize {
        self.n_players
    }

    fn action_dim(&self, _player: usize) -> usize {
        self.battlefields
    }

    fn head(&self, player: usize) -> OutputHead {
        match &self.budgets {
            Budgets::Fixed(b) => OutputHead::softmax(ScaleSource::Constant(b[player])),
            Budgets::Random => OutputHead::softmax(ScaleSource::FromObservation(player)),
        }
    }

    fn action_space(&self, player: usize) -> ActionSpace {
        let budget = match &self.budgets {
            Budgets::Fixed(b) => BudgetSource::Fixed(b[player]),
            Budgets::Random => BudgetSource::Observed(player),
        };
        ActionSpace::Simplex {
            parts: self.battlefields,
            budget,
        }
    }

    fn sample_state(&self, stream: &mut RngStream) -> Vec<f64> {
        match &self.budgets {
            Budgets::Fixed(b) => b.clone(),
            Budgets::Random => (0..self.n_players).map(|_| stream.next_f64()).collect(),
        }
    }

    fn observe(&self, state: &[f64], _player: usize) -> Vec<f64> {
        state.to_vec()
    }

    fn sample_state_given_obs(&self, _player: usize, observation: &[f64], _stream: &mut RngStream) -> Vec<f64> {
        observation.to_vec()
    }

    fn payoff_into(&self, _state: &[f64], actions: &[Vec<f64>], stream: &mut RngStream, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..self.battlefields {
            let winner = argmax_fair(actions.iter().map(|a| a[j]), stream);
            out[winner] += self.values[winner][j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::seed_stream;
    use proptest::prelude::*;

    #[test]
    fn fixed_budget_state_is_constant() {
        let g = Blotto::symmetric(2, 3);
        let mut s = seed_stream(0, 0);
        assert_eq!(g.sample_state(&mut s), vec![1.0, 1.0]);
        assert_eq!(g.sample_state(&mut s), vec![1.0, 1.0]);
    }

    #[test]
    fn random_budgets_are_observed_by_all() {
        let g = Blotto {
            budgets: Budgets::Random,
            ..Blotto::symmetric(2, 3)
        };
        let mut s = seed_stream(0, 0);
        let state = g.sample_state(&mut s);
        assert!(state.iter().all(|b| (0.0..1.0).contains(b)));
        assert_eq!(g.observe(&state, 0), state);
        assert_eq!(g.observe(&state, 1), state);
        assert_eq!(g.head(1).scale, ScaleSource::FromObservation(1));
    }

    #[test]
    fn winner_takes_battlefield_value() {
        let mut g = Blotto::symmetric(2, 3);
        g.values = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]];
        let mut s = seed_stream(0, 0);
        let r = g.payoff(&[1.0, 1.0], &[vec![0.5, 0.4, 0.1], vec![0.2, 0.2, 0.6]], &mut s);
        assert_eq!(r, vec![3.0, 1.0]);
    }

    #[test]
    fn exact_ties_split_evenly() {
        let g = Blotto::symmetric(2, 1);
        let mut s = seed_stream(5, 0);
        let n = 100_000;
        let wins: f64 = (0..n)
            .map(|_| g.payoff(&[1.0, 1.0], &[vec![1.0], vec![1.0]], &mut s)[0])
            .sum();
        assert!((wins / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn validation() {
        let mut g = Blotto::symmetric(2, 3);
        assert!(g.validate().is_ok());
        g.values.pop();
        assert!(g.validate().is_err());
        let g = Blotto {
            budgets: Budgets::Fixed(vec![1.0, -1.0]),
            ..Blotto::symmetric(2, 3)
        };
        assert!(g.validate().is_err());
    }

    proptest! {
        #[test]
        fn equal_values_are_constant_sum(a in prop::array::uniform3(0.0f64..1.0), b in prop::array::uniform3(0.0f64..1.0), seed in any::<u64>()) {
            let g = Blotto::symmetric(2, 3);
            let norm = |x: [f64; 3]| { let s: f64 = x.iter().sum::<f64>() + 1e-12; x.iter().map(|v| v / s).collect::<Vec<_>>() };
            let r = g.payoff(&[1.0, 1.0], &[norm(a), norm(b)], &mut seed_stream(seed, 0));
            prop_assert_eq!(r[0] + r[1], 3.0);
        }
    }
}
