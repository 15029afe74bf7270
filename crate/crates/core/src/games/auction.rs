use serde::{Deserialize, Serialize};

use super::{argmax_fair, ActionSpace, Game};
use crate::error::{Error, Result};
use crate::policy::OutputHead;
use crate::prng::RngStream;

/// How states, observations and item values relate. All states are uniform.
///
/// | structure  | state         | observation `o_i`   | value `v_i`                 |
/// |------------|---------------|---------------------|-----------------------------|
/// | ipv        | `[0,1]^n`     | `w_i`               | `w_i`                       |
/// | common     | `[0,1]^(n+1)` | `w_i * w_{n+1}`     | `w_{n+1}`                   |
/// | affiliated | `[0,1]^(n+1)` | `w_i + w_{n+1}`     | `w_{n+1} + mean(w_1..w_n)`  |
/// | complete   | `[0,1]`       | `w`                 | `w`                         |
/// | asymmetric | `[0,1]`       | `w` if `i = 0` else 0 | `w`                       |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueStructure {
    Ipv,
    Common,
    Affiliated,
    Complete,
    Asymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PaymentRule {
    /// Highest bid wins and pays the `k`th highest bid.
    WinnerPay { k: usize },
    /// Everyone pays their bid; highest bid wins.
    AllPay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Auction {
    pub n_players: usize,
    pub value_structure: ValueStructure,
    pub payment_rule: PaymentRule,
    /// Upper end of the best-response bid grid; defaults to 2.0 for
    /// affiliated values and 1.5 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bid_upper: Option<f64>,
}

impl Auction {
    pub fn new(n_players: usize, value_structure: ValueStructure, payment_rule: PaymentRule) -> Self {
        Auction {
            n_players,
            value_structure,
            payment_rule,
            bid_upper: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_players < 2 {
            return Err(Error::config("game.n_players", "auctions need at least 2 players"));
        }
        if let PaymentRule::WinnerPay { k } = self.payment_rule {
            if k < 1 || k > self.n_players {
                return Err(Error::config("game.payment_rule.k", format!("must lie in [1, {}]", self.n_players)));
            }
        }
        if self.value_structure == ValueStructure::Asymmetric
            && (self.n_players != 2 || self.payment_rule != PaymentRule::WinnerPay { k: 1 })
        {
            return Err(Error::config(
                "game.value_structure",
                "asymmetric auction is defined for 2 players, first-price winner-pay",
            ));
        }
        if let Some(u) = self.bid_upper {
            if !(u > 0.0) {
                return Err(Error::config("game.bid_upper", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let vs = match self.value_structure {
            ValueStructure::Ipv => "ipv",
            ValueStructure::Common => "common",
            ValueStructure::Affiliated => "affiliated",
            ValueStructure::Complete => "complete",
            ValueStructure::Asymmetric => "asymmetric",
        };
        let rule = match self.payment_rule {
            PaymentRule::WinnerPay { k } => format!("price{k}"),
            PaymentRule::AllPay => "allpay".into(),
        };
        format!("{vs}_{}p_{rule}", self.n_players)
    }

    pub fn grid_upper(&self) -> f64 {
        self.bid_upper.unwrap_or(match self.value_structure {
            ValueStructure::Affiliated => 2.0,
            _ => 1.5,
        })
    }

    pub fn value(&self, state: &[f64], player: usize) -> f64 {
        let n = self.n_players;
        match self.value_structure {
            ValueStructure::Ipv => state[player],
            ValueStructure::Common => state[n],
            ValueStructure::Affiliated => state[n] + state[..n].iter().sum::<f64>() / n as f64,
            ValueStructure::Complete | ValueStructure::Asymmetric => state[0],
        }
    }

    fn state_len(&self) -> usize {
        match self.value_structure {
            ValueStructure::Ipv => self.n_players,
            ValueStructure::Common | ValueStructure::Affiliated => self.n_players + 1,
            ValueStructure::Complete | ValueStructure::Asymmetric => 1,
        }
    }
}

/// Finds `x` in `[0, 1]` near `guess` with `combine(x) == target`, stepping
/// one ulp at a time. Returns `None` if no such `x` lies within a few ulps.
fn solve_exact(guess: f64, target: f64, combine: impl Fn(f64) -> f64) -> Option<f64> {
    let ok = |x: f64| (0.0..=1.0).contains(&x) && combine(x) == target;
    let mut up = guess;
    let mut down = guess;
    for _ in 0..8 {
        if ok(up) {
            return Some(up);
        }
        if ok(down) {
            return Some(down);
        }
        up = up.next_up();
        down = down.next_down();
    }
    None
}

impl Game for Auction {
    fn n_players(&self) -> usize {
        self.n_players
    }

    fn obs_dim(&self, _player: usize) -> usize {
        1
    }

    fn action_dim(&self, _player: usize) -> usize {
        1
    }

    fn head(&self, _player: usize) -> OutputHead {
        OutputHead::absolute_value()
    }

    fn action_space(&self, _player: usize) -> ActionSpace {
        ActionSpace::Box {
            dims: 1,
            lo: 0.0,
            hi: self.grid_upper(),
        }
    }

    fn sample_state(&self, stream: &mut RngStream) -> Vec<f64> {
        (0..self.state_len()).map(|_| stream.next_f64()).collect()
    }

    fn observe(&self, state: &[f64], player: usize) -> Vec<f64> {
        let n = self.n_players;
        let o = match self.value_structure {
            ValueStructure::Ipv => state[player],
            ValueStructure::Common => state[player] * state[n],
            ValueStructure::Affiliated => state[player] + state[n],
            ValueStructure::Complete => state[0],
            ValueStructure::Asymmetric => {
                if player == 0 {
                    state[0]
                } else {
                    0.0
                }
            }
        };
        vec![o]
    }

    fn sample_state_given_obs(&self, player: usize, observation: &[f64], stream: &mut RngStream) -> Vec<f64> {
        let n = self.n_players;
        let o = observation[0];
        match self.value_structure {
            ValueStructure::Ipv => {
                let mut state = self.sample_state(stream);
                state[player] = o;
                state
            }
            ValueStructure::Common => {
                let mut state: Vec<f64> = (0..=n).map(|_| stream.next_f64()).collect();
                if o <= 0.0 {
                    // o = 0 pins w_i = 0 almost surely; the common value stays uniform.
                    state[player] = 0.0;
                    return state;
                }
                // w_{n+1} = o^z has density proportional to 1/w on [o, 1].
                let z = stream.next_f64();
                let mut common = o.powf(z);
                loop {
                    let own = (o / common).min(1.0);
                    if let Some(own) = solve_exact(own, o, |x| x * common) {
                        state[player] = own;
                        state[n] = common;
                        return state;
                    }
                    common = common.next_down().max(o);
                }
            }
            ValueStructure::Affiliated => {
                let mut state: Vec<f64> = (0..=n).map(|_| stream.next_f64()).collect();
                let lo = (o - 1.0).max(0.0);
                let hi = o.min(1.0);
                let mut common = stream.uniform_unchecked(lo, hi);
                loop {
                    if let Some(own) = solve_exact(o - common, o, |x| x + common) {
                        state[player] = own;
                        state[n] = common;
                        return state;
                    }
                    common = common.next_down().max(lo);
                }
            }
            ValueStructure::Complete => vec![o],
            ValueStructure::Asymmetric => {
                if player == 0 {
                    vec![o]
                } else {
                    vec![stream.next_f64()]
                }
            }
        }
    }

    fn payoff_into(&self, state: &[f64], actions: &[Vec<f64>], stream: &mut RngStream, out: &mut [f64]) {
        let n = self.n_players;
        let winner = argmax_fair(actions.iter().map(|a| a[0]), stream);
        match self.payment_rule {
            PaymentRule::WinnerPay { k } => {
                let price = if k == 1 {
                    actions[winner][0]
                } else {
                    let mut bids: Vec<f64> = actions.iter().map(|a| a[0]).collect();
                    bids.sort_by(|a, b| b.total_cmp(a));
                    bids[k - 1]
                };
                for (i, r) in out.iter_mut().enumerate().take(n) {
                    *r = if i == winner { self.value(state, i) - price } else { 0.0 };
                }
            }
            PaymentRule::AllPay => {
                for (i, r) in out.iter_mut().enumerate().take(n) {
                    let win = if i == winner { self.value(state, i) } else { 0.0 };
                    *r = win - actions[i][0];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::seed_stream;
    use proptest::prelude::*;

    fn all_structures() -> Vec<Auction> {
        vec![
            Auction::new(3, ValueStructure::Ipv, PaymentRule::WinnerPay { k: 1 }),
            Auction::new(3, ValueStructure::Common, PaymentRule::WinnerPay { k: 2 }),
            Auction::new(2, ValueStructure::Affiliated, PaymentRule::WinnerPay { k: 1 }),
            Auction::new(2, ValueStructure::Complete, PaymentRule::AllPay),
            Auction::new(2, ValueStructure::Asymmetric, PaymentRule::WinnerPay { k: 1 }),
        ]
    }

    #[test]
    fn state_shapes() {
        let mut s = seed_stream(0, 0);
        let complete = Auction::new(2, ValueStructure::Complete, PaymentRule::AllPay);
        let st = complete.sample_state(&mut s);
        assert_eq!(st.len(), 1);
        assert!((0.0..=1.0).contains(&st[0]));
        let ipv = Auction::new(2, ValueStructure::Ipv, PaymentRule::WinnerPay { k: 1 });
        let st = ipv.sample_state(&mut s);
        assert_eq!(st.len(), 2);
        assert!(st.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn observations_follow_value_structure() {
        let asym = Auction::new(2, ValueStructure::Asymmetric, PaymentRule::WinnerPay { k: 1 });
        assert_eq!(asym.observe(&[0.7], 1), vec![0.0]);
        assert_eq!(asym.observe(&[0.7], 0), vec![0.7]);
        let common = Auction::new(2, ValueStructure::Common, PaymentRule::WinnerPay { k: 1 });
        assert!((common.observe(&[0.5, 0.9, 0.4], 0)[0] - 0.2).abs() < 1e-15);
        let aff = Auction::new(2, ValueStructure::Affiliated, PaymentRule::WinnerPay { k: 1 });
        assert!((aff.observe(&[0.5, 0.9, 0.4], 0)[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn common_conditional_uses_power_rule() {
        // With z = 0.5 and o = 0.25: w_{n+1} = 0.5, w_i = 0.5.
        let o: f64 = 0.25;
        let common = o.powf(0.5);
        assert_eq!(common, 0.5);
        assert_eq!(o / common, 0.5);
    }

    #[test]
    fn affiliated_conditional_bounds() {
        let aff = Auction::new(2, ValueStructure::Affiliated, PaymentRule::WinnerPay { k: 1 });
        let mut s = seed_stream(3, 0);
        for _ in 0..10_000 {
            let st = aff.sample_state_given_obs(0, &[1.5], &mut s);
            assert!((0.5..=1.0).contains(&st[2]), "{st:?}");
            assert_eq!(aff.observe(&st, 0), vec![1.5]);
        }
    }

    #[test]
    fn common_conditional_density_is_reciprocal() {
        // P(w_{n+1} <= t | o) = 1 - ln t / ln o on [o, 1].
        let g = Auction::new(3, ValueStructure::Common, PaymentRule::WinnerPay { k: 2 });
        let mut s = seed_stream(4, 0);
        let o: f64 = 0.2;
        let n = 100_000;
        let t: f64 = 0.5;
        let below = (0..n)
            .filter(|_| g.sample_state_given_obs(1, &[o], &mut s)[3] <= t)
            .count() as f64
            / n as f64;
        let want = 1.0 - t.ln() / o.ln();
        assert!((below - want).abs() < 0.006, "{below} vs {want}");
    }

    #[test]
    fn rule_examples() {
        let mut s = seed_stream(0, 0);
        let allpay = Auction::new(2, ValueStructure::Complete, PaymentRule::AllPay);
        let r = allpay.payoff(&[1.0], &[vec![0.3], vec![0.7]], &mut s);
        assert!((r[0] + 0.3).abs() < 1e-15 && (r[1] - 0.3).abs() < 1e-15);

        let second = Auction::new(3, ValueStructure::Ipv, PaymentRule::WinnerPay { k: 2 });
        let r = second.payoff(&[0.9, 0.5, 0.1], &[vec![0.8], vec![0.4], vec![0.1]], &mut s);
        assert_eq!(r, vec![0.9 - 0.4, 0.0, 0.0]);
    }

    #[test]
    fn zero_bids_split_value_on_average() {
        let g = Auction::new(2, ValueStructure::Complete, PaymentRule::WinnerPay { k: 1 });
        let mut s = seed_stream(8, 0);
        let n = 100_000;
        let total: f64 = (0..n).map(|_| g.payoff(&[0.6], &[vec![0.0], vec![0.0]], &mut s)[0]).sum();
        assert!((total / n as f64 - 0.3).abs() < 0.005);
    }

    #[test]
    fn validation_rejects_bad_k_and_asymmetric_variants() {
        assert!(Auction::new(2, ValueStructure::Ipv, PaymentRule::WinnerPay { k: 3 }).validate().is_err());
        assert!(Auction::new(2, ValueStructure::Ipv, PaymentRule::WinnerPay { k: 0 }).validate().is_err());
        assert!(Auction::new(3, ValueStructure::Asymmetric, PaymentRule::WinnerPay { k: 1 }).validate().is_err());
        assert!(Auction::new(2, ValueStructure::Asymmetric, PaymentRule::AllPay).validate().is_err());
        for g in all_structures() {
            g.validate().unwrap();
        }
    }

    proptest! {
        #[test]
        fn conditional_sampling_reproduces_observation(seed in any::<u64>(), player in 0usize..2) {
            let mut s = seed_stream(seed, 0);
            for g in all_structures() {
                let p = player.min(g.n_players - 1);
                let state = g.sample_state(&mut s);
                let o = g.observe(&state, p);
                let back = g.sample_state_given_obs(p, &o, &mut s);
                prop_assert_eq!(g.observe(&back, p), o);
                prop_assert!(back.iter().all(|x| (0.0..=1.0).contains(x)));
            }
        }

        #[test]
        fn all_pay_payments_equal_bids(bids in prop::collection::vec(0.0f64..1.5, 3), w in 0.0f64..1.0, seed in any::<u64>()) {
            let g = Auction::new(3, ValueStructure::Ipv, PaymentRule::AllPay);
            let state = [w, w, w];
            let actions: Vec<Vec<f64>> = bids.iter().map(|&b| vec![b]).collect();
            let r = g.payoff(&state, &actions, &mut seed_stream(seed, 0));
            // Exactly one winner collects w; everybody pays.
            let paid: f64 = w - r.iter().sum::<f64>();
            prop_assert!((paid - bids.iter().sum::<f64>()).abs() < 1e-12);
        }

        #[test]
        fn first_price_winner_pays_own_bid(bids in prop::collection::vec(0.0f64..1.5, 2), w in prop::collection::vec(0.0f64..1.0, 2), seed in any::<u64>()) {
            let g = Auction::new(2, ValueStructure::Ipv, PaymentRule::WinnerPay { k: 1 });
            let actions: Vec<Vec<f64>> = bids.iter().map(|&b| vec![b]).collect();
            let r = g.payoff(&w, &actions, &mut seed_stream(seed, 0));
            let winners: Vec<usize> = (0..2).filter(|&i| r[i] != 0.0 || bids[i] == w[i]).collect();
            for i in winners {
                if r[i] != 0.0 {
                    prop_assert_eq!(r[i], w[i] - bids[i]);
                }
            }
        }
    }
}
