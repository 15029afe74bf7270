//! Known equilibria of the benchmark games, as samplers.
//!
//! Plugged into the evaluator these profiles should have NashConv close to
//! zero; learned strategies can be compared against their distributions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::games::{Auction, Blotto, Chopstick, GameSpec, PaymentRule, ValueStructure, Visibility};
use crate::policy::Strategy;
use crate::prng::RngStream;

/// `(n-1)/n * o^n`, symmetric all-pay with independent private values.
pub fn allpay_ipv_bid(n: usize, o: f64) -> f64 {
    (n as f64 - 1.0) / n as f64 * o.powi(n as i32)
}

/// `(n-1)/(n+1-k) * o`, symmetric kth-price winner-pay with independent
/// private values.
pub fn kth_price_ipv_bid(n: usize, k: usize, o: f64) -> f64 {
    (n as f64 - 1.0) / (n as f64 + 1.0 - k as f64) * o
}

/// `o / (2 + o/2)`, 3-player second-price with common values.
pub fn common_values_3p_2nd_bid(o: f64) -> f64 {
    o / (2.0 + 0.5 * o)
}

/// Two-player affiliated values: `2o/3` at first price, `o` at second.
pub fn affiliated_2p_bid(k: usize, o: f64) -> Result<f64> {
    match k {
        1 => Ok(2.0 / 3.0 * o),
        2 => Ok(o),
        _ => Err(Error::config("k", "affiliated equilibrium is known for k = 1 or 2")),
    }
}

/// Uniform on `[0, v]`, complete-information all-pay.
pub fn complete_allpay_bid(v: f64, stream: &mut RngStream) -> f64 {
    v * stream.next_f64()
}

/// Player 0 sees the value and bids half of it; player 1 sees nothing and
/// bids uniformly on `[0, 1/2]`.
pub fn asymmetric_bid(player: usize, o: f64, stream: &mut RngStream) -> f64 {
    if player == 0 {
        0.5 * o
    } else {
        0.5 * stream.next_f64()
    }
}

/// Density `1/(1-x)` on `[0, 1 - 1/e]`, by inversion: `x = 1 - e^{-u}`.
pub fn visibility_point(stream: &mut RngStream) -> f64 {
    let u = stream.next_f64();
    -(-u).exp_m1()
}

pub const TETRAHEDRON: [[f64; 3]; 4] = [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [0.0, 0.0, 0.0]];

/// Uniform on the surface of [`TETRAHEDRON`]: a face uniformly (all four are
/// congruent), then a uniform point in it.
pub fn chopstick_point(stream: &mut RngStream) -> [f64; 3] {
    let skip = stream.below(4);
    let mut face = TETRAHEDRON.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, v)| v);
    let (a, b, c) = (face.next().unwrap(), face.next().unwrap(), face.next().unwrap());
    let s = stream.next_f64().sqrt();
    let r = stream.next_f64();
    let (wa, wb, wc) = (1.0 - s, s * (1.0 - r), s * r);
    std::array::from_fn(|k| wa * a[k] + wb * b[k] + wc * c[k])
}

/// Symmetric three-battlefield Blotto equilibrium. A point uniform on the
/// hemisphere over the incircle of the budget triangle
/// `{x >= 0, sum(x) = b}` is dropped onto the triangle; the allocation is
/// the point's barycentric split of `b`, i.e. the point itself.
pub fn blotto_hemisphere_point(budget: f64, stream: &mut RngStream) -> [f64; 3] {
    let (x, y) = loop {
        let g = [stream.normal(), stream.normal(), stream.normal()];
        let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        if norm > 0.0 {
            break (g[0] / norm, g[1] / norm);
        }
    };
    let r = budget / 6f64.sqrt();
    let u1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let u2 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    let mut p: [f64; 3] = std::array::from_fn(|k| budget / 3.0 + r * (x * u1[k] + y * u2[k]));
    // Boundary points can land a rounding error below zero.
    p.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|v| *v *= budget / total);
    }
    p
}

/// One player's equilibrium strategy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticStrategy {
    AllPayIpv { n: usize },
    KthPriceIpv { n: usize, k: usize },
    CommonSecondPrice3p,
    Affiliated { k: usize },
    CompleteAllPay,
    Asymmetric { player: usize },
    Visibility,
    Chopstick,
    BlottoHemisphere { budget: f64 },
}

impl Strategy for AnalyticStrategy {
    fn act(&self, obs: &[f64], stream: &mut RngStream) -> Vec<f64> {
        let o = obs.first().copied().unwrap_or(0.0);
        match *self {
            AnalyticStrategy::AllPayIpv { n } => vec![allpay_ipv_bid(n, o)],
            AnalyticStrategy::KthPriceIpv { n, k } => vec![kth_price_ipv_bid(n, k, o)],
            AnalyticStrategy::CommonSecondPrice3p => vec![common_values_3p_2nd_bid(o)],
            AnalyticStrategy::Affiliated { k } => vec![if k == 1 { 2.0 / 3.0 * o } else { o }],
            AnalyticStrategy::CompleteAllPay => vec![complete_allpay_bid(o, stream)],
            AnalyticStrategy::Asymmetric { player } => vec![asymmetric_bid(player, o, stream)],
            AnalyticStrategy::Visibility => vec![visibility_point(stream)],
            AnalyticStrategy::Chopstick => chopstick_point(stream).to_vec(),
            AnalyticStrategy::BlottoHemisphere { budget } => blotto_hemisphere_point(budget, stream).to_vec(),
        }
    }
}

/// A game together with a known equilibrium of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnalyticProfile {
    AllPayIpv2p,
    AllPayIpv3p,
    FirstPriceIpv2p,
    SecondPriceIpv2p,
    SecondPriceIpv3p,
    CommonSecondPrice3p,
    AffiliatedFirstPrice2p,
    AffiliatedSecondPrice2p,
    CompleteAllPay2p,
    Asymmetric,
    Visibility,
    Chopstick,
    Blotto,
}

impl AnalyticProfile {
    pub const ALL: [AnalyticProfile; 13] = [
        AnalyticProfile::AllPayIpv2p,
        AnalyticProfile::AllPayIpv3p,
        AnalyticProfile::FirstPriceIpv2p,
        AnalyticProfile::SecondPriceIpv2p,
        AnalyticProfile::SecondPriceIpv3p,
        AnalyticProfile::CommonSecondPrice3p,
        AnalyticProfile::AffiliatedFirstPrice2p,
        AnalyticProfile::AffiliatedSecondPrice2p,
        AnalyticProfile::CompleteAllPay2p,
        AnalyticProfile::Asymmetric,
        AnalyticProfile::Visibility,
        AnalyticProfile::Chopstick,
        AnalyticProfile::Blotto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnalyticProfile::AllPayIpv2p => "allpay_ipv_2p",
            AnalyticProfile::AllPayIpv3p => "allpay_ipv_3p",
            AnalyticProfile::FirstPriceIpv2p => "first_price_ipv_2p",
            AnalyticProfile::SecondPriceIpv2p => "second_price_ipv_2p",
            AnalyticProfile::SecondPriceIpv3p => "second_price_ipv_3p",
            AnalyticProfile::CommonSecondPrice3p => "common_second_price_3p",
            AnalyticProfile::AffiliatedFirstPrice2p => "affiliated_first_price_2p",
            AnalyticProfile::AffiliatedSecondPrice2p => "affiliated_second_price_2p",
            AnalyticProfile::CompleteAllPay2p => "complete_allpay_2p",
            AnalyticProfile::Asymmetric => "asymmetric",
            AnalyticProfile::Visibility => "visibility",
            AnalyticProfile::Chopstick => "chopstick",
            AnalyticProfile::Blotto => "blotto",
        }
    }

    pub fn game(self) -> GameSpec {
        use PaymentRule::{AllPay, WinnerPay};
        use ValueStructure::*;
        let auction = |n, vs, rule| GameSpec::Auction(Auction::new(n, vs, rule));
        match self {
            AnalyticProfile::AllPayIpv2p => auction(2, Ipv, AllPay),
            AnalyticProfile::AllPayIpv3p => auction(3, Ipv, AllPay),
            AnalyticProfile::FirstPriceIpv2p => auction(2, Ipv, WinnerPay { k: 1 }),
            AnalyticProfile::SecondPriceIpv2p => auction(2, Ipv, WinnerPay { k: 2 }),
            AnalyticProfile::SecondPriceIpv3p => auction(3, Ipv, WinnerPay { k: 2 }),
            AnalyticProfile::CommonSecondPrice3p => auction(3, Common, WinnerPay { k: 2 }),
            AnalyticProfile::AffiliatedFirstPrice2p => auction(2, Affiliated, WinnerPay { k: 1 }),
            AnalyticProfile::AffiliatedSecondPrice2p => auction(2, Affiliated, WinnerPay { k: 2 }),
            AnalyticProfile::CompleteAllPay2p => auction(2, Complete, AllPay),
            AnalyticProfile::Asymmetric => auction(2, ValueStructure::Asymmetric, WinnerPay { k: 1 }),
            AnalyticProfile::Visibility => GameSpec::Visibility(Visibility::default()),
            AnalyticProfile::Chopstick => GameSpec::Chopstick(Chopstick {}),
            AnalyticProfile::Blotto => GameSpec::Blotto(Blotto::symmetric(2, 3)),
        }
    }

    pub fn strategies(self) -> Vec<AnalyticStrategy> {
        let n = match self.game() {
            GameSpec::Auction(a) => a.n_players,
            _ => 2,
        };
        (0..n)
            .map(|player| match self {
                AnalyticProfile::AllPayIpv2p | AnalyticProfile::AllPayIpv3p => AnalyticStrategy::AllPayIpv { n },
                AnalyticProfile::FirstPriceIpv2p => AnalyticStrategy::KthPriceIpv { n, k: 1 },
                AnalyticProfile::SecondPriceIpv2p | AnalyticProfile::SecondPriceIpv3p => {
                    AnalyticStrategy::KthPriceIpv { n, k: 2 }
                }
                AnalyticProfile::CommonSecondPrice3p => AnalyticStrategy::CommonSecondPrice3p,
                AnalyticProfile::AffiliatedFirstPrice2p => AnalyticStrategy::Affiliated { k: 1 },
                AnalyticProfile::AffiliatedSecondPrice2p => AnalyticStrategy::Affiliated { k: 2 },
                AnalyticProfile::CompleteAllPay2p => AnalyticStrategy::CompleteAllPay,
                AnalyticProfile::Asymmetric => AnalyticStrategy::Asymmetric { player },
                AnalyticProfile::Visibility => AnalyticStrategy::Visibility,
                AnalyticProfile::Chopstick => AnalyticStrategy::Chopstick,
                AnalyticProfile::Blotto => AnalyticStrategy::BlottoHemisphere { budget: 1.0 },
            })
            .collect()
    }
}

impl fmt::Display for AnalyticProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnalyticProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnalyticProfile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownAnalytic(s.to_string()))
    }
}
