//! Smoothed zeroth-order pseudogradients.
//!
//! Every stencil has the form `(1 / (sigma N)) * sum_i a_i u_i` with
//! directions `u_i` drawn from the smoothing distribution:
//!
//! * single point: `a_i = f(x + sigma u_i)`
//! * forward:      `a_i = f(x + sigma u_i) - f(x)`
//! * central:      `a_i = (f(x + sigma u_i) - f(x - sigma u_i)) / 2`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    /// `N(0, I_d)`.
    Gaussian,
    /// Uniform on the sphere of radius `sqrt(d)`.
    Ball,
    /// Uniform on `{-1, 1}^d`.
    Rademacher,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    SinglePoint,
    Forward,
    Central,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub smoothing: Smoothing,
    pub stencil: Stencil,
    pub sigma: f64,
    pub n_samples: usize,
    /// Evaluate both sides of a difference on identical episode randomness.
    pub common_random_numbers: bool,
    /// Episodes averaged per utility evaluation.
    pub episodes_per_eval: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            smoothing: Smoothing::Gaussian,
            stencil: Stencil::Central,
            sigma: 1e-2,
            n_samples: 1,
            common_random_numbers: true,
            episodes_per_eval: 1,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::config("estimator.sigma", "must be a positive finite number"));
        }
        if self.n_samples < 1 {
            return Err(Error::config("estimator.n_samples", "must be at least 1"));
        }
        if self.episodes_per_eval < 1 {
            return Err(Error::config("estimator.episodes_per_eval", "must be at least 1"));
        }
        Ok(())
    }
}

pub fn perturbation(smoothing: Smoothing, dim: usize, stream: &mut RngStream) -> Vec<f64> {
    match smoothing {
        Smoothing::Gaussian => stream.standard_normal(dim),
        Smoothing::Ball => {
            let mut u = stream.standard_normal(dim);
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = (dim as f64).sqrt() / norm;
            u.iter_mut().for_each(|x| *x *= scale);
            u
        }
        Smoothing::Rademacher => (0..dim)
            .map(|_| if stream.coin() { 1.0 } else { -1.0 })
            .collect(),
    }
}

/// The scalar `a_i / sigma` for one direction; `f0` caches `f(x)` for the
/// forward stencil. `f` receives the point and a fresh episode stream.
pub(crate) fn stencil_delta<F>(
    f: &mut F,
    x: &[f64],
    u: &[f64],
    sigma: f64,
    stencil: Stencil,
    crn: bool,
    episode: &RngStream,
    f0: &mut Option<f64>,
) -> f64
where
    F: FnMut(&[f64], &mut RngStream) -> f64,
{
    let shifted = |sign: f64| -> Vec<f64> { x.iter().zip(u).map(|(xi, ui)| xi + sign * sigma * ui).collect() };
    match stencil {
        Stencil::SinglePoint => f(&shifted(1.0), &mut episode.clone()) / sigma,
        Stencil::Forward => {
            let plus = f(&shifted(1.0), &mut episode.clone());
            let base = *f0.get_or_insert_with(|| f(x, &mut episode.derive(&[1])));
            (plus - base) / sigma
        }
        Stencil::Central => {
            let plus = f(&shifted(1.0), &mut episode.clone());
            let mut minus_stream = if crn { episode.clone() } else { episode.derive(&[2]) };
            let minus = f(&shifted(-1.0), &mut minus_stream);
            (plus - minus) / (2.0 * sigma)
        }
    }
}

/// Estimates the gradient of `E_u f(x + sigma u)`.
///
/// `f` is a stochastic evaluator: it gets the query point and a stream for
/// its own randomness (episode sampling). The result is a pure function of
/// `stream`'s state.
pub fn smoothed_pseudogradient<F>(mut f: F, x: &[f64], cfg: &EstimatorConfig, stream: &mut RngStream) -> Vec<f64>
where
    F: FnMut(&[f64], &mut RngStream) -> f64,
{
    let mut grad = vec![0.0; x.len()];
    let mut f0 = None;
    // The forward stencil shares one f(x) across samples, drawn from a fixed child.
    let key = stream.next_u64();
    let base_episode = stream.derive(&[key]);
    for sample in 0..cfg.n_samples {
        let u = perturbation(cfg.smoothing, x.len(), stream);
        let episode = if cfg.stencil == Stencil::Forward && sample == 0 {
            base_episode.clone()
        } else {
            let key = stream.next_u64();
            stream.derive(&[key])
        };
        let delta = stencil_delta(&mut f, x, &u, cfg.sigma, cfg.stencil, cfg.common_random_numbers, &episode, &mut f0);
        for (g, ui) in grad.iter_mut().zip(&u) {
            *g += delta * ui;
        }
    }
    let n = cfg.n_samples as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    grad
}
