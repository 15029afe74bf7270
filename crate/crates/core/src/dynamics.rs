//! Equilibrium-finding update rules. Every rule ascends each player's own
//! utility: `xi_i` is player `i`'s (pseudo)gradient of `u_i` with respect
//! to `x_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::ParamVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    Simultaneous,
    Extragradient,
    Optimistic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub kind: DynamicsKind,
    pub alpha: f64,
    /// Lookahead (extragradient) or correction (optimistic) weight; `alpha` if unset.
    #[serde(default)]
    pub beta: Option<f64>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            kind: DynamicsKind::Simultaneous,
            alpha: 1e-6,
            beta: None,
        }
    }
}

impl DynamicsConfig {
    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::config("dynamics.alpha", "must be a positive finite number"));
        }
        if !(self.beta() >= 0.0) || !self.beta().is_finite() {
            return Err(Error::config("dynamics.beta", "must be nonnegative"));
        }
        Ok(())
    }

    /// Gradient evaluations (message rounds) per iteration.
    pub fn phases(&self) -> usize {
        match self.kind {
            DynamicsKind::Extragradient => 2,
            _ => 1,
        }
    }
}

/// Per-player optimizer state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub alpha: f64,
    pub beta: f64,
    pub prev_grad: Option<Vec<f64>>,
    pub steps: u64,
}

impl OptimizerState {
    pub fn new(cfg: &DynamicsConfig) -> Self {
        OptimizerState {
            alpha: cfg.alpha,
            beta: cfg.beta(),
            prev_grad: None,
            steps: 0,
        }
    }

    /// Applies one update for `kind`. For extragradient, `grad` must already
    /// be the gradient at the extrapolated point.
    pub fn step(&mut self, kind: DynamicsKind, x: &mut [f64], grad: &[f64]) {
        match kind {
            DynamicsKind::Simultaneous | DynamicsKind::Extragradient => axpy(x, self.alpha, grad),
            DynamicsKind::Optimistic => {
                let prev = self.prev_grad.as_deref().unwrap_or(grad);
                for ((xi, g), p) in x.iter_mut().zip(grad).zip(prev) {
                    *xi += self.alpha * g + self.beta * (g - p);
                }
                self.prev_grad = Some(grad.to_vec());
            }
        }
        self.steps += 1;
    }
}

fn axpy(x: &mut [f64], a: f64, y: &[f64]) {
    for (xi, yi) in x.iter_mut().zip(y) {
        *xi += a * yi;
    }
}

fn check_dims(profile: &[ParamVector], grads: &[Vec<f64>]) -> Result<()> {
    if profile.len() != grads.len() {
        return Err(Error::DimensionMismatch {
            what: "players",
            expected: profile.len(),
            got: grads.len(),
        });
    }
    for (x, g) in profile.iter().zip(grads) {
        if x.len() != g.len() {
            return Err(Error::DimensionMismatch {
                what: "gradient",
                expected: x.len(),
                got: g.len(),
            });
        }
    }
    Ok(())
}

pub fn simultaneous_step(profile: &mut [ParamVector], grads: &[Vec<f64>], alpha: f64) -> Result<()> {
    check_dims(profile, grads)?;
    for (x, g) in profile.iter_mut().zip(grads) {
        axpy(x, alpha, g);
    }
    Ok(())
}

/// `x <- x + alpha * xi(x + beta * xi(x))`; calls `grad_fn` twice.
pub fn extragradient_step<F>(profile: &mut [ParamVector], mut grad_fn: F, alpha: f64, beta: f64) -> Result<()>
where
    F: FnMut(&[ParamVector]) -> Vec<Vec<f64>>,
{
    let g0 = grad_fn(profile);
    check_dims(profile, &g0)?;
    let mut lookahead = profile.to_vec();
    for (x, g) in lookahead.iter_mut().zip(&g0) {
        axpy(x, beta, g);
    }
    let g1 = grad_fn(&lookahead);
    simultaneous_step(profile, &g1, alpha)
}

/// `x <- x + alpha * xi_t + beta * (xi_t - xi_{t-1})`.
pub fn optimistic_step(
    profile: &mut [ParamVector],
    grads: &[Vec<f64>],
    prev_grads: &[Vec<f64>],
    alpha: f64,
    beta: f64,
) -> Result<()> {
    check_dims(profile, grads)?;
    check_dims(profile, prev_grads)?;
    for ((x, g), p) in profile.iter_mut().zip(grads).zip(prev_grads) {
        for ((xi, gi), pi) in x.iter_mut().zip(g).zip(p) {
            *xi += alpha * gi + beta * (gi - pi);
        }
    }
    Ok(())
}
