//! Randomized policy networks.
//!
//! A policy maps `(observation, noise)` to an action through a feedforward
//! network with ELU hidden layers and a game-specific output head. With
//! `noise_dim = 0` the policy is a deterministic function of the observation.
//!
//! Parameter layout: layers in input-to-output order; each layer stores its
//! weight matrix row-major as `[fan_out][fan_in]`, followed by its `fan_out`
//! biases. Perturbation vectors and checkpoints index into this layout.

use std::ops::{Deref, DerefMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    SoftmaxScaled,
    AbsoluteValue,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSource {
    Constant(f64),
    FromObservation(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputHead {
    pub kind: HeadKind,
    pub scale: ScaleSource,
    /// Componentwise clamp applied after the head, if any.
    #[serde(default)]
    pub clamp: Option<(f64, f64)>,
}

impl OutputHead {
    pub fn softmax(scale: ScaleSource) -> Self {
        OutputHead {
            kind: HeadKind::SoftmaxScaled,
            scale,
            clamp: None,
        }
    }

    pub fn absolute_value() -> Self {
        OutputHead {
            kind: HeadKind::AbsoluteValue,
            scale: ScaleSource::Constant(1.0),
            clamp: None,
        }
    }

    pub fn identity() -> Self {
        OutputHead {
            kind: HeadKind::Identity,
            scale: ScaleSource::Constant(1.0),
            clamp: None,
        }
    }

    pub fn clamped(mut self, lo: f64, hi: f64) -> Self {
        self.clamp = Some((lo, hi));
        self
    }

    fn scale_for(&self, observation: &[f64]) -> f64 {
        match self.scale {
            ScaleSource::Constant(c) => c,
            ScaleSource::FromObservation(i) => observation[i],
        }
    }

    fn apply(&self, observation: &[f64], out: &mut [f64]) {
        match self.kind {
            HeadKind::SoftmaxScaled => {
                let scale = self.scale_for(observation);
                let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for x in out.iter_mut() {
                    *x = (*x - max).exp();
                    total += *x;
                }
                for x in out.iter_mut() {
                    *x = scale * *x / total;
                }
            }
            HeadKind::AbsoluteValue => {
                let scale = self.scale_for(observation);
                for x in out.iter_mut() {
                    *x = scale * x.abs();
                }
            }
            HeadKind::Identity => {}
        }
        if let Some((lo, hi)) = self.clamp {
            for x in out.iter_mut() {
                *x = x.clamp(lo, hi);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyArchitecture {
    pub obs_dim: usize,
    pub noise_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub action_dim: usize,
    pub head: OutputHead,
}

impl PolicyArchitecture {
    pub fn input_dim(&self) -> usize {
        self.obs_dim + self.noise_dim
    }

    /// `(fan_in, fan_out)` for each affine layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers.len() + 2);
        dims.push(self.input_dim());
        dims.extend(&self.hidden_layers);
        dims.push(self.action_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|&(fan_in, fan_out)| fan_in * fan_out + fan_out)
            .sum()
    }
}

pub fn param_count(arch: &PolicyArchitecture) -> usize {
    arch.param_count()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Deref for ParamVector {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

/// Zero biases; weights `N(0, 2 / fan_in)`.
pub fn he_init(arch: &PolicyArchitecture, stream: &mut RngStream) -> ParamVector {
    let mut params = Vec::with_capacity(arch.param_count());
    for (fan_in, fan_out) in arch.layer_shapes() {
        let std = (2.0 / fan_in as f64).sqrt();
        for _ in 0..fan_in * fan_out {
            params.push(std * stream.normal());
        }
        params.extend(std::iter::repeat_n(0.0, fan_out));
    }
    ParamVector(params)
}

fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

pub fn forward(
    arch: &PolicyArchitecture,
    params: &[f64],
    observation: &[f64],
    noise: &[f64],
) -> Result<Vec<f64>> {
    if params.len() != arch.param_count() {
        return Err(Error::DimensionMismatch {
            what: "params",
            expected: arch.param_count(),
            got: params.len(),
        });
    }
    if observation.len() != arch.obs_dim {
        return Err(Error::DimensionMismatch {
            what: "observation",
            expected: arch.obs_dim,
            got: observation.len(),
        });
    }
    if noise.len() != arch.noise_dim {
        return Err(Error::DimensionMismatch {
            what: "noise",
            expected: arch.noise_dim,
            got: noise.len(),
        });
    }
    Ok(forward_unchecked(arch, params, observation, noise))
}

pub(crate) fn forward_unchecked(
    arch: &PolicyArchitecture,
    params: &[f64],
    observation: &[f64],
    noise: &[f64],
) -> Vec<f64> {
    let mut input: Vec<f64> = observation.iter().chain(noise).copied().collect();
    let shapes = arch.layer_shapes();
    let last = shapes.len() - 1;
    let mut offset = 0;
    for (layer, &(fan_in, fan_out)) in shapes.iter().enumerate() {
        let weights = &params[offset..offset + fan_in * fan_out];
        let biases = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        offset += fan_in * fan_out + fan_out;
        let mut out: Vec<f64> = biases.to_vec();
        for (row, o) in weights.chunks_exact(fan_in.max(1)).zip(out.iter_mut()) {
            if fan_in > 0 {
                *o += row.iter().zip(&input).map(|(w, x)| w * x).sum::<f64>();
            }
        }
        if layer != last {
            out.iter_mut().for_each(|x| *x = elu(*x));
        }
        input = out;
    }
    arch.head.apply(observation, &mut input);
    input
}

/// Anything that maps an observation to a (possibly random) action.
pub trait Strategy: Send + Sync {
    fn act(&self, observation: &[f64], stream: &mut RngStream) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub arch: PolicyArchitecture,
    pub params: ParamVector,
}

impl Policy {
    pub fn new(arch: PolicyArchitecture, params: ParamVector) -> Result<Self> {
        if params.len() != arch.param_count() {
            return Err(Error::DimensionMismatch {
                what: "params",
                expected: arch.param_count(),
                got: params.len(),
            });
        }
        Ok(Policy { arch, params })
    }

    pub fn he_init(arch: PolicyArchitecture, stream: &mut RngStream) -> Self {
        let params = he_init(&arch, stream);
        Policy { arch, params }
    }

    pub fn forward(&self, observation: &[f64], noise: &[f64]) -> Result<Vec<f64>> {
        forward(&self.arch, &self.params, observation, noise)
    }

    /// Forward pass with externally supplied parameters of the same layout.
    pub(crate) fn act_with(&self, params: &[f64], observation: &[f64], stream: &mut RngStream) -> Vec<f64> {
        let noise = stream.standard_normal(self.arch.noise_dim);
        forward_unchecked(&self.arch, params, observation, &noise)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let policy: Policy = serde_json::from_str(&text)?;
        Policy::new(policy.arch, policy.params)
    }
}

impl Strategy for Policy {
    fn act(&self, observation: &[f64], stream: &mut RngStream) -> Vec<f64> {
        self.act_with(&self.params, observation, stream)
    }
}

pub fn sample_action(
    arch: &PolicyArchitecture,
    params: &[f64],
    observation: &[f64],
    stream: &mut RngStream,
) -> Result<Vec<f64>> {
    let noise = stream.standard_normal(arch.noise_dim);
    forward(arch, params, observation, &noise)
}
