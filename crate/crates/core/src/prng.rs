//! Seedable, splittable random streams.
//!
//! Every stream is a ChaCha8 keystream selected by `(seed, stream_id)`: the
//! seed fixes the key and the stream id picks one of 2^64 independent
//! nonces. Child streams are derived by hashing a key path into a new stream
//! id, so any party holding the master seed can regenerate any other
//! party's draws without communication.
//!
//! Normal variates use the Marsaglia polar method on 53-bit uniforms. The
//! only transcendental involved is `f64::ln`; `sqrt` is correctly rounded.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes `key` into `base`; order sensitive.
fn mix(base: u64, key: u64) -> u64 {
    splitmix64(base.rotate_left(17) ^ splitmix64(key))
}

#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream_id: u64,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            rng,
            seed,
            stream_id,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream keyed by this stream's identity and `path`.
    ///
    /// Derivation ignores how many values have been drawn from `self`.
    pub fn derive(&self, path: &[u64]) -> RngStream {
        let id = path.iter().fold(self.stream_id, |acc, &k| mix(acc, k));
        RngStream::new(self.seed, id)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(self.uniform_unchecked(lo, hi))
    }

    /// Same as [`uniform`](Self::uniform) for callers that already know `lo <= hi`.
    pub fn uniform_unchecked(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_f64();
        (lo + (hi - lo) * u).min(hi)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire's multiply-shift; the bias is below 2^-40 for our n.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * factor);
                return u * factor;
            }
        }
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.normal();
        }
    }

    pub fn standard_normal(&mut self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.fill_normal(&mut out);
        out
    }
}

pub fn seed_stream(seed: u64, stream_id: u64) -> RngStream {
    RngStream::new(seed, stream_id)
}

pub fn standard_normal(stream: &mut RngStream, n: usize) -> Vec<f64> {
    stream.standard_normal(n)
}

pub fn uniform(stream: &mut RngStream, lo: f64, hi: f64) -> Result<f64> {
    stream.uniform(lo, hi)
}
