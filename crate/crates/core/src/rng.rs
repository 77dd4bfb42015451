//! Counter-addressed random streams.
//!
//! Every draw is a pure function of a [`StreamKey`] and a position. The
//! generator is ChaCha8: the 256-bit cipher key is built from
//! `(seed, stream_id)`, the 64-bit ChaCha stream number is `substream_id`,
//! and positions are block offsets within that stream. Nothing is carried
//! between calls, so results do not depend on how work is split across
//! threads.
//!
//! Two access styles are offered:
//!
//! - indexed free functions ([`uniform01`], [`sample_frechet`], ...) where
//!   `index` selects a 64-byte ChaCha block, and
//! - a sequential [`Stream`] that walks a substream from the beginning and is
//!   what the Monte Carlo engine hands to each work chunk.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// 32-bit words per ChaCha block.
const WORDS_PER_BLOCK: u128 = 16;

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    /// Experiment-level stream.
    pub stream_id: u64,
    /// Replication-level substream.
    pub substream_id: u64,
}

impl StreamKey {
    pub const fn new(seed: u64, stream_id: u64, substream_id: u64) -> Self {
        Self {
            seed,
            stream_id,
            substream_id,
        }
    }

    pub const fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0, 0)
    }

    pub const fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    pub const fn with_substream(self, substream_id: u64) -> Self {
        Self {
            substream_id,
            ..self
        }
    }

    /// Derives the key of the `index`-th work unit below this key.
    ///
    /// The derived substream id is a bijective mix of `(substream_id, index)`
    /// for a fixed parent, so distinct chunks never share a stream.
    pub fn child(self, index: u64) -> Self {
        let base = splitmix64(self.substream_id ^ 0x6a09_e667_f3bc_c909);
        self.with_substream(base.wrapping_add(index))
    }

    fn cipher_seed(&self) -> [u8; 32] {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        bytes[16..24].copy_from_slice(&0x243f_6a88_85a3_08d3u64.to_le_bytes());
        bytes[24..].copy_from_slice(&0x1319_8a2e_0370_7344u64.to_le_bytes());
        bytes
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sequential reader over one substream.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    /// Opens the substream named by `key` at its first block.
    pub fn new(key: StreamKey) -> Self {
        let mut inner = ChaCha8Rng::from_seed(key.cipher_seed());
        inner.set_stream(key.substream_id);
        Self { inner }
    }

    /// Opens the substream named by `key` positioned at block `index`.
    pub fn at(key: StreamKey, index: u64) -> Self {
        let mut s = Self::new(key);
        s.inner.set_word_pos(index as u128 * WORDS_PER_BLOCK);
        s
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        loop {
            let bits = self.inner.next_u64() >> 11;
            if bits != 0 {
                return bits as f64 * (1.0 / (1u64 << 53) as f64);
            }
        }
    }

    /// Unit exponential.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        -self.uniform01().ln()
    }

    /// Unit Fréchet, `Φ(x) = exp(-1/x)`.
    #[inline]
    pub fn frechet(&mut self) -> f64 {
        -1.0 / self.uniform01().ln()
    }

    /// Fréchet with shape `alpha`: `P(W ≤ w) = exp(-w^{-alpha})`.
    #[inline]
    pub fn frechet_shape(&mut self, alpha: f64) -> f64 {
        self.exp1().powf(-1.0 / alpha)
    }

    #[inline]
    pub fn std_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Positive stable variate with Laplace transform `exp(-t^alpha)`,
    /// `0 < alpha < 1`, via the Chambers–Mallows–Stuck (Kanter) formula.
    ///
    /// The caller guarantees the range; see [`sample_positive_stable`] for the
    /// checked entry point.
    #[inline]
    pub fn positive_stable_unchecked(&mut self, alpha: f64) -> f64 {
        let u = PI * self.uniform01();
        let e = self.exp1();
        let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
        let b = (((1.0 - alpha) * u).sin() / e).powf((1.0 - alpha) / alpha);
        a * b
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

/// Uniform on (0,1) addressed by `(key, index)`.
pub fn uniform01(key: StreamKey, index: u64) -> f64 {
    Stream::at(key, index).uniform01()
}

/// Unit Fréchet addressed by `(key, index)`: `-1/ln U` with `U = uniform01(key, index)`.
pub fn sample_frechet(key: StreamKey, index: u64) -> f64 {
    frechet_from_uniform(uniform01(key, index))
}

/// Quantile transform of the unit Fréchet law.
#[inline]
pub fn frechet_from_uniform(u: f64) -> f64 {
    -1.0 / u.ln()
}

/// Positive stable variate of index `alpha_inv` addressed by `(key, index)`.
pub fn sample_positive_stable(alpha_inv: f64, key: StreamKey, index: u64) -> Result<f64> {
    if !(alpha_inv > 0.0 && alpha_inv < 1.0) {
        return Err(Error::invalid(format!(
            "positive stable index must lie in (0,1), got {alpha_inv}"
        )));
    }
    Ok(Stream::at(key, index).positive_stable_unchecked(alpha_inv))
}

/// Standard normal addressed by `(key, index)`.
pub fn sample_std_normal(key: StreamKey, index: u64) -> f64 {
    Stream::at(key, index).std_normal()
}
