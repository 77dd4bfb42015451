//! Chunked Monte Carlo driver.
//!
//! Work is cut into fixed-size chunks; chunk `c` reads from the substream
//! `key.child(c)`. Chunk results are collected in chunk order and merged
//! sequentially, so the outcome is bit-identical for any thread count.

use rayon::prelude::*;

use crate::rng::{Stream, StreamKey};

/// Samples per work chunk. Changing it changes every seeded result.
pub const CHUNK: u64 = 1 << 15;

/// Streaming mean and variance (Welford), mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let nf = n as f64;
        self.mean += delta * other.n as f64 / nf;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / nf;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Runs `total` samples in chunks and returns one value per chunk, in order.
///
/// `body(stream, count)` must draw exactly what it needs from `stream`.
pub fn run_chunks<T, F>(total: u64, key: StreamKey, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Stream, u64) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(total - c * CHUNK);
            let mut stream = Stream::new(key.child(c));
            body(&mut stream, count)
        })
        .collect()
}

/// Accumulates `K` per-sample statistics over `total` samples.
///
/// `init` builds per-chunk scratch state; `sample` returns the `K` values of
/// one replicate.
pub fn sample_moments<const K: usize, S, I, F>(
    total: u64,
    key: StreamKey,
    init: I,
    sample: F,
) -> [Moments; K]
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut Stream) -> [f64; K] + Sync,
{
    let parts = run_chunks(total, key, |stream, count| {
        let mut state = init();
        let mut acc = [Moments::default(); K];
        for _ in 0..count {
            let vals = sample(&mut state, stream);
            for (a, v) in acc.iter_mut().zip(vals) {
                a.push(v);
            }
        }
        acc
    });
    let mut total_acc = [Moments::default(); K];
    for part in &parts {
        for (t, p) in total_acc.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total_acc
}

/// Counts events over `total` replicates; `trial` returns `K` indicators.
pub fn count_events<const K: usize, S, I, F>(
    total: u64,
    key: StreamKey,
    init: I,
    trial: F,
) -> [u64; K]
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut Stream) -> [bool; K] + Sync,
{
    let parts = run_chunks(total, key, |stream, count| {
        let mut state = init();
        let mut acc = [0u64; K];
        for _ in 0..count {
            for (a, hit) in acc.iter_mut().zip(trial(&mut state, stream)) {
                *a += hit as u64;
            }
        }
        acc
    });
    let mut out = [0u64; K];
    for part in &parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out
}

/// Like [`sample_moments`] with the number of statistics known at run time.
pub fn sample_moments_vec<S, I, F>(total: u64, key: StreamKey, k: usize, init: I, sample: F) -> Vec<Moments>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut Stream, &mut [f64]) + Sync,
{
    let parts = run_chunks(total, key, |stream, count| {
        let mut state = init();
        let mut acc = vec![Moments::default(); k];
        let mut vals = vec![0.0; k];
        for _ in 0..count {
            sample(&mut state, stream, &mut vals);
            for (a, &v) in acc.iter_mut().zip(&vals) {
                a.push(v);
            }
        }
        acc
    });
    let mut out = vec![Moments::default(); k];
    for part in &parts {
        for (t, p) in out.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    out
}

/// Like [`count_events`] with the number of indicators known at run time.
pub fn count_events_vec<S, I, F>(total: u64, key: StreamKey, k: usize, init: I, trial: F) -> Vec<u64>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut Stream, &mut [bool]) + Sync,
{
    let parts = run_chunks(total, key, |stream, count| {
        let mut state = init();
        let mut acc = vec![0u64; k];
        let mut hits = vec![false; k];
        for _ in 0..count {
            trial(&mut state, stream, &mut hits);
            for (a, &h) in acc.iter_mut().zip(&hits) {
                *a += h as u64;
            }
        }
        acc
    });
    let mut out = vec![0u64; k];
    for part in &parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out
}

/// Binomial standard error `sqrt(p(1-p)/n)` of a frequency `hits/n`.
pub fn binomial_se(hits: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = hits as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}
