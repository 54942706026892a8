//! Reproducible Monte Carlo over independent ChaCha substreams.
//!
//! Work is cut into fixed-size chunks; chunk `i` always draws from stream
//! `i` of the seed, and results are reduced in chunk order. The output is
//! therefore independent of the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::Distribution;
use crate::error::{Error, Result};

pub const CHUNK: usize = 1 << 16;

/// The RNG for substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Split `n` draws into chunks and fold each chunk with `f(rng, len)`,
/// returning per-chunk results in chunk order.
pub fn chunked<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK.min(n - i * CHUNK);
            let mut rng = substream(seed, i as u64);
            f(&mut rng, len)
        })
        .collect()
}

/// `n` inverse-transform draws from `d`, deterministic in `seed`.
pub fn draw(d: &Distribution, seed: u64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    Ok(chunked(seed, n, |rng, len| (0..len).map(|_| d.draw(rng)).collect::<Vec<_>>()).concat())
}

/// Sums of (‖x − g(x)‖², ‖x‖²) over `n` draws from `d`, without storing them.
pub fn error_energy<G>(d: &Distribution, seed: u64, n: usize, g: G) -> (f64, f64)
where
    G: Fn(f64) -> f64 + Sync,
{
    chunked(seed, n, |rng, len| {
        let mut err = 0.0;
        let mut energy = 0.0;
        for _ in 0..len {
            let x = d.draw(rng);
            let e = x - g(x);
            err += e * e;
            energy += x * x;
        }
        (err, energy)
    })
    .into_iter()
    .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d))
}
