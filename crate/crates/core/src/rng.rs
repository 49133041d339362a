//! Seeded, stream-split random numbers.
//!
//! A run is fixed by a `u64` seed. Work is split into chunks and every chunk
//! draws from its own ChaCha20 stream, so results do not depend on how many
//! threads processed the chunks.

use num_traits::{Signed, ToPrimitive};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// ChaCha20 keyed by the seed (little-endian, zero padded) on a given stream.
#[derive(Clone, Debug)]
pub struct StreamRng {
    inner: ChaCha20Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        StreamRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `0..n` by rejection: draws falling in the top
    /// `2^64 mod n` values are redrawn.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.uniform_below(n as u64) as usize
    }

    /// True with probability exactly `p / q`.
    pub fn bernoulli(&mut self, p: u64, q: u64) -> bool {
        assert!(p <= q && q > 0, "probability {p}/{q} outside [0, 1]");
        self.uniform_below(q) < p
    }

    /// True with probability exactly `p`; numerator and denominator must fit in a `u64`.
    pub fn bernoulli_q(&mut self, p: &Rational) -> Result<bool> {
        if p.is_negative() || *p > Rational::from_integer(1.into()) {
            return Err(Error::precondition(format!("probability {p} outside [0, 1]")));
        }
        let (Some(num), Some(den)) = (p.numer().to_u64(), p.denom().to_u64()) else {
            return Err(Error::precondition(format!("probability {p} does not fit in 64 bits")));
        };
        Ok(self.bernoulli(num, den))
    }

    /// Uniform `k`-subset of `0..n`, in draw order.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_stream_separated() {
        let a: Vec<u64> = (0..4).map({
            let mut g = StreamRng::new(7, 0);
            move |_| g.next_u64()
        }).collect();
        let mut g = StreamRng::new(7, 0);
        assert_eq!(a, (0..4).map(|_| g.next_u64()).collect::<Vec<_>>());
        let mut h = StreamRng::new(7, 1);
        assert_ne!(a[0], h.next_u64());
        let mut s = StreamRng::new(8, 0);
        assert_ne!(a[0], s.next_u64());
    }

    #[test]
    fn uniform_below_is_in_range_and_roughly_flat() {
        let mut g = StreamRng::new(1, 0);
        let mut counts = [0usize; 6];
        for _ in 0..60_000 {
            counts[g.index(6)] += 1;
        }
        for c in counts {
            assert!((9_000..11_000).contains(&c), "{counts:?}");
        }
        assert_eq!(g.uniform_below(1), 0);
    }

    #[test]
    fn bernoulli_extremes() {
        let mut g = StreamRng::new(3, 0);
        assert!((0..100).all(|_| !g.bernoulli(0, 5)));
        assert!((0..100).all(|_| g.bernoulli(5, 5)));
        assert!(g.bernoulli_q(&Rational::new(3.into(), 2.into())).is_err());
    }

    #[test]
    fn subset_is_distinct() {
        let mut g = StreamRng::new(5, 2);
        for _ in 0..100 {
            let mut s = g.subset(10, 4);
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), 4);
            assert!(s.iter().all(|&x| x < 10));
        }
    }
}
