//! Deterministic, independently indexable random streams.
//!
//! A stream is a ChaCha20 generator keyed by `seed` and positioned on the
//! 64-bit stream `stream_id`. Stream selection is O(1), so replication `r`
//! can be bound to stream `r` regardless of which worker runs it.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use super::normal::normal_quantile;

/// A seeded pseudo-random stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    rng: ChaCha20Rng,
}

/// Opens the stream `stream_id` of the generator keyed by `seed`.
pub fn seeded_stream(seed: u64, stream_id: u64) -> RandomStream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    RandomStream { rng }
}

impl RandomStream {
    /// Uniform draw on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        // 53 random bits, shifted off zero by half an ulp
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw by inverse-CDF sampling.
    pub fn standard_normal(&mut self) -> f64 {
        let u = self.uniform_open();
        // u lies strictly inside (0, 1) so the quantile is always defined
        normal_quantile(u).unwrap_or(0.0)
    }

    /// Fair coin.
    pub fn bernoulli_half(&mut self) -> bool {
        self.rng.next_u64() >> 63 == 1
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform_open() < p
    }

    /// Uniform integer in `0..n` (`n > 0`), by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.rng.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_draws() {
        let mut a = seeded_stream(1, 0);
        let mut b = seeded_stream(1, 0);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_are_separated() {
        let mut a = seeded_stream(1, 0);
        let mut b = seeded_stream(1, 1);
        let same = (0..1000).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn uniform_is_open_and_centered() {
        let mut s = seeded_stream(7, 3);
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = s.uniform_open();
            assert!(u > 0.0 && u < 1.0);
            sum += u;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn normal_moments() {
        let mut s = seeded_stream(11, 0);
        let n = 50_000;
        let xs: alloc::vec::Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0).abs() < 0.03);
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = seeded_stream(2, 2);
        for _ in 0..1000 {
            assert!(s.below(7) < 7);
        }
    }
}
