//! Counter-based Gaussian noise.
//!
//! Deviate `j` of lane `l` of path `i` is a pure function of
//! `(master_seed, i, l, j)`: the ChaCha8 key comes from the seed, the
//! stream id from `(i, l)`, and the block counter from `j`. Paths can be
//! generated in any order, on any number of workers, and every prefix of a
//! long path equals the corresponding short path.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use statrs::function::erf::erfc_inv;

/// Lane feeding the driver of `X`.
pub const LANE_X: u32 = 0;
/// Lane feeding the independent component of the driver of `Y`.
pub const LANE_Y: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NoiseStream {
    pub master_seed: u64,
    pub path_index: u32,
    pub lane: u32,
}

impl NoiseStream {
    pub fn new(master_seed: u64, path_index: u32) -> Self {
        NoiseStream { master_seed, path_index, lane: LANE_X }
    }

    pub fn with_lane(self, lane: u32) -> Self {
        NoiseStream { lane, ..self }
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream((u64::from(self.path_index) << 32) | u64::from(self.lane));
        rng
    }

    /// The `j`-th standard normal deviate, by random access.
    pub fn deviate(&self, j: u64) -> f64 {
        let mut rng = self.rng();
        rng.set_word_pos(2 * u128::from(j));
        to_normal(rng.next_u64())
    }

    /// Sequential standard normal deviates starting at index 0.
    pub fn normals(&self) -> Normals {
        Normals { rng: self.rng() }
    }
}

pub struct Normals {
    rng: ChaCha8Rng,
}

impl Iterator for Normals {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        Some(to_normal(self.rng.next_u64()))
    }
}

/// 52 random bits mapped to the midpoints of a grid on `(0, 1)`; both
/// ends stay exactly representable.
#[inline]
pub fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Inverse normal CDF of an open-unit uniform.
#[inline]
fn to_normal(bits: u64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * to_open_unit(bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let s = NoiseStream::new(42, 7).with_lane(LANE_Y);
        let seq: Vec<f64> = s.normals().take(100).collect();
        for j in [0usize, 1, 17, 99] {
            assert_eq!(seq[j].to_bits(), s.deviate(j as u64).to_bits());
        }
    }

    #[test]
    fn streams_differ_by_path_lane_and_seed() {
        let base = NoiseStream::new(1, 0);
        let a: Vec<f64> = base.normals().take(8).collect();
        let b: Vec<f64> = NoiseStream::new(1, 1).normals().take(8).collect();
        let c: Vec<f64> = base.with_lane(LANE_Y).normals().take(8).collect();
        let d: Vec<f64> = NoiseStream::new(2, 0).normals().take(8).collect();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn uniform_mapping_stays_open() {
        assert!(to_open_unit(0) > 0.0);
        assert!(to_open_unit(u64::MAX) < 1.0);
        assert!(to_normal(0).is_finite() && to_normal(u64::MAX).is_finite());
        assert!(to_normal(0) < -8.0 && to_normal(u64::MAX) > 8.0);
    }

    #[test]
    fn independent_lanes_are_uncorrelated() {
        let n = 200_000;
        let s = NoiseStream::new(99, 3);
        let corr: f64 =
            s.normals().zip(s.with_lane(LANE_Y).normals()).take(n).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        // 4 standard errors of 1/sqrt(n)
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "{corr}");
    }
}
