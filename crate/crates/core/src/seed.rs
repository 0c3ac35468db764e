//! Deterministic seed derivation.
//!
//! Every stochastic step draws from its own stream, keyed by the run seed
//! and a role tag:
//!
//! ```text
//! h = FNV-1a-64(tag)            offset 0xcbf29ce484222325, prime 0x100000001b3
//! x = h ^ run_seed
//! x = x + 0x9e3779b97f4a7c15    (wrapping)
//! x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9
//! x = (x ^ (x >> 27)) * 0x94d049bb133111eb
//! x =  x ^ (x >> 31)
//! ```
//!
//! The derived value seeds a [`SplitMix64`] generator.

use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn derive(self, role_tag: &str) -> RngSeed {
        derive_seed(self, role_tag)
    }

    pub fn rng(self) -> SplitMix64 {
        SplitMix64::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64_round(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes `role_tag` into `run_seed`. Tags are expected to be non-empty ASCII.
pub fn derive_seed(run_seed: RngSeed, role_tag: &str) -> RngSeed {
    debug_assert!(!role_tag.is_empty() && role_tag.is_ascii());
    RngSeed(splitmix64_round(fnv1a64(role_tag.as_bytes()) ^ run_seed.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    // Reference values computed with an independent Python evaluation of
    // the documented mixing function.
    #[test]
    fn pinned_values() {
        assert_eq!(fnv1a64(b"kmeans"), 0xc253_3a89_1139_41dc);
        assert_eq!(derive_seed(RngSeed(0), "kmeans"), RngSeed(KMEANS_0));
        assert_eq!(derive_seed(RngSeed(0), "folds"), RngSeed(FOLDS_0));
        assert_ne!(KMEANS_0, FOLDS_0);
    }

    const KMEANS_0: u64 = 0xb644_45e6_f8e0_2589;
    const FOLDS_0: u64 = 0x4d89_d7ec_3bb1_58fc;

    #[test]
    fn deterministic() {
        let a = derive_seed(RngSeed(42), "folds");
        let b = derive_seed(RngSeed(42), "folds");
        assert_eq!(a, b);
        assert_eq!(a.rng().next_u64(), b.rng().next_u64());
        assert_ne!(derive_seed(RngSeed(42), "folds"), derive_seed(RngSeed(43), "folds"));
    }
}
