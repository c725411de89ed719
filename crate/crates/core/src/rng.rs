//! Seed handling. Every trajectory gets its own ChaCha stream keyed by
//! `(root_seed, index)`, so results do not depend on scheduling.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootSeed(pub u64);

impl RootSeed {
    /// RNG for item `index` of an ensemble.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    /// Child seed for an independent sub-experiment (e.g. one grid point).
    pub fn derive(self, label: u64) -> RootSeed {
        // splitmix64 finalizer
        let mut z = self.0 ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RootSeed(z ^ (z >> 31))
    }
}

impl FromStr for RootSeed {
    type Err = Error;

    /// Accepts decimal or `0x`-prefixed hexadecimal.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().replace('_', "");
        let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            u64::from_str_radix(hex, 16)
        } else {
            t.parse::<u64>()
        };
        parsed
            .map(RootSeed)
            .map_err(|_| Error::InvalidSeedSpec(format!("{s:?} is not a u64 in decimal or 0x-hex")))
    }
}

impl fmt::Display for RootSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
