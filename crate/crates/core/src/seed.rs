//! Seeded randomness with independent per-task streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Root seed for every sampler in the crate.
///
/// Work split into chunks draws chunk `c` from `rng(c)`, so results do not
/// depend on how chunks are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn value(self) -> u64 {
        self.0
    }

    pub fn rng(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }

    /// A seed for an unrelated sub-experiment, derived deterministically.
    pub fn derive(self, tag: u64) -> Seed {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0 ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(tag);
        Seed(rng.random())
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
