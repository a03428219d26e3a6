use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{validate_dims, Tensor};
use crate::error::Result;

/// Name of the generator behind every seeded stream. Written into run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64 + set_stream) / ziggurat StandardNormal (rand_distr 0.5)";

/// Seed plus the fixed generator identity.
///
/// Independent purposes (noise, weights, permutations, ...) draw from distinct
/// ChaCha streams of the same seed, so adding a consumer never perturbs others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngSpec {
    pub seed: u64,
    pub algorithm: &'static str,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        RngSpec { seed, algorithm: RNG_ALGORITHM }
    }

    /// Generator for stream 0.
    pub fn rng(&self) -> ChaCha8Rng {
        self.stream(0)
    }

    pub fn stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// I.i.d. standard-normal real32 tensor, drawn from stream 0 of `rng`.
pub fn sample_gaussian(dims: &[usize], rng: &RngSpec) -> Result<Tensor> {
    let count = validate_dims(dims)?;
    let mut gen = rng.rng();
    let data: Vec<f32> = (0..count).map(|_| StandardNormal.sample(&mut gen)).collect();
    Tensor::real32(dims.to_vec(), data)
}
