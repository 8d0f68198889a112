//! Seeded, splittable random streams.
//!
//! A [`RngStream`] is identified by `(master_seed, stream_index)`. The same
//! pair always reproduces the same sample sequence, and distinct stream
//! indices give statistically independent streams (ChaCha8 counter streams).
//! Experiments hand every parallel trial its own derived stream, so results
//! are independent of scheduling and thread count.

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, StandardNormal};

/// SplitMix64 finalizer, used to derive child stream indices.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self { master_seed, stream_index, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Derive an independent child stream. Children of distinct `(index,
    /// salt)` pairs collide only with birthday probability ~2^-64.
    pub fn substream(&self, salt: u64) -> Self {
        let child = mix64(self.stream_index ^ mix64(salt.wrapping_add(1)));
        Self::new(self.master_seed, child)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Standard normal draw.
    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.gaussian();
        }
    }

    /// Uniform index in `0..n`.
    pub fn index_below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Chi-square draw with `dof` degrees of freedom (used by the marginal
    /// sphere sampler; dof may be 0, which is identically zero).
    pub fn chi_square(&mut self, dof: usize) -> f64 {
        if dof == 0 {
            return 0.0;
        }
        let gamma = Gamma::new(dof as f64 / 2.0, 2.0).expect("valid chi-square dof");
        gamma.sample(&mut self.rng)
    }

    /// Draw from a prebuilt distribution (hot loops hoist the construction).
    pub fn draw<D: Distribution<f64>>(&mut self, dist: &D) -> f64 {
        dist.sample(&mut self.rng)
    }

    /// Random sign, +1 or -1.
    pub fn sign(&mut self) -> f64 {
        if self.rng.gen::<bool>() {
            1.0
        } else {
            -1.0
        }
    }
}
