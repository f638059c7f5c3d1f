//! Counter-addressed Gaussian noise.
//!
//! Path `i` reads ChaCha8 stream `i` under a key derived from the master
//! seed. Draws come in Box-Muller pairs and each pair consumes exactly two
//! 64-bit words, so draw `k` of path `i` sits at a fixed word offset and is
//! a pure function of `(seed, i, k)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut s = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    key
}

#[inline]
fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn box_muller(w0: u64, w1: u64) -> (f64, f64) {
    let r = (-2.0 * open_unit(w0).ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * open_unit(w1)).sin_cos();
    (r * c, r * s)
}

#[derive(Debug, Clone)]
enum Source {
    Zero,
    Chacha {
        rng: ChaCha8Rng,
        spare: Option<f64>,
    },
}

/// Per-path standard normal stream.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    seed: u64,
    path_index: u64,
    step_counter: u64,
    mirrored: bool,
    source: Source,
}

impl NoiseSource {
    pub fn new(seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key_from_seed(seed));
        rng.set_stream(path_index);
        NoiseSource {
            seed,
            path_index,
            step_counter: 0,
            mirrored: false,
            source: Source::Chacha { rng, spare: None },
        }
    }

    /// Noise-free mode: every draw is 0.
    pub fn zero() -> Self {
        NoiseSource {
            seed: 0,
            path_index: 0,
            step_counter: 0,
            mirrored: false,
            source: Source::Zero,
        }
    }

    /// Same stream with every draw negated.
    pub fn mirrored(mut self) -> Self {
        self.mirrored = !self.mirrored;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn step_counter(&self) -> u64 {
        self.step_counter
    }

    /// True in noise-free mode.
    pub fn is_zero(&self) -> bool {
        matches!(self.source, Source::Zero)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        self.step_counter += 1;
        let z = match &mut self.source {
            Source::Zero => 0.0,
            Source::Chacha { rng, spare } => match spare.take() {
                Some(z) => z,
                None => {
                    let (z0, z1) = box_muller(rng.next_u64(), rng.next_u64());
                    *spare = Some(z1);
                    z0
                }
            },
        };
        if self.mirrored {
            -z
        } else {
            z
        }
    }

    /// Random access to draw `k` of `(seed, path)`, ignoring the cursor.
    pub fn normal_at(seed: u64, path_index: u64, k: u64) -> f64 {
        let mut rng = ChaCha8Rng::from_seed(key_from_seed(seed));
        rng.set_stream(path_index);
        rng.set_word_pos(4 * (k / 2) as u128);
        let (z0, z1) = box_muller(rng.next_u64(), rng.next_u64());
        if k % 2 == 0 {
            z0
        } else {
            z1
        }
    }
}
