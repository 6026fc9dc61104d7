//! Deterministic, order-independent randomness.
//!
//! Every trial derives its own ChaCha key from `(master_seed, trial_index)`
//! and every consumer inside a trial (fusion receiver, fading, each node)
//! reads a separate ChaCha stream under that key. A trial's trajectory is
//! therefore a pure function of the contract, whichever worker runs it and
//! in whatever order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomnessContract {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl RandomnessContract {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    pub fn streams(&self) -> TrialStreams {
        TrialStreams {
            key: derive_key(self.master_seed, self.trial_index),
        }
    }
}

/// Consumers of randomness within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    FusionNoise,
    Fading,
    Node(usize),
}

impl StreamRole {
    fn id(self) -> u64 {
        match self {
            StreamRole::FusionNoise => 0,
            StreamRole::Fading => 1,
            StreamRole::Node(l) => 2 + l as u64,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrialStreams {
    key: [u8; 32],
}

impl TrialStreams {
    pub fn stream(&self, role: StreamRole) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(role.id());
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_key(master_seed: u64, trial_index: u64) -> [u8; 32] {
    let mut state = master_seed;
    // Fold the index through one mixing round so neighbouring
    // (seed, index) pairs do not share key prefixes.
    let _ = splitmix64(&mut state);
    state ^= trial_index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}
