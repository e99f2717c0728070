//! Seed derivation. Every (purpose, agent) pair gets its own ChaCha stream
//! derived from the master seed, so results never depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Scenario = 1,
    Exploration = 2,
    Observation = 3,
    ExtraInit = 4,
}

/// Independent stream for `purpose` and `agent` under `master`.
pub fn stream(master: u64, purpose: Purpose, agent: usize) -> ChaCha8Rng {
    let key = master
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((purpose as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(agent as u64);
    rng
}
