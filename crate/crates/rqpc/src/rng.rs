//! Counter-based per-trial random streams.
//!
//! A master seed is expanded into a ChaCha key with splitmix64; each trial
//! then selects its own ChaCha stream by index. A trial's randomness depends
//! only on `(master_seed, stream)`, never on scheduling, so results are
//! identical at any thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 step, used to decorrelate the key words derived from the seed.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for one trial: stream `stream` of the generator keyed by `master_seed`.
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}
