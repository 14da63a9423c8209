//! Seeded random streams.
//!
//! Every trial draws from its own ChaCha8 stream: the key comes from the
//! master seed and the 64-bit stream id is the trial index. ChaCha is a
//! counter-mode generator, so the numbers a trial sees depend only on
//! `(master seed, trial index)` and never on which worker ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// The stream for trial `index` under `master`.
pub fn substream(master: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}
