//! Labelled random substreams.
//!
//! Every phase of the generator draws from its own ChaCha stream derived from
//! the master seed, a phase label and an index (community number, search
//! iteration, ...). Work items therefore never share generator state, and the
//! output does not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Phase {
    Degrees = 1,
    Outliers = 2,
    CommunitySizes = 3,
    Growth = 4,
    Points = 5,
    Pairing = 6,
    Split = 7,
    Quotas = 8,
    CommunityGraph = 9,
    BackgroundGraph = 10,
    LocalRewire = 11,
    GlobalRewire = 12,
    Ckb = 13,
}

/// Stream for `(seed, phase, index)`. Indices must fit in 40 bits.
pub fn substream(seed: u64, phase: Phase, index: u64) -> Rng {
    debug_assert!(index < 1 << 40);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((phase as u64) << 40) | index);
    rng
}
