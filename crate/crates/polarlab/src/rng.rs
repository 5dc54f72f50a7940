//! Deterministic random-number streams.
//!
//! Every Monte Carlo trial owns a stream derived from `(master seed, stream
//! index)`, so results are bit-identical for a given seed no matter how the
//! trials are scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// A reproducible stream identified by a master seed and a stream index.
///
/// Identical `(seed, index)` pairs yield identical sample sequences
/// regardless of thread scheduling. Streams are single-owner: hand each
/// worker its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        Self { master_seed, index }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        // splitmix64 expansion of (seed, index) into a 256-bit key
        let mut state = self
            .master_seed
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(self.index.wrapping_add(1)));
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Trials per parallel block. Blocks are processed in parallel but merged in
/// index order, so reductions are fixed-order and independent of thread count.
pub const TRIAL_BLOCK: u64 = 256;

/// Run `job` inside a dedicated pool of `threads` workers (0 = the ambient
/// pool). Results are identical either way; only the wall time changes.
pub fn with_thread_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        job()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(job)
    }
}

/// Run `trials` independent trials in deterministic parallel blocks.
///
/// `fold` is called once per trial with the trial's own generator and the
/// block accumulator; block accumulators are merged in block order.
pub fn run_trials<A, F>(
    trials: u64,
    master_seed: u64,
    make_acc: impl Fn() -> A + Sync,
    fold: F,
    merge: impl Fn(&mut A, A),
) -> A
where
    A: Send,
    F: Fn(u64, &mut ChaCha12Rng, &mut A) + Sync,
{
    let blocks = trials.div_ceil(TRIAL_BLOCK);
    let partials: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = make_acc();
            let lo = b * TRIAL_BLOCK;
            let hi = (lo + TRIAL_BLOCK).min(trials);
            for trial in lo..hi {
                let mut rng = RngStream::new(master_seed, trial).rng();
                fold(trial, &mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut iter = partials.into_iter();
    let mut total = iter.next().unwrap_or_else(&make_acc);
    for p in iter {
        merge(&mut total, p);
    }
    total
}
