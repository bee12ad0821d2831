//! Counter-based random streams.
//!
//! Every simulated path owns two ChaCha streams derived from `(seed, path)`:
//! one for the start block and forward walk, one for the backward walk.
//! Results therefore do not depend on how paths are distributed over worker
//! threads, and lengthening one direction never changes the draws of the
//! other (forward draws are prefix-consistent in the horizon).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default seed used by the command-line tools.
pub const DEFAULT_SEED: u64 = 42;

/// Random streams for one path.
#[derive(Debug, Clone)]
pub struct PathStreams {
    pub forward: ChaCha8Rng,
    pub backward: ChaCha8Rng,
}

impl PathStreams {
    pub fn new(seed: u64, path: u64) -> Self {
        Self {
            forward: stream(seed, 2 * path),
            backward: stream(seed, 2 * path + 1),
        }
    }
}

/// ChaCha8 generator for `(seed, stream id)`.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs `f` on a dedicated pool with `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
