//! Seeded random streams.
//!
//! A root seed fans out into independent child streams keyed by a label.
//! ChaCha20 is counter based: the label selects the stream word, so drawing
//! from one stream never advances another.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Well-known stream labels used by the environments.
pub mod streams {
    pub const DEMAND: &str = "demand";
    pub const LEAD_TIME: &str = "lead-time";

    pub fn demand_at(node: usize) -> String {
        format!("demand/{node}")
    }

    pub fn agent(role: &str) -> String {
        format!("agent/{role}")
    }
}

pub fn stream_word(stream_id: &str) -> u64 {
    let digest = Sha256::digest(stream_id.as_bytes());
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

/// Returns the generator for `(seed, stream_id)`.
pub fn stream_rng(seed: u64, stream_id: &str) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_word(stream_id));
    rng
}

/// Derives a child seed, for components that own their own generator.
pub fn child_seed(seed: u64, stream_id: &str) -> u64 {
    use rand::RngCore;
    stream_rng(seed, stream_id).next_u64()
}
