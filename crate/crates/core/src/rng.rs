//! Deterministic random substreams.
//!
//! Each (master seed, label, run index) triple maps to its own ChaCha8 key,
//! so streams never overlap and adding a policy to an experiment leaves the
//! other policies' draws untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Label of the latent-state stream shared by all policies within a run.
pub const ENVIRONMENT_LABEL: &str = "environment";

/// 64-bit FNV-1a; stable across platforms and compiler versions.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn substream(master_seed: u64, label: &str, run: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&run.to_le_bytes());
    key[16..24].copy_from_slice(&fnv1a(label.as_bytes()).to_le_bytes());
    key[24..].copy_from_slice(&(label.len() as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
