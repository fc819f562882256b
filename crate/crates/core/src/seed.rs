//! Sub-seed derivation.
//!
//! A child seed is derived from a master seed and a path of integers (for
//! example `[repeat, m_index]`) by folding each path element through the
//! SplitMix64 finalizer:
//!
//! ```text
//! h₀ = mix(master)
//! hᵢ = mix(hᵢ₋₁ ⊕ mix(pathᵢ + 0x9E3779B97F4A7C15))
//! ```
//!
//! The map is stable across platforms and releases; changing it changes
//! every published experiment result.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix(master), |h, &p| mix(h ^ mix(p.wrapping_add(GOLDEN))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_paths_give_distinct_seeds() {
        let a = derive_seed(42, &[0, 1]);
        let b = derive_seed(42, &[1, 0]);
        let c = derive_seed(43, &[0, 1]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, &[0, 1]));
    }

    #[test]
    fn frozen_values() {
        // Pinned so accidental changes to the derivation are caught.
        assert_eq!(mix(0), 0);
        assert_eq!(derive_seed(0, &[]), 0);
        assert_eq!(derive_seed(7, &[3]), derive_seed(7, &[3]));
        assert_eq!(mix(1), 0x5692_161D_100B_05E5);
    }
}
