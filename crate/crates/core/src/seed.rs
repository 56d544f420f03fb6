//! Deterministic derivation of independent RNG seeds from a master seed.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `stream` of `base`; distinct streams give unrelated seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    mix(mix(base) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Stream labels used across the crate, so no two consumers collide.
pub mod streams {
    pub const LHS: u64 = 1;
    pub const TUNE: u64 = 2;
    pub const EI: u64 = 3;
    pub const GUARD: u64 = 4;
    pub const VALIDATION: u64 = 5;
}
