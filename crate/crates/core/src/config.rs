use serde::{Deserialize, Serialize};

/// Size guards shared by every module.
///
/// All caps are positive. The defaults cover the desk-scale experiments:
/// direct evaluation up to `4^12` leaves, exhaustive input scans up to 16
/// leaves (`2^16` inputs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest leaf count `m^{2k}` for which a tree or input vector is built.
    pub max_leaves: u64,
    /// Largest leaf count for which all `2^n` inputs are enumerated.
    pub max_exhaustive_n: u32,
    /// Largest support size of an exact or float cost law.
    pub max_pmf_support: u64,
    /// Largest live population during a branching-process simulation.
    pub max_population: u64,
}

impl Caps {
    pub const DEFAULT_MAX_LEAVES: u64 = 1 << 24; // 4^12
    pub const DEFAULT_MAX_EXHAUSTIVE_N: u32 = 16;
    pub const DEFAULT_MAX_PMF_SUPPORT: u64 = 1 << 20;
    pub const DEFAULT_MAX_POPULATION: u64 = 50_000_000;
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_leaves: Self::DEFAULT_MAX_LEAVES,
            max_exhaustive_n: Self::DEFAULT_MAX_EXHAUSTIVE_N,
            max_pmf_support: Self::DEFAULT_MAX_PMF_SUPPORT,
            max_population: Self::DEFAULT_MAX_POPULATION,
        }
    }
}
