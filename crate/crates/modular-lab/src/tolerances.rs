//! Numerical tolerances and the default time grid.
//!
//! All theorem checks in this crate are exact identities in exact arithmetic,
//! so residuals sit near machine epsilon and the tolerances below are loose
//! by several orders of magnitude.

use serde::{Deserialize, Serialize};

/// Ambient dimensions above this make commutant solves expensive (O(n^6)).
pub const MAX_AMBIENT_DIM: usize = 32;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const CLUSTER_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Operator-norm equality threshold.
    pub eps_eq: f64,
    /// Spectral cutoff separating kernel from support is `eps_rank_coeff * n`.
    pub eps_rank_coeff: f64,
    /// Allowed negative slack when testing positive semidefiniteness.
    pub eps_psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_eq: 1e-9,
            eps_rank_coeff: 1e-10,
            eps_psd: 1e-10,
        }
    }
}

impl Tolerances {
    /// Spectral cutoff below which eigenvalues count as kernel.
    pub fn eps_rank(&self, n: usize) -> f64 {
        self.eps_rank_coeff * n as f64
    }
}

/// Default evaluation grid for the flow parameter t. Irrationally related
/// spacings avoid accidental periodicity in the spectra under test.
pub fn default_t_grid() -> Vec<f64> {
    vec![-2.0, -1.0, -0.73, -0.37, -0.1, 0.1, 0.37, 0.73, 1.0, 2.0]
}
