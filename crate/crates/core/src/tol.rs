//! Named tolerances shared across the crate.

/// The tolerance factors used by every operation, collected in one place so
/// callers (and the CLI) can override them coherently.
///
/// Scale-aware tolerances are stored as the dimensionless factor; the
/// helpers below apply the documented scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Root clustering factor; effective tolerance `cluster * (1 + max |root|)`.
    pub cluster: f64,
    /// Numerical rank factor; singular values below `rank * sigma_max * dim`
    /// count as zero.
    pub rank: f64,
    /// Strictness margin factor for norm comparisons against root moduli;
    /// effective margin `margin * (1 + norm)`.
    pub margin: f64,
    /// Similarity-norm solver tolerance.
    pub solver: f64,
    /// Condition-number bound on conjugators `1 + i`.
    pub cond: f64,
    /// Relation residual factor; effective tolerance
    /// `relation * (1 + norm)^degree`.
    pub relation: f64,
    /// Gate for snapping triangular diagonal blocks to `label * I`.
    pub snap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cluster: 1e-8,
            rank: 1e-8,
            margin: 1e-6,
            solver: 1e-6,
            cond: 1e12,
            relation: 1e-8,
            snap: 1e-6,
        }
    }
}

impl Tolerances {
    /// Effective clustering tolerance for roots of the given maximal modulus.
    pub fn cluster_tol(&self, max_root_modulus: f64) -> f64 {
        self.cluster * (1.0 + max_root_modulus)
    }

    /// Effective rank threshold for a matrix with the given largest singular
    /// value and dimension.
    pub fn rank_tol(&self, sigma_max: f64, dim: usize) -> f64 {
        self.rank * sigma_max * dim as f64
    }

    /// Effective strictness margin at the given operator norm.
    pub fn margin_at(&self, norm: f64) -> f64 {
        self.margin * (1.0 + norm)
    }

    /// Effective relation-residual tolerance for an operator of the given
    /// norm under a polynomial of the given degree.
    pub fn relation_tol(&self, norm: f64, degree: usize) -> f64 {
        self.relation * libm::pow(1.0 + norm, degree as f64)
    }
}
