//! Monic one-variable polynomials kept in factored form
//! `(x - t_1)^{k_1} ... (x - t_N)^{k_N}` with distinct roots, ordered by
//! non-increasing modulus.

use alloc::vec;
use alloc::vec::Vec;

use crate::cmatrix::{c, CMatrix, C64};
use crate::error::Error;
use crate::linalg;
use crate::Result;

/// One factor `(x - root)^multiplicity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootFactor {
    pub root: C64,
    pub multiplicity: usize,
}

/// A monic polynomial as distinct roots with multiplicities.
///
/// The empty factor list is the *empty product* sentinel: the relation
/// "1 = 0", satisfiable only on the zero space. It arises from peeling all
/// factors and is deliberately distinct from the constant polynomial 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedPolynomial {
    factors: Vec<RootFactor>,
}

fn default_separation_tol(factors: &[RootFactor]) -> f64 {
    let max_mod = factors.iter().fold(0.0f64, |a, f| a.max(f.root.norm()));
    1e-8 * (1.0 + max_mod)
}

impl RootedPolynomial {
    /// Builds a polynomial from `(root, multiplicity)` pairs, in the order
    /// given. Roots must be pairwise distinct (separation above the default
    /// clustering tolerance) and the total degree must be at least 1.
    pub fn new(factors: Vec<(C64, usize)>) -> Result<Self> {
        let factors: Vec<RootFactor> = factors
            .into_iter()
            .map(|(root, multiplicity)| RootFactor { root, multiplicity })
            .collect();
        if factors.is_empty() {
            return Err(Error::DegreeZero);
        }
        if factors.iter().any(|f| f.multiplicity == 0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "factor multiplicities must be positive"
            )));
        }
        let sep_tol = default_separation_tol(&factors);
        for i in 0..factors.len() {
            for j in (i + 1)..factors.len() {
                let sep = (factors[i].root - factors[j].root).norm();
                if sep <= sep_tol {
                    return Err(Error::RootsTooClose { separation: sep, tol: sep_tol });
                }
            }
        }
        Ok(RootedPolynomial { factors })
    }

    /// Builds and canonically orders in one step.
    pub fn from_roots(factors: Vec<(C64, usize)>) -> Result<Self> {
        Ok(Self::new(factors)?.canonical_order())
    }

    /// The empty-product sentinel (degree 0, "only the zero space").
    pub fn empty_product() -> Self {
        RootedPolynomial { factors: Vec::new() }
    }

    pub fn is_empty_product(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[RootFactor] {
        &self.factors
    }

    /// Number of distinct roots.
    pub fn num_roots(&self) -> usize {
        self.factors.len()
    }

    /// Total degree, the sum of multiplicities.
    pub fn degree(&self) -> usize {
        self.factors.iter().map(|f| f.multiplicity).sum()
    }

    /// Largest root modulus (0 for the empty product).
    pub fn max_root_modulus(&self) -> f64 {
        self.factors.iter().fold(0.0f64, |a, f| a.max(f.root.norm()))
    }

    /// Smallest root modulus (`f64::INFINITY` for the empty product, which
    /// has no roots to realize).
    pub fn min_root_modulus(&self) -> f64 {
        self.factors.iter().map(|f| f.root.norm()).fold(f64::INFINITY, f64::min)
    }

    /// The root of `p` nearest to `z`, with its factor index.
    pub fn nearest_root(&self, z: C64) -> Option<(usize, C64)> {
        self.factors
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (a.root - z)
                    .norm()
                    .partial_cmp(&(b.root - z).norm())
                    .expect("finite distances")
            })
            .map(|(i, f)| (i, f.root))
    }

    /// Sorts factors by non-increasing modulus; ties by increasing
    /// principal argument in (-pi, pi], then lexicographically on (re, im).
    /// Stable and idempotent.
    pub fn canonical_order(&self) -> RootedPolynomial {
        let mut factors = self.factors.clone();
        factors.sort_by(|a, b| {
            let (ma, mb) = (a.root.norm(), b.root.norm());
            mb.partial_cmp(&ma)
                .expect("finite moduli")
                .then_with(|| {
                    let (aa, ab) = (principal_arg(a.root), principal_arg(b.root));
                    aa.partial_cmp(&ab).expect("finite arguments")
                })
                .then_with(|| a.root.re.partial_cmp(&b.root.re).expect("finite"))
                .then_with(|| a.root.im.partial_cmp(&b.root.im).expect("finite"))
        });
        RootedPolynomial { factors }
    }

    /// Whether the factors already satisfy the canonical ordering.
    pub fn is_canonically_ordered(&self) -> bool {
        self.factors == self.canonical_order().factors
    }

    /// Recovers the factored form from dense coefficients (descending
    /// powers, `coeffs[0]` the leading coefficient). Roots are computed as
    /// companion-matrix eigenvalues and merged by single-linkage clustering
    /// at `cluster_tol`; the result is canonically ordered. The input is
    /// normalized to monic, which does not change the zero set.
    pub fn factor_from_coefficients(coeffs: &[C64], cluster_tol: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        let lead = coeffs[0];
        if lead.norm() == 0.0 {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let degree = coeffs.len() - 1;
        if degree == 0 {
            return Err(Error::DegreeZero);
        }
        // monic normalization: x^n + m[0] x^{n-1} + ... + m[n-1]
        let monic: Vec<C64> = coeffs[1..].iter().map(|&a| a / lead).collect();
        let mut companion = CMatrix::zeros(degree, degree);
        for i in 1..degree {
            companion[(i, i - 1)] = c(1.0, 0.0);
        }
        for i in 0..degree {
            // last column holds -m reversed: p(x) = x^n + sum m[j] x^{n-1-j}
            companion[(i, degree - 1)] = -monic[degree - 1 - i];
        }
        let eigs = linalg::eigenvalues(&companion)
            .map_err(|_| Error::ConvergenceFailed("companion-matrix root finder"))?;
        let clusters = single_linkage_clusters(&eigs, cluster_tol);
        let factors: Vec<(C64, usize)> = clusters
            .into_iter()
            .map(|members| {
                let k = members.len();
                let sum = members.into_iter().fold(c(0.0, 0.0), |a, z| a + z);
                (sum / c(k as f64, 0.0), k)
            })
            .collect();
        Self::from_roots(factors)
    }

    /// Dense monic coefficients, descending powers (leading 1 first). The
    /// empty product expands to `[1]`.
    pub fn expand_coefficients(&self) -> Vec<C64> {
        let mut coeffs = vec![c(1.0, 0.0)];
        for f in &self.factors {
            for _ in 0..f.multiplicity {
                let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
                for (i, &a) in coeffs.iter().enumerate() {
                    next[i] += a;
                    next[i + 1] -= a * f.root;
                }
                coeffs = next;
            }
        }
        coeffs
    }

    /// Evaluates the product `(T - t_N)^{k_N} ... (T - t_1)^{k_1}` on a
    /// square matrix, the factor of `t_1` applied first. The empty product
    /// evaluates to the identity.
    pub fn evaluate(&self, t: &CMatrix) -> Result<CMatrix> {
        if t.nrows() != t.ncols() {
            return Err(Error::NotSquare { rows: t.nrows(), cols: t.ncols() });
        }
        let n = t.nrows();
        let mut acc = CMatrix::identity(n, n);
        for f in &self.factors {
            let factor = linalg::shifted(t, f.root);
            for _ in 0..f.multiplicity {
                acc = &factor * acc;
            }
        }
        Ok(acc)
    }

    /// Scalar evaluation (test and diagnostics helper).
    pub fn evaluate_scalar(&self, z: C64) -> C64 {
        self.factors.iter().fold(c(1.0, 0.0), |acc, f| {
            let mut term = acc;
            for _ in 0..f.multiplicity {
                term *= z - f.root;
            }
            term
        })
    }

    /// Drops the first `m` factors, keeping `t_{m+1}, ..., t_N`. With
    /// `m = N` the result is the empty-product sentinel.
    pub fn residual_after_peel(&self, m: usize) -> Result<RootedPolynomial> {
        if m > self.factors.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "peel index {m} out of range 0..={}",
                self.factors.len()
            )));
        }
        Ok(RootedPolynomial { factors: self.factors[m..].to_vec() })
    }
}

/// Principal argument in (-pi, pi].
fn principal_arg(z: C64) -> f64 {
    let a = libm::atan2(z.im, z.re);
    // atan2 returns -pi for negative real axis inputs with im = -0.0
    if a == -core::f64::consts::PI {
        core::f64::consts::PI
    } else {
        a
    }
}

// Single-linkage clustering: points chained by pairwise distance <= tol
// share a cluster. Union-find over all pairs; fine at companion scale.
fn single_linkage_clusters(points: &[C64], tol: f64) -> Vec<Vec<C64>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: Vec<Vec<C64>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        clusters[r].push(points[i]);
    }
    clusters.into_iter().filter(|v| !v.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::from_rows;
    use crate::linalg::operator_norm;

    #[test]
    fn monomial_coefficients_cluster_to_one_root() {
        // x^2
        let p = RootedPolynomial::factor_from_coefficients(
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            1e-6,
        )
        .unwrap();
        assert_eq!(p.num_roots(), 1);
        assert_eq!(p.factors()[0].multiplicity, 2);
        assert!(p.factors()[0].root.norm() < 1e-6);
    }

    #[test]
    fn cubic_with_double_root() {
        // (x-2) x^2 = x^3 - 2 x^2
        let p = RootedPolynomial::factor_from_coefficients(
            &[c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            1e-6,
        )
        .unwrap();
        assert_eq!(p.num_roots(), 2);
        // canonical order puts t_1 = 2 first
        assert!((p.factors()[0].root - c(2.0, 0.0)).norm() < 1e-9);
        assert_eq!(p.factors()[0].multiplicity, 1);
        assert!(p.factors()[1].root.norm() < 1e-6);
        assert_eq!(p.factors()[1].multiplicity, 2);
    }

    #[test]
    fn linear_polynomial() {
        let p = RootedPolynomial::factor_from_coefficients(&[c(1.0, 0.0), c(-5.0, 0.0)], 1e-8)
            .unwrap();
        assert_eq!(p.num_roots(), 1);
        assert!((p.factors()[0].root - c(5.0, 0.0)).norm() < 1e-12);
        assert_eq!(p.factors()[0].multiplicity, 1);
    }

    #[test]
    fn degree_zero_and_bad_inputs() {
        assert!(matches!(
            RootedPolynomial::factor_from_coefficients(&[], 1e-8),
            Err(Error::EmptyCoefficients)
        ));
        assert!(matches!(
            RootedPolynomial::factor_from_coefficients(&[c(3.0, 0.0)], 1e-8),
            Err(Error::DegreeZero)
        ));
        assert!(matches!(
            RootedPolynomial::factor_from_coefficients(&[c(0.0, 0.0), c(1.0, 0.0)], 1e-8),
            Err(Error::ZeroLeadingCoefficient)
        ));
    }

    #[test]
    fn canonical_order_examples() {
        let p = RootedPolynomial::new(vec![(c(1.0, 0.0), 1), (c(-2.0, 0.0), 1)]).unwrap();
        let q = p.canonical_order();
        assert!((q.factors()[0].root - c(-2.0, 0.0)).norm() < 1e-15);
        assert!((q.factors()[1].root - c(1.0, 0.0)).norm() < 1e-15);

        // modulus tie broken by increasing principal argument
        let p = RootedPolynomial::new(vec![(c(-2.0, 0.0), 1), (c(0.0, 2.0), 1)]).unwrap();
        let q = p.canonical_order();
        assert!((q.factors()[0].root - c(0.0, 2.0)).norm() < 1e-15, "2i first");
        assert!((q.factors()[1].root - c(-2.0, 0.0)).norm() < 1e-15);

        let single = RootedPolynomial::new(vec![(c(3.0, 1.0), 2)]).unwrap();
        assert_eq!(single.canonical_order(), single);
    }

    #[test]
    fn evaluate_on_nilpotent() {
        let t = from_rows(2, &[(0.0, 0.0), (2.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        // p = x^2
        let p = RootedPolynomial::new(vec![(c(0.0, 0.0), 2)]).unwrap();
        assert!(operator_norm(&p.evaluate(&t).unwrap()) < 1e-15);
        // p = (x-2) x^2; T^2 = 0 forces the product to vanish. Check the
        // oracle by explicit multiplication.
        let p = RootedPolynomial::from_roots(vec![(c(2.0, 0.0), 1), (c(0.0, 0.0), 2)]).unwrap();
        let shifted = from_rows(2, &[(-2.0, 0.0), (2.0, 0.0), (0.0, 0.0), (-2.0, 0.0)]);
        let by_hand = shifted * &t * &t;
        assert!(operator_norm(&by_hand) < 1e-15);
        assert!(operator_norm(&p.evaluate(&t).unwrap()) < 1e-15);
        // p = x - 1 on the identity
        let p = RootedPolynomial::new(vec![(c(1.0, 0.0), 1)]).unwrap();
        let eye = CMatrix::identity(2, 2);
        assert!(operator_norm(&p.evaluate(&eye).unwrap()) < 1e-15);
    }

    #[test]
    fn evaluate_rejects_non_square() {
        let p = RootedPolynomial::new(vec![(c(0.0, 0.0), 1)]).unwrap();
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(p.evaluate(&m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn peel_residuals() {
        let p = RootedPolynomial::from_roots(vec![(c(2.0, 0.0), 1), (c(0.0, 0.0), 2)]).unwrap();
        let r1 = p.residual_after_peel(1).unwrap();
        assert_eq!(r1.num_roots(), 1);
        assert!(r1.factors()[0].root.norm() < 1e-15);
        assert_eq!(r1.factors()[0].multiplicity, 2);
        assert_eq!(p.residual_after_peel(0).unwrap(), p);
        assert!(p.residual_after_peel(2).unwrap().is_empty_product());
        assert!(p.residual_after_peel(3).is_err());
    }

    #[test]
    fn empty_product_semantics() {
        let e = RootedPolynomial::empty_product();
        assert_eq!(e.degree(), 0);
        let m = CMatrix::zeros(2, 2);
        let val = e.evaluate(&m).unwrap();
        assert!(operator_norm(&(val - CMatrix::identity(2, 2))) < 1e-15);
        assert_eq!(e.expand_coefficients().len(), 1);
    }

    #[test]
    fn roots_too_close_rejected() {
        let r = RootedPolynomial::new(vec![(c(1.0, 0.0), 1), (c(1.0, 1e-12), 1)]);
        assert!(matches!(r, Err(Error::RootsTooClose { .. })));
    }

    #[test]
    fn expansion_matches_factored_evaluation() {
        let p = RootedPolynomial::from_roots(vec![
            (c(2.0, 0.0), 1),
            (c(0.0, 0.0), 2),
            (c(-1.0, 0.5), 1),
        ])
        .unwrap();
        let coeffs = p.expand_coefficients();
        assert_eq!(coeffs.len(), p.degree() + 1);
        let z = c(0.7, -0.3);
        let horner = coeffs.iter().fold(c(0.0, 0.0), |acc, &a| acc * z + a);
        assert!((horner - p.evaluate_scalar(z)).norm() < 1e-12);
    }
}
