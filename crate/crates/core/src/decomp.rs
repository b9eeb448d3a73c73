//! Canonical forms for matrices annihilated by a polynomial: nested-kernel
//! flags, block upper-triangular form with scalar diagonal blocks, range
//! projections of idempotents, Riesz spectral idempotents via Schur
//! reordering, the corner norm test, and the peeled structure
//! decomposition `T = t_1 1 + ... + t_m 1 + S` (orthogonal direct sum).

use alloc::string::String;
use alloc::vec::Vec;

use crate::cmatrix::{c, cre, CMatrix, C64};
use crate::error::Error;
use crate::linalg;
use crate::polynomial::RootedPolynomial;
use crate::tol::Tolerances;
use crate::Result;

/// Orthonormal bases of the successive flag increments `H_j`, one group
/// per factor slot (`t_i` contributes `k_i` slots).
#[derive(Debug, Clone)]
pub struct NestedKernelFlag {
    /// Basis of each increment, `n x d_j` with orthonormal columns.
    pub groups: Vec<CMatrix>,
    /// Dimensions `d_j` (zero-dimensional slots are legitimate).
    pub flag_dims: Vec<usize>,
    /// Diagonal label of each slot: `t_i` repeated `k_i` times.
    pub labels: Vec<C64>,
}

impl NestedKernelFlag {
    /// Concatenates the groups into a unitary.
    pub fn unitary(&self) -> CMatrix {
        let n = self.groups.first().map(|g| g.nrows()).unwrap_or(0);
        let total: usize = self.flag_dims.iter().sum();
        let mut u = CMatrix::zeros(n, total);
        let mut col = 0;
        for g in &self.groups {
            for j in 0..g.ncols() {
                u.set_column(col, &g.column(j));
                col += 1;
            }
        }
        u
    }
}

// Rank threshold for a factor product: relative to the largest singular
// value, floored at a fraction of the accumulated product scale so that a
// product which is entirely noise reads as the zero matrix.
fn product_rank_tol(tol: &Tolerances, dim: usize, sigma_max: f64, natural_scale: f64) -> f64 {
    tol.rank_tol(sigma_max.max(1e-6 * natural_scale), dim)
}

fn check_relation(t: &CMatrix, p: &RootedPolynomial, tol: &Tolerances) -> Result<f64> {
    let residual = linalg::operator_norm(&p.evaluate(t)?);
    let bound = tol.relation_tol(linalg::operator_norm(t), p.degree());
    if residual > bound {
        return Err(Error::RelationViolated { residual, tol: bound });
    }
    Ok(residual)
}

/// Computes the nested-kernel flag of `t` under `p`: orthonormal bases of
/// `H_j = ker(Q_j) (-) ker(Q_{j-1})` where the `Q_j` are the growing
/// factor products, new factors multiplying on the left.
///
/// Requires `p(t) ~ 0`; the concatenated bases form a unitary.
pub fn nested_kernel_flag(t: &CMatrix, p: &RootedPolynomial, tol: &Tolerances) -> Result<NestedKernelFlag> {
    if t.nrows() != t.ncols() {
        return Err(Error::NotSquare { rows: t.nrows(), cols: t.ncols() });
    }
    if p.is_empty_product() && t.nrows() > 0 {
        return Err(Error::InvalidArgument(String::from(
            "the empty product annihilates only the zero space",
        )));
    }
    check_relation(t, p, tol)?;
    let n = t.nrows();
    let mut groups: Vec<CMatrix> = Vec::new();
    let mut flag_dims: Vec<usize> = Vec::new();
    let mut labels: Vec<C64> = Vec::new();
    // accumulated basis of ker(Q_{j-1})
    let mut accum = CMatrix::zeros(n, 0);
    let mut product = CMatrix::identity(n, n);
    let mut scale = 1.0f64;
    for f in p.factors() {
        let factor = linalg::shifted(t, f.root);
        let factor_norm = linalg::operator_norm(&factor).max(f64::MIN_POSITIVE);
        for _ in 0..f.multiplicity {
            product = &factor * &product;
            scale *= factor_norm;
            let sigma_max = linalg::operator_norm(&product);
            let rank_tol = product_rank_tol(tol, n, sigma_max, scale);
            let (kernel, _) = linalg::kernel_split(&product, rank_tol)?;
            let r_prev = accum.ncols();
            let r_now = kernel.ncols();
            if r_now < r_prev {
                return Err(Error::ToleranceConflict(alloc::format!(
                    "kernel dimensions not nested: {} after {}",
                    r_now,
                    r_prev
                )));
            }
            let d = r_now - r_prev;
            let group = if d == 0 {
                CMatrix::zeros(n, 0)
            } else {
                // project the new kernel onto the orthocomplement of the
                // accumulated flag and keep the d dominant directions
                let proj = if r_prev == 0 {
                    kernel.clone()
                } else {
                    &kernel - &accum * (accum.adjoint() * &kernel)
                };
                let basis = linalg::range_basis(&proj, 0.0)?;
                if basis.ncols() < d {
                    return Err(Error::ToleranceConflict(String::from(
                        "flag increment basis lost rank",
                    )));
                }
                basis.columns(0, d).into_owned()
            };
            let mut next = CMatrix::zeros(n, r_prev + d);
            next.view_mut((0, 0), (n, r_prev)).copy_from(&accum);
            next.view_mut((0, r_prev), (n, d)).copy_from(&group);
            accum = next;
            groups.push(group);
            flag_dims.push(d);
            labels.push(f.root);
        }
    }
    if accum.ncols() != n {
        return Err(Error::ToleranceConflict(alloc::format!(
            "flag spans {} of {} dimensions",
            accum.ncols(),
            n
        )));
    }
    if linalg::unitarity_defect(&accum) > 1e-10 {
        return Err(Error::ToleranceConflict(String::from(
            "flag basis lost orthonormality",
        )));
    }
    Ok(NestedKernelFlag { groups, flag_dims, labels })
}

/// Unitary change of basis realizing the flag: `t = u r u^*` with `r`
/// upper triangular, scalar diagonal blocks snapped exactly to
/// `label * I`.
#[derive(Debug, Clone)]
pub struct TriangularForm {
    pub u: CMatrix,
    pub r: CMatrix,
    pub flag_dims: Vec<usize>,
    pub diagonal_labels: Vec<C64>,
}

impl TriangularForm {
    /// `u r u^*`.
    pub fn reconstruct(&self) -> CMatrix {
        &self.u * &self.r * self.u.adjoint()
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// Realized diagonal label multiset: each slot label counted with its
    /// flag dimension, merged over slots with the same label.
    pub fn label_multiset(&self) -> Vec<(C64, usize)> {
        let mut out: Vec<(C64, usize)> = Vec::new();
        for (label, d) in self.diagonal_labels.iter().zip(&self.flag_dims) {
            if *d == 0 {
                continue;
            }
            if let Some(entry) = out.iter_mut().find(|(z, _)| (*z - *label).norm() == 0.0) {
                entry.1 += d;
            } else {
                out.push((*label, *d));
            }
        }
        out
    }

    /// Offsets of each flag slot on the diagonal.
    pub fn slot_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.flag_dims.len());
        let mut acc = 0;
        for &d in &self.flag_dims {
            offsets.push(acc);
            acc += d;
        }
        offsets
    }

    /// Flag-boundary prefix sizes (0 excluded, full size included once).
    pub fn prefix_boundaries(&self) -> Vec<usize> {
        let mut acc = 0;
        let mut out = Vec::new();
        for &d in &self.flag_dims {
            acc += d;
            if d > 0 && out.last() != Some(&acc) {
                out.push(acc);
            }
        }
        out
    }
}

/// Brings `t` to the flag triangular form of Lemma-style nested kernels.
pub fn upper_triangularize(t: &CMatrix, p: &RootedPolynomial, tol: &Tolerances) -> Result<TriangularForm> {
    let flag = nested_kernel_flag(t, p, tol)?;
    let u = flag.unitary();
    let mut r = u.adjoint() * t * &u;
    let n = r.nrows();
    let offsets = {
        let mut offsets = Vec::with_capacity(flag.flag_dims.len());
        let mut acc = 0;
        for &d in &flag.flag_dims {
            offsets.push(acc);
            acc += d;
        }
        offsets
    };
    // snap diagonal blocks to label * I
    for (slot, (&off, &d)) in offsets.iter().zip(&flag.flag_dims).enumerate() {
        let label = flag.labels[slot];
        let gate = tol.snap * (1.0 + label.norm());
        for i in off..off + d {
            for j in off..off + d {
                let want = if i == j { label } else { c(0.0, 0.0) };
                let dev = (r[(i, j)] - want).norm();
                if dev > gate {
                    return Err(Error::DiagonalSnapFailed { deviation: dev, tol: gate });
                }
                r[(i, j)] = want;
            }
        }
    }
    // entries below the diagonal must vanish
    let scale = 1.0 + linalg::operator_norm(t);
    for i in 0..n {
        for j in 0..i {
            let dev = r[(i, j)].norm();
            if dev > tol.snap * scale {
                return Err(Error::DiagonalSnapFailed { deviation: dev, tol: tol.snap * scale });
            }
            r[(i, j)] = c(0.0, 0.0);
        }
    }
    let form = TriangularForm {
        u,
        r,
        flag_dims: flag.flag_dims,
        diagonal_labels: flag.labels,
    };
    let err = linalg::operator_norm(&(form.reconstruct() - t));
    if err > 1e-8 * scale {
        return Err(Error::ToleranceConflict(alloc::format!(
            "triangular reconstruction error {err:.3e} exceeds {:.3e}",
            1e-8 * scale
        )));
    }
    Ok(form)
}

/// Orthogonal projection onto the range of an idempotent, computed as the
/// spectral function of `b b^*` that maps eigenvalues at least 1/2 to 1
/// (the spectrum of `b b^*` clusters at 0 and on `[1, inf)`).
pub fn range_projection(b: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    if b.nrows() != b.ncols() {
        return Err(Error::NotSquare { rows: b.nrows(), cols: b.ncols() });
    }
    let norm_b = linalg::operator_norm(b);
    let idem_residual = linalg::operator_norm(&(b * b - b));
    let idem_tol = tol.relation * (1.0 + norm_b) * (1.0 + norm_b);
    if idem_residual > idem_tol {
        return Err(Error::NotIdempotent { residual: idem_residual, tol: idem_tol });
    }
    let h = b * b.adjoint();
    let h = (&h + h.adjoint()) * cre(0.5);
    let (eigs, vecs) = linalg::hermitian_eigen(&h)?;
    for &lam in &eigs {
        if lam > 0.1 && lam < 0.9 {
            return Err(Error::BrokenIdempotent { eigenvalue: lam });
        }
    }
    let n = b.nrows();
    let mut chi = CMatrix::zeros(n, n);
    for (j, &lam) in eigs.iter().enumerate() {
        if lam >= 0.5 {
            chi[(j, j)] = c(1.0, 0.0);
        }
    }
    let p = &vecs * chi * vecs.adjoint();
    let p = (&p + p.adjoint()) * cre(0.5);
    let range_residual = linalg::operator_norm(&(&p * b - b));
    let range_tol = 1e-8 * (1.0 + norm_b);
    if range_residual > range_tol {
        return Err(Error::ToleranceConflict(alloc::format!(
            "range projection misses the range: residual {range_residual:.3e}"
        )));
    }
    Ok(p)
}

/// Riesz spectral idempotent of `t` at one root of `p`: reorder a complex
/// Schur form so the eigenvalues at the root come first, split the
/// coupling with a triangular Sylvester solve, and assemble
/// `q [[I, Y], [0, 0]] q^*`. A root absent from the spectrum yields the
/// zero matrix.
pub fn spectral_idempotent(t: &CMatrix, root: C64, p: &RootedPolynomial, tol: &Tolerances) -> Result<CMatrix> {
    if t.nrows() != t.ncols() {
        return Err(Error::NotSquare { rows: t.nrows(), cols: t.ncols() });
    }
    check_relation(t, p, tol)?;
    let root_index = p
        .factors()
        .iter()
        .position(|f| (f.root - root).norm() <= 1e-9 * (1.0 + root.norm()))
        .ok_or(Error::RootNotInPolynomial)?;
    let n = t.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let (mut q, mut r) = linalg::schur(t)?;
    let select: Vec<bool> = r
        .diagonal()
        .iter()
        .map(|&z| p.nearest_root(z).map(|(i, _)| i) == Some(root_index))
        .collect();
    let k = linalg::reorder_schur(&mut q, &mut r, &select);
    if k == 0 {
        return Ok(CMatrix::zeros(n, n));
    }
    if k == n {
        return Ok(CMatrix::identity(n, n));
    }
    let a = r.view((0, 0), (k, k)).into_owned();
    let cc = r.view((k, k), (n - k, n - k)).into_owned();
    let b = r.view((0, k), (k, n - k)).into_owned();
    let y = linalg::solve_sylvester_triangular(&a, &cc, &b)?;
    let mut core = CMatrix::zeros(n, n);
    core.view_mut((0, 0), (k, k)).copy_from(&CMatrix::identity(k, k));
    core.view_mut((0, k), (k, n - k)).copy_from(&y);
    let qq = &q * core * q.adjoint();
    // sanity: idempotency and commutation at scaled tolerance
    let scale = 1.0 + linalg::operator_norm(t);
    let qscale = 1.0 + linalg::operator_norm(&qq);
    let idem = linalg::operator_norm(&(&qq * &qq - &qq));
    let comm = linalg::operator_norm(&(&qq * t - t * &qq));
    if idem > 1e-8 * qscale * qscale || comm > 1e-8 * scale * qscale {
        return Err(Error::ToleranceConflict(alloc::format!(
            "spectral idempotent degraded: idem {idem:.3e}, comm {comm:.3e}"
        )));
    }
    Ok(qq)
}

/// The corner test: given `|a_11| >= |a| - tol`, decides whether the first
/// row and column vanish to the accuracy the corner bound allows, namely
/// `sqrt(2 tol |a|)`.
pub fn corner_zero_check(a: &CMatrix, tol_param: f64) -> Result<bool> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() == 0 {
        return Ok(true);
    }
    let norm = linalg::operator_norm(a);
    let corner = a[(0, 0)].norm();
    if corner < norm - tol_param {
        return Err(Error::InvalidArgument(alloc::format!(
            "corner precondition violated: |a_11| = {corner:.6} < |a| - tol = {:.6}",
            norm - tol_param
        )));
    }
    let bound = libm::sqrt(2.0 * tol_param * norm);
    let mut worst = 0.0f64;
    for j in 1..a.ncols() {
        worst = worst.max(a[(0, j)].norm()).max(a[(j, 0)].norm());
    }
    Ok(worst <= bound)
}

/// One peeled root with its orthogonal projection in the original
/// coordinates.
#[derive(Debug, Clone)]
pub struct PeeledRoot {
    pub root: C64,
    pub projection: CMatrix,
}

/// The result of corner peeling: `t = t_1 P_1 + ... + t_m P_m + V S V^*`
/// with mutually orthogonal projections summing to the identity, `S` the
/// residual corner operator on the range of the corner projection.
#[derive(Debug, Clone)]
pub struct StructureDecomposition {
    /// Number of peeled roots, `0 <= m <= N`.
    pub m: usize,
    pub peeled: Vec<PeeledRoot>,
    /// Projection onto the residual corner subspace (zero when `m = N`).
    pub corner_projection: CMatrix,
    /// Isometry embedding the corner coordinates, `n x d`.
    pub corner_isometry: CMatrix,
    /// The corner operator `S` in its own coordinates; absent when every
    /// factor was consumed (`m = N`, zero-dimensional corner).
    pub corner: Option<CMatrix>,
    /// Factors not yet consumed (empty product when `m = N`).
    pub residual: RootedPolynomial,
}

impl StructureDecomposition {
    /// Norm of the corner operator (0 when absent).
    pub fn corner_norm(&self) -> f64 {
        self.corner.as_ref().map(linalg::operator_norm).unwrap_or(0.0)
    }

    /// `sum t_i P_i + V S V^*`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.corner_projection.nrows();
        let mut acc = CMatrix::zeros(n, n);
        for peel in &self.peeled {
            acc += &peel.projection * peel.root;
        }
        if let Some(s) = &self.corner {
            acc += &self.corner_isometry * s * self.corner_isometry.adjoint();
        }
        acc
    }
}

// State of one diagonal block during peeling: an isometry from the current
// compressed space into the original coordinates and the compressed
// operator itself.
#[derive(Debug, Clone)]
pub(crate) struct PeelState {
    pub isometry: CMatrix,
    pub s: CMatrix,
}

#[derive(Debug, Clone)]
pub(crate) struct GlobalPeeling {
    pub m: usize,
    /// Per peeled root: the per-block projections (original coordinates).
    pub peeled: Vec<(C64, Vec<CMatrix>)>,
    pub states: Vec<PeelState>,
    pub residual: RootedPolynomial,
}

// Peels roots of `p` (canonical order) off a family of diagonal blocks,
// the stop rule driven by the *global* norm max over blocks. Peeling a
// root removes ker((S_k - t)^{k_i}) from every block at once.
pub(crate) fn peel_global(
    mut states: Vec<PeelState>,
    p: &RootedPolynomial,
    margin: f64,
    tol: &Tolerances,
) -> Result<GlobalPeeling> {
    let mut peeled: Vec<(C64, Vec<CMatrix>)> = Vec::new();
    let mut m = p.num_roots();
    for (i, f) in p.factors().iter().enumerate() {
        let global_norm = states.iter().map(|st| linalg::operator_norm(&st.s)).fold(0.0, f64::max);
        if global_norm > f.root.norm() + margin {
            m = i;
            break;
        }
        let mut projections = Vec::with_capacity(states.len());
        for st in states.iter_mut() {
            let d = st.s.nrows();
            let nfull = st.isometry.nrows();
            if d == 0 {
                projections.push(CMatrix::zeros(nfull, nfull));
                continue;
            }
            let factor = linalg::shifted(&st.s, f.root);
            let factor_norm = linalg::operator_norm(&factor).max(f64::MIN_POSITIVE);
            let power = linalg::matrix_power(&factor, f.multiplicity);
            let sigma_max = linalg::operator_norm(&power);
            let scale = libm::pow(factor_norm, f.multiplicity as f64);
            let rank_tol = product_rank_tol(tol, d, sigma_max, scale);
            let (kernel, complement) = linalg::kernel_split(&power, rank_tol)?;
            let r = kernel.ncols();
            if r == 0 {
                projections.push(CMatrix::zeros(nfull, nfull));
                continue;
            }
            let cols = &st.isometry * &kernel;
            projections.push(&cols * cols.adjoint());
            st.isometry = &st.isometry * &complement;
            st.s = complement.adjoint() * &st.s * &complement;
        }
        peeled.push((f.root, projections));
    }
    let residual = p.residual_after_peel(m)?;
    if residual.is_empty_product() {
        let leftover: usize = states.iter().map(|st| st.s.nrows()).sum();
        if leftover > 0 {
            return Err(Error::ToleranceConflict(alloc::format!(
                "all factors consumed but {leftover} dimensions remain"
            )));
        }
    }
    Ok(GlobalPeeling { m, peeled, states, residual })
}

/// Runs the peeling loop on a single matrix: triangularize, then peel
/// roots while the current norm stays within `strictness_margin` of the
/// root modulus; stop at the first strict excess.
pub fn structure_decomposition(
    t: &CMatrix,
    p: &RootedPolynomial,
    strictness_margin: f64,
    tol: &Tolerances,
) -> Result<StructureDecomposition> {
    if !p.is_canonically_ordered() {
        return Err(Error::InvalidArgument(String::from(
            "polynomial must be canonically ordered",
        )));
    }
    let n = t.nrows();
    let form = upper_triangularize(t, p, tol)?;
    let states = alloc::vec![PeelState { isometry: form.u.clone(), s: form.r.clone() }];
    let peeling = peel_global(states, p, strictness_margin, tol)?;
    let state = peeling.states.into_iter().next().expect("one state");
    let peeled: Vec<PeeledRoot> = peeling
        .peeled
        .into_iter()
        .map(|(root, mut projs)| PeeledRoot { root, projection: projs.pop().expect("one block") })
        .collect();
    let corner_projection = &state.isometry * state.isometry.adjoint();
    let corner = if peeling.residual.is_empty_product() { None } else { Some(state.s) };
    let decomposition = StructureDecomposition {
        m: peeling.m,
        peeled,
        corner_projection: if n == 0 { CMatrix::zeros(0, 0) } else { corner_projection },
        corner_isometry: state.isometry,
        corner,
        residual: peeling.residual,
    };
    // enforce the contract before returning
    let scale = 1.0 + linalg::operator_norm(t);
    let rec_err = linalg::operator_norm(&(decomposition.reconstruct() - t));
    if rec_err > 1e-8 * scale {
        return Err(Error::ToleranceConflict(alloc::format!(
            "structure reconstruction error {rec_err:.3e} exceeds {:.3e}",
            1e-8 * scale
        )));
    }
    if let Some(s) = &decomposition.corner {
        let res = linalg::operator_norm(&decomposition.residual.evaluate(s)?);
        let bound = tol.relation_tol(linalg::operator_norm(s), decomposition.residual.degree());
        if res > bound {
            return Err(Error::RelationViolated { residual: res, tol: bound });
        }
    }
    Ok(decomposition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::from_rows;
    use crate::linalg::operator_norm;
    use alloc::vec;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn p_x2() -> RootedPolynomial {
        RootedPolynomial::from_roots(vec![(c(0.0, 0.0), 2)]).unwrap()
    }

    fn p_x2_minus() -> RootedPolynomial {
        // (x-2) x^2
        RootedPolynomial::from_roots(vec![(c(2.0, 0.0), 1), (c(0.0, 0.0), 2)]).unwrap()
    }

    #[test]
    fn flag_of_jordan_block() {
        let t = from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let flag = nested_kernel_flag(&t, &p_x2(), &tols()).unwrap();
        assert_eq!(flag.flag_dims, vec![1, 1]);
        // H_1 = span e_1
        assert!((flag.groups[0][(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(flag.groups[0][(1, 0)].norm() < 1e-12);
    }

    #[test]
    fn flag_of_diagonal() {
        let t = from_rows(2, &[(2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let p = RootedPolynomial::from_roots(vec![(c(2.0, 0.0), 1), (c(0.0, 0.0), 1)]).unwrap();
        let flag = nested_kernel_flag(&t, &p, &tols()).unwrap();
        assert_eq!(flag.flag_dims, vec![1, 1]);
        assert!((flag.groups[0][(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((flag.groups[1][(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flag_rejects_violated_relation() {
        let t = from_rows(2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (3.0, 0.0)]);
        assert!(matches!(
            nested_kernel_flag(&t, &p_x2(), &tols()),
            Err(Error::RelationViolated { .. })
        ));
    }

    #[test]
    fn triangularize_upper_2x2() {
        let t = from_rows(2, &[(2.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let p = RootedPolynomial::from_roots(vec![(c(2.0, 0.0), 1), (c(0.0, 0.0), 1)]).unwrap();
        let form = upper_triangularize(&t, &p, &tols()).unwrap();
        assert_eq!(form.flag_dims, vec![1, 1]);
        assert_eq!(form.r[(0, 0)], c(2.0, 0.0));
        assert_eq!(form.r[(1, 1)], c(0.0, 0.0));
        assert!(operator_norm(&(form.reconstruct() - &t)) < 1e-10);
    }

    #[test]
    fn triangularize_zero_matrix() {
        let t = CMatrix::zeros(3, 3);
        let p = RootedPolynomial::from_roots(vec![(c(0.0, 0.0), 1)]).unwrap();
        let form = upper_triangularize(&t, &p, &tols()).unwrap();
        assert_eq!(form.flag_dims, vec![3]);
        assert!(operator_norm(&form.r) == 0.0);
        assert!(operator_norm(&(form.u.adjoint() * &form.u - CMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn range_projection_paper_corner() {
        let b = from_rows(2, &[(1.0, 0.0), (2.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let p = range_projection(&b, &tols()).unwrap();
        let expect = from_rows(2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(operator_norm(&(&p - expect)) < 1e-10);
        // identity maps to identity
        let eye = CMatrix::identity(3, 3);
        let p = range_projection(&eye, &tols()).unwrap();
        assert!(operator_norm(&(&p - CMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn range_projection_rejects_non_idempotent() {
        let b = from_rows(2, &[(0.5, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(range_projection(&b, &tols()), Err(Error::NotIdempotent { .. })));
    }

    #[test]
    fn spectral_idempotent_partial_fractions_case() {
        let t = from_rows(2, &[(2.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let p = RootedPolynomial::from_roots(vec![(c(2.0, 0.0), 1), (c(0.0, 0.0), 1)]).unwrap();
        let q = spectral_idempotent(&t, c(2.0, 0.0), &p, &tols()).unwrap();
        let expect = from_rows(2, &[(1.0, 0.0), (0.5, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(operator_norm(&(&q - expect)) < 1e-10);
    }

    #[test]
    fn spectral_idempotent_diagonal_and_absent_root() {
        let t = from_rows(2, &[(2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let p = RootedPolynomial::from_roots(vec![(c(2.0, 0.0), 1), (c(0.0, 0.0), 1)]).unwrap();
        let q = spectral_idempotent(&t, c(0.0, 0.0), &p, &tols()).unwrap();
        let expect = from_rows(2, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(operator_norm(&(&q - expect)) < 1e-10);

        // root 2 in p but absent from a nilpotent spectrum
        let t = from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let q = spectral_idempotent(&t, c(2.0, 0.0), &p_x2_minus(), &tols()).unwrap();
        assert_eq!(operator_norm(&q), 0.0);

        // root not in p at all
        assert!(matches!(
            spectral_idempotent(&t, c(7.0, 0.0), &p_x2_minus(), &tols()),
            Err(Error::RootNotInPolynomial)
        ));
    }

    #[test]
    fn corner_check_examples() {
        let a = from_rows(2, &[(2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(corner_zero_check(&a, 1e-10).unwrap());

        let a = from_rows(2, &[(2.0, 0.0), (0.5, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(corner_zero_check(&a, 1e-10).is_err(), "precondition gate");
    }

    #[test]
    fn structure_fully_diagonal() {
        let t = from_rows(2, &[(2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let p = RootedPolynomial::from_roots(vec![(c(2.0, 0.0), 1), (c(0.0, 0.0), 1)]).unwrap();
        let d = structure_decomposition(&t, &p, 1e-6, &tols()).unwrap();
        assert_eq!(d.m, 2);
        assert!(d.corner.is_none());
        assert!(d.residual.is_empty_product());
        assert_eq!(d.peeled.len(), 2);
        assert!((d.peeled[0].root - c(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(linalg::rank(&d.peeled[0].projection, 1e-10).unwrap(), 1);
        assert!(operator_norm(&(d.reconstruct() - &t)) < 1e-10);
    }

    #[test]
    fn structure_zero_dimensional_peel() {
        // |t| = |t_1| = 2 but 2 is not an eigenvalue: zero-dim peel, then stop
        let t = from_rows(2, &[(0.0, 0.0), (2.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let d = structure_decomposition(&t, &p_x2_minus(), 1e-6, &tols()).unwrap();
        assert_eq!(d.m, 1);
        assert_eq!(operator_norm(&d.peeled[0].projection), 0.0);
        assert_eq!(d.residual.degree(), 2);
        let s = d.corner.as_ref().unwrap();
        assert!((operator_norm(s) - 2.0).abs() < 1e-10);
        assert!(operator_norm(&(d.reconstruct() - &t)) < 1e-10);
    }

    #[test]
    fn structure_block_diagonal_example() {
        let t = from_rows(
            3,
            &[
                (2.0, 0.0), (0.0, 0.0), (0.0, 0.0),
                (0.0, 0.0), (0.0, 0.0), (1.0, 0.0),
                (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
            ],
        );
        let d = structure_decomposition(&t, &p_x2_minus(), 1e-6, &tols()).unwrap();
        assert_eq!(d.m, 1);
        let p1 = &d.peeled[0].projection;
        let expect = from_rows(
            3,
            &[
                (1.0, 0.0), (0.0, 0.0), (0.0, 0.0),
                (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
                (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
            ],
        );
        assert!(operator_norm(&(p1 - expect)) < 1e-10);
        let s = d.corner.as_ref().unwrap();
        assert_eq!(s.nrows(), 2);
        assert!((operator_norm(s) - 1.0).abs() < 1e-10);
        assert_eq!(d.residual.degree(), 2);
        assert!(operator_norm(&(d.reconstruct() - &t)) < 1e-10);
    }
}
