//! Dense complex linear algebra kernels: operator norms, rank decisions
//! with an explicit ambiguity band, complex Schur forms with eigenvalue
//! reordering, triangular Sylvester solves and subspace angles.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};

use crate::cmatrix::{c, max_abs, CMatrix, C64};
use crate::error::Error;
use crate::Result;

/// Operator (spectral) norm: the largest singular value. Empty matrices
/// have norm 0.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Singular values in non-increasing order (empty for empty matrices).
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let sv = m.clone().singular_values();
    sv.iter().copied().collect()
}

/// Ratio of extreme singular values; `f64::INFINITY` when singular, 1 for
/// empty matrices.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) => {
            if lo == 0.0 {
                f64::INFINITY
            } else {
                hi / lo
            }
        }
        _ => 1.0,
    }
}

/// `m^k` by repeated multiplication (`m^0 = I`).
pub fn matrix_power(m: &CMatrix, k: usize) -> CMatrix {
    let n = m.nrows();
    let mut acc = CMatrix::identity(n, n);
    for _ in 0..k {
        acc = m * &acc;
    }
    acc
}

/// `m - t*I`.
pub fn shifted(m: &CMatrix, t: C64) -> CMatrix {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] -= t;
    }
    out
}

/// `|u^* u - I|`, the deviation from having orthonormal columns.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let k = u.ncols();
    let gram = u.adjoint() * u;
    operator_norm(&(gram - CMatrix::identity(k, k)))
}

fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .try_inverse()
        .ok_or(Error::IllConditioned { cond: f64::INFINITY, bound: f64::INFINITY })
}

/// Inverse guarded by a condition-number bound.
pub fn guarded_inverse(m: &CMatrix, cond_bound: f64) -> Result<CMatrix> {
    let cond = condition_number(m);
    if !cond.is_finite() || cond > cond_bound {
        return Err(Error::IllConditioned { cond, bound: cond_bound });
    }
    inverse(m)
}

/// Decides how many singular values count as zero under `rank_tol`,
/// erroring when any lands in the ambiguity band `(rank_tol/10, rank_tol*10)`.
pub fn split_rank(sigmas: &[f64], rank_tol: f64) -> Result<usize> {
    let mut rank = 0;
    for &s in sigmas {
        if rank_tol > 0.0 && s > rank_tol / 10.0 && s < rank_tol * 10.0 {
            return Err(Error::AmbiguousRank { sigma: s, lo: rank_tol / 10.0, hi: rank_tol * 10.0 });
        }
        if s >= rank_tol && s > 0.0 {
            rank += 1;
        }
    }
    Ok(rank)
}

/// Orthonormal kernel basis and its orthocomplement, from one SVD.
///
/// Returns `(kernel, complement)` where `kernel` is `n x (n-r)` and
/// `complement` is `n x r` with `r` the numerical rank at `rank_tol`;
/// together the columns form a unitary. Rank ambiguity is an error.
pub fn kernel_split(m: &CMatrix, rank_tol: f64) -> Result<(CMatrix, CMatrix)> {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return Ok((CMatrix::identity(n, n), CMatrix::zeros(n, 0)));
    }
    let svd = SVD::new(m.clone(), false, true);
    let sigmas: Vec<f64> = svd.singular_values.iter().copied().collect();
    let v_t = svd.v_t.expect("requested v_t");
    let rank = split_rank(&sigmas, rank_tol)?;
    let v = v_t.adjoint();
    // nalgebra sorts singular values in non-increasing order
    let complement = v.columns(0, rank).into_owned();
    let kernel = v.columns(rank, n - rank).into_owned();
    Ok((kernel, complement))
}

/// Orthonormal basis of the column space at the given rank threshold.
pub fn range_basis(m: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    if m.is_empty() {
        return Ok(CMatrix::zeros(m.nrows(), 0));
    }
    let svd = SVD::new(m.clone(), true, false);
    let sigmas: Vec<f64> = svd.singular_values.iter().copied().collect();
    let rank = split_rank(&sigmas, rank_tol)?;
    let u = svd.u.expect("requested u");
    Ok(u.columns(0, rank).into_owned())
}

/// Numerical rank at the given threshold.
pub fn rank(m: &CMatrix, rank_tol: f64) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    split_rank(&singular_values(m), rank_tol)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and a unitary
/// eigenvector matrix.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if m.is_empty() {
        return Ok((Vec::new(), m.clone()));
    }
    let se = SymmetricEigen::new(m.clone());
    Ok((se.eigenvalues.iter().copied().collect(), se.eigenvectors))
}

/// Complex Schur form `m = q t q^*` with `t` genuinely upper triangular.
///
/// The strict lower part returned by the QR iteration is checked against a
/// machine-level threshold and zeroed; a 2x2 resolution pass triangularizes
/// any block the generic iteration left behind.
pub fn schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if n == 0 {
        return Ok((m.clone(), m.clone()));
    }
    if n == 1 {
        return Ok((CMatrix::identity(1, 1), m.clone()));
    }
    let s = Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailed("complex Schur iteration"))?;
    let (mut q, mut t) = s.unpack();
    resolve_subdiagonal(&mut q, &mut t)?;
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = c(0.0, 0.0);
        }
    }
    Ok((q, t))
}

// Triangularize any residual 2x2 bumps on the subdiagonal by an exact
// unitary similarity on the offending rows.
fn resolve_subdiagonal(q: &mut CMatrix, t: &mut CMatrix) -> Result<()> {
    let n = t.nrows();
    let scale = max_abs(t) + 1.0;
    for i in 0..n - 1 {
        if t[(i + 1, i)].norm() <= 1e-12 * scale {
            continue;
        }
        let a = t[(i, i)];
        let b = t[(i, i + 1)];
        let d = t[(i + 1, i)];
        let e = t[(i + 1, i + 1)];
        // eigenvalues of the 2x2 block
        let tr = a + e;
        let disc = ((a - e) * (a - e) + b * d * c(4.0, 0.0)).sqrt();
        let lam1 = (tr + disc) * c(0.5, 0.0);
        let lam2 = (tr - disc) * c(0.5, 0.0);
        let lam = if lam1.norm() >= lam2.norm() { lam1 } else { lam2 };
        // eigenvector of [[a,b],[d,e]] for lam
        let v = if (lam - e).norm() + d.norm() >= (lam - a).norm() + b.norm() {
            [lam - e, d]
        } else {
            [b, lam - a]
        };
        let nv = libm::sqrt(v[0].norm_sqr() + v[1].norm_sqr());
        if nv <= 1e-300 {
            return Err(Error::ConvergenceFailed("2x2 Schur resolution"));
        }
        let v0 = v[0] / c(nv, 0.0);
        let v1 = v[1] / c(nv, 0.0);
        apply_givens_similarity(q, t, i, v0, v1);
        if t[(i + 1, i)].norm() > 1e-9 * scale {
            return Err(Error::ConvergenceFailed("2x2 Schur resolution"));
        }
        t[(i + 1, i)] = c(0.0, 0.0);
    }
    Ok(())
}

// Unitary similarity by G = [[v0, -conj(v1)], [v1, conj(v0)]] acting on
// rows/columns (i, i+1) of t, accumulated into q.
fn apply_givens_similarity(q: &mut CMatrix, t: &mut CMatrix, i: usize, v0: C64, v1: C64) {
    let n = t.nrows();
    let g = [[v0, -v1.conj()], [v1, v0.conj()]];
    // t <- G^* t (rows i, i+1)
    for col in 0..n {
        let x = t[(i, col)];
        let y = t[(i + 1, col)];
        t[(i, col)] = g[0][0].conj() * x + g[1][0].conj() * y;
        t[(i + 1, col)] = g[0][1].conj() * x + g[1][1].conj() * y;
    }
    // t <- t G (columns i, i+1)
    for row in 0..n {
        let x = t[(row, i)];
        let y = t[(row, i + 1)];
        t[(row, i)] = x * g[0][0] + y * g[1][0];
        t[(row, i + 1)] = x * g[0][1] + y * g[1][1];
    }
    // q <- q G
    for row in 0..q.nrows() {
        let x = q[(row, i)];
        let y = q[(row, i + 1)];
        q[(row, i)] = x * g[0][0] + y * g[1][0];
        q[(row, i + 1)] = x * g[0][1] + y * g[1][1];
    }
}

// Swap the adjacent diagonal entries at positions (j, j+1) of an upper
// triangular t by a unitary similarity, keeping triangularity.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, j: usize) {
    let a = t[(j, j)];
    let b = t[(j, j + 1)];
    let cc = t[(j + 1, j + 1)];
    // eigenvector of [[a, b], [0, cc]] for eigenvalue cc
    let v0 = b;
    let v1 = cc - a;
    let nv = libm::sqrt(v0.norm_sqr() + v1.norm_sqr());
    if nv <= 1e-300 {
        // a == cc and b == 0: the entries are identical, nothing to swap
        return;
    }
    apply_givens_similarity(q, t, j, v0 / c(nv, 0.0), v1 / c(nv, 0.0));
    t[(j + 1, j)] = c(0.0, 0.0);
}

/// Reorders a complex Schur form so the selected diagonal entries come
/// first (their relative order preserved). Returns the number selected.
pub fn reorder_schur(q: &mut CMatrix, t: &mut CMatrix, select: &[bool]) -> usize {
    let n = t.nrows();
    debug_assert_eq!(select.len(), n);
    let mut sel: Vec<bool> = select.to_vec();
    let mut target = 0;
    for i in 0..n {
        if !sel[i] {
            continue;
        }
        let mut pos = i;
        while pos > target {
            swap_adjacent(q, t, pos - 1);
            sel.swap(pos - 1, pos);
            pos -= 1;
        }
        target += 1;
    }
    target
}

/// Eigenvalues via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let (_, t) = schur(m)?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Largest eigenvalue modulus (0 for empty matrices).
pub fn spectral_radius(m: &CMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0f64, |acc, z| acc.max(z.norm())))
}

/// Solves `a y - y c = b` with `a` (k x k) and `c` (l x l) upper
/// triangular, by back substitution column by column. Fails when the
/// spectra of `a` and `c` touch.
pub fn solve_sylvester_triangular(a: &CMatrix, cu: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let k = a.nrows();
    let l = cu.nrows();
    if b.nrows() != k || b.ncols() != l {
        return Err(Error::ShapeMismatch(alloc::format!(
            "sylvester rhs must be {}x{}, got {}x{}",
            k,
            l,
            b.nrows(),
            b.ncols()
        )));
    }
    let scale = max_abs(a) + max_abs(cu) + 1.0;
    let mut y = CMatrix::zeros(k, l);
    for j in 0..l {
        // rhs_j = b[:, j] + sum_{i<j} c[i,j] y_i
        let mut rhs = b.column(j).into_owned();
        for i in 0..j {
            let cij = cu[(i, j)];
            if cij.norm() != 0.0 {
                rhs += y.column(i) * cij;
            }
        }
        // back-substitution on (a - c_jj I) y_j = rhs
        let sj = cu[(j, j)];
        for r in (0..k).rev() {
            let mut acc = rhs[r];
            for s in (r + 1)..k {
                acc -= a[(r, s)] * y[(s, j)];
            }
            let diag = a[(r, r)] - sj;
            if diag.norm() <= 1e-14 * scale {
                return Err(Error::ToleranceConflict(alloc::format!(
                    "sylvester solve: spectra overlap near {:.3e}",
                    sj.norm()
                )));
            }
            y[(r, j)] = acc / diag;
        }
    }
    Ok(y)
}

/// Largest principal angle (radians) between the column spans of two
/// matrices with orthonormal columns. Spans of different dimension are at
/// angle pi/2 by convention.
pub fn largest_principal_angle(b1: &CMatrix, b2: &CMatrix) -> f64 {
    if b1.ncols() != b2.ncols() {
        return core::f64::consts::FRAC_PI_2;
    }
    if b1.ncols() == 0 {
        return 0.0;
    }
    let overlap = b1.adjoint() * b2;
    let sigmas = singular_values(&overlap);
    let smin = sigmas.last().copied().unwrap_or(0.0).clamp(-1.0, 1.0);
    libm::acos(smin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::from_rows;

    fn nilpotent2() -> CMatrix {
        from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)])
    }

    #[test]
    fn norms_and_rank() {
        let m = nilpotent2();
        assert!((operator_norm(&m) - 1.0).abs() < 1e-14);
        assert_eq!(rank(&m, 1e-10).unwrap(), 1);
        assert_eq!(rank(&CMatrix::zeros(3, 3), 0.0).unwrap(), 0);
        assert_eq!(operator_norm(&CMatrix::zeros(0, 0)), 0.0);
    }

    #[test]
    fn rank_ambiguity_is_an_error() {
        let sig = [1.0, 5e-8];
        assert!(matches!(split_rank(&sig, 1e-7), Err(Error::AmbiguousRank { .. })));
        assert_eq!(split_rank(&sig, 1e-12).unwrap(), 2);
    }

    #[test]
    fn kernel_split_shapes() {
        let m = nilpotent2();
        let (kern, compl) = kernel_split(&m, 1e-10).unwrap();
        assert_eq!(kern.ncols(), 1);
        assert_eq!(compl.ncols(), 1);
        // kernel of [[0,1],[0,0]] is span(e1)
        assert!((kern[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(kern[(1, 0)].norm() < 1e-12);
        let u = CMatrix::from_fn(2, 2, |i, j| if j == 0 { kern[(i, 0)] } else { compl[(i, 0)] });
        assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn schur_triangularizes_and_reconstructs() {
        let m = from_rows(
            3,
            &[
                (1.0, 0.5),
                (2.0, -1.0),
                (0.0, 0.0),
                (0.0, 1.0),
                (-1.0, 0.0),
                (3.0, 0.25),
                (0.5, 0.5),
                (0.0, -2.0),
                (2.0, 1.0),
            ],
        );
        let (q, t) = schur(&m).unwrap();
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(t[(i, j)].norm(), 0.0);
            }
        }
        let rec = &q * &t * q.adjoint();
        assert!(operator_norm(&(rec - &m)) < 1e-10);
        assert!(unitarity_defect(&q) < 1e-12);
    }

    #[test]
    fn reorder_moves_selected_eigenvalues_first() {
        let m = from_rows(
            3,
            &[
                (2.0, 0.0),
                (1.0, 0.0),
                (0.0, 0.0),
                (0.0, 0.0),
                (-1.0, 0.0),
                (0.5, 0.0),
                (0.0, 0.0),
                (0.0, 0.0),
                (3.0, 0.0),
            ],
        );
        let (mut q, mut t) = schur(&m).unwrap();
        let select: Vec<bool> = t.diagonal().iter().map(|z| (z - c(3.0, 0.0)).norm() < 1e-8).collect();
        let k = reorder_schur(&mut q, &mut t, &select);
        assert_eq!(k, 1);
        assert!((t[(0, 0)] - c(3.0, 0.0)).norm() < 1e-10);
        let rec = &q * &t * q.adjoint();
        assert!(operator_norm(&(rec - &m)) < 1e-10);
    }

    #[test]
    fn sylvester_triangular_solve() {
        let a = from_rows(2, &[(2.0, 0.0), (1.0, 0.0), (0.0, 0.0), (3.0, 0.0)]);
        let cu = from_rows(2, &[(-1.0, 0.0), (0.5, 0.0), (0.0, 0.0), (0.0, 1.0)]);
        let b = from_rows(2, &[(1.0, 0.0), (0.0, 2.0), (-1.0, 1.0), (4.0, 0.0)]);
        let y = solve_sylvester_triangular(&a, &cu, &b).unwrap();
        let residual = &a * &y - &y * &cu - &b;
        assert!(operator_norm(&residual) < 1e-12);
    }

    #[test]
    fn sylvester_detects_spectrum_overlap() {
        let a = from_rows(1, &[(2.0, 0.0)]);
        let cu = from_rows(1, &[(2.0, 0.0)]);
        let b = from_rows(1, &[(1.0, 0.0)]);
        assert!(solve_sylvester_triangular(&a, &cu, &b).is_err());
    }

    #[test]
    fn principal_angles() {
        let e1 = CMatrix::from_fn(3, 1, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let e2 = CMatrix::from_fn(3, 1, |i, _| if i == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(largest_principal_angle(&e1, &e1) < 1e-12);
        assert!((largest_principal_angle(&e1, &e2) - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
