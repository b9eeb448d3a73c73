//! The generalized spectral radius formula as a computation: minimize
//! `|(1+i) x (1+i)^{-1}|` over `i` in a block ideal. The closed form
//! `max(rho(x), |quotient(x)|)` is the exact oracle; the minimizer is
//! assembled per block from an eigenvector similarity when the block is
//! cleanly diagonalizable and from a Schur diagonal-scaling schedule
//! otherwise.

use alloc::string::String;
use alloc::vec::Vec;

use crate::blockalg::{BlockElement, IdealSpec};
use crate::cmatrix::{c, CMatrix, C64};
use crate::error::Error;
use crate::linalg;
use crate::tol::Tolerances;
use crate::Result;

/// Geometric schedule for the scaling parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub ratio: f64,
    pub floor: f64,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule { eps0: 0.5, ratio: 0.5, floor: 1e-8 }
    }
}

/// Options for the similarity-norm minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusOptions {
    pub max_iter: usize,
    pub solver_tol: f64,
    pub eps_schedule: EpsSchedule,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        RadiusOptions { max_iter: 400, solver_tol: 1e-6, eps_schedule: EpsSchedule::default() }
    }
}

impl RadiusOptions {
    fn validate(&self) -> Result<()> {
        let s = &self.eps_schedule;
        if self.max_iter == 0
            || self.solver_tol <= 0.0
            || s.eps0 <= 0.0
            || s.eps0 >= 1.0
            || s.ratio <= 0.0
            || s.ratio >= 1.0
            || s.floor <= 0.0
            || s.floor > s.eps0
        {
            return Err(Error::InvalidArgument(String::from(
                "radius options must be positive, with 0 < floor <= eps0 < 1 and 0 < ratio < 1",
            )));
        }
        Ok(())
    }
}

/// Outcome of the minimization.
#[derive(Debug, Clone)]
pub struct RadiusResult {
    /// Achieved norm `|(1+i) x (1+i)^{-1}|` for the reported witness.
    pub value: f64,
    /// The minimizing (or best found) `i`, supported on the ideal.
    pub witness: BlockElement,
    /// Whether the theorem guarantees attainment (`|x.| > rho(x)`), in
    /// which case the witness achieves the value rather than approaching it.
    pub attained: bool,
    /// False when the iteration budget ran out before the target; the
    /// result is then the best found, never a silent wrong answer.
    pub converged: bool,
    pub iterations: usize,
    /// `(iteration, running best value)` pairs; non-increasing.
    pub history: Vec<(usize, f64)>,
}

/// The closed-form optimum `max(rho(x), |x quotient|)`. In the block model
/// this equals `max(|x.|, max over supported blocks of rho)`; both
/// expressions are computed and compared.
pub fn theoretical_min(x: &BlockElement, ideal: &IdealSpec) -> Result<f64> {
    let qnorm = x.quotient(ideal)?.norm();
    let rho = x.spectral_radius()?;
    let by_theorem = rho.max(qnorm);
    let mut rho_supported = 0.0f64;
    for &k in ideal.support() {
        rho_supported = rho_supported.max(linalg::spectral_radius(x.block(k))?);
    }
    let by_blocks = qnorm.max(rho_supported);
    debug_assert!(
        (by_theorem - by_blocks).abs() <= 1e-10 * (1.0 + by_theorem),
        "block decoupling disagrees with the theorem expression"
    );
    Ok(by_theorem)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::EpsOutOfRange { eps });
    }
    Ok(())
}

/// The Schur scaling conjugator `G = D_eps^{-1} U^*` with
/// `D_eps = diag(1, eps, eps^2, ...)` over a Schur unitary `U`; the
/// conjugation damps the strictly upper triangle by powers of `eps`, so
/// `|G x G^{-1}| <= rho(x) + c(x) eps`.
///
/// `cond(G) = eps^{1-n}` grows fast; use [`schedule_value`] to evaluate the
/// conjugated norm stably for small `eps`.
pub fn schur_diagonal_schedule(x: &CMatrix, eps: f64) -> Result<CMatrix> {
    check_eps(eps)?;
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    let (u, _) = linalg::schur(x)?;
    Ok(&scaling_diag(x.nrows(), 1.0 / eps) * u.adjoint())
}

fn scaling_diag(n: usize, base: f64) -> CMatrix {
    let mut d = CMatrix::zeros(n, n);
    let mut v = 1.0;
    for i in 0..n {
        d[(i, i)] = c(v, 0.0);
        v *= base;
    }
    d
}

// |D_eps^{-1} t D_eps| for upper triangular t, evaluated by scaling the
// entries directly: entry (i, j) picks up eps^{j-i}.
fn scaled_triangular_norm(t: &CMatrix, eps: f64) -> f64 {
    let n = t.nrows();
    let mut scaled = CMatrix::zeros(n, n);
    for i in 0..n {
        let mut factor = 1.0;
        for j in i..n {
            scaled[(i, j)] = t[(i, j)] * c(factor, 0.0);
            factor *= eps;
        }
    }
    linalg::operator_norm(&scaled)
}

/// The norm `|G x G^{-1}|` achieved by [`schur_diagonal_schedule`] at the
/// given `eps`, computed without forming the ill-conditioned product.
pub fn schedule_value(x: &CMatrix, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    let (_, t) = linalg::schur(x)?;
    Ok(scaled_triangular_norm(&t, eps))
}

// Eigenvector matrix of an upper triangular matrix by back substitution;
// None when some eigenvalue pair is too close for a stable solve.
fn triangular_eigenvectors(t: &CMatrix, sep_tol: f64) -> Option<CMatrix> {
    let n = t.nrows();
    let mut w = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut v = alloc::vec![c(0.0, 0.0); n];
        v[j] = c(1.0, 0.0);
        for i in (0..j).rev() {
            let mut acc = c(0.0, 0.0);
            for k in (i + 1)..=j {
                acc += t[(i, k)] * v[k];
            }
            let denom = t[(i, i)] - t[(j, j)];
            if denom.norm() <= sep_tol {
                return None;
            }
            v[i] = -acc / denom;
        }
        let scale = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        for i in 0..=j {
            w[(i, j)] = v[i] / c(scale, 0.0);
        }
    }
    Some(w)
}

pub(crate) struct BlockSearch {
    pub(crate) conjugator: CMatrix,
    pub(crate) achieved: f64,
    pub(crate) evaluations: usize,
}

// Minimizes |g x g^{-1}| over one block, stopping once `stop_target` is
// reached. Candidates: identity, the eigenvector similarity when the block
// is diagonalizable with acceptable conditioning, and the Schur scaling
// schedule with a golden-section refinement of the final decade.
pub(crate) fn best_block_conjugator(
    x: &CMatrix,
    stop_target: f64,
    opts: &RadiusOptions,
    cond_cap: f64,
) -> Result<BlockSearch> {
    let n = x.nrows();
    let mut evaluations = 1usize;
    let mut best = BlockSearch {
        conjugator: CMatrix::identity(n, n),
        achieved: linalg::operator_norm(x),
        evaluations: 0,
    };
    if n <= 1 || best.achieved <= stop_target {
        best.evaluations = evaluations;
        return Ok(best);
    }
    let (u, t) = linalg::schur(x)?;
    let scale = 1.0 + linalg::operator_norm(&t);

    // eigenvector route: exact diagonalization when clean
    if let Some(wt) = triangular_eigenvectors(&t, 1e-8 * scale) {
        let w = &u * wt;
        if linalg::condition_number(&w) <= cond_cap / 100.0 {
            if let Ok(w_inv) = linalg::guarded_inverse(&w, cond_cap) {
                let value = linalg::operator_norm(&(&w_inv * x * &w));
                evaluations += 1;
                if value < best.achieved {
                    best.conjugator = w_inv;
                    best.achieved = value;
                }
            }
        }
    }
    if best.achieved <= stop_target {
        best.evaluations = evaluations;
        return Ok(best);
    }

    // Schur scaling schedule; eps bounded below so cond(G) = eps^{1-n}
    // stays within the conjugator budget
    let cond_floor = libm::pow(cond_cap / 100.0, -1.0 / (n as f64 - 1.0));
    let floor = opts.eps_schedule.floor.max(cond_floor).min(opts.eps_schedule.eps0);
    let mut eval_eps = |eps: f64, best: &mut BlockSearch, evaluations: &mut usize| {
        let value = scaled_triangular_norm(&t, eps);
        *evaluations += 1;
        if value < best.achieved {
            best.achieved = value;
            best.conjugator = &scaling_diag(n, 1.0 / eps) * u.adjoint();
            return (value, true);
        }
        (value, false)
    };
    let mut eps = opts.eps_schedule.eps0;
    let mut best_eps = None;
    while eps >= floor && evaluations < opts.max_iter {
        let (value, improved) = eval_eps(eps, &mut best, &mut evaluations);
        if improved {
            best_eps = Some(eps);
        }
        if value <= stop_target {
            best.evaluations = evaluations;
            return Ok(best);
        }
        eps *= opts.eps_schedule.ratio;
    }
    // golden-section refinement of the last decade on log(eps)
    if let Some(center) = best_eps {
        let golden = 0.618_033_988_749_894_9_f64;
        let mut lo = libm::log(center * opts.eps_schedule.ratio.max(0.1));
        let mut hi = libm::log((center / opts.eps_schedule.ratio.max(0.1)).min(0.999));
        let lo_bound = libm::log(floor);
        if lo < lo_bound {
            lo = lo_bound;
        }
        let mut c1 = hi - golden * (hi - lo);
        let mut c2 = lo + golden * (hi - lo);
        let mut f1 = scaled_triangular_norm(&t, libm::exp(c1));
        let mut f2 = scaled_triangular_norm(&t, libm::exp(c2));
        evaluations += 2;
        for _ in 0..24 {
            if evaluations >= opts.max_iter {
                break;
            }
            if f1 <= f2 {
                hi = c2;
                c2 = c1;
                f2 = f1;
                c1 = hi - golden * (hi - lo);
                f1 = scaled_triangular_norm(&t, libm::exp(c1));
            } else {
                lo = c1;
                c1 = c2;
                f1 = f2;
                c2 = lo + golden * (hi - lo);
                f2 = scaled_triangular_norm(&t, libm::exp(c2));
            }
            evaluations += 1;
        }
        let refined = if f1 <= f2 { libm::exp(c1) } else { libm::exp(c2) };
        eval_eps(refined, &mut best, &mut evaluations);
    }
    best.evaluations = evaluations;
    Ok(best)
}

/// Minimizes `|(1+i) x (1+i)^{-1}|` over `i` supported on the ideal.
///
/// The ideal structure decouples the blocks, so each supported block is
/// driven independently toward the oracle target
/// `max(|x.|, max rho over supported blocks)`. The reported value is the
/// honestly evaluated norm of the conjugation by the reported witness.
pub fn min_similarity_norm(
    x: &BlockElement,
    ideal: &IdealSpec,
    opts: &RadiusOptions,
    tol: &Tolerances,
) -> Result<RadiusResult> {
    opts.validate()?;
    let qnorm = x.quotient(ideal)?.norm();
    let rho = x.spectral_radius()?;
    let mut rho_supported = 0.0f64;
    for &k in ideal.support() {
        rho_supported = rho_supported.max(linalg::spectral_radius(x.block(k))?);
    }
    let target = qnorm.max(rho_supported);
    let stop_target = target + 0.5 * opts.solver_tol;

    let mut witness = BlockElement::zero(&x.algebra());
    let mut iterations = 0usize;
    let mut history: Vec<(usize, f64)> = Vec::new();
    // per-block running upper bounds on the conjugated norm
    let mut block_values: Vec<f64> = x.blocks().iter().map(linalg::operator_norm).collect();
    let global = |vals: &[f64]| -> f64 { vals.iter().copied().fold(qnorm, f64::max) };
    history.push((0, global(&block_values)));
    let mut converged = true;
    for &k in ideal.support() {
        let search = best_block_conjugator(x.block(k), stop_target, opts, tol.cond)?;
        iterations += search.evaluations;
        block_values[k] = search.achieved;
        let i_block = &search.conjugator - CMatrix::identity(x.dims()[k], x.dims()[k]);
        witness = witness.with_block(k, i_block)?;
        let running = global(&block_values).min(history.last().map(|h| h.1).unwrap_or(f64::INFINITY));
        history.push((iterations, running));
        if search.achieved > stop_target && search.evaluations >= opts.max_iter {
            converged = false;
        }
    }
    let conjugated = x.conjugate(&witness, ideal, tol.cond)?;
    let value = conjugated.norm();
    let attained = qnorm > rho + opts.solver_tol;
    if value > target + opts.solver_tol {
        converged = false;
    }
    Ok(RadiusResult { value, witness, attained, converged, iterations, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockalg::BlockAlgebra;
    use crate::cmatrix::from_rows;
    use alloc::vec;

    #[test]
    fn theoretical_min_examples() {
        // Murphy-West case: I = A gives rho(x)
        let alg = BlockAlgebra::new(vec![2]).unwrap();
        let x = BlockElement::new(
            &alg,
            vec![from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)])],
        )
        .unwrap();
        let all = IdealSpec::full(&alg);
        assert!(theoretical_min(&x, &all).unwrap() < 1e-12);

        // normal x: the value is |x| for any ideal
        let alg = BlockAlgebra::new(vec![1, 1]).unwrap();
        let x = BlockElement::new(
            &alg,
            vec![from_rows(1, &[(0.0, 2.0)]), from_rows(1, &[(1.0, 0.0)])],
        )
        .unwrap();
        let ideal = IdealSpec::new(&alg, [0]).unwrap();
        assert!((theoretical_min(&x, &ideal).unwrap() - 2.0).abs() < 1e-12);

        // mixed: quotient norm 0.5 vs supported-block rho 0
        let alg = BlockAlgebra::new(vec![2, 1]).unwrap();
        let x = BlockElement::new(
            &alg,
            vec![
                from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
                from_rows(1, &[(0.5, 0.0)]),
            ],
        )
        .unwrap();
        let ideal = IdealSpec::new(&alg, [0]).unwrap();
        assert!((theoretical_min(&x, &ideal).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn schedule_scales_nilpotent() {
        let x = from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let v = schedule_value(&x, 0.01).unwrap();
        assert!((v - 0.01).abs() < 1e-12);
        // the returned conjugator realizes the same value
        let g = schur_diagonal_schedule(&x, 0.01).unwrap();
        let gi = g.clone().try_inverse().unwrap();
        let direct = linalg::operator_norm(&(&g * &x * gi));
        assert!((direct - 0.01).abs() < 1e-10);
    }

    #[test]
    fn schedule_on_normal_matrix_hits_rho() {
        let x = from_rows(2, &[(2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]);
        for eps in [0.5, 0.1, 0.01] {
            let v = schedule_value(&x, eps).unwrap();
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_example_2x2() {
        let x = from_rows(2, &[(1.0, 0.0), (10.0, 0.0), (0.0, 0.0), (2.0, 0.0)]);
        let v = schedule_value(&x, 1e-3).unwrap();
        assert!((v - 2.0).abs() < 1e-2, "value {v}");
    }

    #[test]
    fn eps_validation() {
        let x = from_rows(1, &[(1.0, 0.0)]);
        assert!(matches!(schedule_value(&x, 0.0), Err(Error::EpsOutOfRange { .. })));
        assert!(matches!(schedule_value(&x, 1.0), Err(Error::EpsOutOfRange { .. })));
    }

    #[test]
    fn minimizer_murphy_west_nilpotent() {
        let alg = BlockAlgebra::new(vec![2]).unwrap();
        let x = BlockElement::new(
            &alg,
            vec![from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)])],
        )
        .unwrap();
        let all = IdealSpec::full(&alg);
        let res = min_similarity_norm(&x, &all, &RadiusOptions::default(), &Tolerances::default())
            .unwrap();
        assert!(res.value <= 1e-3, "value {}", res.value);
        assert!(!res.attained);
        assert!(res.converged);
    }

    #[test]
    fn minimizer_two_blocks_attained() {
        let alg = BlockAlgebra::new(vec![2, 2]).unwrap();
        let x = BlockElement::new(
            &alg,
            vec![
                from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
                from_rows(2, &[(0.5, 0.0), (0.0, 0.0), (0.0, 0.0), (0.5, 0.0)]),
            ],
        )
        .unwrap();
        let ideal = IdealSpec::new(&alg, [0]).unwrap();
        let res = min_similarity_norm(&x, &ideal, &RadiusOptions::default(), &Tolerances::default())
            .unwrap();
        assert!((res.value - 0.5).abs() < 1e-6, "value {}", res.value);
        assert!(res.attained);
        // witness feasibility: off-support block exactly zero
        assert_eq!(linalg::operator_norm(res.witness.block(1)), 0.0);
    }

    #[test]
    fn minimizer_empty_ideal() {
        let alg = BlockAlgebra::new(vec![2]).unwrap();
        let x = BlockElement::new(
            &alg,
            vec![from_rows(2, &[(0.0, 0.0), (3.0, 0.0), (0.0, 0.0), (0.0, 0.0)])],
        )
        .unwrap();
        let none = IdealSpec::empty(&alg);
        let res = min_similarity_norm(&x, &none, &RadiusOptions::default(), &Tolerances::default())
            .unwrap();
        assert_eq!(res.value, 3.0);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn history_running_min_is_monotone() {
        let alg = BlockAlgebra::new(vec![3, 2]).unwrap();
        let x = BlockElement::new(
            &alg,
            vec![
                from_rows(
                    3,
                    &[
                        (0.0, 0.0), (2.0, 0.0), (1.0, 0.0),
                        (0.0, 0.0), (0.0, 0.0), (2.0, 0.0),
                        (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
                    ],
                ),
                from_rows(2, &[(0.25, 0.0), (0.0, 0.0), (0.0, 0.0), (-0.25, 0.0)]),
            ],
        )
        .unwrap();
        let ideal = IdealSpec::new(&alg, [0]).unwrap();
        let res = min_similarity_norm(&x, &ideal, &RadiusOptions::default(), &Tolerances::default())
            .unwrap();
        for w in res.history.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-15);
        }
        assert!((res.value - 0.25).abs() < 1e-4);
    }
}
