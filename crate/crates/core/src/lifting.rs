//! Relation-preserving lifts across quotients of a block algebra:
//! norm-correcting conjugation, projective lifting of nilpotent
//! contractions, lifting of projection families over ideal chains,
//! semiprojective lifting of polynomial contractions, and flag-prefix
//! finite-dimensional approximants.

use alloc::string::String;
use alloc::vec::Vec;

use crate::blockalg::{push_down, BlockAlgebra, BlockElement, IdealChain, IdealSpec};
use crate::cmatrix::{cre, CMatrix, C64};
use crate::decomp::{self, PeelState};
use crate::error::Error;
use crate::linalg;
use crate::polynomial::RootedPolynomial;
use crate::radius::{best_block_conjugator, RadiusOptions};
use crate::tol::Tolerances;
use crate::Result;

/// Conjugates the ideal-supported blocks of `x` so the norm drops to the
/// quotient norm `target`, leaving the quotient image untouched bit for
/// bit. Refuses when the target is not strictly above the spectral radius
/// (no similarity can get there).
pub fn conjugate_to_norm(
    x: &BlockElement,
    ideal: &IdealSpec,
    target: f64,
    opts: &RadiusOptions,
    tol: &Tolerances,
) -> Result<BlockElement> {
    let qnorm = x.quotient(ideal)?.norm();
    if (qnorm - target).abs() > 1e-9 * (1.0 + target) {
        return Err(Error::InvalidArgument(alloc::format!(
            "quotient norm {qnorm:.9} does not equal the target {target:.9}"
        )));
    }
    let rho = x.spectral_radius()?;
    if target <= rho + tol.margin_at(target) {
        return Err(Error::NormTargetUnreachable { target, spectral_radius: rho });
    }
    let mut witness = BlockElement::zero(&x.algebra());
    let stop = target + 1e-12 * (1.0 + target);
    for &k in ideal.support() {
        if linalg::operator_norm(x.block(k)) <= stop {
            continue;
        }
        let search = best_block_conjugator(x.block(k), stop, opts, tol.cond)?;
        let n = x.dims()[k];
        witness = witness.with_block(k, &search.conjugator - CMatrix::identity(n, n))?;
    }
    let lifted = x.conjugate(&witness, ideal, tol.cond)?;
    let achieved = lifted.norm();
    if (achieved - target).abs() > 1e-6 * (1.0 + target) {
        return Err(Error::ToleranceConflict(alloc::format!(
            "norm correction reached {achieved:.9}, target {target:.9}"
        )));
    }
    Ok(lifted)
}

/// Lifts a nilpotent contraction (`x^n ~ 0`, `|x| <= c`) from the quotient
/// by `ideal` to the full algebra: the supported blocks are free and take
/// the seed (strictly nilpotent, default zero); a seed that pushes the
/// norm above `|x|` is corrected by [`conjugate_to_norm`].
pub fn lift_nilpotent(
    algebra: &BlockAlgebra,
    x: &BlockElement,
    ideal: &IdealSpec,
    n: usize,
    c: f64,
    free_seed: Option<&[CMatrix]>,
    opts: &RadiusOptions,
    tol: &Tolerances,
) -> Result<BlockElement> {
    if n == 0 {
        return Err(Error::InvalidArgument(String::from("nilpotency order must be positive")));
    }
    if c < 0.0 {
        return Err(Error::InvalidArgument(String::from("norm bound must be nonnegative")));
    }
    let quotient_algebra = algebra.quotient_algebra(ideal)?;
    if x.dims() != quotient_algebra.dims() {
        return Err(Error::ShapeMismatch(String::from(
            "element does not live in the quotient by the ideal",
        )));
    }
    let xnorm = x.norm();
    if xnorm > c + 1e-10 {
        return Err(Error::InvalidArgument(alloc::format!(
            "quotient element has norm {xnorm:.9} above the bound {c:.9}"
        )));
    }
    let relation = nilpotency_relation(n);
    let residual = x.relation_residual(&relation)?;
    let bound = tol.relation_tol(xnorm, n);
    if residual > bound {
        return Err(Error::RelationViolated { residual, tol: bound });
    }
    // degenerate branches: the zero lift
    if c == 0.0 || xnorm == 0.0 {
        return Ok(BlockElement::zero(algebra));
    }
    // assemble: surviving blocks verbatim, supported blocks from the seed
    let keep = ideal.complement(algebra.num_blocks());
    let support: Vec<usize> = ideal.support().copied().collect();
    if let Some(seed) = free_seed {
        if seed.len() != support.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "expected {} seed blocks, got {}",
                support.len(),
                seed.len()
            )));
        }
    }
    let mut blocks: Vec<CMatrix> = algebra.dims().iter().map(|&d| CMatrix::zeros(d, d)).collect();
    for (pos, &orig) in keep.iter().enumerate() {
        blocks[orig] = x.blocks()[pos].clone();
    }
    if let Some(seed) = free_seed {
        for (pos, &orig) in support.iter().enumerate() {
            let s = &seed[pos];
            let snorm = linalg::operator_norm(s);
            let power_residual = linalg::operator_norm(&linalg::matrix_power(s, n));
            if power_residual > 1e-12 * libm::pow(1.0 + snorm, n as f64) {
                return Err(Error::InvalidArgument(String::from(
                    "seed block is not nilpotent of the required order",
                )));
            }
            blocks[orig] = s.clone();
        }
    }
    let assembled = BlockElement::new(algebra, blocks)?;
    let lifted = if assembled.norm() > xnorm + 1e-12 * (1.0 + xnorm) {
        conjugate_to_norm(&assembled, ideal, xnorm, opts, tol)?
    } else {
        assembled
    };
    // contract checks: quotient match is exact by construction
    let res = lifted.relation_residual(&relation)?;
    let res_bound = 1e-10 * libm::pow(1.0 + lifted.norm(), n as f64);
    if res > res_bound {
        return Err(Error::ToleranceConflict(alloc::format!(
            "nilpotency residual {res:.3e} above {res_bound:.3e} after correction"
        )));
    }
    Ok(lifted)
}

fn nilpotency_relation(n: usize) -> RootedPolynomial {
    RootedPolynomial::new(alloc::vec![(cre(0.0), n)]).expect("x^n is a valid relation")
}

fn projection_defect(p: &BlockElement) -> f64 {
    let mut worst = 0.0f64;
    for b in p.blocks() {
        worst = worst.max(linalg::operator_norm(&(b * b - b)));
        worst = worst.max(linalg::operator_norm(&(b - &b.adjoint())));
    }
    worst
}

fn family_defect(family: &[BlockElement], algebra_dims: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for p in family {
        worst = worst.max(projection_defect(p));
    }
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            for (a, b) in family[i].blocks().iter().zip(family[j].blocks()) {
                worst = worst.max(linalg::operator_norm(&(a * b)));
            }
        }
    }
    for (k, &d) in algebra_dims.iter().enumerate() {
        let mut sum = CMatrix::zeros(d, d);
        for p in family {
            sum += p.block(k);
        }
        worst = worst.max(linalg::operator_norm(&(sum - CMatrix::identity(d, d))));
    }
    worst
}

// Lifted family at one chain stage: blocks that survive to the limit copy
// the quotient projections; free blocks allocate the whole identity to the
// last family member.
fn lift_family_at_stage(
    family: &[BlockElement],
    algebra: &BlockAlgebra,
    chain: &IdealChain,
    stage: usize,
) -> Result<Vec<BlockElement>> {
    let limit = chain.limit();
    let spec = &chain.stages()[stage - 1];
    let stage_algebra = algebra.quotient_algebra(spec)?;
    let stage_keep = spec.complement(algebra.num_blocks());
    let limit_keep = limit.complement(algebra.num_blocks());
    let mut lifted = Vec::with_capacity(family.len());
    for (idx, p) in family.iter().enumerate() {
        let last = idx + 1 == family.len();
        let mut blocks = Vec::with_capacity(stage_keep.len());
        for &orig in &stage_keep {
            let d = algebra.dims()[orig];
            if let Some(pos) = limit_keep.iter().position(|&k| k == orig) {
                blocks.push(p.blocks()[pos].clone());
            } else if last {
                blocks.push(CMatrix::identity(d, d));
            } else {
                blocks.push(CMatrix::zeros(d, d));
            }
        }
        lifted.push(BlockElement::new(&stage_algebra, blocks)?);
    }
    Ok(lifted)
}

/// Lifts a family of orthogonal projections summing to the identity in
/// `A/I_infinity` to the earliest stage of the chain; free blocks route
/// their whole rank to the last family member. Returns the 1-based stage
/// index and the lifted family.
pub fn lift_projection_family(
    family: &[BlockElement],
    algebra: &BlockAlgebra,
    chain: &IdealChain,
    tol: &Tolerances,
) -> Result<(usize, Vec<BlockElement>)> {
    if family.is_empty() {
        return Err(Error::InvalidArgument(String::from("projection family is empty")));
    }
    let limit = chain.limit();
    let quotient_algebra = algebra.quotient_algebra(limit)?;
    for p in family {
        if p.dims() != quotient_algebra.dims() {
            return Err(Error::ShapeMismatch(String::from(
                "family member does not live in the limit quotient",
            )));
        }
    }
    let defect = family_defect(family, quotient_algebra.dims());
    if defect > 1e-10 {
        return Err(Error::InvalidArgument(alloc::format!(
            "family is not an orthogonal resolution of the identity (defect {defect:.3e})"
        )));
    }
    for stage in 1..=chain.len() {
        let lifted = lift_family_at_stage(family, algebra, chain, stage)?;
        let stage_spec = &chain.stages()[stage - 1];
        let stage_algebra = algebra.quotient_algebra(stage_spec)?;
        if family_defect(&lifted, stage_algebra.dims()) <= 1e-10 {
            let _ = tol;
            return Ok((stage, lifted));
        }
    }
    Err(Error::ChainExhausted)
}

/// A lifting instance: an element of `A/I_infinity` satisfying the
/// relation within tolerance and bounded by `bound`, to be lifted to an
/// early stage of the chain.
#[derive(Debug, Clone)]
pub struct LiftProblem {
    pub algebra: BlockAlgebra,
    pub chain: IdealChain,
    pub target: BlockElement,
    pub relation: RootedPolynomial,
    pub bound: f64,
}

impl LiftProblem {
    pub fn new(
        algebra: BlockAlgebra,
        chain: IdealChain,
        target: BlockElement,
        relation: RootedPolynomial,
        bound: f64,
        tol: &Tolerances,
    ) -> Result<Self> {
        if chain.limit().num_blocks() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch(String::from("chain over a different algebra")));
        }
        let quotient_algebra = algebra.quotient_algebra(chain.limit())?;
        if target.dims() != quotient_algebra.dims() {
            return Err(Error::ShapeMismatch(String::from(
                "target does not live in the limit quotient",
            )));
        }
        if !relation.is_canonically_ordered() {
            return Err(Error::InvalidArgument(String::from(
                "relation must be canonically ordered",
            )));
        }
        if relation.is_empty_product() {
            return Err(Error::DegreeZero);
        }
        if bound < 0.0 {
            return Err(Error::InvalidArgument(String::from("bound must be nonnegative")));
        }
        let norm = target.norm();
        if norm > bound + 1e-10 {
            return Err(Error::InvalidArgument(alloc::format!(
                "target norm {norm:.9} exceeds the bound {bound:.9}"
            )));
        }
        let residual = target.relation_residual(&relation)?;
        let gate = tol.relation_tol(norm, relation.degree());
        if residual > gate {
            return Err(Error::RelationViolated { residual, tol: gate });
        }
        Ok(LiftProblem { algebra, chain, target, relation, bound })
    }
}

/// Audit fields carried by every lift report.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftCertificate {
    pub relation_residual: f64,
    pub norm_of_lift: f64,
    pub quotient_match: bool,
}

/// A successful lift: the hosting stage, the lifted element, the lifted
/// projection family used in the assembly, and the certificate.
#[derive(Debug, Clone)]
pub struct LiftReport {
    /// 1-based index of the chain stage hosting the lift.
    pub stage_index: usize,
    pub lift: BlockElement,
    pub projections_used: Vec<BlockElement>,
    pub certificate: LiftCertificate,
}

// The structure decomposition of the target, peeled blockwise under the
// global norm rule.
struct TargetDecomposition {
    m: usize,
    roots: Vec<C64>,
    projections: Vec<Vec<CMatrix>>,
    corner_isometries: Vec<CMatrix>,
    corner_blocks: Vec<CMatrix>,
    corner_norm: f64,
    residual: RootedPolynomial,
}

fn decompose_target(problem: &LiftProblem, tol: &Tolerances) -> Result<TargetDecomposition> {
    let mut states = Vec::with_capacity(problem.target.num_blocks());
    for b in problem.target.blocks() {
        let form = decomp::upper_triangularize(b, &problem.relation, tol)?;
        states.push(PeelState { isometry: form.u.clone(), s: form.r });
    }
    let margin = tol.margin_at(problem.target.norm());
    let peeling = decomp::peel_global(states, &problem.relation, margin, tol)?;
    let corner_norm = peeling.states.iter().map(|st| linalg::operator_norm(&st.s)).fold(0.0, f64::max);
    let mut roots = Vec::with_capacity(peeling.peeled.len());
    let mut projections = Vec::with_capacity(peeling.peeled.len());
    for (root, projs) in peeling.peeled {
        roots.push(root);
        projections.push(projs);
    }
    Ok(TargetDecomposition {
        m: peeling.m,
        roots,
        projections,
        corner_isometries: peeling.states.iter().map(|st| st.isometry.clone()).collect(),
        corner_blocks: peeling.states.into_iter().map(|st| st.s).collect(),
        corner_norm,
        residual: peeling.residual,
    })
}

// Projection family over the limit quotient: the peeled projections
// followed by the corner projection when a corner remains.
fn quotient_projection_family(
    problem: &LiftProblem,
    dec: &TargetDecomposition,
) -> Result<Vec<BlockElement>> {
    let quotient_algebra = problem.algebra.quotient_algebra(problem.chain.limit())?;
    let mut family = Vec::new();
    for projs in &dec.projections {
        family.push(BlockElement::new(&quotient_algebra, projs.clone())?);
    }
    if dec.residual.is_empty_product() {
        return Ok(family);
    }
    let corner: Vec<CMatrix> =
        dec.corner_isometries.iter().map(|v| v * v.adjoint()).collect();
    family.push(BlockElement::new(&quotient_algebra, corner)?);
    Ok(family)
}

/// Attempts the semiprojective lift at one forced stage of the chain
/// (1-based). Used by [`lift_polynomial_contraction`], which scans stages
/// in order, and by feasibility scans in tests.
pub fn lift_at_stage(
    problem: &LiftProblem,
    stage: usize,
    opts: &RadiusOptions,
    tol: &Tolerances,
) -> Result<LiftReport> {
    if stage == 0 || stage > problem.chain.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "stage {stage} out of range 1..={}",
            problem.chain.len()
        )));
    }
    let dec = decompose_target(problem, tol)?;
    let family = quotient_projection_family(problem, &dec)?;
    let projections_used = lift_family_at_stage(&family, &problem.algebra, &problem.chain, stage)?;

    let stage_spec = &problem.chain.stages()[stage - 1];
    let stage_algebra = problem.algebra.quotient_algebra(stage_spec)?;
    let stage_keep = stage_spec.complement(problem.algebra.num_blocks());
    let limit = problem.chain.limit();
    let limit_keep = limit.complement(problem.algebra.num_blocks());
    let free_positions: Vec<usize> = stage_keep
        .iter()
        .enumerate()
        .filter(|(_, &orig)| limit.contains(orig))
        .map(|(pos, _)| pos)
        .collect();

    // the scalar that fills free blocks: the corner root when a corner
    // remains, otherwise the smallest-modulus root (the last family member
    // owns the free rank either way)
    let has_corner = !dec.residual.is_empty_product();
    let fill_root = if has_corner {
        dec.residual.factors()[0].root
    } else {
        problem
            .relation
            .factors()
            .last()
            .expect("relation has at least one root")
            .root
    };
    if !free_positions.is_empty() {
        if has_corner {
            // the corner must strictly dominate the remaining roots for the
            // norm equalization of the corner lift to apply
            let margin = tol.margin_at(problem.target.norm());
            if dec.corner_norm <= fill_root.norm() + margin {
                return Err(Error::ToleranceConflict(alloc::format!(
                    "corner norm {:.9} within margin of the next root modulus {:.9}",
                    dec.corner_norm,
                    fill_root.norm()
                )));
            }
        } else if fill_root.norm() > problem.bound + 1e-6 {
            // no corner: the free fill realizes the smallest root exactly,
            // which must fit under the bound
            return Err(Error::InvalidArgument(alloc::format!(
                "free blocks need norm {:.9}, above the bound {:.9}",
                fill_root.norm(),
                problem.bound
            )));
        }
    }

    // assemble: target blocks verbatim, free blocks filled with the scalar
    let mut blocks = Vec::with_capacity(stage_keep.len());
    for (pos, &orig) in stage_keep.iter().enumerate() {
        let d = problem.algebra.dims()[orig];
        if let Some(limit_pos) = limit_keep.iter().position(|&k| k == orig) {
            blocks.push(problem.target.blocks()[limit_pos].clone());
        } else {
            debug_assert!(free_positions.contains(&pos));
            blocks.push(CMatrix::identity(d, d) * fill_root);
        }
    }
    let mut lift = BlockElement::new(&stage_algebra, blocks)?;

    // norm-equalize the corner across the free blocks; with the scalar
    // initializer the free corner norms already sit at |fill_root| < |s|,
    // so the conjugation is the identity unless a future seed raises them
    if has_corner && !free_positions.is_empty() {
        let corner_target = dec.corner_norm.max(problem.target.norm());
        let free_norm = free_positions
            .iter()
            .map(|&pos| linalg::operator_norm(lift.block(pos)))
            .fold(0.0, f64::max);
        if free_norm > corner_target {
            let free_ideal = IdealSpec::new(&stage_algebra, free_positions.iter().copied())?;
            lift = conjugate_to_norm(&lift, &free_ideal, problem.target.norm(), opts, tol)?;
        }
    }

    // certificate
    let relation_residual = lift.relation_residual(&problem.relation)?;
    let norm_of_lift = lift.norm();
    let pushed = push_down(&lift, &problem.algebra, stage_spec, limit)?;
    let quotient_match = pushed == problem.target;
    let gate = tol.relation_tol(norm_of_lift, problem.relation.degree());
    if relation_residual > gate {
        return Err(Error::RelationViolated { residual: relation_residual, tol: gate });
    }
    if norm_of_lift > problem.bound + 1e-6 {
        return Err(Error::InvalidArgument(alloc::format!(
            "lift norm {norm_of_lift:.9} exceeds the bound {:.9}",
            problem.bound
        )));
    }
    if !quotient_match {
        return Err(Error::ToleranceConflict(String::from(
            "lift does not restrict to the target",
        )));
    }
    Ok(LiftReport {
        stage_index: stage,
        lift,
        projections_used,
        certificate: LiftCertificate { relation_residual, norm_of_lift, quotient_match },
    })
}

/// Lifts a polynomial contraction over the ideal chain, reporting the
/// earliest stage whose construction passes every certificate.
pub fn lift_polynomial_contraction(
    problem: &LiftProblem,
    opts: &RadiusOptions,
    tol: &Tolerances,
) -> Result<LiftReport> {
    let mut last_err = Error::ChainExhausted;
    for stage in 1..=problem.chain.len() {
        match lift_at_stage(problem, stage, opts, tol) {
            Ok(report) => return Ok(report),
            Err(e) => last_err = e,
        }
    }
    Err(match last_err {
        Error::ChainExhausted => Error::ChainExhausted,
        other => other,
    })
}

/// One finite-dimensional approximant: the leading flag-prefix compression
/// of the triangular form.
#[derive(Debug, Clone)]
pub struct Approximant {
    /// Size that was asked for.
    pub requested: usize,
    /// Size actually used after snapping down to a flag boundary.
    pub used: usize,
    pub matrix: CMatrix,
}

/// Flag-prefix compressions of the triangular form of `t`: for each
/// requested size (snapped down to a flag-block boundary so the labeled
/// diagonal structure survives), the leading principal submatrix of `r`.
/// Every approximant satisfies the relation and never exceeds the norm of
/// `t`; the full-size compression reconstructs `t` up to the unitary.
pub fn finite_dim_approximants(
    t: &CMatrix,
    p: &RootedPolynomial,
    dims: &[usize],
    tol: &Tolerances,
) -> Result<Vec<Approximant>> {
    let n = t.nrows();
    for w in dims.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidArgument(String::from(
                "approximant sizes must be strictly increasing",
            )));
        }
    }
    if let Some(&last) = dims.last() {
        if last > n {
            return Err(Error::InvalidArgument(alloc::format!(
                "approximant size {last} exceeds the matrix size {n}"
            )));
        }
    }
    let form = decomp::upper_triangularize(t, p, tol)?;
    let boundaries = form.prefix_boundaries();
    let mut out = Vec::with_capacity(dims.len());
    for &requested in dims {
        let used = boundaries.iter().copied().filter(|&b| b <= requested).max().unwrap_or(0);
        let matrix = form.r.view((0, 0), (used, used)).into_owned();
        out.push(Approximant { requested, used, matrix });
    }
    Ok(out)
}
