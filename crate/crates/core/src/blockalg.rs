//! Finite direct sums of full matrix algebras with block-subset ideals:
//! the concrete arena in which quotients are exact restrictions and every
//! lifting statement can be checked block by block.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cmatrix::{CMatrix, C64};
use crate::error::Error;
use crate::linalg;
use crate::polynomial::RootedPolynomial;
use crate::Result;

/// A direct sum `M_{n_1} + ... + M_{n_K}` described by its block sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAlgebra {
    dims: Vec<usize>,
}

impl BlockAlgebra {
    /// At least one block, every block of positive size.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument(String::from(
                "a block algebra needs at least one block",
            )));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument(String::from(
                "block dimensions must be positive",
            )));
        }
        Ok(BlockAlgebra { dims })
    }

    /// The zero algebra. Not constructible through `new`; it only occurs as
    /// the codomain of a quotient by everything.
    pub fn zero() -> Self {
        BlockAlgebra { dims: Vec::new() }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    /// The sub-sum over blocks *outside* the ideal support (the quotient
    /// algebra, since quotients drop supported blocks).
    pub fn quotient_algebra(&self, ideal: &IdealSpec) -> Result<BlockAlgebra> {
        ideal.check_algebra(self)?;
        let dims = ideal.complement(self.num_blocks()).iter().map(|&k| self.dims[k]).collect();
        Ok(BlockAlgebra { dims })
    }
}

/// An element of a block algebra: one square complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockElement {
    dims: Vec<usize>,
    blocks: Vec<CMatrix>,
}

impl BlockElement {
    pub fn new(algebra: &BlockAlgebra, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(algebra.dims()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "block {} must be {}x{}, got {}x{}",
                    k + 1,
                    n,
                    n,
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(BlockElement { dims: algebra.dims().to_vec(), blocks })
    }

    pub fn zero(algebra: &BlockAlgebra) -> Self {
        let blocks = algebra.dims().iter().map(|&n| CMatrix::zeros(n, n)).collect();
        BlockElement { dims: algebra.dims().to_vec(), blocks }
    }

    pub fn identity(algebra: &BlockAlgebra) -> Self {
        let blocks = algebra.dims().iter().map(|&n| CMatrix::identity(n, n)).collect();
        BlockElement { dims: algebra.dims().to_vec(), blocks }
    }

    pub fn algebra(&self) -> BlockAlgebra {
        BlockAlgebra { dims: self.dims.clone() }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    /// Replaces one block, keeping dimensions.
    pub fn with_block(mut self, k: usize, b: CMatrix) -> Result<Self> {
        if b.nrows() != self.dims[k] || b.ncols() != self.dims[k] {
            return Err(Error::ShapeMismatch(alloc::format!(
                "block {} must be {n}x{n}",
                k + 1,
                n = self.dims[k]
            )));
        }
        self.blocks[k] = b;
        Ok(self)
    }

    /// Operator norm: the largest singular value over all blocks (0 for the
    /// empty element).
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::operator_norm).fold(0.0, f64::max)
    }

    /// Largest eigenvalue modulus over all blocks.
    pub fn spectral_radius(&self) -> Result<f64> {
        let mut rho = 0.0f64;
        for b in &self.blocks {
            rho = rho.max(linalg::spectral_radius(b)?);
        }
        Ok(rho)
    }

    /// Image in the quotient by `I`: the supported blocks are dropped and
    /// the surviving blocks are copied verbatim, so the quotient norm is
    /// exactly the norm of the result.
    pub fn quotient(&self, ideal: &IdealSpec) -> Result<BlockElement> {
        ideal.check_dims(&self.dims)?;
        let keep = ideal.complement(self.dims.len());
        Ok(BlockElement {
            dims: keep.iter().map(|&k| self.dims[k]).collect(),
            blocks: keep.iter().map(|&k| self.blocks[k].clone()).collect(),
        })
    }

    /// `(1+i) x (1+i)^{-1}` for `i` supported on the ideal. Blocks outside
    /// the support are returned untouched, bit for bit.
    pub fn conjugate(&self, i: &BlockElement, ideal: &IdealSpec, cond_bound: f64) -> Result<BlockElement> {
        ideal.check_dims(&self.dims)?;
        if i.dims != self.dims {
            return Err(Error::ShapeMismatch(String::from(
                "conjugator must live in the same algebra",
            )));
        }
        // membership in the ideal: off-support blocks of i exactly zero
        for (k, b) in i.blocks.iter().enumerate() {
            if !ideal.contains(k) && b.iter().any(|z| z.norm() != 0.0) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "conjugator has a nonzero block {} outside the ideal support",
                    k + 1
                )));
            }
        }
        // condition of 1+i across all blocks (identity off the support)
        let mut sig_hi = 1.0f64;
        let mut sig_lo = 1.0f64;
        for k in ideal.support() {
            let one_plus = &CMatrix::identity(self.dims[*k], self.dims[*k]) + &i.blocks[*k];
            let sv = linalg::singular_values(&one_plus);
            match (sv.first(), sv.last()) {
                (Some(&hi), Some(&lo)) => {
                    sig_hi = sig_hi.max(hi);
                    sig_lo = sig_lo.min(lo);
                }
                _ => {}
            }
        }
        let cond = if sig_lo == 0.0 { f64::INFINITY } else { sig_hi / sig_lo };
        if !cond.is_finite() || cond > cond_bound {
            return Err(Error::IllConditioned { cond, bound: cond_bound });
        }
        let mut blocks = self.blocks.clone();
        for k in ideal.support() {
            let n = self.dims[*k];
            let one_plus = &CMatrix::identity(n, n) + &i.blocks[*k];
            let inv = linalg::guarded_inverse(&one_plus, cond_bound)?;
            blocks[*k] = &one_plus * &self.blocks[*k] * inv;
        }
        Ok(BlockElement { dims: self.dims.clone(), blocks })
    }

    /// Largest blockwise residual of `p` on this element (each block gets
    /// the matrix evaluation).
    pub fn relation_residual(&self, p: &RootedPolynomial) -> Result<f64> {
        let mut worst = 0.0f64;
        for b in &self.blocks {
            worst = worst.max(linalg::operator_norm(&p.evaluate(b)?));
        }
        Ok(worst)
    }

    /// Entrywise difference norm, for exactness checks in tests.
    pub fn max_entry_distance(&self, other: &BlockElement) -> f64 {
        assert_eq!(self.dims, other.dims, "same algebra required");
        let mut worst = 0.0f64;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }
}

/// An ideal of the block algebra: the sub-sum over a support set of block
/// indices (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealSpec {
    num_blocks: usize,
    support: BTreeSet<usize>,
}

impl IdealSpec {
    pub fn new(algebra: &BlockAlgebra, support: impl IntoIterator<Item = usize>) -> Result<Self> {
        let num_blocks = algebra.num_blocks();
        let support: BTreeSet<usize> = support.into_iter().collect();
        if let Some(&bad) = support.iter().find(|&&k| k >= num_blocks) {
            return Err(Error::SupportOutOfRange { index: bad, blocks: num_blocks });
        }
        Ok(IdealSpec { num_blocks, support })
    }

    /// The zero ideal.
    pub fn empty(algebra: &BlockAlgebra) -> Self {
        IdealSpec { num_blocks: algebra.num_blocks(), support: BTreeSet::new() }
    }

    /// The whole algebra as an ideal.
    pub fn full(algebra: &BlockAlgebra) -> Self {
        IdealSpec {
            num_blocks: algebra.num_blocks(),
            support: (0..algebra.num_blocks()).collect(),
        }
    }

    pub fn support(&self) -> impl Iterator<Item = &usize> {
        self.support.iter()
    }

    pub fn support_set(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn contains(&self, k: usize) -> bool {
        self.support.contains(&k)
    }

    pub fn is_subset_of(&self, other: &IdealSpec) -> bool {
        self.support.is_subset(&other.support)
    }

    /// Block indices outside the support, ascending: the blocks that
    /// survive the quotient.
    pub fn complement(&self, num_blocks: usize) -> Vec<usize> {
        (0..num_blocks).filter(|k| !self.support.contains(k)).collect()
    }

    fn check_algebra(&self, algebra: &BlockAlgebra) -> Result<()> {
        if algebra.num_blocks() != self.num_blocks {
            return Err(Error::ShapeMismatch(alloc::format!(
                "ideal over {} blocks used with an algebra of {} blocks",
                self.num_blocks,
                algebra.num_blocks()
            )));
        }
        Ok(())
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if dims.len() != self.num_blocks {
            return Err(Error::ShapeMismatch(alloc::format!(
                "ideal over {} blocks used with an element of {} blocks",
                self.num_blocks,
                dims.len()
            )));
        }
        Ok(())
    }
}

/// An increasing chain of block-subset ideals. The union is the last
/// member; in this finite model every chain stabilizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealChain {
    stages: Vec<IdealSpec>,
}

impl IdealChain {
    pub fn new(stages: Vec<IdealSpec>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument(String::from(
                "an ideal chain needs at least one stage",
            )));
        }
        for w in stages.windows(2) {
            if w[0].num_blocks() != w[1].num_blocks() {
                return Err(Error::ShapeMismatch(String::from(
                    "chain stages over different algebras",
                )));
            }
        }
        for (pos, w) in stages.windows(2).enumerate() {
            if !w[0].is_subset_of(&w[1]) {
                return Err(Error::ChainNotMonotone { position: pos + 1 });
            }
        }
        Ok(IdealChain { stages })
    }

    pub fn stages(&self) -> &[IdealSpec] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// The union ideal `I_infinity` (the last stage).
    pub fn limit(&self) -> &IdealSpec {
        self.stages.last().expect("chains are nonempty")
    }

    /// First stage index (1-based) whose support already equals the limit.
    pub fn stabilization_index(&self) -> usize {
        let limit = self.limit();
        for (n, stage) in self.stages.iter().enumerate() {
            if stage.support_set() == limit.support_set() {
                return n + 1;
            }
        }
        self.stages.len()
    }
}

/// Quotient residue: maps an element of `A/I_n` further down to `A/I_m`
/// for a later stage `m >= n` of the chain (dropping the extra blocks).
pub fn push_down(
    x: &BlockElement,
    algebra: &BlockAlgebra,
    from: &IdealSpec,
    to: &IdealSpec,
) -> Result<BlockElement> {
    if !from.is_subset_of(to) {
        return Err(Error::InvalidArgument(String::from(
            "push_down requires increasing ideals",
        )));
    }
    let keep_from = from.complement(algebra.num_blocks());
    if x.num_blocks() != keep_from.len() {
        return Err(Error::ShapeMismatch(String::from(
            "element does not match the source quotient",
        )));
    }
    let mut dims = Vec::new();
    let mut blocks = Vec::new();
    for (pos, &orig) in keep_from.iter().enumerate() {
        if !to.contains(orig) {
            dims.push(x.dims()[pos]);
            blocks.push(x.blocks()[pos].clone());
        }
    }
    Ok(BlockElement { dims, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::{c, from_rows};

    fn algebra_2_1() -> BlockAlgebra {
        BlockAlgebra::new(alloc::vec![2, 1]).unwrap()
    }

    #[test]
    fn norm_examples() {
        let alg = algebra_2_1();
        let zero = BlockElement::zero(&alg);
        assert_eq!(zero.norm(), 0.0);
        let x = BlockElement::new(
            &alg,
            alloc::vec![
                from_rows(2, &[(0.0, 0.0), (2.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
                from_rows(1, &[(1.0, 0.0)]),
            ],
        )
        .unwrap();
        assert!((x.norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_radius_examples() {
        let alg = BlockAlgebra::new(alloc::vec![2]).unwrap();
        let nil = BlockElement::new(
            &alg,
            alloc::vec![from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)])],
        )
        .unwrap();
        assert!(nil.spectral_radius().unwrap() < 1e-12);
        let alg = BlockAlgebra::new(alloc::vec![1, 1]).unwrap();
        let d = BlockElement::new(
            &alg,
            alloc::vec![from_rows(1, &[(2.0, 0.0)]), from_rows(1, &[(-3.0, 0.0)])],
        )
        .unwrap();
        assert!((d.spectral_radius().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quotient_examples() {
        let alg = algebra_2_1();
        let x = BlockElement::new(
            &alg,
            alloc::vec![
                from_rows(2, &[(3.0, 0.0), (0.0, 0.0), (0.0, 0.0), (3.0, 0.0)]),
                from_rows(1, &[(1.0, 0.0)]),
            ],
        )
        .unwrap();
        let all = IdealSpec::full(&alg);
        let q = x.quotient(&all).unwrap();
        assert_eq!(q.num_blocks(), 0);
        assert_eq!(q.norm(), 0.0);

        let none = IdealSpec::empty(&alg);
        let q = x.quotient(&none).unwrap();
        assert_eq!(q, x);

        let first = IdealSpec::new(&alg, [0]).unwrap();
        let q = x.quotient(&first).unwrap();
        assert_eq!(q.num_blocks(), 1);
        assert!((q.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn conjugate_entrywise_scaling() {
        let alg = BlockAlgebra::new(alloc::vec![2]).unwrap();
        let x = BlockElement::new(
            &alg,
            alloc::vec![from_rows(2, &[(0.0, 0.0), (5.0, 0.0), (0.0, 0.0), (0.0, 0.0)])],
        )
        .unwrap();
        let ideal = IdealSpec::full(&alg);
        // i = diag(0, 4) so 1+i = diag(1, 5)
        let i = BlockElement::new(
            &alg,
            alloc::vec![from_rows(2, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (4.0, 0.0)])],
        )
        .unwrap();
        let y = x.conjugate(&i, &ideal, 1e12).unwrap();
        let expect = from_rows(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(linalg::operator_norm(&(y.block(0) - expect)) < 1e-12);

        // i = 0 leaves x untouched
        let zero = BlockElement::zero(&alg);
        assert_eq!(x.conjugate(&zero, &ideal, 1e12).unwrap(), x);
    }

    #[test]
    fn conjugate_guards() {
        let alg = algebra_2_1();
        let x = BlockElement::zero(&alg);
        let ideal = IdealSpec::new(&alg, [0]).unwrap();
        // nonzero off-support block is not in the ideal
        let mut bad = BlockElement::zero(&alg);
        bad.blocks[1][(0, 0)] = c(1.0, 0.0);
        assert!(x.conjugate(&bad, &ideal, 1e12).is_err());
        // singular 1+i
        let mut sing = BlockElement::zero(&alg);
        sing.blocks[0][(0, 0)] = c(-1.0, 0.0);
        assert!(matches!(
            x.conjugate(&sing, &ideal, 1e12),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn chain_validation() {
        let alg = algebra_2_1();
        let s1 = IdealSpec::new(&alg, [0]).unwrap();
        let s2 = IdealSpec::full(&alg);
        assert!(IdealChain::new(alloc::vec![s1.clone(), s2.clone()]).is_ok());
        let err = IdealChain::new(alloc::vec![s2, s1]);
        assert!(matches!(err, Err(Error::ChainNotMonotone { .. })));
    }

    #[test]
    fn stabilization_index() {
        let alg = BlockAlgebra::new(alloc::vec![1, 1, 1]).unwrap();
        let s1 = IdealSpec::new(&alg, [0]).unwrap();
        let s2 = IdealSpec::new(&alg, [0, 1]).unwrap();
        let chain = IdealChain::new(alloc::vec![s1, s2.clone(), s2]).unwrap();
        assert_eq!(chain.stabilization_index(), 2);
    }

    #[test]
    fn push_down_matches_direct_quotient() {
        let alg = BlockAlgebra::new(alloc::vec![1, 2, 1]).unwrap();
        let x = BlockElement::new(
            &alg,
            alloc::vec![
                from_rows(1, &[(1.0, 0.0)]),
                from_rows(2, &[(0.0, 0.0), (2.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
                from_rows(1, &[(3.0, 0.0)]),
            ],
        )
        .unwrap();
        let s1 = IdealSpec::new(&alg, [0]).unwrap();
        let s2 = IdealSpec::new(&alg, [0, 2]).unwrap();
        let at1 = x.quotient(&s1).unwrap();
        let pushed = push_down(&at1, &alg, &s1, &s2).unwrap();
        assert_eq!(pushed, x.quotient(&s2).unwrap());
    }
}
