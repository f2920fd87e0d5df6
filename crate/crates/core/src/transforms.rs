//! The diagonal union and its unitary weighting.
//!
//! For a factorization `F = {H_0, …, H_{k−1}}` of a digraph on `n`
//! vertices, the depth-1 union has adjacency `(J_k ⊗ I_n) · ⊕ M(H_j)`:
//! every block row repeats `[M(H_0) | … | M(H_{k−1})]`. Vertex `u` of copy
//! `j` gets index `j·n + u`, so `j·n + u → j'·n + v` iff `(u, v) ∈ H_{j'}`.
//!
//! Depth `t ≥ 2` re-applies the construction to the depth-`(t−1)` union
//! `M_{t−1}` (of size `s_{t−1} = k^{t−1}·n`), factored into the summands
//! `Q_l = ρ(l) ∘_G M_{t−1}`, `l ∈ Z_k`:
//!
//! ```text
//! M_t = (J_k ⊗ I_{s_{t−1}}) · ⊕_l Q_l
//! ```
//!
//! The identity factor is sized `s_{t−1}`, the only size for which the
//! product is defined when `k ≠ n`.
//!
//! Two routes are provided for every construction: an arc rule working on
//! sorted arc lists, used for production sizes, and the dense matrix
//! formula, used to cross-check it.

use num_complex::Complex64;
use thiserror::Error;

use crate::digraph::{check_limit, vertex_limit, Digraph, GraphError};
use crate::factorization::{Factorization, Violation};
use crate::matrix::{
    is_unitary, rho_reg_zk, DenseMatrix, MatrixError, PermutationMatrix, SUPPORT_TOL, UNITARY_TOL,
};

/// Largest matrix order the dense routes will allocate.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("invalid factorization: {0}")]
    InvalidFactorization(#[from] Violation),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("result would have more than {limit} vertices")]
    VertexLimit { limit: usize },
    #[error("dense route limited to order {DENSE_LIMIT}, requested {0}")]
    TooLargeForDense(usize),
    #[error("summand Q_{index} at depth {depth} is not a permutation matrix")]
    NonPermutationSummand { depth: usize, index: usize },
    #[error("coupling must be {expected}x{expected}, got {rows}x{cols}")]
    CouplingShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("coupling is not unitary (residual {residual:e})")]
    CouplingNotUnitary { residual: f64 },
    #[error("coupling entry ({row}, {col}) is zero; the support would shrink")]
    DenseSupportViolated { row: usize, col: usize },
    #[error("factor unitary {index} is invalid: {reason}")]
    BadFactorUnitary { index: usize, reason: String },
    #[error("internal: product entry ({row}, {col}) = {value} is not 0/1")]
    Multiplicity { row: usize, col: usize, value: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A diagonal-union digraph plus the parameters that fix its labelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalUnionResult {
    pub digraph: Digraph,
    pub depth: usize,
    /// Order of the previous level, `s_{d−1} = k^{d−1}·n`.
    pub block_size: usize,
    pub factor_count: usize,
    pub base_order: usize,
}

impl DiagonalUnionResult {
    /// `(copy, vertex of the previous level)` for vertex `v`.
    pub fn copy_of(&self, v: usize) -> (usize, usize) {
        (v / self.block_size, v % self.block_size)
    }

    /// Digits of `v` in the mixed radix `(k, …, k, n)`, most significant
    /// first: the copy index chosen at each level, then the base vertex.
    pub fn address(&self, v: usize) -> Vec<usize> {
        let mut digits = Vec::with_capacity(self.depth + 1);
        let mut rest = v;
        let mut block = self.block_size;
        for _ in 0..self.depth {
            digits.push(rest / block);
            rest %= block;
            block /= self.factor_count.max(1);
        }
        digits.push(rest);
        digits
    }
}

fn checked_order(k: usize, n: usize, d: usize) -> Result<usize, TransformError> {
    let limit = vertex_limit();
    let order = u32::try_from(d)
        .ok()
        .and_then(|d| k.checked_pow(d))
        .and_then(|p| p.checked_mul(n))
        .ok_or(TransformError::VertexLimit { limit })?;
    check_limit(order).map_err(|_| TransformError::VertexLimit { limit })?;
    Ok(order)
}

/// Arc rule: `j·n + u → j'·n + v` for every copy `j` and every `(u, v) ∈ H_{j'}`.
fn union_by_arc_rule(n: usize, factors: &[Digraph]) -> Digraph {
    let k = factors.len();
    let arc_total: usize = factors.iter().map(Digraph::size).sum();
    let mut arcs = Vec::with_capacity(k * arc_total);
    for j in 0..k {
        for (jp, h) in factors.iter().enumerate() {
            arcs.extend(h.arcs().iter().map(|&(u, v)| (j * n + u, jp * n + v)));
        }
    }
    arcs.sort_unstable();
    Digraph::from_sorted_unchecked(k * n, arcs)
}

/// Splits `d` (order `k·block`) into `Q_l`: arcs whose head block is `l`
/// steps after the tail block, modulo `k`. This is `ρ(l) ∘_G M(d)`.
fn block_shift_summands(d: &Digraph, k: usize, block: usize) -> Vec<Digraph> {
    let mut parts = vec![Vec::new(); k];
    for &(x, y) in d.arcs() {
        let shift = (y / block + k - x / block) % k;
        parts[shift].push((x, y));
    }
    parts
        .into_iter()
        .map(|arcs| Digraph::from_sorted_unchecked(d.order(), arcs))
        .collect()
}

/// Reads a 0/1 digraph back off a product matrix, refusing entries above 1.
fn threshold_zero_one(m: &DenseMatrix) -> Result<Digraph, TransformError> {
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m[(r, c)];
            if z.re > 1.0 + 1e-9 || z.im.abs() > 1e-9 || z.re < -1e-9 {
                return Err(TransformError::Multiplicity {
                    row: r,
                    col: c,
                    value: z.re,
                });
            }
        }
    }
    Ok(Digraph::from_matrix(m, 0.5)?)
}

/// Depth-1 diagonal union, by the arc rule.
pub fn diagonal_union(f: &Factorization) -> Result<DiagonalUnionResult, TransformError> {
    diagonal_union_depth(f, 1)
}

/// Depth-1 diagonal union as the matrix `(J_k ⊗ I_n) · ⊕ M(H_j)`.
pub fn diagonal_union_matrix(f: &Factorization) -> Result<DenseMatrix, TransformError> {
    f.validate()?;
    let n = f.base().order();
    let k = f.len();
    if k * n > DENSE_LIMIT {
        return Err(TransformError::TooLargeForDense(k * n));
    }
    let coupling = DenseMatrix::ones(k, k).kronecker(&DenseMatrix::identity(n));
    let blocks = DenseMatrix::direct_sum(&f.factor_matrices())?;
    Ok(coupling.matmul(&blocks)?)
}

/// Depth-`d` diagonal union, by iterating the arc rule.
pub fn diagonal_union_depth(
    f: &Factorization,
    d: usize,
) -> Result<DiagonalUnionResult, TransformError> {
    f.validate()?;
    if d == 0 {
        return Err(TransformError::ZeroDepth);
    }
    let n = f.base().order();
    let k = f.len();
    checked_order(k, n, d)?;

    let mut current = union_by_arc_rule(n, f.factors());
    let mut block = n;
    for _ in 2..=d {
        let summands = block_shift_summands(&current, k, block);
        block = current.order();
        current = union_by_arc_rule(block, &summands);
    }
    Ok(DiagonalUnionResult {
        digraph: current,
        depth: d,
        block_size: block,
        factor_count: k,
        base_order: n,
    })
}

/// Depth-`d` diagonal union evaluated literally with dense matrices,
/// thresholded to 0/1.
pub fn diagonal_union_depth_matrix(
    f: &Factorization,
    d: usize,
) -> Result<DenseMatrix, TransformError> {
    if d == 0 {
        return Err(TransformError::ZeroDepth);
    }
    let k = f.len();
    let n = f.base().order();
    let order = checked_order(k, n, d)?;
    if order > DENSE_LIMIT {
        return Err(TransformError::TooLargeForDense(order));
    }
    let mut m = diagonal_union_matrix(f)?;
    threshold_zero_one(&m)?;
    for _ in 2..=d {
        let size = m.rows();
        let mut summands = Vec::with_capacity(k);
        for l in 0..k {
            summands.push(rho_reg_zk(k, l)?.to_dense().generalized_hadamard(&m)?);
        }
        let coupling = DenseMatrix::ones(k, k).kronecker(&DenseMatrix::identity(size));
        m = coupling.matmul(&DenseMatrix::direct_sum(&summands)?)?;
        threshold_zero_one(&m)?;
    }
    Ok(m)
}

/// The `k` summands `Q_l` whose diagonal union is the depth-`d` union:
/// the base factors at `d = 1`, otherwise `ρ(l) ∘_G M(D_{F,d−1})`. For a
/// cycle factorization each is a permutation matrix.
pub fn induced_cycle_factors(
    f: &Factorization,
    d: usize,
) -> Result<Vec<PermutationMatrix>, TransformError> {
    if d == 0 {
        return Err(TransformError::ZeroDepth);
    }
    let summands = induced_summands(f, d)?;
    summands
        .iter()
        .enumerate()
        .map(|(index, q)| {
            as_permutation(q).ok_or(TransformError::NonPermutationSummand { depth: d, index })
        })
        .collect()
}

/// The summands of level `d` as digraphs on `s_{d−1}` vertices.
pub fn induced_summands(f: &Factorization, d: usize) -> Result<Vec<Digraph>, TransformError> {
    f.validate()?;
    if d <= 1 {
        return Ok(f.factors().to_vec());
    }
    let prev = diagonal_union_depth(f, d - 1)?;
    let k = f.len();
    Ok(block_shift_summands(
        &prev.digraph,
        k,
        prev.digraph.order() / k,
    ))
}

fn as_permutation(q: &Digraph) -> Option<PermutationMatrix> {
    if q.regular_degree() != Some(1) {
        return None;
    }
    PermutationMatrix::new(q.arcs().iter().map(|&(_, h)| h).collect()).ok()
}

fn check_coupling(c: &DenseMatrix, k: usize) -> Result<(), TransformError> {
    if c.shape() != (k, k) {
        return Err(TransformError::CouplingShape {
            expected: k,
            rows: c.rows(),
            cols: c.cols(),
        });
    }
    let check = is_unitary(c, UNITARY_TOL);
    if !check.unitary {
        return Err(TransformError::CouplingNotUnitary {
            residual: check.residual,
        });
    }
    for r in 0..k {
        for col in 0..k {
            if c[(r, col)].norm() <= SUPPORT_TOL {
                return Err(TransformError::DenseSupportViolated { row: r, col });
            }
        }
    }
    Ok(())
}

/// Unitary matrix supported exactly on the depth-`d` union of a cycle
/// factorization: `U = (C ⊗ I_{s_{d−1}}) · ⊕_l Q_l`.
///
/// Block `(a, b)` of `U` is `C[a, b] · Q_b`. `C` must be a `k×k` unitary
/// with no zero entry.
pub fn unitary_weighting(
    f: &Factorization,
    d: usize,
    coupling: &DenseMatrix,
) -> Result<DenseMatrix, TransformError> {
    check_coupling(coupling, f.len())?;
    let perms = induced_cycle_factors(f, d)?;
    let block = perms.first().map_or(0, PermutationMatrix::len);
    let order = block * perms.len();
    if order > DENSE_LIMIT {
        return Err(TransformError::TooLargeForDense(order));
    }
    let mut u = DenseMatrix::zeros(order, order);
    for a in 0..perms.len() {
        for (b, q) in perms.iter().enumerate() {
            let w = coupling[(a, b)];
            for (x, &y) in q.image().iter().enumerate() {
                u[(a * block + x, b * block + y)] = w;
            }
        }
    }
    Ok(u)
}

/// Depth-1 unitary for an arbitrary factorization, given a unitary `V_j`
/// supported exactly on each factor: `U = (C ⊗ I_n) · ⊕ V_j`.
pub fn unitary_from_factor_unitaries(
    f: &Factorization,
    factor_unitaries: &[DenseMatrix],
    coupling: &DenseMatrix,
) -> Result<DenseMatrix, TransformError> {
    f.validate()?;
    check_coupling(coupling, f.len())?;
    let n = f.base().order();
    if factor_unitaries.len() != f.len() {
        return Err(TransformError::BadFactorUnitary {
            index: factor_unitaries.len().min(f.len()),
            reason: format!(
                "expected {} matrices, got {}",
                f.len(),
                factor_unitaries.len()
            ),
        });
    }
    for (index, (v, h)) in factor_unitaries.iter().zip(f.factors()).enumerate() {
        let bad = |reason: String| TransformError::BadFactorUnitary { index, reason };
        if v.shape() != (n, n) {
            return Err(bad(format!("shape {:?}, expected {n}x{n}", v.shape())));
        }
        let check = is_unitary(v, UNITARY_TOL);
        if !check.unitary {
            return Err(bad(format!("not unitary (residual {:e})", check.residual)));
        }
        if &Digraph::from_matrix(v, SUPPORT_TOL)? != h {
            return Err(bad("support differs from the factor".into()));
        }
    }
    let k = f.len();
    if k * n > DENSE_LIMIT {
        return Err(TransformError::TooLargeForDense(k * n));
    }
    let mut u = DenseMatrix::zeros(k * n, k * n);
    for a in 0..k {
        for (b, v) in factor_unitaries.iter().enumerate() {
            let w: Complex64 = coupling[(a, b)];
            for x in 0..n {
                for y in 0..n {
                    u[(a * n + x, b * n + y)] = w * v[(x, y)];
                }
            }
        }
    }
    Ok(u)
}
