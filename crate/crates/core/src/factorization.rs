//! Factorizations: ordered lists of spanning subdigraphs whose arc sets
//! partition the arcs of a base digraph.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::digraph::{Digraph, GraphError};
use crate::matrix::{DenseMatrix, PermutationMatrix};

/// First broken invariant found by [`Factorization::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoFactors,
    /// A factor's vertex set differs from the base's.
    NotSpanning {
        factor: usize,
        order: usize,
        expected: usize,
    },
    ArcNotInBase {
        factor: usize,
        arc: (usize, usize),
    },
    ArcCoveredTwice {
        arc: (usize, usize),
        first: usize,
        second: usize,
    },
    ArcUncovered {
        arc: (usize, usize),
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoFactors => write!(f, "factorization has no factors"),
            Violation::NotSpanning {
                factor,
                order,
                expected,
            } => write!(
                f,
                "factor {factor} has {order} vertices but the base has {expected}"
            ),
            Violation::ArcNotInBase { factor, arc } => {
                write!(f, "factor {factor} contains arc {arc:?} not in the base")
            }
            Violation::ArcCoveredTwice { arc, first, second } => write!(
                f,
                "arc covered twice: {arc:?} in factors {first} and {second}"
            ),
            Violation::ArcUncovered { arc } => write!(f, "arc {arc:?} is in no factor"),
        }
    }
}

impl std::error::Error for Violation {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorizationError {
    #[error("digraph is not regular (in/out degrees differ)")]
    NotRegular,
    #[error("no perfect matching in round {round}")]
    MatchingFailed { round: usize },
    #[error("factor matrices do not sum to the adjacency matrix (first mismatch at {row}, {col})")]
    SumMismatch { row: usize, col: usize },
    #[error("factor matrix {index} is not a {n}x{n} 0/1 matrix")]
    BadFactorMatrix { index: usize, n: usize },
    #[error("factor order is not a permutation of 0..{0}")]
    BadOrder(usize),
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    base: Digraph,
    factors: Vec<Digraph>,
}

impl Factorization {
    /// Pairs a base with factors without checking anything; see
    /// [`Factorization::validate`].
    pub fn from_parts(base: Digraph, factors: Vec<Digraph>) -> Self {
        Factorization { base, factors }
    }

    /// Like [`Factorization::from_parts`], but rejects invalid input.
    pub fn new(base: Digraph, factors: Vec<Digraph>) -> Result<Self, Violation> {
        let f = Self::from_parts(base, factors);
        f.validate()?;
        Ok(f)
    }

    pub fn base(&self) -> &Digraph {
        &self.base
    }

    pub fn factors(&self) -> &[Digraph] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Checks that every factor spans the base and that the factor arc sets
    /// partition the base arcs.
    pub fn validate(&self) -> Result<(), Violation> {
        if self.factors.is_empty() {
            return Err(Violation::NoFactors);
        }
        let n = self.base.order();
        let mut owner: Vec<Option<usize>> = vec![None; self.base.size()];
        for (i, h) in self.factors.iter().enumerate() {
            if h.order() != n {
                return Err(Violation::NotSpanning {
                    factor: i,
                    order: h.order(),
                    expected: n,
                });
            }
            for &(t, hd) in h.arcs() {
                let idx = self.base.arc_index(t, hd).ok_or(Violation::ArcNotInBase {
                    factor: i,
                    arc: (t, hd),
                })?;
                if let Some(first) = owner[idx] {
                    return Err(Violation::ArcCoveredTwice {
                        arc: (t, hd),
                        first,
                        second: i,
                    });
                }
                owner[idx] = Some(i);
            }
        }
        match owner.iter().position(Option::is_none) {
            Some(idx) => Err(Violation::ArcUncovered {
                arc: self.base.arcs()[idx],
            }),
            None => Ok(()),
        }
    }

    /// True when every factor is 1-in/1-out regular.
    pub fn is_cycle_factorization(&self) -> bool {
        self.factors.iter().all(|h| h.regular_degree() == Some(1))
    }

    pub fn factor_matrices(&self) -> Vec<DenseMatrix> {
        self.factors.iter().map(Digraph::adjacency_matrix).collect()
    }

    /// Factor `j` of the result is factor `order[j]` of `self`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self, FactorizationError> {
        let k = self.factors.len();
        let mut seen = vec![false; k];
        if order.len() != k
            || order
                .iter()
                .any(|&i| i >= k || std::mem::replace(&mut seen[i], true))
        {
            return Err(FactorizationError::BadOrder(k));
        }
        Ok(Factorization {
            base: self.base.clone(),
            factors: order.iter().map(|&i| self.factors[i].clone()).collect(),
        })
    }

    /// Factor `i` as a permutation, if it is a cycle factor.
    pub fn cycle_factor(&self, i: usize) -> Option<PermutationMatrix> {
        let h = &self.factors[i];
        if h.regular_degree() != Some(1) {
            return None;
        }
        PermutationMatrix::new(h.arcs().iter().map(|&(_, hd)| hd).collect()).ok()
    }
}

/// The factorization with the digraph itself as its only factor.
pub fn trivial(d: &Digraph) -> Factorization {
    Factorization {
        base: d.clone(),
        factors: vec![d.clone()],
    }
}

/// Decomposes a `k`-regular digraph into `k` cycle factors by repeatedly
/// extracting perfect matchings of the tail/head bipartite graph.
///
/// Vertices and their neighbours are scanned in ascending order, so the
/// output is a deterministic function of the input.
pub fn cycle_factorization(d: &Digraph) -> Result<Factorization, FactorizationError> {
    let k = d.regular_degree().ok_or(FactorizationError::NotRegular)?;
    let n = d.order();
    let mut remaining: Vec<Vec<usize>> = (0..n).map(|v| d.out_neighbors(v).collect()).collect();
    let mut factors = Vec::with_capacity(k);
    for round in 0..k {
        let matching =
            perfect_matching(&remaining).ok_or(FactorizationError::MatchingFailed { round })?;
        for (t, &h) in matching.iter().enumerate() {
            remaining[t].retain(|&x| x != h);
        }
        let arcs = matching.into_iter().enumerate().collect();
        factors.push(Digraph::from_sorted_unchecked(n, arcs));
    }
    Ok(Factorization {
        base: d.clone(),
        factors,
    })
}

/// Perfect matching of left vertex `t` to right vertex `adj[t][_]`, by
/// augmenting paths. Returns `mate_of_left`, or `None` if none exists.
fn perfect_matching(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    const FREE: usize = usize::MAX;
    let n = adj.len();
    let mut mate_left = vec![FREE; n];
    let mut mate_right = vec![FREE; n];
    let mut visited = vec![usize::MAX; n];

    for root in 0..n {
        // iterative DFS over left vertices; `cursor[depth]` walks adjacency
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut found = None;
        while let Some(&mut (u, ref mut cursor)) = stack.last_mut() {
            if *cursor == adj[u].len() {
                stack.pop();
                continue;
            }
            let v = adj[u][*cursor];
            *cursor += 1;
            if visited[v] == root {
                continue;
            }
            visited[v] = root;
            if mate_right[v] == FREE {
                found = Some(v);
                break;
            }
            stack.push((mate_right[v], 0));
        }
        let mut v = found?;
        // the stack is the alternating path; shift every mate one step along it
        while let Some((u, _)) = stack.pop() {
            let prev = mate_left[u];
            mate_left[u] = v;
            mate_right[v] = u;
            v = prev;
        }
    }
    Some(mate_left)
}

/// Builds an explicit factorization from 0/1 factor matrices whose sum is
/// the adjacency matrix of `d`.
pub fn factor_from_matrices(
    d: &Digraph,
    matrices: &[DenseMatrix],
) -> Result<Factorization, FactorizationError> {
    let n = d.order();
    let mut sum = DenseMatrix::zeros(n, n);
    let mut factors = Vec::with_capacity(matrices.len());
    for (index, m) in matrices.iter().enumerate() {
        if m.shape() != (n, n) || !m.is_zero_one(1e-9) {
            return Err(FactorizationError::BadFactorMatrix { index, n });
        }
        sum = sum.add(m).expect("shape checked");
        factors.push(Digraph::from_matrix(m, 0.5)?);
    }
    let adj = d.adjacency_matrix();
    for r in 0..n {
        for c in 0..n {
            if (sum[(r, c)] - adj[(r, c)]).norm() > 1e-9 {
                return Err(FactorizationError::SumMismatch { row: r, col: c });
            }
        }
    }
    let f = Factorization {
        base: d.clone(),
        factors,
    };
    f.validate()?;
    Ok(f)
}

/// Entrywise sum of the factor adjacency matrices.
pub fn factor_sum(f: &Factorization) -> DenseMatrix {
    let n = f.base().order();
    f.factors().iter().fold(DenseMatrix::zeros(n, n), |acc, h| {
        let mut acc = acc;
        for &(t, hd) in h.arcs() {
            acc[(t, hd)] += Complex64::new(1.0, 0.0);
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{cayley_zn, complete_with_loops, directed_cycle, random_regular};
    use crate::matrix::rho_reg_zk;

    fn k2_swap() -> Factorization {
        let d = complete_with_loops(2).unwrap();
        let loops = Digraph::new(2, [(0, 0), (1, 1)]).unwrap();
        let swap = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        Factorization::from_parts(d, vec![loops, swap])
    }

    fn check_cycle_factorization(d: &Digraph, f: &Factorization, k: usize) {
        f.validate().unwrap();
        assert_eq!(f.len(), k);
        assert!(f.is_cycle_factorization());
        for i in 0..k {
            let p = f.cycle_factor(i).unwrap();
            assert_eq!(
                PermutationMatrix::from_dense(&f.factors()[i].adjacency_matrix(), 1e-12).unwrap(),
                p
            );
        }
        assert_eq!(factor_sum(f), d.adjacency_matrix());
    }

    #[test]
    fn validate_examples() {
        for d in [
            complete_with_loops(3).unwrap(),
            Digraph::empty(2),
            directed_cycle(4).unwrap(),
        ] {
            assert_eq!(trivial(&d).validate(), Ok(()));
        }
        assert_eq!(k2_swap().validate(), Ok(()));

        let d = complete_with_loops(2).unwrap();
        let a = Digraph::new(2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        let b = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let err = Factorization::from_parts(d.clone(), vec![a, b])
            .validate()
            .unwrap_err();
        assert_eq!(
            err,
            Violation::ArcCoveredTwice {
                arc: (0, 1),
                first: 0,
                second: 1
            }
        );
        assert!(err.to_string().starts_with("arc covered twice"));

        let short = Factorization::from_parts(d.clone(), vec![Digraph::new(2, [(0, 0)]).unwrap()]);
        assert_eq!(
            short.validate(),
            Err(Violation::ArcUncovered { arc: (0, 1) })
        );

        let small = Factorization::from_parts(d.clone(), vec![complete_with_loops(1).unwrap()]);
        assert!(matches!(
            small.validate(),
            Err(Violation::NotSpanning { .. })
        ));

        assert_eq!(
            Factorization::from_parts(d, vec![]).validate(),
            Err(Violation::NoFactors)
        );
    }

    #[test]
    fn trivial_has_one_factor() {
        let k2 = complete_with_loops(2).unwrap();
        let t = trivial(&k2);
        assert_eq!(t.factors(), std::slice::from_ref(&k2));
        assert_eq!(t.factors()[0].regular_degree(), Some(2));
        assert_eq!(trivial(&Digraph::empty(3)).len(), 1);
    }

    #[test]
    fn cycle_factorization_examples() {
        let k2 = complete_with_loops(2).unwrap();
        check_cycle_factorization(&k2, &cycle_factorization(&k2).unwrap(), 2);

        let cay = cayley_zn(4, &[1, 2, 3]).unwrap();
        check_cycle_factorization(&cay, &cycle_factorization(&cay).unwrap(), 3);

        let c5 = directed_cycle(5).unwrap();
        let f = cycle_factorization(&c5).unwrap();
        assert_eq!(f.factors(), std::slice::from_ref(&c5));

        let lopsided = Digraph::new(3, [(0, 1), (0, 2), (1, 0), (2, 0)]).unwrap();
        assert_eq!(
            cycle_factorization(&lopsided),
            Err(FactorizationError::NotRegular)
        );
    }

    #[test]
    fn cycle_factorization_of_random_regular_digraphs() {
        for n in 1..=8 {
            for k in 1..=3.min(n) {
                for seed in 0..10 {
                    let d = random_regular(n, k, seed).unwrap();
                    let f = cycle_factorization(&d).unwrap();
                    check_cycle_factorization(&d, &f, k);
                    assert_eq!(cycle_factorization(&d).unwrap(), f);
                }
            }
        }
    }

    #[test]
    fn factor_from_matrices_examples() {
        let cay = cayley_zn(4, &[1, 2, 3]).unwrap();
        let rho = |l| rho_reg_zk(4, l).unwrap().to_dense();
        let d1 = rho(1).add(&rho(3)).unwrap();
        let f = factor_from_matrices(&cay, &[d1, rho(2)]).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.factors()[1].arcs(), &[(0, 2), (1, 3), (2, 0), (3, 1)]);

        let k2 = complete_with_loops(2).unwrap();
        let sx = rho_reg_zk(2, 1).unwrap().to_dense();
        let f = factor_from_matrices(&k2, &[DenseMatrix::identity(2), sx]).unwrap();
        assert_eq!(f, k2_swap());

        let err = factor_from_matrices(&k2, &[DenseMatrix::identity(2), DenseMatrix::identity(2)]);
        assert!(matches!(err, Err(FactorizationError::SumMismatch { .. })));
    }

    #[test]
    fn reorder_swaps_factors() {
        let f = k2_swap();
        let r = f.reordered(&[1, 0]).unwrap();
        assert_eq!(r.factors()[0], f.factors()[1]);
        assert!(f.reordered(&[0, 0]).is_err());
        assert!(f.reordered(&[0]).is_err());
    }
}
