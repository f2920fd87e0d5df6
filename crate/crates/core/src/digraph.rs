//! The digraph value type, the example families used throughout the crate,
//! and conversion to and from adjacency matrices.
//!
//! Vertices are the integers `0..n`. Arcs are ordered pairs `(tail, head)`;
//! loops are allowed, parallel arcs are not. The arc list is always kept in
//! lexicographic order, which makes every derived output deterministic.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::{DenseMatrix, MatrixError};

/// Environment variable capping the order of constructed digraphs.
pub const VERTEX_LIMIT_VAR: &str = "DUNION_VERTEX_LIMIT";
pub const DEFAULT_VERTEX_LIMIT: usize = 65536;

/// Attempts allowed per permutation in [`random_regular`].
const REJECTION_BUDGET: usize = 200_000;

/// Current vertex limit, read from `DUNION_VERTEX_LIMIT` (default 65536).
pub fn vertex_limit() -> usize {
    std::env::var(VERTEX_LIMIT_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_VERTEX_LIMIT)
}

pub(crate) fn check_limit(requested: usize) -> Result<(), GraphError> {
    let limit = vertex_limit();
    if requested > limit {
        Err(GraphError::VertexLimit { requested, limit })
    } else {
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("arc ({tail}, {head}) has an endpoint outside 0..{n}")]
    ArcOutOfRange { tail: usize, head: usize, n: usize },
    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("requested {requested} vertices, limit is {limit}")]
    VertexLimit { requested: usize, limit: usize },
    #[error("rejection budget exhausted while drawing permutation {round}")]
    RejectionBudget { round: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A finite simple digraph with loops allowed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    n: usize,
    arcs: Vec<(usize, usize)>,
    // out_start[v]..out_start[v + 1] indexes the arcs with tail v
    out_start: Vec<usize>,
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Digraph")
            .field("n", &self.n)
            .field("arcs", &self.arcs)
            .finish()
    }
}

impl Digraph {
    /// Builds a digraph, sorting the arcs. Duplicates and out-of-range
    /// endpoints are rejected.
    pub fn new<I>(n: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut arcs: Vec<(usize, usize)> = arcs.into_iter().collect();
        for &(tail, head) in &arcs {
            if tail >= n || head >= n {
                return Err(GraphError::ArcOutOfRange { tail, head, n });
            }
        }
        arcs.sort_unstable();
        if let Some(w) = arcs.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateArc(w[0].0, w[0].1));
        }
        Ok(Self::from_sorted_unchecked(n, arcs))
    }

    /// Arcless digraph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unchecked(n, Vec::new())
    }

    pub(crate) fn from_sorted_unchecked(n: usize, arcs: Vec<(usize, usize)>) -> Self {
        debug_assert!(arcs.windows(2).all(|w| w[0] < w[1]));
        let mut out_start = vec![0usize; n + 1];
        for &(t, _) in &arcs {
            out_start[t + 1] += 1;
        }
        for v in 0..n {
            out_start[v + 1] += out_start[v];
        }
        Digraph { n, arcs, out_start }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.arcs.len()
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    /// Position of `(tail, head)` in [`Digraph::arcs`], if present.
    pub fn arc_index(&self, tail: usize, head: usize) -> Option<usize> {
        if tail >= self.n {
            return None;
        }
        let lo = self.out_start[tail];
        self.out_arcs(tail)
            .binary_search(&(tail, head))
            .ok()
            .map(|i| lo + i)
    }

    pub fn has_arc(&self, tail: usize, head: usize) -> bool {
        self.arc_index(tail, head).is_some()
    }

    /// The arcs leaving `v`, sorted by head.
    pub fn out_arcs(&self, v: usize) -> &[(usize, usize)] {
        &self.arcs[self.out_start[v]..self.out_start[v + 1]]
    }

    pub fn out_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_arcs(v).iter().map(|&(_, h)| h)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_start[v + 1] - self.out_start[v]
    }

    /// In-neighbour lists, each sorted ascending.
    pub fn in_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(t, h) in &self.arcs {
            adj[h].push(t);
        }
        adj
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(_, h) in &self.arcs {
            deg[h] += 1;
        }
        deg
    }

    pub fn has_loop(&self, v: usize) -> bool {
        self.has_arc(v, v)
    }

    pub fn loop_count(&self) -> usize {
        self.arcs.iter().filter(|(t, h)| t == h).count()
    }

    /// `Some(k)` when every in-degree and every out-degree equals `k`.
    pub fn regular_degree(&self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let k = self.out_degree(0);
        let outs_ok = (0..self.n).all(|v| self.out_degree(v) == k);
        let ins_ok = self.in_degrees().iter().all(|&d| d == k);
        (outs_ok && ins_ok).then_some(k)
    }

    /// Same vertex set, every arc reversed.
    pub fn converse(&self) -> Digraph {
        let mut arcs: Vec<_> = self.arcs.iter().map(|&(t, h)| (h, t)).collect();
        arcs.sort_unstable();
        Digraph::from_sorted_unchecked(self.n, arcs)
    }

    /// 0/1 adjacency matrix; row index is the tail.
    pub fn adjacency_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for &(t, h) in &self.arcs {
            m[(t, h)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// The digraph supporting `m`: arc `(i, j)` iff `|m[i, j]| > tol`.
    pub fn from_matrix(m: &DenseMatrix, tol: f64) -> Result<Self, GraphError> {
        if !m.is_square() {
            return Err(MatrixError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            }
            .into());
        }
        let n = m.rows();
        let arcs = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| m[(i, j)].norm() > tol)
            .collect();
        Ok(Self::from_sorted_unchecked(n, arcs))
    }
}

/// A bijection on `0..n`, used as an isomorphism witness and for relabelling.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexMap {
    forward: Vec<usize>,
}

impl VertexMap {
    pub fn new(forward: Vec<usize>) -> Result<Self, GraphError> {
        let n = forward.len();
        let mut seen = vec![false; n];
        for &v in &forward {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(GraphError::InvalidParameter(format!(
                    "vertex map is not a bijection on 0..{n}"
                )));
            }
        }
        Ok(VertexMap { forward })
    }

    pub fn identity(n: usize) -> Self {
        VertexMap {
            forward: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn apply(&self, v: usize) -> usize {
        self.forward[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> VertexMap {
        let mut inv = vec![0; self.forward.len()];
        for (v, &w) in self.forward.iter().enumerate() {
            inv[w] = v;
        }
        VertexMap { forward: inv }
    }

    /// Image of `d` under the map. Panics if the orders differ.
    pub fn relabel(&self, d: &Digraph) -> Digraph {
        assert_eq!(d.order(), self.len(), "vertex map size mismatch");
        let mut arcs: Vec<_> = d
            .arcs()
            .iter()
            .map(|&(t, h)| (self.forward[t], self.forward[h]))
            .collect();
        arcs.sort_unstable();
        Digraph::from_sorted_unchecked(d.order(), arcs)
    }

    /// True when `(u, v) ∈ a  ⇔  (φu, φv) ∈ b`.
    pub fn is_isomorphism(&self, a: &Digraph, b: &Digraph) -> bool {
        a.order() == self.len()
            && b.order() == self.len()
            && a.size() == b.size()
            && a.arcs()
                .iter()
                .all(|&(t, h)| b.has_arc(self.forward[t], self.forward[h]))
    }
}

/// The complete symmetric digraph with a loop at every vertex: all `n²` arcs.
pub fn complete_with_loops(n: usize) -> Result<Digraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter("n must be at least 1".into()));
    }
    check_limit(n)?;
    let arcs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    Ok(Digraph::from_sorted_unchecked(n, arcs))
}

/// Cayley digraph of `Z_n` with connection set `set`: arcs `i → i + s mod n`.
///
/// `0 ∈ set` puts a loop at every vertex.
pub fn cayley_zn(n: usize, set: &[i64]) -> Result<Digraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter("n must be at least 1".into()));
    }
    check_limit(n)?;
    let mut residues = BTreeSet::new();
    for &s in set {
        if s < 0 || s as u64 >= n as u64 {
            return Err(GraphError::InvalidParameter(format!(
                "connection element {s} is not a residue modulo {n}"
            )));
        }
        residues.insert(s as usize);
    }
    let mut arcs: Vec<_> = (0..n)
        .flat_map(|i| residues.iter().map(move |&s| (i, (i + s) % n)))
        .collect();
    arcs.sort_unstable();
    Ok(Digraph::from_sorted_unchecked(n, arcs))
}

/// The directed `n`-cycle `0 → 1 → … → n−1 → 0`.
pub fn directed_cycle(n: usize) -> Result<Digraph, GraphError> {
    cayley_zn(n, &[if n == 1 { 0 } else { 1 }])
}

/// De Bruijn digraph on words of length `m` over `b` symbols.
///
/// A word `w₁…w_m` is encoded as the base-`b` integer with `w₁` most
/// significant; its out-neighbours are `w₂…w_m c` for every symbol `c`.
pub fn de_bruijn(b: usize, m: usize) -> Result<Digraph, GraphError> {
    if b < 2 || m < 1 {
        return Err(GraphError::InvalidParameter(format!(
            "de Bruijn digraph needs b >= 2 and m >= 1, got b={b}, m={m}"
        )));
    }
    let n =
        u32::try_from(m)
            .ok()
            .and_then(|m| b.checked_pow(m))
            .ok_or(GraphError::VertexLimit {
                requested: usize::MAX,
                limit: vertex_limit(),
            })?;
    check_limit(n)?;
    let shift = n / b;
    let arcs = (0..n)
        .flat_map(|w| {
            let prefix = (w % shift) * b;
            (0..b).map(move |c| (w, prefix + c))
        })
        .collect();
    Ok(Digraph::from_sorted_unchecked(n, arcs))
}

/// Encodes a de Bruijn vertex as its word, e.g. `5` over `b = 2`, `m = 3` is `"101"`.
pub fn de_bruijn_word(b: usize, m: usize, mut v: usize) -> String {
    let mut digits = vec![0usize; m];
    for d in digits.iter_mut().rev() {
        *d = v % b;
        v /= b;
    }
    digits
        .iter()
        .map(|&d| std::char::from_digit(d as u32, 36).unwrap_or('?'))
        .collect()
}

/// A random `k`-in/`k`-out regular digraph (loops allowed), made of `k`
/// arc-disjoint uniformly drawn permutations. Deterministic in `seed`.
pub fn random_regular(n: usize, k: usize, seed: u64) -> Result<Digraph, GraphError> {
    if n == 0 || k > n {
        return Err(GraphError::InvalidParameter(format!(
            "no simple {k}-regular digraph on {n} vertices"
        )));
    }
    check_limit(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = vec![false; n * n];
    let mut perm: Vec<usize> = (0..n).collect();
    for round in 0..k {
        let mut attempts = 0;
        loop {
            if attempts == REJECTION_BUDGET {
                return Err(GraphError::RejectionBudget { round });
            }
            attempts += 1;
            perm.shuffle(&mut rng);
            if perm.iter().enumerate().all(|(i, &p)| !used[i * n + p]) {
                break;
            }
        }
        for (i, &p) in perm.iter().enumerate() {
            used[i * n + p] = true;
        }
    }
    let arcs = (0..n * n)
        .filter(|&idx| used[idx])
        .map(|idx| (idx / n, idx % n))
        .collect();
    Ok(Digraph::from_sorted_unchecked(n, arcs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn new_sorts_and_rejects_bad_arcs() {
        let d = Digraph::new(3, [(2, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(d.arcs(), &[(0, 1), (1, 1), (2, 0)]);
        assert_eq!(
            Digraph::new(2, [(0, 1), (0, 1)]),
            Err(GraphError::DuplicateArc(0, 1))
        );
        assert!(matches!(
            Digraph::new(2, [(0, 2)]),
            Err(GraphError::ArcOutOfRange { .. })
        ));
    }

    #[test]
    fn adjacency_examples() {
        let m = complete_with_loops(2).unwrap().adjacency_matrix();
        assert_eq!(m, DenseMatrix::ones(2, 2));

        let m = cayley_zn(4, &[1, 2, 3]).unwrap().adjacency_matrix();
        let expected = DenseMatrix::ones(4, 4)
            .sub(&DenseMatrix::identity(4))
            .unwrap();
        assert_eq!(m, expected);

        assert_eq!(
            Digraph::empty(3).adjacency_matrix(),
            DenseMatrix::zeros(3, 3)
        );
    }

    #[test]
    fn from_matrix_examples() {
        let swap = DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = Digraph::from_matrix(&swap, 1e-9).unwrap();
        assert_eq!(d.arcs(), &[(0, 1), (1, 0)]);

        let f = DenseMatrix::fourier(2);
        assert_eq!(
            Digraph::from_matrix(&f, 1e-9).unwrap(),
            complete_with_loops(2).unwrap()
        );

        let z = Digraph::from_matrix(&DenseMatrix::zeros(2, 2), 1e-9).unwrap();
        assert_eq!((z.order(), z.size()), (2, 0));

        assert!(Digraph::from_matrix(&DenseMatrix::zeros(2, 3), 1e-9).is_err());
    }

    #[test]
    fn complete_with_loops_examples() {
        assert_eq!(complete_with_loops(1).unwrap().arcs(), &[(0, 0)]);
        assert_eq!(
            complete_with_loops(2).unwrap().arcs(),
            &[(0, 0), (0, 1), (1, 0), (1, 1)]
        );
        let k3 = complete_with_loops(3).unwrap();
        assert_eq!(k3.size(), 9);
        assert_eq!(k3.regular_degree(), Some(3));
        assert!(complete_with_loops(0).is_err());
    }

    #[test]
    fn cayley_examples() {
        let c = cayley_zn(4, &[1, 2, 3]).unwrap();
        assert_eq!(c.size(), 12);
        assert_eq!(c.regular_degree(), Some(3));

        let c5 = cayley_zn(5, &[1]).unwrap();
        assert_eq!(c5.arcs(), &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);

        let two = cayley_zn(4, &[2]).unwrap();
        assert_eq!(two.arcs(), &[(0, 2), (1, 3), (2, 0), (3, 1)]);

        assert!(cayley_zn(4, &[4]).is_err());
        assert!(cayley_zn(4, &[-1]).is_err());
    }

    #[test]
    fn de_bruijn_examples() {
        assert_eq!(de_bruijn(2, 1).unwrap(), complete_with_loops(2).unwrap());
        // 00→{00,01}, 01→{10,11}, 10→{00,01}, 11→{10,11}
        assert_eq!(
            de_bruijn(2, 2).unwrap().arcs(),
            &[
                (0, 0),
                (0, 1),
                (1, 2),
                (1, 3),
                (2, 0),
                (2, 1),
                (3, 2),
                (3, 3)
            ]
        );
        let b3 = de_bruijn(2, 3).unwrap();
        assert_eq!((b3.order(), b3.size()), (8, 16));
        assert_eq!(de_bruijn_word(2, 3, 5), "101");
        assert!(de_bruijn(1, 3).is_err());
        assert!(matches!(
            de_bruijn(2, 40),
            Err(GraphError::VertexLimit { .. })
        ));
    }

    #[test]
    fn random_regular_examples() {
        assert_eq!(random_regular(1, 1, 99).unwrap().arcs(), &[(0, 0)]);
        let d = random_regular(4, 2, 7).unwrap();
        assert_eq!(d.order(), 4);
        assert_eq!(d.regular_degree(), Some(2));
        assert!(random_regular(2, 3, 0).is_err());
        assert_eq!(random_regular(6, 3, 11), random_regular(6, 3, 11));
        assert_eq!(
            random_regular(5, 5, 3).unwrap(),
            complete_with_loops(5).unwrap()
        );
    }

    #[test]
    fn vertex_map_checks_bijection() {
        assert!(VertexMap::new(vec![1, 0, 2]).is_ok());
        assert!(VertexMap::new(vec![1, 1, 2]).is_err());
        assert!(VertexMap::new(vec![0, 3, 1]).is_err());
        let m = VertexMap::new(vec![2, 0, 1]).unwrap();
        assert_eq!(m.inverse().as_slice(), &[1, 2, 0]);
    }

    fn arb_digraph() -> impl Strategy<Value = Digraph> {
        (1usize..7).prop_flat_map(|n| {
            proptest::collection::btree_set((0..n, 0..n), 0..=n * n)
                .prop_map(move |arcs| Digraph::new(n, arcs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matrix_round_trip(d in arb_digraph()) {
            let back = Digraph::from_matrix(&d.adjacency_matrix(), 0.5).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn generators_are_regular(b in 2usize..4, m in 1usize..4, n in 1usize..9, seed in 0u64..50) {
            let db = de_bruijn(b, m).unwrap();
            prop_assert_eq!(db.order(), b.pow(m as u32));
            prop_assert_eq!(db.size(), b.pow(m as u32 + 1));
            prop_assert_eq!(db.regular_degree(), Some(b));

            let set: Vec<i64> = (1..n as i64).filter(|s| (s + seed as i64) % 3 != 0).collect();
            let c = cayley_zn(n, &set).unwrap();
            prop_assert_eq!(c.regular_degree(), Some(set.len()));
            prop_assert_eq!(cayley_zn(n, &set).unwrap(), c);
        }
    }
}
