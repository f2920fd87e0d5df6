//! Line digraphs and state splitting.
//!
//! A state split duplicates each vertex once per class of a partition of
//! its outgoing (out-split) or incoming (in-split) arcs. The depth-1
//! diagonal union of `F` is the in-split of the base digraph under the
//! partition that classes each arc by the factor containing it.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{check_limit, Digraph, GraphError, VertexMap};
use crate::factorization::{Factorization, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("partition covers {got} vertices, digraph has {expected}")]
    PartitionSize { got: usize, expected: usize },
    #[error("vertex {0} has no classes")]
    NoClasses(usize),
    #[error("arc {arc:?} listed at vertex {vertex} is not incident on the {mode} side")]
    NotIncident {
        vertex: usize,
        arc: (usize, usize),
        mode: SplitMode,
    },
    #[error("arc {0:?} is not in the digraph")]
    UnknownArc((usize, usize)),
    #[error("arc {0:?} appears in more than one class")]
    Repeated((usize, usize)),
    #[error("arc {0:?} is in no class")]
    Unclassified((usize, usize)),
    #[error("invalid factorization: {0}")]
    Factorization(#[from] Violation),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    In,
    Out,
}

impl std::fmt::Display for SplitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitMode::In => "in",
            SplitMode::Out => "out",
        })
    }
}

/// Per-vertex ordered classes of the incoming (`In`) or outgoing (`Out`)
/// arcs. Empty classes are allowed; every vertex has at least one class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcPartition {
    pub mode: SplitMode,
    #[serde(with = "classes_by_vertex")]
    pub classes: Vec<Vec<Vec<(usize, usize)>>>,
}

/// `classes` is keyed by vertex number in JSON.
mod classes_by_vertex {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    type Classes = Vec<Vec<Vec<(usize, usize)>>>;

    pub fn serialize<S: Serializer>(classes: &Classes, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<usize, &Vec<Vec<(usize, usize)>>> = classes.iter().enumerate().collect();
        map.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Classes, D::Error> {
        let map = BTreeMap::<usize, Vec<Vec<(usize, usize)>>>::deserialize(d)?;
        let n = map.len();
        if map.keys().enumerate().any(|(i, &v)| i != v) {
            return Err(D::Error::custom(format!(
                "class keys must be exactly 0..{n}"
            )));
        }
        Ok(map.into_values().collect())
    }
}

impl ArcPartition {
    /// One class per vertex holding all of its arcs on the given side.
    pub fn trivial(d: &Digraph, mode: SplitMode) -> Self {
        let mut classes = vec![vec![Vec::new()]; d.order()];
        for &(t, h) in d.arcs() {
            let v = match mode {
                SplitMode::In => h,
                SplitMode::Out => t,
            };
            classes[v][0].push((t, h));
        }
        ArcPartition { mode, classes }
    }

    /// Class count `m(v)`.
    pub fn class_count(&self, v: usize) -> usize {
        self.classes[v].len()
    }

    /// Checks that the classes at each vertex partition its incident arcs.
    pub fn validate(&self, d: &Digraph) -> Result<(), SymbolicError> {
        if self.classes.len() != d.order() {
            return Err(SymbolicError::PartitionSize {
                got: self.classes.len(),
                expected: d.order(),
            });
        }
        let mut seen = vec![false; d.size()];
        for (v, classes) in self.classes.iter().enumerate() {
            if classes.is_empty() {
                return Err(SymbolicError::NoClasses(v));
            }
            for &arc in classes.iter().flatten() {
                let side = match self.mode {
                    SplitMode::In => arc.1,
                    SplitMode::Out => arc.0,
                };
                if side != v {
                    return Err(SymbolicError::NotIncident {
                        vertex: v,
                        arc,
                        mode: self.mode,
                    });
                }
                let idx = d
                    .arc_index(arc.0, arc.1)
                    .ok_or(SymbolicError::UnknownArc(arc))?;
                if std::mem::replace(&mut seen[idx], true) {
                    return Err(SymbolicError::Repeated(arc));
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            Some(idx) => Err(SymbolicError::Unclassified(d.arcs()[idx])),
            None => Ok(()),
        }
    }

    /// `(vertex, class)` for every arc, indexed like [`Digraph::arcs`].
    fn class_of_arcs(&self, d: &Digraph) -> Vec<usize> {
        let mut class = vec![0; d.size()];
        for classes in &self.classes {
            for (c, members) in classes.iter().enumerate() {
                for &(t, h) in members {
                    if let Some(idx) = d.arc_index(t, h) {
                        class[idx] = c;
                    }
                }
            }
        }
        class
    }
}

/// Class `j` at `v` holds the arcs of factor `j` incident to `v` on the
/// given side. Every vertex gets exactly `k` classes, some possibly empty.
pub fn partition_from_factorization(
    f: &Factorization,
    mode: SplitMode,
) -> Result<ArcPartition, SymbolicError> {
    f.validate()?;
    let k = f.len();
    let mut classes = vec![vec![Vec::new(); k]; f.base().order()];
    for (j, h) in f.factors().iter().enumerate() {
        for &(t, hd) in h.arcs() {
            let v = match mode {
                SplitMode::In => hd,
                SplitMode::Out => t,
            };
            classes[v][j].push((t, hd));
        }
    }
    Ok(ArcPartition { mode, classes })
}

/// A state split digraph. Vertex `v_i^j` (class `j` at base vertex `i`) is
/// numbered `offset(i) + j`, offsets ascending by base vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitResult {
    pub digraph: Digraph,
    /// `(base vertex, class index)` per new vertex; class indices start at 0.
    pub vertex_labels: Vec<(usize, usize)>,
    /// When every vertex has the same class count `k`, the relabelling
    /// `v_i^j ↦ j·n + i` that groups vertices by class.
    pub class_major: Option<VertexMap>,
}

impl SplitResult {
    /// The split digraph in class-major numbering, when defined.
    pub fn class_major_digraph(&self) -> Option<Digraph> {
        self.class_major.as_ref().map(|m| m.relabel(&self.digraph))
    }
}

/// Builds the in- or out-split of `d` under `p`.
///
/// Out-split: an arc `(h, l)` in class `k` at `h` yields `v_h^k → v_l^j` for
/// every class `j` at `l`. In-split: an arc `(h, l)` in class `k` at `l`
/// yields `v_h^j → v_l^k` for every class `j` at `h`.
pub fn state_split(d: &Digraph, p: &ArcPartition) -> Result<SplitResult, SymbolicError> {
    p.validate(d)?;
    let n = d.order();
    let mut offset = Vec::with_capacity(n + 1);
    offset.push(0usize);
    for v in 0..n {
        offset.push(offset[v] + p.class_count(v));
    }
    let total = offset[n];
    check_limit(total)?;

    let class = p.class_of_arcs(d);
    let mut arcs = Vec::new();
    for (idx, &(h, l)) in d.arcs().iter().enumerate() {
        let c = class[idx];
        match p.mode {
            SplitMode::Out => {
                arcs.extend((0..p.class_count(l)).map(|j| (offset[h] + c, offset[l] + j)));
            }
            SplitMode::In => {
                arcs.extend((0..p.class_count(h)).map(|j| (offset[h] + j, offset[l] + c)));
            }
        }
    }
    arcs.sort_unstable();
    let digraph = Digraph::from_sorted_unchecked(total, arcs);

    let vertex_labels: Vec<(usize, usize)> = (0..n)
        .flat_map(|v| (0..p.class_count(v)).map(move |j| (v, j)))
        .collect();
    let uniform = (n > 0)
        .then(|| p.class_count(0))
        .filter(|&k| (0..n).all(|v| p.class_count(v) == k));
    let class_major = uniform.map(|_| {
        VertexMap::new(vertex_labels.iter().map(|&(i, j)| j * n + i).collect())
            .expect("uniform class counts give a bijection")
    });
    Ok(SplitResult {
        digraph,
        vertex_labels,
        class_major,
    })
}

/// A line digraph together with the base arc each vertex stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineDigraph {
    pub digraph: Digraph,
    /// Vertex `i` is `arcs[i]` of the base, in canonical arc order.
    pub arcs: Vec<(usize, usize)>,
}

/// Vertices are the arcs of `d`; `(u, v) → (v', w)` iff `v = v'`.
pub fn line_digraph(d: &Digraph) -> Result<LineDigraph, SymbolicError> {
    check_limit(d.size())?;
    let base = d.arcs();
    // arcs with tail v occupy a contiguous index range, starting at start[v]
    let mut start = vec![0usize; d.order() + 1];
    for &(t, _) in base {
        start[t + 1] += 1;
    }
    for v in 0..d.order() {
        start[v + 1] += start[v];
    }
    let mut arcs = Vec::new();
    for (i, &(_, v)) in base.iter().enumerate() {
        arcs.extend((start[v]..start[v + 1]).map(|j| (i, j)));
    }
    Ok(LineDigraph {
        digraph: Digraph::from_sorted_unchecked(base.len(), arcs),
        arcs: base.to_vec(),
    })
}

/// `t`-fold line digraph; `t = 0` returns `d`.
pub fn iterated_line_digraph(d: &Digraph, t: usize) -> Result<Digraph, SymbolicError> {
    let mut current = d.clone();
    for _ in 0..t {
        current = line_digraph(&current)?.digraph;
    }
    Ok(current)
}

/// Where [`is_line_digraph`] found two vertices whose neighbourhoods on
/// `side` overlap without being equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineWitness {
    pub side: SplitMode,
    pub first: usize,
    pub second: usize,
}

/// Line-digraph recognition: every two out-neighbourhoods are equal or
/// disjoint, and likewise every two in-neighbourhoods. This is the
/// criterion for being the line digraph of a multidigraph.
pub fn is_line_digraph(d: &Digraph) -> Result<(), LineWitness> {
    let outs: Vec<Vec<usize>> = (0..d.order())
        .map(|v| d.out_neighbors(v).collect())
        .collect();
    let ins = d.in_adjacency();
    check_side(&outs, &ins, SplitMode::Out)?;
    check_side(&ins, &outs, SplitMode::In)
}

/// Two `side` neighbourhoods intersect iff some vertex `w` has both owners
/// in its opposite list; all owners listed at `w` must share one set.
fn check_side(
    side: &[Vec<usize>],
    opposite: &[Vec<usize>],
    mode: SplitMode,
) -> Result<(), LineWitness> {
    let mut ids: HashMap<&[usize], usize> = HashMap::new();
    let class: Vec<usize> = side
        .iter()
        .map(|nbrs| {
            let next = ids.len();
            *ids.entry(nbrs.as_slice()).or_insert(next)
        })
        .collect();
    for owners in opposite {
        if let Some(&first) = owners.first() {
            if let Some(&second) = owners.iter().find(|&&o| class[o] != class[first]) {
                return Err(LineWitness {
                    side: mode,
                    first,
                    second,
                });
            }
        }
    }
    Ok(())
}
