//! Interchange formats: graph and factorization JSON, sparse matrix CSV, and
//! DOT export. Every writer is byte-deterministic and every reader accepts
//! what the matching writer produced.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{de_bruijn_word, Digraph, GraphError};
use crate::factorization::{Factorization, Violation};
use crate::matrix::{DenseMatrix, MatrixError};
use crate::transforms::DiagonalUnionResult;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid factorization: {0}")]
    Factorization(#[from] Violation),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    n: usize,
    arcs: Vec<(usize, usize)>,
}

impl From<&Digraph> for GraphJson {
    fn from(d: &Digraph) -> Self {
        GraphJson {
            n: d.order(),
            arcs: d.arcs().to_vec(),
        }
    }
}

impl TryFrom<GraphJson> for Digraph {
    type Error = GraphError;

    fn try_from(g: GraphJson) -> Result<Self, GraphError> {
        Digraph::new(g.n, g.arcs)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorizationJson {
    base: GraphJson,
    factors: Vec<Vec<(usize, usize)>>,
}

/// Canonical compact graph JSON, e.g. `{"n":2,"arcs":[[0,1],[1,0]]}`.
pub fn graph_to_json(d: &Digraph) -> String {
    serde_json::to_string(&GraphJson::from(d)).expect("graph JSON is serializable")
}

/// Reads graph JSON; arcs may come in any order but must be distinct.
pub fn graph_from_json(text: &str) -> Result<Digraph, FormatError> {
    let g: GraphJson = serde_json::from_str(text)?;
    Ok(Digraph::try_from(g)?)
}

pub fn factorization_to_json(f: &Factorization) -> String {
    let json = FactorizationJson {
        base: GraphJson::from(f.base()),
        factors: f.factors().iter().map(|h| h.arcs().to_vec()).collect(),
    };
    serde_json::to_string(&json).expect("factorization JSON is serializable")
}

/// Reads and validates factorization JSON.
pub fn factorization_from_json(text: &str) -> Result<Factorization, FormatError> {
    let json: FactorizationJson = serde_json::from_str(text)?;
    let base = Digraph::try_from(json.base)?;
    let n = base.order();
    let factors = json
        .factors
        .into_iter()
        .map(|arcs| Digraph::new(n, arcs))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Factorization::new(base, factors)?)
}

const CSV_HEADER: &str = "row,col,re,im";

/// Entries with `|value| > tol` as `row,col,re,im`, in row-major order.
pub fn matrix_to_csv(m: &DenseMatrix, tol: f64) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m[(r, c)];
            if z.norm() > tol {
                writeln!(out, "{r},{c},{},{}", z.re, z.im).unwrap();
            }
        }
    }
    out
}

/// The adjacency matrix of `d` in matrix CSV, without densifying it.
pub fn digraph_to_csv(d: &Digraph) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for &(t, h) in d.arcs() {
        writeln!(out, "{t},{h},1,0").unwrap();
    }
    out
}

/// Reads matrix CSV into a `rows × cols` matrix; absent entries are zero.
pub fn matrix_from_csv(text: &str, rows: usize, cols: usize) -> Result<DenseMatrix, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        other => {
            return Err(FormatError::Csv {
                line: other.map_or(1, |(i, _)| i + 1),
                reason: format!("expected header \"{CSV_HEADER}\""),
            })
        }
    }
    let mut m = DenseMatrix::zeros(rows, cols);
    let mut seen = std::collections::BTreeSet::new();
    for (i, line) in lines {
        let bad = |reason: String| FormatError::Csv {
            line: i + 1,
            reason,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let r: usize = fields[0].parse().map_err(|e| bad(format!("row: {e}")))?;
        let c: usize = fields[1].parse().map_err(|e| bad(format!("col: {e}")))?;
        let re: f64 = fields[2].parse().map_err(|e| bad(format!("re: {e}")))?;
        let im: f64 = fields[3].parse().map_err(|e| bad(format!("im: {e}")))?;
        if r >= rows || c >= cols {
            return Err(bad(format!("entry ({r},{c}) outside {rows}×{cols}")));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(bad("non-finite value".into()));
        }
        if !seen.insert((r, c)) {
            return Err(bad(format!("entry ({r},{c}) repeated")));
        }
        m[(r, c)] = Complex64::new(re, im);
    }
    Ok(m)
}

/// DOT text with one vertex statement per vertex in ascending order, then
/// one statement per arc. `labels`, when given, must have one entry per
/// vertex.
pub fn export_dot(d: &Digraph, labels: Option<&[String]>) -> String {
    let mut out = String::from("digraph {\n");
    for v in 0..d.order() {
        match labels.and_then(|l| l.get(v)) {
            Some(label) => writeln!(out, "  {v} [label=\"{}\"];", escape(label)).unwrap(),
            None => writeln!(out, "  {v};").unwrap(),
        }
    }
    for &(t, h) in d.arcs() {
        writeln!(out, "  {t} -> {h};").unwrap();
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// `v_i^j` labels for a diagonal union: base vertex `i`, copy indices
/// counted from 1, outermost level first and comma separated at depth > 1.
pub fn copy_labels(u: &DiagonalUnionResult) -> Vec<String> {
    copy_labels_for(u.factor_count, u.base_order, u.depth)
}

/// [`copy_labels`] from the raw parameters `k`, `n` and depth.
pub fn copy_labels_for(k: usize, n: usize, depth: usize) -> Vec<String> {
    let order = k.pow(depth as u32) * n;
    (0..order)
        .map(|v| {
            let mut digits = Vec::with_capacity(depth);
            let mut rest = v;
            let mut block = order;
            for _ in 0..depth {
                block /= k;
                digits.push(rest / block);
                rest %= block;
            }
            let sup: Vec<String> = digits.iter().map(|j| (j + 1).to_string()).collect();
            format!("v_{rest}^{}", sup.join(","))
        })
        .collect()
}

/// Word labels for `de_bruijn(b, m)`.
pub fn de_bruijn_labels(b: usize, m: usize) -> Vec<String> {
    let n = b.pow(m as u32);
    (0..n).map(|v| de_bruijn_word(b, m, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{complete_with_loops, de_bruijn, random_regular};
    use crate::factorization::{cycle_factorization, factor_from_matrices};
    use crate::matrix::rho_reg_zk;
    use crate::transforms::{diagonal_union, diagonal_union_depth};
    use proptest::prelude::*;

    #[test]
    fn graph_json_is_compact_and_sorted() {
        let d = Digraph::new(2, [(1, 0), (0, 1)]).unwrap();
        assert_eq!(graph_to_json(&d), r#"{"n":2,"arcs":[[0,1],[1,0]]}"#);
        let back = graph_from_json(r#"{"n": 2, "arcs": [[1,0],[0,1]]}"#).unwrap();
        assert_eq!(back, d);
        assert_eq!(graph_to_json(&Digraph::empty(0)), r#"{"n":0,"arcs":[]}"#);
    }

    #[test]
    fn graph_json_rejects_bad_input() {
        assert!(matches!(
            graph_from_json("{\"n\":2"),
            Err(FormatError::Json(_))
        ));
        assert!(matches!(
            graph_from_json(r#"{"n":2,"arcs":[[0,2]]}"#),
            Err(FormatError::Graph(GraphError::ArcOutOfRange { .. }))
        ));
        assert!(matches!(
            graph_from_json(r#"{"n":2,"arcs":[[0,1],[0,1]]}"#),
            Err(FormatError::Graph(GraphError::DuplicateArc(0, 1)))
        ));
        assert!(graph_from_json(r#"{"n":1,"arcs":[],"extra":0}"#).is_err());
    }

    #[test]
    fn factorization_json_round_trip() {
        let d = random_regular(5, 2, 3).unwrap();
        let f = cycle_factorization(&d).unwrap();
        let text = factorization_to_json(&f);
        let back = factorization_from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(factorization_to_json(&back), text);
    }

    #[test]
    fn factorization_json_validates() {
        let overlapping = r#"{"base":{"n":1,"arcs":[[0,0]]},"factors":[[[0,0]],[[0,0]]]}"#;
        assert!(matches!(
            factorization_from_json(overlapping),
            Err(FormatError::Factorization(
                Violation::ArcCoveredTwice { .. }
            ))
        ));
    }

    #[test]
    fn matrix_csv_round_trip() {
        let m = DenseMatrix::fourier(3);
        let text = matrix_to_csv(&m, 1e-12);
        assert!(text.starts_with("row,col,re,im\n0,0,"));
        assert_eq!(text.lines().count(), 10);
        let back = matrix_from_csv(&text, 3, 3).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_csv_skips_small_entries() {
        let m = DenseMatrix::from_real_rows(&[vec![1.0, 0.0], vec![1e-15, -0.5]]).unwrap();
        assert_eq!(
            matrix_to_csv(&m, 1e-12),
            "row,col,re,im\n0,0,1,0\n1,1,-0.5,0\n"
        );
    }

    #[test]
    fn matrix_csv_errors() {
        assert!(matches!(
            matrix_from_csv("a,b\n", 1, 1),
            Err(FormatError::Csv { line: 1, .. })
        ));
        assert!(matches!(
            matrix_from_csv("", 1, 1),
            Err(FormatError::Csv { line: 1, .. })
        ));
        assert!(matches!(
            matrix_from_csv("row,col,re,im\n0,5,1,0\n", 2, 2),
            Err(FormatError::Csv { line: 2, .. })
        ));
        assert!(matches!(
            matrix_from_csv("row,col,re,im\n0,0,x,0\n", 2, 2),
            Err(FormatError::Csv { line: 2, .. })
        ));
        assert!(matches!(
            matrix_from_csv("row,col,re,im\n0,0,1,0\n0,0,1,0\n", 2, 2),
            Err(FormatError::Csv { line: 3, .. })
        ));
    }

    #[test]
    fn digraph_csv_matches_dense_route() {
        let d = de_bruijn(2, 3).unwrap();
        assert_eq!(
            digraph_to_csv(&d),
            matrix_to_csv(&d.adjacency_matrix(), 0.5)
        );
    }

    #[test]
    fn dot_examples() {
        let one = Digraph::new(1, [(0, 0)]).unwrap();
        assert_eq!(export_dot(&one, None), "digraph {\n  0;\n  0 -> 0;\n}\n");
        assert_eq!(export_dot(&Digraph::empty(0), None), "digraph {\n}\n");

        let sx = rho_reg_zk(2, 1).unwrap().to_dense();
        let f = factor_from_matrices(
            &complete_with_loops(2).unwrap(),
            &[DenseMatrix::identity(2), sx],
        )
        .unwrap();
        let u = diagonal_union(&f).unwrap();
        let labels = copy_labels(&u);
        assert_eq!(labels, ["v_0^1", "v_1^1", "v_0^2", "v_1^2"]);
        let dot = export_dot(&u.digraph, Some(&labels));
        assert!(dot.starts_with("digraph {\n  0 [label=\"v_0^1\"];\n"));
        assert_eq!(dot, export_dot(&u.digraph, Some(&labels)));

        let u2 = diagonal_union_depth(&f, 2).unwrap();
        assert_eq!(copy_labels(&u2)[7], "v_1^2,2");
        assert_eq!(copy_labels(&u2)[5], "v_1^2,1");
    }

    #[test]
    fn de_bruijn_word_labels() {
        assert_eq!(de_bruijn_labels(2, 2), ["00", "01", "10", "11"]);
    }

    proptest! {
        #[test]
        fn graph_json_print_parse_print(n in 1usize..7, arcs in proptest::collection::btree_set((0usize..7, 0usize..7), 0..30)) {
            let arcs: Vec<_> = arcs.into_iter().filter(|&(t, h)| t < n && h < n).collect();
            let d = Digraph::new(n, arcs).unwrap();
            let text = graph_to_json(&d);
            let back = graph_from_json(&text).unwrap();
            prop_assert_eq!(&back, &d);
            prop_assert_eq!(graph_to_json(&back), text);
        }
    }
}
