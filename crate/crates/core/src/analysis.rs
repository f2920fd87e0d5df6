//! Topology metrics: strong connectivity, diameter, articulation points and
//! bridges of the underlying graph, directed and undirected connectivity,
//! and digraph isomorphism.
//!
//! Loops never affect separation and are ignored by every metric here,
//! except that isomorphism must map loops to loops.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::digraph::{Digraph, VertexMap};
use crate::symbolic::is_line_digraph;

/// Search nodes allowed to [`isomorphic`] before it gives up.
pub const DEFAULT_ISO_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("isomorphism search exceeded its budget of {0} nodes")]
    Budget(u64),
}

/// Iterative Tarjan. Components come out in reverse topological order.
pub fn strongly_connected_components(d: &Digraph) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = d.order();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, pos)) = call.last() {
            let outs = d.out_arcs(v);
            if pos < outs.len() {
                call.last_mut().unwrap().1 += 1;
                let w = outs[pos].1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components
}

/// One strongly connected component covering every vertex.
pub fn strongly_connected(d: &Digraph) -> bool {
    strongly_connected_components(d).len() <= 1
}

/// Directed diameter; infinite unless strongly connected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diameter {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Diameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diameter::Finite(k) => write!(f, "{k}"),
            Diameter::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for Diameter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Diameter::Finite(k) => s.serialize_u64(*k as u64),
            Diameter::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// Breadth-first distances from `source`; `None` where unreachable.
pub fn distances_from(d: &Digraph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; d.order()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = dist[v].map(|x| x + 1);
        for w in d.out_neighbors(v) {
            if dist[w].is_none() {
                dist[w] = next;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Largest shortest-path length over ordered pairs, by BFS from every vertex.
pub fn diameter(d: &Digraph) -> Diameter {
    let mut best = 0;
    for s in 0..d.order() {
        for dist in distances_from(d, s) {
            match dist {
                Some(x) => best = best.max(x),
                None => return Diameter::Infinite,
            }
        }
    }
    Diameter::Finite(best)
}

/// How arcs become undirected edges once orientation is dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeModel {
    /// Every non-loop arc is its own edge; `u → v` and `v → u` give two
    /// parallel edges.
    #[default]
    Multigraph,
    /// Antiparallel pairs collapse to one edge.
    Simple,
}

/// Cut vertices and bridges of the underlying undirected graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CutAnalysis {
    pub articulation_points: Vec<usize>,
    /// Each bridge as `(min, max)`, sorted.
    pub bridges: Vec<(usize, usize)>,
}

impl CutAnalysis {
    pub fn is_clean(&self) -> bool {
        self.articulation_points.is_empty() && self.bridges.is_empty()
    }
}

/// Undirected edge list `(u, v)` for `model`, loops dropped.
pub fn underlying_edges(d: &Digraph, model: EdgeModel) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = d
        .arcs()
        .iter()
        .filter(|(t, h)| t != h)
        .map(|&(t, h)| (t.min(h), t.max(h)))
        .collect();
    edges.sort_unstable();
    if model == EdgeModel::Simple {
        edges.dedup();
    }
    edges
}

/// Articulation points and bridges of the underlying multigraph.
pub fn underlying_cut_analysis(d: &Digraph) -> CutAnalysis {
    underlying_cut_analysis_with(d, EdgeModel::Multigraph)
}

/// Depth-first low-link computation over the underlying graph chosen by `model`.
pub fn underlying_cut_analysis_with(d: &Digraph, model: EdgeModel) -> CutAnalysis {
    const UNSEEN: usize = usize::MAX;
    let n = d.order();
    let edges = underlying_edges(d, model);
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, id));
        adj[v].push((u, id));
    }

    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut is_cut = vec![false; n];
    let mut bridges = Vec::new();
    let mut time = 0;

    for root in 0..n {
        if disc[root] != UNSEEN {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        let mut root_children = 0;
        // (vertex, edge id used to enter it, adjacency cursor)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&(u, via, pos)) = stack.last() {
            if pos < adj[u].len() {
                stack.last_mut().unwrap().2 += 1;
                let (w, id) = adj[u][pos];
                if id == via {
                    continue;
                }
                if disc[w] == UNSEEN {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    if u == root {
                        root_children += 1;
                    }
                    stack.push((w, id, 0));
                } else {
                    low[u] = low[u].min(disc[w]);
                }
                continue;
            }
            stack.pop();
            if let Some(&(parent, _, _)) = stack.last() {
                low[parent] = low[parent].min(low[u]);
                if low[u] > disc[parent] {
                    bridges.push(edges[via]);
                }
                if parent != root && low[u] >= disc[parent] {
                    is_cut[parent] = true;
                }
            }
        }
        if root_children >= 2 {
            is_cut[root] = true;
        }
    }
    bridges.sort_unstable();
    CutAnalysis {
        articulation_points: (0..n).filter(|&v| is_cut[v]).collect(),
        bridges,
    }
}

/// Dinic max-flow on a small capacitated network.
struct FlowNetwork {
    // (head, capacity, index of reverse edge) per node
    graph: Vec<Vec<(usize, i64, usize)>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            graph: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64) {
        let rev_from = self.graph[to].len() + usize::from(from == to);
        let rev_to = self.graph[from].len();
        self.graph[from].push((to, cap, rev_from));
        self.graph[to].push((from, 0, rev_to));
    }

    /// Maximum flow, stopping early once it reaches `cap`.
    fn max_flow(mut self, source: usize, sink: usize, cap: i64) -> i64 {
        let nodes = self.graph.len();
        let mut flow = 0;
        while flow < cap {
            let mut level = vec![usize::MAX; nodes];
            level[source] = 0;
            let mut queue = VecDeque::from([source]);
            while let Some(v) = queue.pop_front() {
                for &(w, c, _) in &self.graph[v] {
                    if c > 0 && level[w] == usize::MAX {
                        level[w] = level[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            if level[sink] == usize::MAX {
                break;
            }
            let mut cursor = vec![0usize; nodes];
            loop {
                let pushed = self.augment(source, sink, cap - flow, &level, &mut cursor);
                if pushed == 0 {
                    break;
                }
                flow += pushed;
                if flow >= cap {
                    break;
                }
            }
        }
        flow.min(cap)
    }

    /// One blocking-flow augmentation along level-increasing edges.
    fn augment(
        &mut self,
        source: usize,
        sink: usize,
        limit: i64,
        level: &[usize],
        cursor: &mut [usize],
    ) -> i64 {
        // iterative DFS keeping the path as (node, edge index)
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut v = source;
        loop {
            if v == sink {
                let amount = path
                    .iter()
                    .map(|&(u, e)| self.graph[u][e].1)
                    .fold(limit, i64::min);
                for &(u, e) in &path {
                    let (w, _, rev) = self.graph[u][e];
                    self.graph[u][e].1 -= amount;
                    self.graph[w][rev].1 += amount;
                }
                return amount;
            }
            let mut advanced = false;
            while cursor[v] < self.graph[v].len() {
                let (w, c, _) = self.graph[v][cursor[v]];
                if c > 0 && level[w] == level[v] + 1 {
                    path.push((v, cursor[v]));
                    v = w;
                    advanced = true;
                    break;
                }
                cursor[v] += 1;
            }
            if !advanced {
                match path.pop() {
                    Some((u, _)) => {
                        cursor[u] += 1;
                        v = u;
                    }
                    None => return 0,
                }
            }
        }
    }
}

/// Maximum number of internally vertex-disjoint `s → t` paths; `s → t`
/// must not be an arc.
fn local_vertex_connectivity(d: &Digraph, s: usize, t: usize, cap: usize) -> usize {
    let n = d.order();
    let big = n as i64 + 1;
    // v_in = 2v, v_out = 2v + 1
    let mut net = FlowNetwork::new(2 * n);
    for v in 0..n {
        let c = if v == s || v == t { big } else { 1 };
        net.add_edge(2 * v, 2 * v + 1, c);
    }
    for &(u, v) in d.arcs() {
        if u != v {
            net.add_edge(2 * u + 1, 2 * v, big);
        }
    }
    net.max_flow(2 * s + 1, 2 * t, cap as i64) as usize
}

/// Maximum flow `s → t` where the digraph's arcs carry the given capacities.
fn local_arc_connectivity(
    n: usize,
    arcs: &[(usize, usize, i64)],
    s: usize,
    t: usize,
    cap: usize,
) -> usize {
    let mut net = FlowNetwork::new(n);
    for &(u, v, c) in arcs {
        if u != v {
            net.add_edge(u, v, c);
        }
    }
    net.max_flow(s, t, cap as i64) as usize
}

/// Directed vertex connectivity: the fewest vertices whose removal leaves
/// a digraph that is not strongly connected, or `n − 1` when every ordered
/// pair is adjacent. Zero for disconnected digraphs and single vertices.
pub fn vertex_connectivity(d: &Digraph) -> usize {
    let n = d.order();
    if n <= 1 || !strongly_connected(d) {
        return 0;
    }
    // some minimum separator misses one of v_0..v_κ; scanning pairs
    // through those vertices therefore finds it
    let mut best = n - 1;
    let mut i = 0;
    while i <= best && i < n {
        for w in (0..n).filter(|&w| w != i) {
            if !d.has_arc(i, w) {
                best = best.min(local_vertex_connectivity(d, i, w, best));
            }
            if !d.has_arc(w, i) {
                best = best.min(local_vertex_connectivity(d, w, i, best));
            }
        }
        i += 1;
    }
    best
}

/// Directed arc connectivity: the fewest arcs whose removal breaks strong
/// connectivity. Zero for disconnected digraphs and single vertices.
pub fn arc_connectivity(d: &Digraph) -> usize {
    let n = d.order();
    if n <= 1 || !strongly_connected(d) {
        return 0;
    }
    let arcs: Vec<(usize, usize, i64)> = d.arcs().iter().map(|&(u, v)| (u, v, 1)).collect();
    let mut best = d.size();
    for v in 1..n {
        best = best.min(local_arc_connectivity(n, &arcs, 0, v, best));
        best = best.min(local_arc_connectivity(n, &arcs, v, 0, best));
    }
    best
}

/// Vertex connectivity of the underlying simple graph.
pub fn underlying_vertex_connectivity(d: &Digraph) -> usize {
    let sym = symmetric_closure(d);
    vertex_connectivity(&sym)
}

/// Edge connectivity of the underlying multigraph.
pub fn underlying_edge_connectivity(d: &Digraph) -> usize {
    let n = d.order();
    let sym = symmetric_closure(d);
    if n <= 1 || !strongly_connected(&sym) {
        return 0;
    }
    let mut mult: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for (u, v) in underlying_edges(d, EdgeModel::Multigraph) {
        *mult.entry((u, v)).or_default() += 1;
    }
    let arcs: Vec<(usize, usize, i64)> = mult
        .iter()
        .flat_map(|(&(u, v), &c)| [(u, v, c), (v, u, c)])
        .collect();
    let mut best = usize::MAX;
    for v in 1..n {
        best = best.min(local_arc_connectivity(n, &arcs, 0, v, best));
    }
    best
}

fn symmetric_closure(d: &Digraph) -> Digraph {
    let mut arcs: Vec<(usize, usize)> = underlying_edges(d, EdgeModel::Simple)
        .into_iter()
        .flat_map(|(u, v)| [(u, v), (v, u)])
        .collect();
    arcs.sort_unstable();
    Digraph::new(d.order(), arcs).expect("closure of a simple digraph is simple")
}

/// Smallest loop-free in- or out-degree.
pub fn min_degree(d: &Digraph) -> usize {
    let mut outs = vec![0; d.order()];
    let mut ins = vec![0; d.order()];
    for &(t, h) in d.arcs() {
        if t != h {
            outs[t] += 1;
            ins[h] += 1;
        }
    }
    outs.into_iter().chain(ins).min().unwrap_or(0)
}

/// Own colour plus sorted out- and in-neighbour colours.
type Signature = (usize, Vec<usize>, Vec<usize>);

/// Jointly refined vertex colours of `a` and `b`, so that equal colours are
/// comparable across the two digraphs.
fn refine_colours(a: &Digraph, b: &Digraph) -> (Vec<usize>, Vec<usize>) {
    let graphs = [a, b];
    let ins: Vec<Vec<Vec<usize>>> = graphs.iter().map(|g| g.in_adjacency()).collect();
    let mut colours: Vec<Vec<usize>> = {
        let keys: Vec<Vec<(usize, usize, bool)>> = graphs
            .iter()
            .zip(&ins)
            .map(|(g, inn)| {
                (0..g.order())
                    .map(|v| (g.out_degree(v), inn[v].len(), g.has_loop(v)))
                    .collect()
            })
            .collect();
        intern(&keys)
    };
    let mut classes = count_distinct(&colours);
    loop {
        let keys: Vec<Vec<Signature>> = graphs
            .iter()
            .enumerate()
            .map(|(gi, g)| {
                (0..g.order())
                    .map(|v| {
                        let mut outs: Vec<usize> =
                            g.out_neighbors(v).map(|w| colours[gi][w]).collect();
                        let mut inn: Vec<usize> =
                            ins[gi][v].iter().map(|&w| colours[gi][w]).collect();
                        outs.sort_unstable();
                        inn.sort_unstable();
                        (colours[gi][v], outs, inn)
                    })
                    .collect()
            })
            .collect();
        let next = intern(&keys);
        let next_classes = count_distinct(&next);
        colours = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
    let b_colours = colours.pop().unwrap();
    let a_colours = colours.pop().unwrap();
    (a_colours, b_colours)
}

/// Replaces keys by dense ids, numbered in key order.
fn intern<K: Ord + Clone>(keys: &[Vec<K>]) -> Vec<Vec<usize>> {
    let mut ids: BTreeMap<K, usize> = keys.iter().flatten().map(|k| (k.clone(), 0)).collect();
    for (i, id) in ids.values_mut().enumerate() {
        *id = i;
    }
    keys.iter()
        .map(|ks| ks.iter().map(|k| ids[k]).collect())
        .collect()
}

fn count_distinct(colours: &[Vec<usize>]) -> usize {
    colours.iter().flatten().max().map_or(0, |&m| m + 1)
}

/// An isomorphism `a → b`, or `None`.
///
/// Backtracking over `a`'s vertices in [`search_order`], pruned by colour
/// refinement. A vertex with an earlier neighbour takes its candidates from
/// that neighbour's image; candidates are always tried in ascending order,
/// so the map returned is the lexicographically least under the search
/// order.
pub fn isomorphic(a: &Digraph, b: &Digraph) -> Result<Option<VertexMap>, AnalysisError> {
    isomorphic_with_budget(a, b, DEFAULT_ISO_BUDGET)
}

/// Breadth-first order over the underlying graph of `d`. Each component
/// starts at its lowest vertex among those of rarest colour; neighbours are
/// queued in ascending order.
pub fn search_order(d: &Digraph, colours: &[usize]) -> Vec<usize> {
    let n = d.order();
    let mut class_size = vec![0usize; colours.iter().max().map_or(0, |&m| m + 1)];
    for &c in colours {
        class_size[c] += 1;
    }
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| (class_size[colours[v]], v));
    let adj = undirected_neighbours(d);
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

/// Sorted, deduplicated neighbours ignoring direction and loops.
fn undirected_neighbours(d: &Digraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); d.order()];
    for &(t, h) in d.arcs() {
        if t != h {
            adj[t].push(h);
            adj[h].push(t);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Where a vertex's candidates come from.
#[derive(Clone, Copy)]
enum Anchor {
    /// Any vertex of the same colour.
    Free,
    /// Out-neighbours of the image of an earlier in-neighbour.
    After(usize),
    /// In-neighbours of the image of an earlier out-neighbour.
    Before(usize),
}

pub fn isomorphic_with_budget(
    a: &Digraph,
    b: &Digraph,
    budget: u64,
) -> Result<Option<VertexMap>, AnalysisError> {
    const NONE: usize = usize::MAX;
    let n = a.order();
    if n != b.order() || a.size() != b.size() || a.loop_count() != b.loop_count() {
        return Ok(None);
    }
    let (col_a, col_b) = refine_colours(a, b);
    let mut hist_a = col_a.clone();
    let mut hist_b = col_b.clone();
    hist_a.sort_unstable();
    hist_b.sort_unstable();
    if hist_a != hist_b {
        return Ok(None);
    }
    let classes = count_distinct(&[col_a.clone(), col_b.clone()]);
    let mut by_colour: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (v, &c) in col_b.iter().enumerate() {
        by_colour[c].push(v);
    }
    let in_a = a.in_adjacency();
    let in_b = b.in_adjacency();

    let order = search_order(a, &col_a);
    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let anchors: Vec<Anchor> = order
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let earlier = |w: usize| w != x && position[w] < i;
            if let Some(&w) = in_a[x].iter().find(|&&w| earlier(w)) {
                Anchor::After(w)
            } else if let Some(w) = a.out_neighbors(x).find(|&w| earlier(w)) {
                Anchor::Before(w)
            } else {
                Anchor::Free
            }
        })
        .collect();

    let mut map_a = vec![NONE; n];
    let mut map_b = vec![NONE; n];
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cursor = vec![0usize; n];
    let mut nodes = 0u64;
    let mut depth = 0;

    let feasible = |x: usize, y: usize, map_a: &[usize], map_b: &[usize]| -> bool {
        if a.has_loop(x) != b.has_loop(y) {
            return false;
        }
        let mut mapped_out = 0;
        for w in a.out_neighbors(x).filter(|&w| w != x) {
            if map_a[w] != NONE {
                if !b.has_arc(y, map_a[w]) {
                    return false;
                }
                mapped_out += 1;
            }
        }
        let image_out = b
            .out_neighbors(y)
            .filter(|&w| w != y && map_b[w] != NONE)
            .count();
        if mapped_out != image_out {
            return false;
        }
        let mut mapped_in = 0;
        for &w in in_a[x].iter().filter(|&&w| w != x) {
            if map_a[w] != NONE {
                if !b.has_arc(map_a[w], y) {
                    return false;
                }
                mapped_in += 1;
            }
        }
        mapped_in
            == in_b[y]
                .iter()
                .filter(|&&w| w != y && map_b[w] != NONE)
                .count()
    };

    let fill = |depth: usize, map_a: &[usize], out: &mut Vec<usize>| {
        let x = order[depth];
        out.clear();
        match anchors[depth] {
            Anchor::Free => out.extend_from_slice(&by_colour[col_a[x]]),
            Anchor::After(w) => {
                out.extend(b.out_neighbors(map_a[w]).filter(|&y| col_b[y] == col_a[x]))
            }
            Anchor::Before(w) => out.extend(
                in_b[map_a[w]]
                    .iter()
                    .copied()
                    .filter(|&y| col_b[y] == col_a[x]),
            ),
        }
    };

    if n > 0 {
        fill(0, &map_a, &mut candidates[0]);
    }
    while depth < n {
        let x = order[depth];
        let mut chosen = None;
        while cursor[depth] < candidates[depth].len() {
            let y = candidates[depth][cursor[depth]];
            cursor[depth] += 1;
            if map_b[y] != NONE {
                continue;
            }
            nodes += 1;
            if nodes > budget {
                return Err(AnalysisError::Budget(budget));
            }
            if feasible(x, y, &map_a, &map_b) {
                chosen = Some(y);
                break;
            }
        }
        match chosen {
            Some(y) => {
                map_a[x] = y;
                map_b[y] = x;
                depth += 1;
                if depth < n {
                    cursor[depth] = 0;
                    let mut buf = std::mem::take(&mut candidates[depth]);
                    fill(depth, &map_a, &mut buf);
                    candidates[depth] = buf;
                }
            }
            None => {
                if depth == 0 {
                    return Ok(None);
                }
                depth -= 1;
                let prev = order[depth];
                map_b[map_a[prev]] = NONE;
                map_a[prev] = NONE;
            }
        }
    }
    Ok(Some(
        VertexMap::new(map_a).expect("search produces a bijection"),
    ))
}

/// Metrics bundle for judging a digraph as a network topology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub order: usize,
    pub size: usize,
    pub regular_degree: Option<usize>,
    pub strongly_connected: bool,
    pub diameter: Diameter,
    /// Of the underlying multigraph.
    pub articulation_points: Vec<usize>,
    /// Of the underlying multigraph.
    pub bridges: Vec<(usize, usize)>,
    pub vertex_connectivity: usize,
    pub arc_connectivity: usize,
    pub underlying_vertex_connectivity: usize,
    pub underlying_edge_connectivity: usize,
    pub is_line_digraph: bool,
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let regular = self
            .regular_degree
            .map_or_else(|| "no".to_string(), |k| k.to_string());
        let list = |xs: &[usize]| {
            xs.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        let bridges = self
            .bridges
            .iter()
            .map(|(u, v)| format!("{u}-{v}"))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(f, "order: {}", self.order)?;
        writeln!(f, "size: {}", self.size)?;
        writeln!(f, "regular_degree: {regular}")?;
        writeln!(f, "strongly_connected: {}", self.strongly_connected)?;
        writeln!(f, "diameter: {}", self.diameter)?;
        writeln!(
            f,
            "articulation_points: [{}]",
            list(&self.articulation_points)
        )?;
        writeln!(f, "bridges: [{bridges}]")?;
        writeln!(f, "vertex_connectivity: {}", self.vertex_connectivity)?;
        writeln!(f, "arc_connectivity: {}", self.arc_connectivity)?;
        writeln!(
            f,
            "underlying_vertex_connectivity: {}",
            self.underlying_vertex_connectivity
        )?;
        writeln!(
            f,
            "underlying_edge_connectivity: {}",
            self.underlying_edge_connectivity
        )?;
        writeln!(f, "is_line_digraph: {}", self.is_line_digraph)
    }
}

pub fn analyze(d: &Digraph) -> AnalysisReport {
    let cuts = underlying_cut_analysis(d);
    AnalysisReport {
        order: d.order(),
        size: d.size(),
        regular_degree: d.regular_degree(),
        strongly_connected: strongly_connected(d),
        diameter: diameter(d),
        articulation_points: cuts.articulation_points,
        bridges: cuts.bridges,
        vertex_connectivity: vertex_connectivity(d),
        arc_connectivity: arc_connectivity(d),
        underlying_vertex_connectivity: underlying_vertex_connectivity(d),
        underlying_edge_connectivity: underlying_edge_connectivity(d),
        is_line_digraph: is_line_digraph(d).is_ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{
        cayley_zn, complete_with_loops, de_bruijn, directed_cycle, random_regular,
    };
    use proptest::prelude::*;

    fn path3() -> Digraph {
        Digraph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    /// Floyd–Warshall diameter.
    fn diameter_oracle(d: &Digraph) -> Diameter {
        let n = d.order();
        let inf = usize::MAX / 4;
        let mut dist = vec![vec![inf; n]; n];
        for (v, row) in dist.iter_mut().enumerate() {
            row[v] = 0;
        }
        for &(t, h) in d.arcs() {
            if t != h {
                dist[t][h] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    dist[i][j] = dist[i][j].min(dist[i][k] + dist[k][j]);
                }
            }
        }
        let worst = dist.iter().flatten().copied().max().unwrap_or(0);
        if worst >= inf {
            Diameter::Infinite
        } else {
            Diameter::Finite(worst)
        }
    }

    fn undirected_components(n: usize, edges: &[(usize, usize)], removed: Option<usize>) -> usize {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for &(u, v) in edges {
            if Some(u) == removed || Some(v) == removed {
                continue;
            }
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            parent[a] = b;
        }
        (0..n)
            .filter(|&v| Some(v) != removed)
            .filter(|&v| find(&mut parent, v) == v)
            .count()
    }

    /// Removal oracle: a vertex or edge is critical when deleting it
    /// increases the number of connected components.
    fn cut_oracle(d: &Digraph, model: EdgeModel) -> CutAnalysis {
        let n = d.order();
        let edges = underlying_edges(d, model);
        let base = undirected_components(n, &edges, None);
        let articulation_points = (0..n)
            // deleting an isolated vertex only removes a component
            .filter(|&v| edges.iter().any(|&(a, b)| a == v || b == v))
            .filter(|&v| undirected_components(n, &edges, Some(v)) > base)
            .collect();
        let mut bridges: Vec<(usize, usize)> = (0..edges.len())
            .filter(|&i| {
                let rest: Vec<_> = edges
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &e)| e)
                    .collect();
                undirected_components(n, &rest, None) > base
            })
            .map(|i| edges[i])
            .collect();
        bridges.dedup();
        CutAnalysis {
            articulation_points,
            bridges,
        }
    }

    /// Smallest vertex set whose removal breaks strong connectivity.
    fn vertex_connectivity_oracle(d: &Digraph) -> usize {
        let n = d.order();
        if n <= 1 || !strongly_connected(d) {
            return 0;
        }
        for size in 0..n - 1 {
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let keep: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) == 0).collect();
                let pos = |v: usize| keep.iter().position(|&k| k == v);
                let arcs = d
                    .arcs()
                    .iter()
                    .filter_map(|&(t, h)| Some((pos(t)?, pos(h)?)));
                let sub = Digraph::new(keep.len(), arcs).unwrap();
                if !strongly_connected(&sub) {
                    return size;
                }
            }
        }
        n - 1
    }

    /// Smallest arc set whose removal breaks strong connectivity.
    fn arc_connectivity_oracle(d: &Digraph) -> usize {
        let n = d.order();
        if n <= 1 || !strongly_connected(d) {
            return 0;
        }
        let arcs: Vec<_> = d.arcs().iter().copied().filter(|(t, h)| t != h).collect();
        // min over cuts (S, V∖S) of the arcs leaving S
        (1u32..(1 << n) - 1)
            .map(|mask| {
                arcs.iter()
                    .filter(|&&(t, h)| mask & (1 << t) != 0 && mask & (1 << h) == 0)
                    .count()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn strong_connectivity_examples() {
        assert!(strongly_connected(&de_bruijn(2, 3).unwrap()));
        assert!(!strongly_connected(
            &Digraph::new(2, [(0, 0), (1, 1)]).unwrap()
        ));
        assert!(strongly_connected(&Digraph::empty(1)));
        assert_eq!(strongly_connected_components(&path3()).len(), 3);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&de_bruijn(2, 3).unwrap()), Diameter::Finite(3));
        assert_eq!(
            diameter(&complete_with_loops(4).unwrap()),
            Diameter::Finite(1)
        );
        assert_eq!(
            diameter(&cayley_zn(4, &[1, 2, 3]).unwrap()),
            Diameter::Finite(1)
        );
        assert_eq!(diameter(&path3()), Diameter::Infinite);
        assert_eq!(
            diameter(&complete_with_loops(1).unwrap()),
            Diameter::Finite(0)
        );
        for m in 1..=5 {
            let d = de_bruijn(2, m).unwrap();
            assert_eq!(diameter(&d), Diameter::Finite(m));
            assert_eq!(diameter_oracle(&d), Diameter::Finite(m));
        }
    }

    #[test]
    fn cut_examples() {
        assert!(underlying_cut_analysis(&de_bruijn(2, 2).unwrap()).is_clean());
        assert_eq!(
            underlying_cut_analysis(&path3()),
            CutAnalysis {
                articulation_points: vec![1],
                bridges: vec![(0, 1), (1, 2)]
            }
        );
        // a 2-cycle is one edge once antiparallel arcs are merged
        let swap = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        assert!(underlying_cut_analysis(&swap).is_clean());
        assert_eq!(
            underlying_cut_analysis_with(&swap, EdgeModel::Simple).bridges,
            vec![(0, 1)]
        );
        let k2 = complete_with_loops(2).unwrap();
        assert_eq!(
            underlying_cut_analysis_with(&k2, EdgeModel::Simple).bridges,
            vec![(0, 1)]
        );
    }

    #[test]
    fn connectivity_examples() {
        assert_eq!(vertex_connectivity(&complete_with_loops(3).unwrap()), 2);
        let c5 = directed_cycle(5).unwrap();
        assert_eq!((vertex_connectivity(&c5), arc_connectivity(&c5)), (1, 1));
        let cay = cayley_zn(4, &[1, 2, 3]).unwrap();
        assert_eq!((vertex_connectivity(&cay), arc_connectivity(&cay)), (3, 3));
        let b3 = de_bruijn(2, 3).unwrap();
        assert_eq!(vertex_connectivity(&b3), 1);
        assert_eq!(vertex_connectivity(&path3()), 0);
    }

    #[test]
    fn metrics_match_oracles_on_random_digraphs() {
        for n in 1..=7 {
            for k in 1..=3.min(n) {
                for seed in 0..6 {
                    let d = random_regular(n, k, seed).unwrap();
                    assert_eq!(diameter(&d), diameter_oracle(&d));
                    let kappa = vertex_connectivity(&d);
                    let lambda = arc_connectivity(&d);
                    assert_eq!(kappa, vertex_connectivity_oracle(&d), "{d:?}");
                    assert_eq!(lambda, arc_connectivity_oracle(&d), "{d:?}");
                    if strongly_connected(&d) {
                        assert!(kappa <= lambda && lambda <= min_degree(&d), "{d:?}");
                    }
                    for model in [EdgeModel::Multigraph, EdgeModel::Simple] {
                        assert_eq!(
                            underlying_cut_analysis_with(&d, model),
                            cut_oracle(&d, model)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn isomorphism_examples() {
        use crate::factorization::factor_from_matrices;
        use crate::matrix::{rho_reg_zk, DenseMatrix};
        use crate::transforms::diagonal_union;
        let sx = rho_reg_zk(2, 1).unwrap().to_dense();
        let f = factor_from_matrices(
            &complete_with_loops(2).unwrap(),
            &[DenseMatrix::identity(2), sx],
        )
        .unwrap();
        let u = diagonal_union(&f).unwrap().digraph;
        let map = isomorphic(&u, &de_bruijn(2, 2).unwrap()).unwrap().unwrap();
        // 0↦00, 1↦11, 2↦10, 3↦01
        assert_eq!(map.as_slice(), &[0, 3, 2, 1]);

        let b4 = de_bruijn(2, 4).unwrap();
        let m = isomorphic(&b4, &b4).unwrap().unwrap();
        assert!(m.is_isomorphism(&b4, &b4));

        assert_eq!(
            isomorphic(&directed_cycle(3).unwrap(), &directed_cycle(4).unwrap()),
            Ok(None)
        );
        // refinement cannot separate these; the search must
        let two_triangles =
            Digraph::new(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert_eq!(
            isomorphic(&directed_cycle(6).unwrap(), &two_triangles),
            Ok(None)
        );
        assert_eq!(
            isomorphic(&two_triangles, &directed_cycle(6).unwrap()),
            Ok(None)
        );
        assert_eq!(
            isomorphic(&path3(), &Digraph::new(3, [(0, 1), (2, 1)]).unwrap()),
            Ok(None)
        );
    }

    #[test]
    fn isomorphism_budget() {
        // an arcless digraph has every bijection as an isomorphism but the
        // search still visits one node per vertex
        let e = Digraph::empty(20);
        assert!(isomorphic_with_budget(&e, &e, 20).unwrap().is_some());
        assert_eq!(
            isomorphic_with_budget(&e, &e, 19),
            Err(AnalysisError::Budget(19))
        );
    }

    #[test]
    fn analyze_examples() {
        let r = analyze(&de_bruijn(2, 3).unwrap());
        assert_eq!((r.order, r.size, r.regular_degree), (8, 16, Some(2)));
        assert_eq!(r.diameter, Diameter::Finite(3));
        assert_eq!(r.vertex_connectivity, 1);
        assert!(r.articulation_points.is_empty() && r.bridges.is_empty());
        assert!(r.is_line_digraph && r.strongly_connected);

        let r = analyze(&complete_with_loops(1).unwrap());
        assert_eq!((r.order, r.diameter), (1, Diameter::Finite(0)));

        let r = analyze(&cayley_zn(4, &[1, 2, 3]).unwrap());
        assert_eq!(
            (r.order, r.diameter, r.regular_degree),
            (4, Diameter::Finite(1), Some(3))
        );

        let r = analyze(&path3());
        assert_eq!(r.diameter, Diameter::Infinite);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["diameter"], "infinite");
    }

    fn arb_digraph(max: usize) -> impl Strategy<Value = Digraph> {
        (1..=max).prop_flat_map(|n| {
            proptest::collection::btree_set((0..n, 0..n), 0..=n * n)
                .prop_map(move |arcs| Digraph::new(n, arcs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn report_invariants(d in arb_digraph(7)) {
            let r = analyze(&d);
            prop_assert_eq!(r.diameter != Diameter::Infinite, r.strongly_connected);
            if r.vertex_connectivity >= 2 {
                prop_assert!(r.articulation_points.is_empty());
            }
            prop_assert_eq!(underlying_cut_analysis(&d), cut_oracle(&d, EdgeModel::Multigraph));
        }

        #[test]
        fn relabelled_copies_are_isomorphic(d in arb_digraph(7), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut perm: Vec<usize> = (0..d.order()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let phi = VertexMap::new(perm).unwrap();
            let e = phi.relabel(&d);
            let m = isomorphic(&d, &e).unwrap().unwrap();
            prop_assert!(m.is_isomorphism(&d, &e));
            let back = isomorphic(&e, &d).unwrap().unwrap();
            prop_assert!(back.is_isomorphism(&e, &d));
        }
    }
}
