//! Graph data model and Laplacian construction.
//!
//! A graph is a node count, a sparse map of symmetric edge weights, and a
//! per-node self-loop weight. The (unnormalized) Laplacian is L = D - W + S:
//! degree matrix minus weighted adjacency plus diagonal self-loop matrix, so
//! `l_ii = s_i + Σ_j w_ij` and `l_ij = -w_ij` off the diagonal. Row sums of L
//! recover the self-loop weights, which is what `graph_from_laplacian` uses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::mat::Mat;
use crate::{approx_eq, Error, Result};

/// Weighted undirected graph with optional self-loops.
///
/// Edges are stored once with `i < j`. Weight 0 means "no edge": setting a
/// weight to zero removes the edge, so degree and bipartiteness tests are
/// well-defined. Negative weights are permitted (symmetric decomposition
/// produces them). Self-loops are kept separately from edges and contribute
/// only to the Laplacian diagonal, not to degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    edges: BTreeMap<(usize, usize), f64>,
    self_loops: Vec<f64>,
}

/// Dense symmetric Laplacian; see [`laplacian`].
pub type LaplacianMatrix = Mat;

/// Two disjoint node sets covering all nodes, with every edge crossing parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Bipartition {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        Graph { n, edges: BTreeMap::new(), self_loops: vec![0.0; n] }
    }

    pub fn with_edges(n: usize, edges: &[(usize, usize, f64)]) -> Graph {
        let mut g = Graph::new(n);
        for &(i, j, w) in edges {
            g.set_edge(i, j, w);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Set (or with weight 0, remove) the edge between distinct nodes i and j.
    pub fn set_edge(&mut self, i: usize, j: usize, w: f64) {
        assert!(i != j, "self-loops are set with set_self_loop, not as edges");
        assert!(i < self.n && j < self.n, "node index out of range");
        let key = (i.min(j), i.max(j));
        if w == 0.0 {
            self.edges.remove(&key);
        } else {
            self.edges.insert(key, w);
        }
    }

    /// Edge weight between i and j (0 when absent).
    pub fn edge(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        *self.edges.get(&(i.min(j), i.max(j))).unwrap_or(&0.0)
    }

    pub fn set_self_loop(&mut self, i: usize, s: f64) {
        self.self_loops[i] = s;
    }

    pub fn self_loop(&self, i: usize) -> f64 {
        self.self_loops[i]
    }

    pub fn self_loops(&self) -> &[f64] {
        &self.self_loops
    }

    /// Stored edges as (i, j, w) with i < j, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Weighted degree: sum of incident edge weights (self-loops excluded).
    pub fn degree(&self, i: usize) -> f64 {
        let mut d = 0.0;
        for (a, b, w) in self.edges() {
            if a == i || b == i {
                d += w;
            }
        }
        d
    }

    /// Per-node adjacency lists (neighbor, weight), neighbors ascending.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j, w) in self.edges() {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(j, _)| j);
        }
        adj
    }

    pub fn to_json(&self) -> String {
        let wire = GraphWire {
            n: self.n,
            edges: self.edges().collect(),
            self_loops: self
                .self_loops
                .iter()
                .enumerate()
                .filter(|(_, &s)| s != 0.0)
                .map(|(i, &s)| (i, s))
                .collect(),
        };
        serde_json::to_string(&wire).expect("graph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Graph> {
        let wire: GraphWire = serde_json::from_str(s)?;
        let mut g = Graph::new(wire.n);
        for (i, j, w) in wire.edges {
            if i >= wire.n || j >= wire.n {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) out of range for n = {}",
                    wire.n
                )));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("edge ({i}, {j}) is a self-loop")));
            }
            if g.edge(i, j) != 0.0 {
                return Err(Error::InvalidInput(format!("duplicate edge ({i}, {j})")));
            }
            g.set_edge(i, j, w);
        }
        for (i, s) in wire.self_loops {
            if i >= wire.n {
                return Err(Error::InvalidInput(format!(
                    "self-loop node {i} out of range for n = {}",
                    wire.n
                )));
            }
            g.set_self_loop(i, s);
        }
        Ok(g)
    }
}

/// Wire format: `{"n": .., "edges": [[i, j, w], ..], "self_loops": [[i, s], ..]}`.
/// Either endpoint order is accepted on read; writes use i < j and omit zero
/// self-loops.
#[derive(Serialize, Deserialize)]
struct GraphWire {
    n: usize,
    #[serde(default)]
    edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    self_loops: Vec<(usize, f64)>,
}

/// L = D - W + S.
pub fn laplacian(g: &Graph) -> LaplacianMatrix {
    let n = g.n();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = g.self_loop(i);
    }
    for (i, j, w) in g.edges() {
        l[(i, j)] = -w;
        l[(j, i)] = -w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    l
}

/// Recover the graph from a symmetric Laplacian: `w_ij = -l_ij`, `s_i = Σ_j l_ij`.
pub fn graph_from_laplacian(l: &LaplacianMatrix) -> Result<Graph> {
    let n = l.n_rows();
    if l.n_cols() != n {
        return Err(Error::DimMismatch { expected: n, got: l.n_cols() });
    }
    let dev = l.symmetry_deviation();
    if dev > 1e-12 * l.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(dev));
    }
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            g.set_edge(i, j, -l[(i, j)]);
        }
        g.set_self_loop(i, l.row(i).iter().sum());
    }
    Ok(g)
}

/// Symmetric normalized Laplacian D^{-1/2} L D^{-1/2}.
///
/// Errors when any node has nonpositive weighted degree.
pub fn normalized_laplacian(g: &Graph) -> Result<LaplacianMatrix> {
    let n = g.n();
    let mut deg = vec![0.0; n];
    for i in 0..n {
        deg[i] = g.degree(i);
        if deg[i] <= 0.0 {
            return Err(Error::ZeroDegree(i));
        }
    }
    let l = laplacian(g);
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            // l / √(d_i·d_j) rounds once, so integer-degree graphs get
            // exact entries where (l/√d_i)/√d_j would drift an ulp
            let v = l[(i, j)] / (deg[i] * deg[j]).sqrt();
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Two-color the graph by BFS over nonzero edges; `None` when an odd cycle
/// exists. Isolated nodes land in the first part.
pub fn is_bipartite(g: &Graph) -> Option<Bipartition> {
    let n = g.n();
    let adj = g.adjacency();
    let mut color = vec![u8::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for root in 0..n {
        if color[root] != u8::MAX {
            continue;
        }
        color[root] = 0;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &adj[v] {
                if color[u] == u8::MAX {
                    color[u] = 1 - color[v];
                    queue.push_back(u);
                } else if color[u] == color[v] {
                    return None;
                }
            }
        }
    }
    let s1 = (0..n).filter(|&i| color[i] == 0).collect();
    let s2 = (0..n).filter(|&i| color[i] == 1).collect();
    Some(Bipartition { s1, s2 })
}

/// Bipartite with equal part sizes and every weighted degree equal to k.
///
/// Self-loops disqualify: the k-regular spectral pairing relies on L = kI - W.
pub fn is_k_regular_bipartite(g: &Graph) -> Option<(Bipartition, f64)> {
    let n = g.n();
    if n == 0 || n % 2 != 0 {
        return None;
    }
    if g.self_loops.iter().any(|&s| s != 0.0) {
        return None;
    }
    let bip = is_bipartite(g)?;
    if bip.s1.len() != bip.s2.len() {
        return None;
    }
    let k = g.degree(0);
    if k <= 0.0 {
        return None;
    }
    for i in 1..n {
        if !approx_eq(g.degree(i), k) {
            return None;
        }
    }
    Some((bip, k))
}

/// fᵀLf evaluated through the edge sum Σ w_ij (f_i - f_j)² + Σ s_k f_k²,
/// reading the weights off the Laplacian entries.
pub fn quadratic_form(l: &LaplacianMatrix, f: &[f64]) -> Result<f64> {
    let n = l.n_rows();
    if f.len() != n {
        return Err(Error::DimMismatch { expected: n, got: f.len() });
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let w = -l[(i, j)];
            if w != 0.0 {
                let d = f[i] - f[j];
                acc += w * d * d;
            }
        }
        let s: f64 = l.row(i).iter().sum();
        acc += s * f[i] * f[i];
    }
    Ok(acc)
}
