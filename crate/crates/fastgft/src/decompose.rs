//! Butterfly stages and the symmetric graph decomposition.
//!
//! A stage of parallel 2-point Haar units, one per involution pair, conjugates
//! the Laplacian of a φ-symmetric graph into two decoupled blocks. The blocks
//! are themselves graph Laplacians, of the sum graph G⁺ on V_X ∪ V_Z and the
//! difference graph G⁻ on V_Y, and their weights have closed forms in the
//! original weights — no matrix conjugation is needed to build them. The
//! conjugation itself is kept here as the test oracle.

use std::f64::consts::SQRT_2;

use crate::graph::Graph;
use crate::mat::Mat;
use crate::symmetry::{is_phi_symmetric, partition, Involution, NodePartition};
use crate::{Error, Result, WEIGHT_REL_TOL};

/// One stage of parallel Haar units: each pair (i, j) mixes coordinates i and
/// j into their scaled sum and difference; `passthrough` coordinates are left
/// untouched. As a matrix this is a permuted butterfly, orthogonal and
/// symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarStage {
    pub n: usize,
    /// (i, φ(i)) with i the sum slot and φ(i) the difference slot
    pub pairs: Vec<(usize, usize)>,
    pub passthrough: Vec<usize>,
}

impl HaarStage {
    pub fn from_involution(phi: &Involution) -> HaarStage {
        let part = partition(phi);
        HaarStage::from_partition(phi.len(), &part)
    }

    pub fn from_partition(n: usize, part: &NodePartition) -> HaarStage {
        HaarStage { n, pairs: part.pairs.clone(), passthrough: part.vz.clone() }
    }

    /// Stage pairing coordinate j with n−1−j for j < p, identity in the middle.
    pub fn contiguous(n: usize, p: usize) -> HaarStage {
        assert!(2 * p <= n, "cannot form {p} pairs over {n} coordinates");
        HaarStage {
            n,
            pairs: (0..p).map(|j| (j, n - 1 - j)).collect(),
            passthrough: (p..n - p).collect(),
        }
    }
}

/// Dense matrix of the stage: 1/√2 on pair diagonal slots (negated on the
/// difference slot), 1/√2 on the cross-pair slots, 1 on passthrough.
pub fn haar_stage_matrix(stage: &HaarStage) -> Mat {
    let mut b = Mat::zeros(stage.n, stage.n);
    let h = 1.0 / SQRT_2;
    for &(x, y) in &stage.pairs {
        b[(x, x)] = h;
        b[(x, y)] = h;
        b[(y, x)] = h;
        b[(y, y)] = -h;
    }
    for &z in &stage.passthrough {
        b[(z, z)] = 1.0;
    }
    b
}

/// BᵀLB for the stage's butterfly B. For a φ-symmetric graph all entries
/// coupling a pair's sum slot or a passthrough slot with any difference slot
/// vanish.
pub fn conjugated_laplacian(l: &Mat, stage: &HaarStage) -> Mat {
    let b = haar_stage_matrix(stage);
    b.transpose().matmul(&l.matmul(&b))
}

/// Symmetric decomposition of a φ-symmetric graph.
///
/// `plus_nodes` / `minus_nodes` map sub-graph node indices back to parent
/// nodes: V⁺ lists V_X then V_Z (each in parent order), V⁻ lists V_Y in
/// parent order.
#[derive(Clone, Debug)]
pub struct DecompositionResult {
    pub g_plus: Graph,
    pub g_minus: Graph,
    pub plus_nodes: Vec<usize>,
    pub minus_nodes: Vec<usize>,
    pub stage: HaarStage,
}

/// Build G⁺ and G⁻ from the closed-form weight and self-loop formulas.
///
/// With x, x' ∈ V_X, z, z' ∈ V_Z, y, y' ∈ V_Y:
/// - w⁺(x,x') = w(x,x') + w(x,φ(x')),  w⁺(x,z) = √2·w(x,z),  w⁺(z,z') = w(z,z')
/// - s⁺(x) = s(x) − (√2−1)·Σ_z w(x,z),  s⁺(z) = s(z) + (2−√2)·Σ_x w(z,x)
/// - w⁻(y,y') = w(y,y') − w(y,φ(y'))
/// - s⁻(y) = s(y) + 2·Σ_x w(y,x) + Σ_z w(y,z)
///
/// Cancelled weights (exact zeros) are dropped. The conjugated Laplacian
/// equals diag(L⁺, L⁻) up to the node reordering recorded in the index maps.
pub fn decompose(g: &Graph, phi: &Involution) -> Result<DecompositionResult> {
    if phi.len() != g.n() {
        return Err(Error::DimMismatch { expected: g.n(), got: phi.len() });
    }
    if !is_phi_symmetric(g, phi, WEIGHT_REL_TOL) {
        return Err(Error::NotPhiSymmetric);
    }
    let part = partition(phi);
    let mut vy_sorted = part.vy.clone();
    vy_sorted.sort_unstable();

    let plus_nodes: Vec<usize> = part.vx.iter().chain(&part.vz).copied().collect();
    let minus_nodes = vy_sorted;
    let np = plus_nodes.len();
    let p = part.p_phi();

    let mut g_plus = Graph::new(np);
    for a in 0..np {
        let i = plus_nodes[a];
        for b in (a + 1)..np {
            let j = plus_nodes[b];
            let w = match (a < p, b < p) {
                (true, true) => g.edge(i, j) + g.edge(i, phi.map(j)),
                (true, false) => SQRT_2 * g.edge(i, j),
                (false, false) => g.edge(i, j),
                (false, true) => unreachable!("plus_nodes lists V_X before V_Z"),
            };
            g_plus.set_edge(a, b, w);
        }
        let cross: f64 = if a < p {
            part.vz.iter().map(|&z| g.edge(i, z)).sum::<f64>() * -(SQRT_2 - 1.0)
        } else {
            part.vx.iter().map(|&x| g.edge(i, x)).sum::<f64>() * (2.0 - SQRT_2)
        };
        g_plus.set_self_loop(a, g.self_loop(i) + cross);
    }

    let mut g_minus = Graph::new(p);
    for a in 0..p {
        let i = minus_nodes[a];
        for b in (a + 1)..p {
            let j = minus_nodes[b];
            g_minus.set_edge(a, b, g.edge(i, j) - g.edge(i, phi.map(j)));
        }
        let to_x: f64 = part.vx.iter().map(|&x| g.edge(i, x)).sum();
        let to_z: f64 = part.vz.iter().map(|&z| g.edge(i, z)).sum();
        g_minus.set_self_loop(a, g.self_loop(i) + 2.0 * to_x + to_z);
    }

    let stage = HaarStage::from_partition(g.n(), &part);
    Ok(DecompositionResult { g_plus, g_minus, plus_nodes, minus_nodes, stage })
}

/// Split x into its even and odd symmetric components: x_even is φ-invariant,
/// x_odd is φ-antisymmetric and zero on fixed points, and x_even + x_odd = x
/// exactly.
pub fn even_odd_components(
    x: &[f64],
    phi: &Involution,
    part: &NodePartition,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != phi.len() {
        return Err(Error::DimMismatch { expected: phi.len(), got: x.len() });
    }
    let n = x.len();
    let mut even = vec![0.0; n];
    let mut odd = vec![0.0; n];
    for &z in &part.vz {
        even[z] = x[z];
    }
    for &(i, j) in &part.pairs {
        let avg = 0.5 * (x[i] + x[j]);
        even[i] = avg;
        even[j] = avg;
        odd[i] = x[i] - avg;
        odd[j] = x[j] - avg;
    }
    Ok((even, odd))
}

/// Connected components over nonzero edges, as sub-graphs with node maps back
/// to the parent. Components are ordered by smallest contained node; nodes
/// within a component keep parent order.
pub fn split_components(g: &Graph) -> Vec<(Graph, Vec<usize>)> {
    let n = g.n();
    let adj = g.adjacency();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = count;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if comp[u] == usize::MAX {
                    comp[u] = count;
                    stack.push(u);
                }
            }
        }
        count += 1;
    }
    let mut members = vec![Vec::new(); count];
    for i in 0..n {
        members[comp[i]].push(i);
    }
    members
        .into_iter()
        .map(|nodes| {
            let mut sub = Graph::new(nodes.len());
            for (a, &i) in nodes.iter().enumerate() {
                for (b, &j) in nodes.iter().enumerate().skip(a + 1) {
                    let w = g.edge(i, j);
                    if w != 0.0 {
                        sub.set_edge(a, b, w);
                    }
                }
                sub.set_self_loop(a, g.self_loop(i));
            }
            (sub, nodes)
        })
        .collect()
}
