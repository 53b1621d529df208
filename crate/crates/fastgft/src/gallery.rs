//! Named example graphs with their known symmetry involutions: lines,
//! cycles, stars, complete graphs, two symmetric grid families, and two
//! skeleton trees. The CLI exposes these by name; tests and benchmarks use
//! them as fixtures.

use crate::graph::Graph;
use crate::symmetry::Involution;

/// A catalog graph plus the involutions it is known to be symmetric under.
#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: String,
    pub graph: Graph,
    /// (label, involution); every listed involution is exactly valid for
    /// `graph` (weights are exact constants).
    pub involutions: Vec<(&'static str, Involution)>,
}

impl GalleryEntry {
    /// The involutions alone, in listed order — ready to use as planner
    /// hints.
    pub fn hints(&self) -> Vec<Involution> {
        self.involutions.iter().map(|(_, phi)| phi.clone()).collect()
    }
}

/// Path 0—1—⋯—(n−1) with `weights[i]` on edge (i, i+1); n = weights.len()+1.
pub fn line_graph(weights: &[f64], self_loops: Option<&[f64]>) -> Graph {
    let n = weights.len() + 1;
    let mut g = Graph::new(n);
    for (i, &w) in weights.iter().enumerate() {
        g.set_edge(i, i + 1, w);
    }
    if let Some(loops) = self_loops {
        assert_eq!(loops.len(), n, "need one self-loop weight per node");
        for (i, &s) in loops.iter().enumerate() {
            g.set_self_loop(i, s);
        }
    }
    g
}

/// Unit-weight cycle on n ≥ 3 nodes.
pub fn cycle_graph(n: usize) -> crate::Result<Graph> {
    if n < 3 {
        return Err(crate::Error::InvalidInput(format!("cycle needs n ≥ 3, got {n}")));
    }
    let mut g = Graph::new(n);
    for i in 0..n {
        g.set_edge(i, (i + 1) % n, 1.0);
    }
    Ok(g)
}

/// Unit-weight star: node 0 is the hub, 1..n are leaves.
pub fn star_graph(n: usize) -> Graph {
    assert!(n >= 2, "star needs n ≥ 2");
    let mut g = Graph::new(n);
    for leaf in 1..n {
        g.set_edge(0, leaf, 1.0);
    }
    g
}

/// Unit-weight complete graph on n ≥ 2 nodes.
pub fn complete_graph(n: usize) -> Graph {
    assert!(n >= 2, "complete graph needs n ≥ 2");
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            g.set_edge(i, j, 1.0);
        }
    }
    g
}

/// The two symmetric N×N grid families. Nodes are numbered row-major:
/// (row r, column c) ↦ r·N + c.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    /// 4-connected grid with unit weights plus all main-diagonal edges
    /// ((r,c),(r+1,c+1)) carrying `param`; symmetric about both diagonals.
    Bidiag6,
    /// Horizontal edges with weight `param` and unit anti-diagonal edges
    /// ((r,c),(r+1,c−1)); no vertical edges; centrosymmetric only.
    Zshaped,
}

pub fn grid_graph(kind: GridKind, n: usize, param: f64) -> Graph {
    assert!(n >= 2, "grid needs N ≥ 2");
    let idx = |r: usize, c: usize| r * n + c;
    let mut g = Graph::new(n * n);
    for r in 0..n {
        for c in 0..n {
            match kind {
                GridKind::Bidiag6 => {
                    if c + 1 < n {
                        g.set_edge(idx(r, c), idx(r, c + 1), 1.0);
                    }
                    if r + 1 < n {
                        g.set_edge(idx(r, c), idx(r + 1, c), 1.0);
                    }
                    if r + 1 < n && c + 1 < n {
                        g.set_edge(idx(r, c), idx(r + 1, c + 1), param);
                    }
                }
                GridKind::Zshaped => {
                    if c + 1 < n {
                        g.set_edge(idx(r, c), idx(r, c + 1), param);
                    }
                    if r + 1 < n && c >= 1 {
                        g.set_edge(idx(r, c), idx(r + 1, c - 1), 1.0);
                    }
                }
            }
        }
    }
    g
}

/// Reflections and rotations of an N×N grid, as involutions on row-major
/// flat indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridSymmetry {
    /// mirror columns: (r,c) ↦ (r, N−1−c)
    LeftRight,
    /// mirror rows: (r,c) ↦ (N−1−r, c)
    UpDown,
    /// transpose: (r,c) ↦ (c, r)
    Diagonal,
    /// reflect across the anti-diagonal: (r,c) ↦ (N−1−c, N−1−r)
    AntiDiagonal,
    /// rotate 180°: (r,c) ↦ (N−1−r, N−1−c)
    Centro,
}

pub fn grid_involution(sym: GridSymmetry, n: usize) -> Involution {
    let phi = (0..n * n)
        .map(|i| {
            let (r, c) = (i / n, i % n);
            let (pr, pc) = match sym {
                GridSymmetry::LeftRight => (r, n - 1 - c),
                GridSymmetry::UpDown => (n - 1 - r, c),
                GridSymmetry::Diagonal => (c, r),
                GridSymmetry::AntiDiagonal => (n - 1 - c, n - 1 - r),
                GridSymmetry::Centro => (n - 1 - r, n - 1 - c),
            };
            pr * n + pc
        })
        .collect();
    Involution::new(phi).expect("grid reflections are involutions")
}

/// Unit-weight skeleton tree with 15 or 25 joints.
///
/// 15-joint layout: head(0)—neck(1)—torso(2) spine, three-joint arm chains
/// hanging off the neck (3-4-5 left, 6-7-8 right) and leg chains off the
/// torso (9-10-11 left, 12-13-14 right). The 25-joint variant is a standard
/// motion-capture hierarchy: hip-centered spine with base(0), mid(1),
/// shoulder-level joint(20), neck(2), head(3), four-joint arms ending in
/// hand-tip/thumb forks, and four-joint legs.
pub fn skeleton_graph(joints: usize) -> Graph {
    let edges: &[(usize, usize)] = match joints {
        15 => &[
            (0, 1),
            (1, 2),
            (1, 3),
            (3, 4),
            (4, 5),
            (1, 6),
            (6, 7),
            (7, 8),
            (2, 9),
            (9, 10),
            (10, 11),
            (2, 12),
            (12, 13),
            (13, 14),
        ],
        25 => &[
            (0, 1),
            (1, 20),
            (2, 20),
            (3, 2),
            (4, 20),
            (5, 4),
            (6, 5),
            (7, 6),
            (8, 20),
            (9, 8),
            (10, 9),
            (11, 10),
            (12, 0),
            (13, 12),
            (14, 13),
            (15, 14),
            (16, 0),
            (17, 16),
            (18, 17),
            (19, 18),
            (21, 22),
            (22, 7),
            (23, 24),
            (24, 11),
        ],
        other => panic!("skeleton variant must be 15 or 25 joints, got {other}"),
    };
    let mut g = Graph::new(joints);
    for &(i, j) in edges {
        g.set_edge(i, j, 1.0);
    }
    g
}

/// Left/right mirror of [`skeleton_graph`].
pub fn skeleton_mirror(joints: usize) -> Involution {
    let swaps: &[(usize, usize)] = match joints {
        15 => &[(3, 6), (4, 7), (5, 8), (9, 12), (10, 13), (11, 14)],
        25 => &[
            (4, 8),
            (5, 9),
            (6, 10),
            (7, 11),
            (12, 16),
            (13, 17),
            (14, 18),
            (15, 19),
            (21, 23),
            (22, 24),
        ],
        other => panic!("skeleton variant must be 15 or 25 joints, got {other}"),
    };
    let mut phi: Vec<usize> = (0..joints).collect();
    for &(a, b) in swaps {
        phi[a] = b;
        phi[b] = a;
    }
    Involution::new(phi).expect("mirror is an involution")
}

fn reversal(n: usize) -> Involution {
    Involution::new((0..n).rev().collect()).expect("reversal is an involution")
}

/// The full catalog. Names are unique and stable; the CLI addresses entries
/// by them.
pub fn gallery() -> Vec<GalleryEntry> {
    let leaf_pairing =
        Involution::new(vec![0, 2, 1, 4, 3, 6, 5, 7]).expect("valid involution");
    let perfect_pairing =
        Involution::new(vec![1, 0, 3, 2, 5, 4, 7, 6]).expect("valid involution");
    vec![
        GalleryEntry {
            name: "line8",
            description: "uniform 8-node line".into(),
            graph: line_graph(&[1.0; 7], None),
            involutions: vec![("reversal", reversal(8))],
        },
        GalleryEntry {
            name: "cycle12",
            description: "12-node unit cycle".into(),
            graph: cycle_graph(12).expect("n ≥ 3"),
            involutions: vec![("reversal", reversal(12))],
        },
        GalleryEntry {
            name: "cycle80",
            description: "80-node unit cycle".into(),
            graph: cycle_graph(80).expect("n ≥ 3"),
            involutions: vec![("reversal", reversal(80))],
        },
        GalleryEntry {
            name: "star8",
            description: "8-node star, hub at node 0".into(),
            graph: star_graph(8),
            involutions: vec![("pair six leaves", leaf_pairing)],
        },
        GalleryEntry {
            name: "complete8",
            description: "complete graph on 8 nodes".into(),
            graph: complete_graph(8),
            involutions: vec![("pair all nodes", perfect_pairing)],
        },
        GalleryEntry {
            name: "bidiag16",
            description: "4×4 grid, 4-connected plus main diagonals (a = 0.5)".into(),
            graph: grid_graph(GridKind::Bidiag6, 4, 0.5),
            involutions: vec![
                ("diagonal", grid_involution(GridSymmetry::Diagonal, 4)),
                ("anti-diagonal", grid_involution(GridSymmetry::AntiDiagonal, 4)),
            ],
        },
        GalleryEntry {
            name: "bidiag64",
            description: "8×8 grid, 4-connected plus main diagonals (a = 0.5)".into(),
            graph: grid_graph(GridKind::Bidiag6, 8, 0.5),
            involutions: vec![
                ("diagonal", grid_involution(GridSymmetry::Diagonal, 8)),
                ("anti-diagonal", grid_involution(GridSymmetry::AntiDiagonal, 8)),
            ],
        },
        GalleryEntry {
            name: "zshaped16",
            description: "4×4 grid, horizontal (w = 2) and anti-diagonal edges".into(),
            graph: grid_graph(GridKind::Zshaped, 4, 2.0),
            involutions: vec![("centrosymmetry", grid_involution(GridSymmetry::Centro, 4))],
        },
        GalleryEntry {
            name: "zshaped64",
            description: "8×8 grid, horizontal (w = 2) and anti-diagonal edges".into(),
            graph: grid_graph(GridKind::Zshaped, 8, 2.0),
            involutions: vec![("centrosymmetry", grid_involution(GridSymmetry::Centro, 8))],
        },
        GalleryEntry {
            name: "skeleton15",
            description: "15-joint skeleton tree".into(),
            graph: skeleton_graph(15),
            involutions: vec![("mirror", skeleton_mirror(15))],
        },
        GalleryEntry {
            name: "skeleton25",
            description: "25-joint skeleton tree".into(),
            graph: skeleton_graph(25),
            involutions: vec![("mirror", skeleton_mirror(25))],
        },
    ]
}

/// Look up one entry by name.
pub fn gallery_entry(name: &str) -> Option<GalleryEntry> {
    gallery().into_iter().find(|e| e.name == name)
}
