//! Exact fast graph Fourier transforms from graph symmetry.
//!
//! The graph Fourier transform (GFT) of a signal is its projection onto the
//! eigenvectors of the graph Laplacian. When a graph is symmetric under an
//! involution — a self-inverse node permutation preserving edge weights — the
//! GFT factors exactly into one butterfly stage of 2-point Haar units followed
//! by the GFTs of two smaller decomposed graphs, one per symmetry parity.
//! Applied recursively this yields exact fast transforms; k-regular bipartite
//! graphs admit an analogous right-side Haar stage.
//!
//! Module map:
//! - [`graph`]: graph model, Laplacians, bipartiteness, quadratic form.
//! - [`symmetry`]: involutions, symmetry testing, involution search.
//! - [`decompose`]: butterfly stages and the symmetric graph decomposition.
//! - [`spectral`]: Jacobi eigensolver, dense GFT, right-Haar factorizations.
//! - [`plan`]: recursive fast-GFT planner, plan application, op counting.
//! - [`gallery`]: canonical symmetric graph families with known involutions.
//! - [`baseline`]: truncated-Jacobi approximate GFT and error metrics.

pub mod baseline;
pub mod decompose;
pub mod gallery;
pub mod graph;
pub mod mat;
pub mod plan;
pub mod spectral;
pub mod symmetry;

pub use graph::{Bipartition, Graph, LaplacianMatrix};
pub use mat::Mat;
pub use plan::{FastGftPlan, OpCount, PlanStrategy};
pub use spectral::Spectrum;
pub use symmetry::{Involution, NodePartition};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not symmetric (deviation {0:e})")]
    NotSymmetric(f64),
    #[error("node {0} has nonpositive weighted degree")]
    ZeroDegree(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("array is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("permutation is not an involution")]
    NotInvolution,
    #[error("graph is not a tree")]
    NotTree,
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("graph is not regular bipartite")]
    NotRegularBipartite,
    #[error("graph is not symmetric under the given involution")]
    NotPhiSymmetric,
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("involution count for n = {0} overflows 128-bit arithmetic")]
    CountOverflow(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical validation failed: {0}")]
    Numerical(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default relative tolerance for weight and degree equality comparisons.
pub const WEIGHT_REL_TOL: f64 = 1e-12;

/// a == b within `WEIGHT_REL_TOL`, scaled by magnitude (at least absolute).
pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    approx_eq_tol(a, b, WEIGHT_REL_TOL)
}

pub(crate) fn approx_eq_tol(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use crate::graph::Graph;
    use crate::mat::Mat;
    use crate::symmetry::Involution;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen::<f64>()).collect()
    }

    /// Random graph; weights uniform in [0.2, 2], optionally negated half the
    /// time when `signed`, with occasional self-loops.
    pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, signed: bool) -> Graph {
        let mut g = Graph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < density {
                    let mut w = rng.gen_range(0.2..2.0);
                    if signed && rng.gen_bool(0.3) {
                        w = -w;
                    }
                    g.set_edge(i, j, w);
                }
            }
            if rng.gen_bool(0.2) {
                g.set_self_loop(i, rng.gen_range(0.1..1.5));
            }
        }
        g
    }

    pub fn random_graph_integer_weights(rng: &mut ChaCha8Rng, n: usize) -> Graph {
        let mut g = Graph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(0.4) {
                    g.set_edge(i, j, rng.gen_range(-3i32..=3) as f64);
                }
            }
            if rng.gen_bool(0.3) {
                g.set_self_loop(i, rng.gen_range(0i32..=4) as f64);
            }
        }
        g
    }

    pub fn random_involution(rng: &mut ChaCha8Rng, n: usize) -> Involution {
        let mut phi: Vec<usize> = (0..n).collect();
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(rng);
        let mut it = nodes.into_iter();
        while let (Some(a), Some(b)) = (it.next(), it.next()) {
            if rng.gen_bool(0.8) {
                phi[a] = b;
                phi[b] = a;
            }
        }
        Involution::new(phi).expect("constructed to be an involution")
    }

    /// Random graph made symmetric under a random involution by assigning each
    /// edge orbit (and self-loop orbit) a single weight.
    pub fn random_phi_symmetric(
        rng: &mut ChaCha8Rng,
        n: usize,
        density: f64,
    ) -> (Graph, Involution) {
        let phi = random_involution(rng, n);
        let mut g = Graph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if g.edge(i, j) != 0.0 || rng.gen::<f64>() >= density {
                    continue;
                }
                let w = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.25) { -1.0 } else { 1.0 };
                g.set_edge(i, j, w);
                let (mi, mj) = (phi.map(i), phi.map(j));
                if mi != mj && (mi.min(mj), mi.max(mj)) != (i, j) {
                    g.set_edge(mi, mj, w);
                }
            }
        }
        for i in 0..n {
            if phi.map(i) >= i && rng.gen_bool(0.3) {
                let s = rng.gen_range(0.1..1.5);
                g.set_self_loop(i, s);
                g.set_self_loop(phi.map(i), s);
            }
        }
        (g, phi)
    }

    pub fn random_symmetric_mat(rng: &mut ChaCha8Rng, n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Orthonormal DCT-II basis as columns: u_k(j) = c_k cos((j + 1/2) k π / n).
    pub fn dct_ii(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for k in 0..n {
            let c = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            for j in 0..n {
                m[(j, k)] = c * ((j as f64 + 0.5) * k as f64 * std::f64::consts::PI / n as f64).cos();
            }
        }
        m
    }

    /// Orthonormal DST-IV basis as columns:
    /// u_k(j) = sqrt(2/n) sin((2j + 1)(2k + 1) π / (4n)).
    pub fn dst_iv(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                let arg = (2 * j + 1) as f64 * (2 * k + 1) as f64 * std::f64::consts::PI
                    / (4.0 * n as f64);
                m[(j, k)] = (2.0 / n as f64).sqrt() * arg.sin();
            }
        }
        m
    }
}
