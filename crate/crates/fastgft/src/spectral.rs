//! Dense symmetric eigensolver, the reference graph Fourier transform, and
//! the right-Haar factorization available to regular bipartite graphs (and,
//! through the normalized Laplacian, to all bipartite graphs).
//!
//! The eigensolver is a cyclic-by-row Jacobi iteration: adequate for the leaf
//! sizes this crate works with, orthogonal to machine precision, and free of
//! external dependencies.

use std::f64::consts::SQRT_2;

use crate::decompose::{haar_stage_matrix, HaarStage};
use crate::graph::{
    is_bipartite, is_k_regular_bipartite, laplacian, normalized_laplacian, Graph,
};
use crate::mat::Mat;
use crate::{Error, Result};

/// Default Jacobi stopping tolerance on relative off-diagonal Frobenius mass.
pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;

/// Default eigenvalue gap below which two eigenvalues share a cluster.
pub const EIGENVALUE_CLUSTER_TOL: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending, column k
/// of `eigenvectors` belonging to eigenvalue k.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Orthogonal blocks E ((n−p)×(n−p)) and F (p×p) such that diag(E, F) times
/// the contiguous butterfly with p pairs reproduces an eigenvector matrix of
/// the part-ordered Laplacian. `part_order` records that ordering: row r of
/// the part-ordered matrices corresponds to original node `part_order[r]`.
#[derive(Clone, Debug)]
pub struct RightHaarFactor {
    pub e_block: Mat,
    pub f_block: Mat,
    pub p: usize,
    pub part_order: Vec<usize>,
}

impl RightHaarFactor {
    pub fn n(&self) -> usize {
        self.part_order.len()
    }

    /// diag(E, F)·B with rows scattered back to original node order; equals
    /// the eigenvector matrix returned alongside the factor.
    pub fn realized_basis(&self) -> Mat {
        let n = self.n();
        let nt = n - self.p;
        let mut block = Mat::zeros(n, n);
        for i in 0..nt {
            for j in 0..nt {
                block[(i, j)] = self.e_block[(i, j)];
            }
        }
        for i in 0..self.p {
            for j in 0..self.p {
                block[(nt + i, nt + j)] = self.f_block[(i, j)];
            }
        }
        let part = block.matmul(&haar_stage_matrix(&HaarStage::contiguous(n, self.p)));
        let mut out = Mat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                out[(self.part_order[r], c)] = part[(r, c)];
            }
        }
        out
    }
}

fn off_diagonal_frobenius(a: &Mat) -> f64 {
    let n = a.n_rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Cyclic-by-row Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius mass drops to `tol`·‖M‖_F;
/// deterministic for a fixed input. Errors on asymmetric input and when 100
/// sweeps do not reach the tolerance.
pub fn jacobi_eigh(m: &Mat, tol: f64) -> Result<Spectrum> {
    let n = m.n_rows();
    if m.n_cols() != n {
        return Err(Error::DimMismatch { expected: n, got: m.n_cols() });
    }
    let dev = m.symmetry_deviation();
    if dev > 1e-12 * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(dev));
    }
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    let threshold = tol * m.frobenius();
    let mut converged = off_diagonal_frobenius(&a) <= threshold;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // smaller-angle rotation zeroing a_pq
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(p, k)] = a[(k, p)];
                    a[(k, q)] = s * akp + c * akq;
                    a[(q, k)] = a[(k, q)];
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[(q, q)] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_frobenius(&a) <= threshold;
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("real eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = Mat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[(r, new)] = v[(r, old)];
        }
    }
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Negate any column whose first entry of magnitude > 1e−8 is negative.
pub(crate) fn column_sign_fix(m: &mut Mat) {
    let (rows, cols) = (m.n_rows(), m.n_cols());
    for j in 0..cols {
        let lead = (0..rows).map(|i| m[(i, j)]).find(|e| e.abs() > 1e-8);
        if let Some(lead) = lead {
            if lead < 0.0 {
                for i in 0..rows {
                    m[(i, j)] = -m[(i, j)];
                }
            }
        }
    }
}

fn sign_fix_vec(col: &mut [f64]) {
    if let Some(&lead) = col.iter().find(|e| e.abs() > 1e-8) {
        if lead < 0.0 {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Graph Fourier transform: eigendecomposition of the Laplacian with a fixed
/// sign convention (first significant entry of each column positive).
pub fn gft(g: &Graph) -> Result<Spectrum> {
    let mut spec = jacobi_eigh(&laplacian(g), DEFAULT_JACOBI_TOL)?;
    column_sign_fix(&mut spec.eigenvectors);
    Ok(spec)
}

/// Half-open column ranges grouping eigenvalues whose consecutive gaps stay
/// within `cluster_tol`.
pub fn eigenvalue_clusters(eigenvalues: &[f64], cluster_tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..eigenvalues.len() {
        if eigenvalues[i] - eigenvalues[i - 1] > cluster_tol {
            out.push((start, i));
            start = i;
        }
    }
    if !eigenvalues.is_empty() {
        out.push((start, eigenvalues.len()));
    }
    out
}

/// Project `cand` against `basis`, append it normalized unless the residual
/// norm falls below `drop_tol`.
fn push_orthonormalized(basis: &mut Vec<Vec<f64>>, mut cand: Vec<f64>, drop_tol: f64) -> bool {
    for _ in 0..2 {
        for b in basis.iter() {
            let dot: f64 = b.iter().zip(cand.iter()).map(|(x, y)| x * y).sum();
            for (c, x) in cand.iter_mut().zip(b.iter()) {
                *c -= dot * x;
            }
        }
    }
    let norm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= drop_tol {
        return false;
    }
    for x in cand.iter_mut() {
        *x /= norm;
    }
    basis.push(cand);
    true
}

/// Shared right-Haar construction on a part-ordered matrix whose spectrum is
/// symmetric about `center` (top part size n−p, bottom p ≤ n−p).
///
/// Eigenvectors below center come from Jacobi; each is paired with its flip
/// (u1; −u2) at the mirrored eigenvalue and the pair sits in columns j and
/// n−1−j. The center eigenspace is split into vectors supported on the top
/// part and vectors supported on the bottom part; bottom-supported ones pair
/// with top-supported partners, leftovers fill the middle columns unpaired.
fn right_haar_core(m: &Mat, p: usize, center: f64) -> Result<(Vec<f64>, Mat, Mat, Mat)> {
    let n = m.n_rows();
    let nt = n - p;
    let spec = jacobi_eigh(m, DEFAULT_JACOBI_TOL)?;
    let scale = spec.eigenvalues.iter().fold(1.0f64, |acc, &l| acc.max(l.abs()));
    let ctol = EIGENVALUE_CLUSTER_TOL * scale;

    let lower: Vec<usize> = (0..n).filter(|&i| spec.eigenvalues[i] < center - ctol).collect();
    let upper_count = (0..n).filter(|&i| spec.eigenvalues[i] > center + ctol).count();
    let r = lower.len();
    if upper_count != r || r > p {
        return Err(Error::Numerical(format!(
            "spectrum is not paired about {center}: {r} eigenvalues below, {upper_count} above"
        )));
    }

    let mut evals = vec![center; n];
    let mut u = Mat::zeros(n, n);
    let mut e = Mat::zeros(nt, nt);
    let mut f = Mat::zeros(p, p);

    for (j, &idx) in lower.iter().enumerate() {
        let lam = spec.eigenvalues[idx];
        let mut col = spec.eigenvectors.column(idx);
        sign_fix_vec(&mut col);
        evals[j] = lam;
        evals[n - 1 - j] = 2.0 * center - lam;
        for i in 0..nt {
            u[(i, j)] = col[i];
            u[(i, n - 1 - j)] = col[i];
            e[(i, j)] = SQRT_2 * col[i];
        }
        for i in 0..p {
            u[(nt + i, j)] = col[nt + i];
            u[(nt + i, n - 1 - j)] = -col[nt + i];
            f[(i, p - 1 - j)] = SQRT_2 * col[nt + i];
        }
    }

    let center_idx: Vec<usize> = (0..n)
        .filter(|&i| (spec.eigenvalues[i] - center).abs() <= ctol)
        .collect();
    if !center_idx.is_empty() {
        let mean =
            center_idx.iter().map(|&i| spec.eigenvalues[i]).sum::<f64>() / center_idx.len() as f64;
        for slot in evals.iter_mut().take(n - r).skip(r) {
            *slot = mean;
        }
    }
    let mut tops: Vec<Vec<f64>> = Vec::new();
    let mut bottoms: Vec<Vec<f64>> = Vec::new();
    for &idx in &center_idx {
        let col = spec.eigenvectors.column(idx);
        push_orthonormalized(&mut tops, col[..nt].to_vec(), 1e-8);
        push_orthonormalized(&mut bottoms, col[nt..].to_vec(), 1e-8);
    }
    for t in tops.iter_mut() {
        sign_fix_vec(t);
    }
    for b in bottoms.iter_mut() {
        sign_fix_vec(b);
    }
    let (s, q) = (tops.len(), bottoms.len());
    if s + q != center_idx.len() || q + r != p {
        return Err(Error::Numerical(format!(
            "center eigenspace of dimension {} does not split per part ({s} top, {q} bottom)",
            center_idx.len()
        )));
    }

    let h = 1.0 / SQRT_2;
    for i in 0..q {
        let j = r + i;
        for (row, &x) in tops[i].iter().enumerate() {
            u[(row, j)] = h * x;
            u[(row, n - 1 - j)] = h * x;
            e[(row, j)] = x;
        }
        for (row, &x) in bottoms[i].iter().enumerate() {
            u[(nt + row, j)] = h * x;
            u[(nt + row, n - 1 - j)] = -h * x;
            f[(row, p - 1 - j)] = x;
        }
    }
    for i in q..s {
        let j = p + (i - q);
        for (row, &x) in tops[i].iter().enumerate() {
            u[(row, j)] = x;
            e[(row, j)] = x;
        }
    }

    let ortho = u.orthogonality_deviation();
    if ortho > 1e-9 {
        return Err(Error::Numerical(format!(
            "assembled eigenvector matrix is not orthogonal (deviation {ortho:e})"
        )));
    }
    let mu = m.matmul(&u);
    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            residual = residual.max((mu[(i, j)] - evals[j] * u[(i, j)]).abs());
        }
    }
    if residual > 1e-9 * m.inf_norm().max(1.0) {
        return Err(Error::Numerical(format!(
            "assembled columns fail the eigen-equation (residual {residual:e})"
        )));
    }
    Ok((evals, u, e, f))
}

fn permute_rows_cols(m: &Mat, order: &[usize]) -> Mat {
    let n = order.len();
    let mut out = Mat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(r, c)] = m[(order[r], order[c])];
        }
    }
    out
}

fn scatter_rows(part: &Mat, order: &[usize]) -> Mat {
    let n = order.len();
    let mut out = Mat::zeros(n, part.n_cols());
    for r in 0..n {
        for c in 0..part.n_cols() {
            out[(order[r], c)] = part[(r, c)];
        }
    }
    out
}

/// Right-Haar GFT of a k-regular bipartite graph: one butterfly of n/2 Haar
/// units on the coefficient side plus two dense blocks of half size.
///
/// Eigenvalues pair as (λ, 2k−λ) across columns j and n−1−j. The returned
/// eigenvector matrix is in original node order; the factor's blocks live in
/// part order (first part rows on top).
pub fn right_haar_gft(g: &Graph) -> Result<(RightHaarFactor, Spectrum)> {
    let (bip, k) = is_k_regular_bipartite(g).ok_or(Error::NotRegularBipartite)?;
    let part_order: Vec<usize> = bip.s1.iter().chain(bip.s2.iter()).copied().collect();
    let p = bip.s2.len();
    let m = permute_rows_cols(&laplacian(g), &part_order);
    let (evals, u_part, e, f) = right_haar_core(&m, p, k)?;
    let spectrum = Spectrum { eigenvalues: evals, eigenvectors: scatter_rows(&u_part, &part_order) };
    Ok((RightHaarFactor { e_block: e, f_block: f, p, part_order }, spectrum))
}

/// Same factor structure for the normalized Laplacian of any bipartite graph
/// with positive degrees; the spectrum is symmetric about 1 and p is the size
/// of the smaller part (larger part ordered first).
pub fn right_haar_gft_normalized(g: &Graph) -> Result<(RightHaarFactor, Spectrum)> {
    let bip = is_bipartite(g).ok_or(Error::NotBipartite)?;
    let nl = normalized_laplacian(g)?;
    let (big, small) =
        if bip.s1.len() >= bip.s2.len() { (&bip.s1, &bip.s2) } else { (&bip.s2, &bip.s1) };
    let part_order: Vec<usize> = big.iter().chain(small.iter()).copied().collect();
    let p = small.len();
    let m = permute_rows_cols(&nl, &part_order);
    let (evals, u_part, e, f) = right_haar_core(&m, p, 1.0)?;
    let spectrum = Spectrum { eigenvalues: evals, eigenvectors: scatter_rows(&u_part, &part_order) };
    Ok((RightHaarFactor { e_block: e, f_block: f, p, part_order }, spectrum))
}

/// Worst principal-angle distance between the spans of `u1` and `u2` over
/// eigenvalue clusters: 0 when every cluster spans the same subspace, 1 when
/// some cluster subspaces are orthogonal.
///
/// Column k of both matrices is assumed to belong to `eigenvalues[k]`
/// (ascending); consecutive gaps above `cluster_tol` separate clusters.
/// Computed per cluster as the spectral norm of (I − A·Aᵀ)·B — the sine of
/// the largest principal angle. Unlike √(1 − σ_min²) of the cross-Gram, this
/// keeps full precision near zero instead of bottoming out at √ε.
pub fn subspace_distance(
    u1: &Mat,
    u2: &Mat,
    eigenvalues: &[f64],
    cluster_tol: f64,
) -> Result<f64> {
    if u1.n_rows() != u2.n_rows() {
        return Err(Error::DimMismatch { expected: u1.n_rows(), got: u2.n_rows() });
    }
    if u1.n_cols() != eigenvalues.len() {
        return Err(Error::DimMismatch { expected: eigenvalues.len(), got: u1.n_cols() });
    }
    if u2.n_cols() != eigenvalues.len() {
        return Err(Error::DimMismatch { expected: eigenvalues.len(), got: u2.n_cols() });
    }
    let rows = u1.n_rows();
    let mut worst: f64 = 0.0;
    for (lo, hi) in eigenvalue_clusters(eigenvalues, cluster_tol) {
        let k = hi - lo;
        // cross-Gram C = AᵀB restricted to the cluster columns
        let mut cross = Mat::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let mut acc = 0.0;
                for i in 0..rows {
                    acc += u1[(i, lo + a)] * u2[(i, lo + b)];
                }
                cross[(a, b)] = acc;
            }
        }
        // residual R = B − A·C with columns spanning the part of B outside
        // span(A); its largest singular value is the worst principal sine
        let mut residual = Mat::zeros(rows, k);
        for i in 0..rows {
            for b in 0..k {
                let mut acc = u2[(i, lo + b)];
                for a in 0..k {
                    acc -= u1[(i, lo + a)] * cross[(a, b)];
                }
                residual[(i, b)] = acc;
            }
        }
        let gram = residual.transpose().matmul(&residual);
        let sym = jacobi_eigh(&gram, DEFAULT_JACOBI_TOL)?;
        let sine_sq = sym.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
        worst = worst.max(sine_sq.sqrt().min(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::testutil;

    fn c4() -> Graph {
        Graph::with_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])
    }

    fn check_spectrum(m: &Mat, spec: &Spectrum) {
        assert!(spec.eigenvectors.orthogonality_deviation() <= 1e-10);
        let n = spec.n();
        for i in 1..n {
            assert!(spec.eigenvalues[i] >= spec.eigenvalues[i - 1]);
        }
        let mu = m.matmul(&spec.eigenvectors);
        let mut residual: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                residual = residual.max((mu[(i, j)] - spec.eigenvalues[j] * spec.eigenvectors[(i, j)]).abs());
            }
        }
        assert!(residual <= 1e-9 * m.inf_norm().max(1.0), "residual {residual:e}");
    }

    #[test]
    fn jacobi_two_node_laplacian() {
        let m = Mat::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let spec = jacobi_eigh(&m, DEFAULT_JACOBI_TOL).unwrap();
        assert!((spec.eigenvalues[0] - 0.0).abs() <= 1e-12);
        assert!((spec.eigenvalues[1] - 2.0).abs() <= 1e-12);
        check_spectrum(&m, &spec);
    }

    #[test]
    fn jacobi_diagonal_input_sorts_without_rotating() {
        let m = Mat::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let spec = jacobi_eigh(&m, DEFAULT_JACOBI_TOL).unwrap();
        assert_eq!(spec.eigenvalues, vec![1.0, 2.0, 3.0]);
        // eigenvectors are exact coordinate vectors: columns e1, e2, e0
        let expect = Mat::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert_eq!(spec.eigenvectors, expect);
    }

    #[test]
    fn jacobi_c4_eigenvalues() {
        let spec = jacobi_eigh(&laplacian(&c4()), DEFAULT_JACOBI_TOL).unwrap();
        let expect = [0.0, 2.0, 2.0, 4.0];
        for (got, want) in spec.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() <= 1e-10);
        }
        check_spectrum(&laplacian(&c4()), &spec);
    }

    #[test]
    fn jacobi_rejects_bad_input() {
        let asym = Mat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]);
        assert!(matches!(jacobi_eigh(&asym, 1e-12), Err(Error::NotSymmetric(_))));
        let rect = Mat::zeros(2, 3);
        assert!(matches!(jacobi_eigh(&rect, 1e-12), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn jacobi_random_matrices_meet_invariants() {
        let mut rng = testutil::rng(3);
        for _ in 0..30 {
            let m = testutil::random_symmetric_mat(&mut rng, 8);
            let spec = jacobi_eigh(&m, DEFAULT_JACOBI_TOL).unwrap();
            check_spectrum(&m, &spec);
            // trace and Frobenius norm are spectral invariants
            let trace: f64 = (0..8).map(|i| m[(i, i)]).sum();
            let lam_sum: f64 = spec.eigenvalues.iter().sum();
            assert!((trace - lam_sum).abs() <= 1e-10);
            let fro_sq: f64 = m.frobenius().powi(2);
            let lam_sq: f64 = spec.eigenvalues.iter().map(|l| l * l).sum();
            assert!((fro_sq - lam_sq).abs() <= 1e-9);
        }
    }

    #[test]
    fn gft_line4_matches_cosine_basis() {
        let line = Graph::with_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        let spec = gft(&line).unwrap();
        let expect_evals =
            [0.0, 2.0 - std::f64::consts::SQRT_2, 2.0, 2.0 + std::f64::consts::SQRT_2];
        for (got, want) in spec.eigenvalues.iter().zip(expect_evals) {
            assert!((got - want).abs() <= 1e-10);
        }
        let dct = testutil::dct_ii(4);
        assert!(spec.eigenvectors.max_abs_diff(&dct) <= 1e-8);
    }

    #[test]
    fn gft_single_node() {
        let mut g = Graph::new(1);
        g.set_self_loop(0, 5.0);
        let spec = gft(&g).unwrap();
        assert_eq!(spec.eigenvalues, vec![5.0]);
        assert_eq!(spec.eigenvectors, Mat::from_rows(&[vec![1.0]]));
    }

    #[test]
    fn gft_applies_sign_convention() {
        let mut rng = testutil::rng(9);
        for _ in 0..20 {
            let g = testutil::random_graph(&mut rng, 7, 0.5, true);
            let spec = gft(&g).unwrap();
            for j in 0..7 {
                let lead = (0..7).map(|i| spec.eigenvectors[(i, j)]).find(|e| e.abs() > 1e-8);
                if let Some(lead) = lead {
                    assert!(lead > 0.0);
                }
            }
        }
    }

    #[test]
    fn star_leaf_differences_are_eigenvectors() {
        // e_i − e_j over two leaves of a uniform star solves the
        // eigen-equation at the leaf degree, with only two nonzero entries
        let n = 6;
        let g = Graph::with_edges(n, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0), (0, 5, 1.0)]);
        let l = laplacian(&g);
        for i in 1..n {
            for j in (i + 1)..n {
                let mut v = vec![0.0; n];
                v[i] = 1.0 / SQRT_2;
                v[j] = -1.0 / SQRT_2;
                let lv = l.matvec(&v);
                for k in 0..n {
                    assert!((lv[k] - v[k]).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn bisymmetric_eigenbasis_splits_even_odd() {
        // matrices invariant under conjugation by the reversal have
        // eigenspaces closed under reversal, so each cluster projects onto
        // reversal-even/odd subspaces with projection eigenvalues 0 or 1
        let mut rng = testutil::rng(31);
        let n = 8;
        for _ in 0..20 {
            let raw = testutil::random_symmetric_mat(&mut rng, n);
            let mut m = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = 0.5 * (raw[(i, j)] + raw[(n - 1 - i, n - 1 - j)]);
                }
            }
            let spec = jacobi_eigh(&m, DEFAULT_JACOBI_TOL).unwrap();
            for (lo, hi) in eigenvalue_clusters(&spec.eigenvalues, EIGENVALUE_CLUSTER_TOL) {
                let k = hi - lo;
                let mut even_gram = Mat::zeros(k, k);
                for a in 0..k {
                    for b in 0..k {
                        let mut acc = 0.0;
                        for i in 0..n {
                            let sym_half = 0.5
                                * (spec.eigenvectors[(i, lo + b)]
                                    + spec.eigenvectors[(n - 1 - i, lo + b)]);
                            acc += spec.eigenvectors[(i, lo + a)] * sym_half;
                        }
                        even_gram[(a, b)] = acc;
                    }
                }
                let proj = jacobi_eigh(&even_gram, DEFAULT_JACOBI_TOL).unwrap();
                for &lam in &proj.eigenvalues {
                    assert!(
                        lam.abs() <= 1e-8 || (lam - 1.0).abs() <= 1e-8,
                        "projection eigenvalue {lam} is neither 0 nor 1"
                    );
                }
            }
        }
    }

    fn check_right_haar(g: &Graph, factor: &RightHaarFactor, spec: &Spectrum, l: &Mat) {
        let n = g.n();
        assert!(factor.e_block.orthogonality_deviation() <= 1e-9);
        assert!(factor.f_block.orthogonality_deviation() <= 1e-9);
        assert!(spec.eigenvectors.orthogonality_deviation() <= 1e-9);
        assert!(factor.realized_basis().max_abs_diff(&spec.eigenvectors) <= 1e-12);

        // block structure: the part-ordered U times the contiguous butterfly
        // has vanishing off-blocks
        let mut u_part = Mat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                u_part[(r, c)] = spec.eigenvectors[(factor.part_order[r], c)];
            }
        }
        let ub = u_part.matmul(&haar_stage_matrix(&HaarStage::contiguous(n, factor.p)));
        let nt = n - factor.p;
        for i in 0..n {
            for j in 0..n {
                let off = (i < nt) != (j < nt);
                if off {
                    assert!(ub[(i, j)].abs() <= 1e-10, "off-block entry {:e}", ub[(i, j)]);
                }
            }
        }

        let mu = l.matmul(&spec.eigenvectors);
        let mut residual: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                residual =
                    residual.max((mu[(i, j)] - spec.eigenvalues[j] * spec.eigenvectors[(i, j)]).abs());
            }
        }
        assert!(residual <= 1e-9 * l.inf_norm().max(1.0), "residual {residual:e}");
    }

    #[test]
    fn right_haar_c4() {
        let g = c4();
        let (factor, spec) = right_haar_gft(&g).unwrap();
        assert_eq!(factor.p, 2);
        assert_eq!(factor.part_order, vec![0, 2, 1, 3]);
        let expect = [0.0, 2.0, 2.0, 4.0];
        for (got, want) in spec.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() <= 1e-8);
        }
        // mirrored pairs add to 2k = 4
        for j in 0..2 {
            assert!((spec.eigenvalues[j] + spec.eigenvalues[3 - j] - 4.0).abs() <= 1e-8);
        }
        check_right_haar(&g, &factor, &spec, &laplacian(&g));
    }

    #[test]
    fn right_haar_complete_bipartite_pair() {
        // K_{2,2} with uniform weight w: eigenvalues 0, 2w, 2w, 4w
        let w = 0.7;
        let g = Graph::with_edges(4, &[(0, 1, w), (0, 3, w), (2, 1, w), (2, 3, w)]);
        let (factor, spec) = right_haar_gft(&g).unwrap();
        let expect = [0.0, 1.4, 1.4, 2.8];
        for (got, want) in spec.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() <= 1e-10);
        }
        check_right_haar(&g, &factor, &spec, &laplacian(&g));
    }

    #[test]
    fn right_haar_weighted_matchings() {
        // union of two perfect matchings between parts {0..4} and {4..8}:
        // (a+b)-regular bipartite, connectivity via the shifted matching
        for (a, b) in [(1.0, 1.0), (0.5, 1.25), (2.0, 0.3)] {
            let p = 4;
            let mut g = Graph::new(2 * p);
            for i in 0..p {
                g.set_edge(i, p + i, a);
                g.set_edge(i, p + (i + 1) % p, b);
            }
            let (factor, spec) = right_haar_gft(&g).unwrap();
            let k = a + b;
            for j in 0..p {
                assert!(
                    (spec.eigenvalues[j] + spec.eigenvalues[2 * p - 1 - j] - 2.0 * k).abs() <= 1e-8
                );
            }
            check_right_haar(&g, &factor, &spec, &laplacian(&g));
        }
    }

    #[test]
    fn right_haar_rejects_non_regular() {
        let star = Graph::with_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]);
        assert!(matches!(right_haar_gft(&star), Err(Error::NotRegularBipartite)));
        let triangle = Graph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        assert!(matches!(right_haar_gft(&triangle), Err(Error::NotRegularBipartite)));
    }

    #[test]
    fn right_haar_normalized_star() {
        // parts {leaves}, {hub}: p = 1, spectrum 0, 1, 1, 2
        let g = Graph::with_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]);
        let (factor, spec) = right_haar_gft_normalized(&g).unwrap();
        assert_eq!(factor.p, 1);
        assert_eq!(factor.part_order, vec![1, 2, 3, 0]);
        let expect = [0.0, 1.0, 1.0, 2.0];
        for (got, want) in spec.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() <= 1e-8);
        }
        check_right_haar(&g, &factor, &spec, &normalized_laplacian(&g).unwrap());
    }

    #[test]
    fn right_haar_normalized_c4_and_path() {
        let g = c4();
        let (factor, spec) = right_haar_gft_normalized(&g).unwrap();
        assert_eq!(factor.p, 2);
        let expect = [0.0, 1.0, 1.0, 2.0];
        for (got, want) in spec.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() <= 1e-8);
        }
        check_right_haar(&g, &factor, &spec, &normalized_laplacian(&g).unwrap());

        let p3 = Graph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let (factor, spec) = right_haar_gft_normalized(&p3).unwrap();
        assert_eq!(factor.p, 1);
        assert_eq!(factor.part_order, vec![0, 2, 1]);
        let expect = [0.0, 1.0, 2.0];
        for (got, want) in spec.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() <= 1e-8);
        }
        check_right_haar(&p3, &factor, &spec, &normalized_laplacian(&p3).unwrap());
    }

    #[test]
    fn right_haar_normalized_unbalanced_random() {
        let mut rng = testutil::rng(41);
        for trial in 0..10 {
            // random connected bipartite graph with parts of size 5 and 3:
            // a spanning zig-zag plus random extra cross edges
            let (top, bottom) = (5usize, 3usize);
            let n = top + bottom;
            let mut g = Graph::new(n);
            for i in 0..top {
                g.set_edge(i, top + (i % bottom), 0.4 + rng.gen::<f64>());
            }
            for i in 0..top {
                for j in top..n {
                    if g.edge(i, j) == 0.0 && rng.gen_bool(0.35) {
                        g.set_edge(i, j, 0.4 + rng.gen::<f64>());
                    }
                }
            }
            let (factor, spec) = right_haar_gft_normalized(&g).unwrap();
            assert_eq!(factor.p, bottom, "trial {trial}");
            check_right_haar(&g, &factor, &spec, &normalized_laplacian(&g).unwrap());
        }
    }

    #[test]
    fn right_haar_normalized_rejects() {
        let triangle = Graph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        assert!(matches!(right_haar_gft_normalized(&triangle), Err(Error::NotBipartite)));
        let isolated = Graph::with_edges(3, &[(0, 1, 1.0)]);
        assert!(matches!(right_haar_gft_normalized(&isolated), Err(Error::ZeroDegree(2))));
    }

    #[test]
    fn subspace_distance_examples() {
        let spec = gft(&c4()).unwrap();
        let u = &spec.eigenvectors;
        let evals = &spec.eigenvalues;

        // sign flips leave every cluster span unchanged
        let mut flipped = u.clone();
        for i in 0..4 {
            for j in [1usize, 3] {
                flipped[(i, j)] = -flipped[(i, j)];
            }
        }
        assert!(subspace_distance(u, &flipped, evals, 1e-8).unwrap() <= 1e-10);

        // rotating inside the multiplicity-2 cluster (columns 1, 2) too
        let (c, s) = (0.6, 0.8);
        let mut rotated = u.clone();
        for i in 0..4 {
            rotated[(i, 1)] = c * u[(i, 1)] - s * u[(i, 2)];
            rotated[(i, 2)] = s * u[(i, 1)] + c * u[(i, 2)];
        }
        assert!(subspace_distance(u, &rotated, evals, 1e-8).unwrap() <= 1e-10);

        // swapping columns across distinct clusters is maximal
        let mut swapped = u.clone();
        for i in 0..4 {
            swapped[(i, 0)] = u[(i, 3)];
            swapped[(i, 3)] = u[(i, 0)];
        }
        assert!(subspace_distance(u, &swapped, evals, 1e-8).unwrap() > 0.9);

        let short = Mat::zeros(3, 4);
        assert!(subspace_distance(u, &short, evals, 1e-8).is_err());
        let narrow = Mat::zeros(4, 3);
        assert!(subspace_distance(u, &narrow, evals, 1e-8).is_err());
    }

    #[test]
    fn eigenvalue_cluster_grouping() {
        let evals = [0.0, 1e-10, 0.5, 0.5 + 2e-9, 2.0];
        assert_eq!(eigenvalue_clusters(&evals, 1e-8), vec![(0, 2), (2, 4), (4, 5)]);
        assert_eq!(eigenvalue_clusters(&[], 1e-8), vec![]);
        assert_eq!(eigenvalue_clusters(&[1.0], 1e-8), vec![(0, 1)]);
    }
}
