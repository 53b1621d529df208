//! Approximate fast GFT baseline: truncated Jacobi diagonalization realized
//! as layers of disjoint plane rotations, plus the two error metrics used to
//! compare approximate transforms against exact ones.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::decompose::decompose;
use crate::graph::{laplacian, Graph};
use crate::mat::Mat;
use crate::plan::{FastGftPlan, GivensRotation, PlanStage};
use crate::symmetry::{is_phi_symmetric, Involution};
use crate::{Error, Result, WEIGHT_REL_TOL};

/// Stop rotating once no remaining off-diagonal entry exceeds this.
const OFF_DIAGONAL_FLOOR: f64 = 1e-14;

/// One layer of rotations touching pairwise-disjoint coordinates; all of a
/// layer can be applied in parallel.
#[derive(Clone, Debug, PartialEq)]
pub struct GivensLayer {
    pub rotations: Vec<GivensRotation>,
}

/// Truncated-Jacobi output: `layers` applied in order approximately
/// diagonalize the input, `diagonal` holds the resulting diagonal (the
/// eigenvalue estimates, unsorted), and `perm` sorts it ascending.
#[derive(Clone, Debug)]
pub struct ApproxGftPlan {
    pub n: usize,
    pub layers: Vec<GivensLayer>,
    pub diagonal: Vec<f64>,
    pub perm: Vec<usize>,
}

impl ApproxGftPlan {
    /// Repackage as plan stages (rotation layers, then the sorting
    /// permutation) so the approximate transform shares apply, op-count, and
    /// serialization paths with exact plans.
    pub fn to_fast_plan(&self) -> FastGftPlan {
        let mut stages: Vec<PlanStage> = self
            .layers
            .iter()
            .filter(|layer| !layer.rotations.is_empty())
            .map(|layer| PlanStage::Givens(layer.rotations.clone()))
            .collect();
        if self.perm.iter().enumerate().any(|(dst, &src)| dst != src) {
            stages.push(PlanStage::Permutation(self.perm.clone()));
        }
        FastGftPlan {
            n: self.n,
            stages,
            eigenvalues: self.perm.iter().map(|&i| self.diagonal[i]).collect(),
            provenance: None,
        }
    }
}

/// Greedy smaller-angle rotation annihilating a[(p, q)], in the convention
/// a ← R·a·Rᵀ with R the stage rotation. Returns (c, s, θ).
fn annihilating_rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64, f64) {
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau == 0.0 { 1.0 } else { tau.signum() / (tau.abs() + 1.0f64.hypot(tau)) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, t.atan())
}

/// Approximately diagonalize a symmetric matrix with `layer_count` layers of
/// disjoint rotations.
///
/// Each layer is built greedily: pick the largest-magnitude off-diagonal
/// entry among still-unused index pairs, rotate it away, repeat until no
/// disjoint entry above 1e−14 remains. The final permutation sorts the
/// resulting diagonal ascending.
pub fn truncated_jacobi(l: &Mat, layer_count: usize) -> Result<ApproxGftPlan> {
    let n = l.n_rows();
    if l.n_cols() != n {
        return Err(Error::DimMismatch { expected: n, got: l.n_cols() });
    }
    let dev = l.symmetry_deviation();
    if dev > 1e-12 * l.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(dev));
    }
    let mut a = l.clone();
    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let mut used = vec![false; n];
        let mut rotations = Vec::new();
        loop {
            let mut pick: Option<(usize, usize, f64)> = None;
            for p in 0..n {
                if used[p] {
                    continue;
                }
                for q in p + 1..n {
                    if used[q] {
                        continue;
                    }
                    let mag = a[(p, q)].abs();
                    if mag > OFF_DIAGONAL_FLOOR
                        && pick.map_or(true, |(_, _, best)| mag > best)
                    {
                        pick = Some((p, q, mag));
                    }
                }
            }
            let Some((p, q, _)) = pick else { break };
            let (app, aqq, apq) = (a[(p, p)], a[(q, q)], a[(p, q)]);
            let (c, s, theta) = annihilating_rotation(app, aqq, apq);
            for r in 0..n {
                if r == p || r == q {
                    continue;
                }
                let (arp, arq) = (a[(r, p)], a[(r, q)]);
                a[(r, p)] = c * arp - s * arq;
                a[(p, r)] = a[(r, p)];
                a[(r, q)] = s * arp + c * arq;
                a[(q, r)] = a[(r, q)];
            }
            a[(p, p)] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
            a[(q, q)] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            used[p] = true;
            used[q] = true;
            // record with θ ∈ (0, π]: (p,q,θ) and (q,p,−θ) are the same
            // rotation
            rotations.push(if theta > 0.0 {
                GivensRotation::new(p, q, theta)
            } else {
                GivensRotation::new(q, p, -theta)
            });
        }
        layers.push(GivensLayer { rotations });
    }
    let diagonal: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&i, &j| diagonal[i].partial_cmp(&diagonal[j]).expect("finite"));
    Ok(ApproxGftPlan { n, layers, diagonal, perm })
}

/// Sign-normalized relative error between two orthogonal bases:
/// (1/√n)·‖ |Ûᵀ·U| − I ‖_F. Zero when the bases agree up to column signs.
pub fn delta_error(u_hat: &Mat, u: &Mat) -> Result<f64> {
    let n = u.n_rows();
    if u.n_cols() != n || u_hat.n_rows() != n || u_hat.n_cols() != n {
        return Err(Error::DimMismatch { expected: n, got: u_hat.n_rows() });
    }
    let mut sum_sq = 0.0;
    for j in 0..n {
        for k in 0..n {
            let mut dot = 0.0;
            for i in 0..n {
                dot += u_hat[(i, j)] * u[(i, k)];
            }
            let dev = dot.abs() - f64::from(u8::from(j == k));
            sum_sq += dev * dev;
        }
    }
    Ok(sum_sq.sqrt() / (n as f64).sqrt())
}

/// Empirical average error over a signal set:
/// (1/M)·Σ_i Σ_j (|u_jᵀx_i| − |û_jᵀx_i|)². Zero when coefficient magnitudes
/// agree on every signal.
pub fn epsilon_error(u_hat: &Mat, u: &Mat, signals: &[Vec<f64>]) -> Result<f64> {
    let n = u.n_rows();
    if u.n_cols() != n || u_hat.n_rows() != n || u_hat.n_cols() != n {
        return Err(Error::DimMismatch { expected: n, got: u_hat.n_rows() });
    }
    if signals.is_empty() {
        return Err(Error::InvalidInput("epsilon_error needs at least one signal".into()));
    }
    let mut total = 0.0;
    for x in signals {
        if x.len() != n {
            return Err(Error::DimMismatch { expected: n, got: x.len() });
        }
        for j in 0..n {
            let mut exact = 0.0;
            let mut approx = 0.0;
            for i in 0..n {
                exact += u[(i, j)] * x[i];
                approx += u_hat[(i, j)] * x[i];
            }
            let dev = exact.abs() - approx.abs();
            total += dev * dev;
        }
    }
    Ok(total / signals.len() as f64)
}

/// Hybrid plan: one exact (normalized) Haar stage from `phi`, then truncated
/// Jacobi with `layer_count` layers on each of the two decomposed blocks.
///
/// Stage layout: unnormalized Haar; 1/√2 scale on the paired coordinates;
/// a gather moving the sum block before the difference block; the two
/// blocks' rotation layers merged index-by-index (they touch disjoint
/// coordinates); a final permutation sorting the eigenvalue estimates.
/// With `layer_count` = 0 the blocks stay untransformed and the plan is the
/// pure Haar butterfly.
pub fn haar_plus_approx(g: &Graph, phi: &Involution, layer_count: usize) -> Result<FastGftPlan> {
    if !is_phi_symmetric(g, phi, WEIGHT_REL_TOL) {
        return Err(Error::NotPhiSymmetric);
    }
    let n = g.n();
    let d = decompose(g, phi)?;
    let n_plus = d.plus_nodes.len();
    let plus = truncated_jacobi(&laplacian(&d.g_plus), layer_count)?;
    let minus = truncated_jacobi(&laplacian(&d.g_minus), layer_count)?;

    let mut stages = Vec::new();
    let mut scale = vec![1.0; n];
    for &(x, y) in &d.stage.pairs {
        scale[x] = FRAC_1_SQRT_2;
        scale[y] = FRAC_1_SQRT_2;
    }
    let has_pairs = !d.stage.pairs.is_empty();
    stages.push(PlanStage::Haar(d.stage.clone()));
    if has_pairs {
        stages.push(PlanStage::Scale(scale));
    }
    let gather: Vec<usize> =
        d.plus_nodes.iter().chain(d.minus_nodes.iter()).copied().collect();
    if gather.iter().enumerate().any(|(dst, &src)| dst != src) {
        stages.push(PlanStage::Permutation(gather));
    }
    for i in 0..layer_count {
        let mut rotations = plus.layers[i].rotations.clone();
        rotations.extend(minus.layers[i].rotations.iter().map(|r| {
            GivensRotation::new(r.p + n_plus, r.q + n_plus, r.theta)
        }));
        if !rotations.is_empty() {
            stages.push(PlanStage::Givens(rotations));
        }
    }

    let estimates: Vec<f64> =
        plus.diagonal.iter().chain(minus.diagonal.iter()).copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| estimates[i].partial_cmp(&estimates[j]).expect("finite"));
    if order.iter().enumerate().any(|(dst, &src)| dst != src) {
        stages.push(PlanStage::Permutation(order.clone()));
    }
    let eigenvalues = order.iter().map(|&i| estimates[i]).collect();
    Ok(FastGftPlan { n, stages, eigenvalues, provenance: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{grid_graph, grid_involution, GridKind, GridSymmetry};
    use crate::spectral::gft;
    use crate::testutil;

    fn rotated(l: &Mat, plan: &ApproxGftPlan) -> Mat {
        // P·L·Pᵀ for the realized transform P
        let p = plan.to_fast_plan().realized_matrix().unwrap();
        p.matmul(l).matmul(&p.transpose())
    }

    fn off_diagonal_frobenius(m: &Mat) -> f64 {
        let mut sum = 0.0;
        for i in 0..m.n_rows() {
            for j in 0..m.n_cols() {
                if i != j {
                    sum += m[(i, j)] * m[(i, j)];
                }
            }
        }
        sum.sqrt()
    }

    #[test]
    fn one_rotation_diagonalizes_two_nodes() {
        let g = Graph::with_edges(2, &[(0, 1, 1.0)]);
        let mut l = laplacian(&g);
        l[(0, 0)] = 2.0; // self-loop at node 0 so the diagonal differs
        let plan = truncated_jacobi(&l, 1).unwrap();
        assert_eq!(plan.layers.len(), 1);
        assert_eq!(plan.layers[0].rotations.len(), 1);
        assert!(off_diagonal_frobenius(&rotated(&l, &plan)) <= 1e-12);

        let u_hat = plan.to_fast_plan().realized_basis().unwrap();
        let exact = jacobi_reference(&l);
        assert!(delta_error(&u_hat, &exact).unwrap() <= 1e-10);
    }

    fn jacobi_reference(l: &Mat) -> Mat {
        crate::spectral::jacobi_eigh(l, 1e-14).unwrap().eigenvectors
    }

    #[test]
    fn zero_layers_is_a_sorting_permutation() {
        let g = crate::gallery::star_graph(5);
        let l = laplacian(&g);
        let plan = truncated_jacobi(&l, 0).unwrap();
        assert!(plan.layers.is_empty());
        assert_eq!(plan.diagonal, vec![4.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(plan.perm, vec![1, 2, 3, 4, 0]);
        let fast = plan.to_fast_plan();
        assert_eq!(fast.eigenvalues, vec![1.0, 1.0, 1.0, 1.0, 4.0]);
        // far from the true eigenbasis
        let d = delta_error(&fast.realized_basis().unwrap(), &gft(&g).unwrap().eigenvectors)
            .unwrap();
        assert!(d > 0.5, "identity plan should be a poor basis, δ = {d}");
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut m = Mat::zeros(3, 3);
        m[(0, 1)] = 1.0;
        assert!(matches!(truncated_jacobi(&m, 1), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn layers_are_disjoint_orthogonal_and_normalized() {
        let mut rng = testutil::rng(31);
        let g = testutil::random_graph(&mut rng, 12, 0.5, false);
        let plan = truncated_jacobi(&laplacian(&g), 6).unwrap();
        assert_eq!(plan.layers.len(), 6);
        for layer in &plan.layers {
            let mut used = vec![false; 12];
            for rot in &layer.rotations {
                assert!(rot.p < 12 && rot.q < 12 && rot.p != rot.q);
                assert!(!used[rot.p] && !used[rot.q], "rotations within a layer overlap");
                used[rot.p] = true;
                used[rot.q] = true;
                assert!(rot.theta > 0.0 && rot.theta <= std::f64::consts::PI);
                assert!(rot.theta <= std::f64::consts::FRAC_PI_4 + 1e-15, "smaller-angle choice");
            }
            let as_plan = FastGftPlan {
                n: 12,
                stages: vec![PlanStage::Givens(layer.rotations.clone())],
                eigenvalues: vec![0.0; 12],
                provenance: None,
            };
            let dev = as_plan.realized_matrix().unwrap().orthogonality_deviation();
            assert!(dev <= 1e-14, "layer orthogonality deviation {dev:e}");
        }
    }

    #[test]
    fn unbounded_layers_converge_on_random_matrices() {
        let mut rng = testutil::rng(9);
        for n in [8usize, 16, 32] {
            let l = testutil::random_symmetric_mat(&mut rng, n);
            let plan = truncated_jacobi(&l, 400).unwrap();
            let fast = plan.to_fast_plan();
            let dev = fast.realized_matrix().unwrap().orthogonality_deviation();
            assert!(dev <= 1e-10, "n={n}: orthogonality {dev:e}");
            let off = off_diagonal_frobenius(&rotated(&l, &plan));
            assert!(off <= 1e-10, "n={n}: off-diagonal mass {off:e}");
        }
    }

    #[test]
    fn delta_error_examples() {
        let u = gft(&crate::gallery::line_graph(&[1.0; 7], None)).unwrap().eigenvectors;
        assert!(delta_error(&u, &u).unwrap() <= 1e-12);

        let mut negated = u.clone();
        for i in 0..8 {
            for j in 0..8 {
                negated[(i, j)] = -negated[(i, j)];
            }
        }
        assert!(delta_error(&negated, &u).unwrap() <= 1e-12);

        // two columns transposed: ‖|P|−I‖_F = 2 exactly
        let id = Mat::identity(8);
        let mut swapped = Mat::identity(8);
        swapped[(0, 0)] = 0.0;
        swapped[(1, 1)] = 0.0;
        swapped[(0, 1)] = 1.0;
        swapped[(1, 0)] = 1.0;
        let d = delta_error(&swapped, &id).unwrap();
        assert!((d - 2.0 / 8.0f64.sqrt()).abs() <= 1e-15);

        let mut u_swapped = u.clone();
        for i in 0..8 {
            let tmp = u_swapped[(i, 2)];
            u_swapped[(i, 2)] = u_swapped[(i, 5)];
            u_swapped[(i, 5)] = tmp;
        }
        let d = delta_error(&u_swapped, &u).unwrap();
        assert!((d - 2.0 / 8.0f64.sqrt()).abs() <= 1e-9);

        assert!(delta_error(&Mat::identity(3), &Mat::identity(4)).is_err());
    }

    #[test]
    fn delta_error_is_exactly_sign_invariant() {
        let mut rng = testutil::rng(63);
        let g = testutil::random_graph(&mut rng, 8, 0.5, false);
        let u = gft(&g).unwrap().eigenvectors;
        let u_hat = gft(&testutil::random_graph(&mut rng, 8, 0.5, false)).unwrap().eigenvectors;
        let before = delta_error(&u_hat, &u).unwrap();
        let mut flipped = u_hat.clone();
        for j in [1usize, 4, 6] {
            for i in 0..8 {
                flipped[(i, j)] = -flipped[(i, j)];
            }
        }
        assert_eq!(delta_error(&flipped, &u).unwrap(), before);
    }

    #[test]
    fn epsilon_error_examples() {
        let mut rng = testutil::rng(17);
        let g = testutil::random_graph(&mut rng, 6, 0.6, false);
        let u = gft(&g).unwrap().eigenvectors;
        let signals: Vec<Vec<f64>> =
            (0..20).map(|_| testutil::random_signal(&mut rng, 6)).collect();

        assert_eq!(epsilon_error(&u, &u, &signals).unwrap(), 0.0);

        let mut flipped = u.clone();
        for i in 0..6 {
            flipped[(i, 3)] = -flipped[(i, 3)];
        }
        assert_eq!(epsilon_error(&flipped, &u, &signals).unwrap(), 0.0);

        // identity basis vs the true one, probed by the eigenvectors
        // themselves: a unit coefficient against that column's magnitudes
        let columns: Vec<Vec<f64>> = (0..6).map(|j| u.column(j)).collect();
        let e = epsilon_error(&Mat::identity(6), &u, &columns).unwrap();
        assert!(e > 0.1, "ε = {e}");

        assert!(epsilon_error(&u, &u, &[]).is_err());
        assert!(epsilon_error(&u, &u, &[vec![1.0; 4]]).is_err());
    }

    #[test]
    fn delta_shrinks_with_more_layers_on_the_bidiag_grid() {
        let g = grid_graph(GridKind::Bidiag6, 8, 0.5);
        let l = laplacian(&g);
        let u = gft(&g).unwrap().eigenvectors;
        let mut prev = f64::INFINITY;
        for layers in (0..=40).step_by(5) {
            let u_hat = truncated_jacobi(&l, layers)
                .unwrap()
                .to_fast_plan()
                .realized_basis()
                .unwrap();
            let d = delta_error(&u_hat, &u).unwrap();
            assert!(d < prev, "δ({layers}) = {d} did not improve on {prev}");
            prev = d;
        }
    }

    #[test]
    fn hybrid_with_zero_layers_is_the_pure_butterfly() {
        let g = grid_graph(GridKind::Bidiag6, 4, 0.5);
        let phi = grid_involution(GridSymmetry::Centro, 4);
        let plan = haar_plus_approx(&g, &phi, 0).unwrap();
        assert_eq!(plan.haar_stage_count(), 1);
        assert!(!plan.stages.iter().any(|s| matches!(s, PlanStage::Givens(_))));
        assert!(!plan.stages.iter().any(|s| matches!(s, PlanStage::DenseLeaf { .. })));
        let dev = plan.realized_matrix().unwrap().orthogonality_deviation();
        assert!(dev <= 1e-12, "butterfly must be orthogonal, deviation {dev:e}");
    }

    #[test]
    fn hybrid_converges_to_the_exact_basis() {
        // distinct eigenvalues, so a converged approximation matches the
        // dense basis column by column
        let g = grid_graph(GridKind::Bidiag6, 4, 0.5);
        let phi = grid_involution(GridSymmetry::Centro, 4);
        let plan = haar_plus_approx(&g, &phi, 60).unwrap();
        let u = gft(&g).unwrap().eigenvectors;
        let d = delta_error(&plan.realized_basis().unwrap(), &u).unwrap();
        assert!(d <= 1e-9, "δ = {d:e}");
        for (est, exact) in plan.eigenvalues.iter().zip(gft(&g).unwrap().eigenvalues) {
            assert!((est - exact).abs() <= 1e-9);
        }
    }

    #[test]
    fn hybrid_rejects_invalid_involution() {
        let g = grid_graph(GridKind::Zshaped, 4, 2.0);
        let phi = grid_involution(GridSymmetry::LeftRight, 4);
        assert!(matches!(haar_plus_approx(&g, &phi, 3), Err(Error::NotPhiSymmetric)));
    }

    #[test]
    fn approx_plan_round_trips_through_json() {
        let mut rng = testutil::rng(8);
        let g = testutil::random_graph(&mut rng, 10, 0.5, false);
        let fast = truncated_jacobi(&laplacian(&g), 4).unwrap().to_fast_plan();
        let back = FastGftPlan::from_json(&fast.to_json()).unwrap();
        assert_eq!(back.stages, fast.stages);
        let x = testutil::random_signal(&mut rng, 10);
        assert_eq!(fast.apply(&x).unwrap(), back.apply(&x).unwrap());
    }
}
