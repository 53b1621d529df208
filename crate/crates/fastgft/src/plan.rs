//! Fast GFT plans: recursive planning, stage representation, application,
//! operation counting, and JSON serialization.
//!
//! A plan is an ordered list of stages computing Uᵀx for an implicit
//! orthogonal U. Haar stages are implemented *unnormalized* (plain sum and
//! difference, two additions per pair, no multiplications); the compensating
//! 2^{−k/2} factors are folded into downstream dense leaf columns, or into a
//! single scale stage for coordinates that end in 1×1 leaves. Givens stages
//! carry the rotation layers of approximate plans; the exact planner never
//! emits them.

use serde::{Deserialize, Serialize};

use crate::decompose::{decompose, split_components, HaarStage};
use crate::graph::{laplacian, Graph};
use crate::mat::Mat;
use crate::spectral::gft;
use crate::symmetry::{
    is_phi_symmetric, search_involutions, search_involutions_tree, Involution,
};
use crate::{Error, Result, WEIGHT_REL_TOL};

/// Plane rotation by `theta` acting on coordinates (p, q); cosine and sine
/// are precomputed so application costs four multiplications and two
/// additions.
#[derive(Clone, Debug, PartialEq)]
pub struct GivensRotation {
    pub p: usize,
    pub q: usize,
    pub theta: f64,
    pub cos: f64,
    pub sin: f64,
}

impl GivensRotation {
    pub fn new(p: usize, q: usize, theta: f64) -> GivensRotation {
        GivensRotation { p, q, theta, cos: theta.cos(), sin: theta.sin() }
    }
}

/// One step of a plan, applied to a length-n coefficient buffer.
#[derive(Clone, Debug, PartialEq)]
pub enum PlanStage {
    /// Unnormalized parallel Haar units: (b_i, b_j) ← (b_i + b_j, b_i − b_j).
    Haar(HaarStage),
    /// Gather permutation: out[i] = in[perm[i]].
    Permutation(Vec<usize>),
    /// Dense block acting on `offset..offset + k`: block ← matrix · block.
    DenseLeaf { offset: usize, matrix: Mat },
    /// Per-coordinate factors (length n); factor 1 entries cost nothing.
    Scale(Vec<f64>),
    /// One layer of disjoint plane rotations: (b_p, b_q) ← (c·b_p − s·b_q,
    /// s·b_p + c·b_q).
    Givens(Vec<GivensRotation>),
}

/// Which involution split each recursion level, for inspection and reporting;
/// indices are local to the sub-graph at that level. Not serialized.
#[derive(Clone, Debug, PartialEq)]
pub enum PlanTree {
    Leaf { n: usize },
    Split { involution: Involution, plus: Box<PlanTree>, minus: Vec<PlanTree> },
}

/// Ordered stages computing Uᵀx, with the eigenvalues aligned to the output
/// coefficient order (ascending).
#[derive(Clone, Debug)]
pub struct FastGftPlan {
    pub n: usize,
    pub stages: Vec<PlanStage>,
    pub eigenvalues: Vec<f64>,
    pub provenance: Option<PlanTree>,
}

/// Addition and multiplication counts of one plan application.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpCount {
    pub additions: usize,
    pub multiplications: usize,
}

/// Planner knobs: involution search budget, recursion depth cap, dense leaf
/// threshold, and optional known involutions tried before searching (top
/// level only).
#[derive(Clone, Debug)]
pub struct PlanStrategy {
    pub search_budget: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub hints: Vec<Involution>,
}

impl Default for PlanStrategy {
    fn default() -> PlanStrategy {
        PlanStrategy { search_budget: 1_000_000, max_depth: 16, min_leaf: 2, hints: Vec::new() }
    }
}

impl FastGftPlan {
    /// Apply the plan to one signal, producing coefficients ordered by
    /// ascending eigenvalue.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimMismatch { expected: self.n, got: x.len() });
        }
        let mut buf = x.to_vec();
        let mut scratch = vec![0.0; self.n];
        for stage in &self.stages {
            match stage {
                PlanStage::Haar(st) => {
                    for &(i, j) in &st.pairs {
                        let (a, b) = (buf[i], buf[j]);
                        buf[i] = a + b;
                        buf[j] = a - b;
                    }
                }
                PlanStage::Permutation(perm) => {
                    for (dst, &src) in perm.iter().enumerate() {
                        scratch[dst] = buf[src];
                    }
                    std::mem::swap(&mut buf, &mut scratch);
                }
                PlanStage::DenseLeaf { offset, matrix } => {
                    let k = matrix.n_rows();
                    for r in 0..k {
                        let mut acc = 0.0;
                        for c in 0..k {
                            acc += matrix[(r, c)] * buf[offset + c];
                        }
                        scratch[r] = acc;
                    }
                    buf[*offset..offset + k].copy_from_slice(&scratch[..k]);
                }
                PlanStage::Scale(factors) => {
                    for (v, &f) in buf.iter_mut().zip(factors.iter()) {
                        *v *= f;
                    }
                }
                PlanStage::Givens(rotations) => {
                    for rot in rotations {
                        let (a, b) = (buf[rot.p], buf[rot.q]);
                        buf[rot.p] = rot.cos * a - rot.sin * b;
                        buf[rot.q] = rot.sin * a + rot.cos * b;
                    }
                }
            }
        }
        Ok(buf)
    }

    /// Apply to every signal in turn; identical to per-signal `apply`.
    pub fn apply_batch(&self, signals: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        signals.iter().map(|x| self.apply(x)).collect()
    }

    /// The matrix P with apply(x) = P·x, built by applying the plan to the
    /// coordinate basis.
    pub fn realized_matrix(&self) -> Result<Mat> {
        let mut out = Mat::zeros(self.n, self.n);
        let mut e = vec![0.0; self.n];
        for i in 0..self.n {
            e[i] = 1.0;
            let col = self.apply(&e)?;
            e[i] = 0.0;
            for r in 0..self.n {
                out[(r, i)] = col[r];
            }
        }
        Ok(out)
    }

    /// Pᵀ: column k is the realized eigenvector for `eigenvalues[k]`,
    /// comparable against a dense GFT basis.
    pub fn realized_basis(&self) -> Result<Mat> {
        Ok(self.realized_matrix()?.transpose())
    }

    pub fn haar_stage_count(&self) -> usize {
        self.stages.iter().filter(|s| matches!(s, PlanStage::Haar(_))).count()
    }

    /// Additions and multiplications of one application. Haar pairs cost two
    /// additions; permutations are free; a k×k dense leaf costs k² mults and
    /// k(k−1) adds; scale factors cost one mult each unless exactly 1; a
    /// rotation costs four mults and two adds.
    pub fn op_count(&self) -> OpCount {
        let mut adds = 0;
        let mut mults = 0;
        for stage in &self.stages {
            match stage {
                PlanStage::Haar(st) => adds += 2 * st.pairs.len(),
                PlanStage::Permutation(_) => {}
                PlanStage::DenseLeaf { matrix, .. } => {
                    let k = matrix.n_rows();
                    mults += k * k;
                    adds += k * (k - 1);
                }
                PlanStage::Scale(factors) => {
                    mults += factors.iter().filter(|&&f| f != 1.0).count();
                }
                PlanStage::Givens(rotations) => {
                    mults += 4 * rotations.len();
                    adds += 2 * rotations.len();
                }
            }
        }
        OpCount { additions: adds, multiplications: mults }
    }

    pub fn to_json(&self) -> String {
        let stages = self
            .stages
            .iter()
            .map(|s| match s {
                PlanStage::Haar(st) => StageWire::Haar { pairs: st.pairs.clone() },
                PlanStage::Permutation(p) => StageWire::Perm { perm: p.clone() },
                PlanStage::DenseLeaf { offset, matrix } => StageWire::Dense {
                    offset: *offset,
                    matrix: (0..matrix.n_rows()).map(|r| matrix.row(r).to_vec()).collect(),
                },
                PlanStage::Scale(f) => StageWire::Scale { factors: f.clone() },
                PlanStage::Givens(rots) => StageWire::Givens {
                    rotations: rots.iter().map(|r| (r.p, r.q, r.theta)).collect(),
                },
            })
            .collect();
        let wire = PlanWire { n: self.n, stages, eigenvalues: self.eigenvalues.clone() };
        serde_json::to_string(&wire).expect("plan serialization cannot fail")
    }

    /// Parse and validate a plan: structural checks per stage, then an
    /// orthogonality check on the composed product (≤ 1e−9).
    pub fn from_json(s: &str) -> Result<FastGftPlan> {
        let wire: PlanWire = serde_json::from_str(s)?;
        let n = wire.n;
        if wire.eigenvalues.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} eigenvalues for a plan of size {n}",
                wire.eigenvalues.len()
            )));
        }
        let mut stages = Vec::with_capacity(wire.stages.len());
        for stage in wire.stages {
            stages.push(match stage {
                StageWire::Haar { pairs } => {
                    let mut seen = vec![false; n];
                    for &(i, j) in &pairs {
                        if i >= n || j >= n || i == j || seen[i] || seen[j] {
                            return Err(Error::InvalidInput(format!(
                                "invalid haar pair ({i}, {j})"
                            )));
                        }
                        seen[i] = true;
                        seen[j] = true;
                    }
                    let passthrough = (0..n).filter(|&i| !seen[i]).collect();
                    PlanStage::Haar(HaarStage { n, pairs, passthrough })
                }
                StageWire::Perm { perm } => {
                    if perm.len() != n {
                        return Err(Error::InvalidInput("permutation length mismatch".into()));
                    }
                    let mut seen = vec![false; n];
                    for &i in &perm {
                        if i >= n || seen[i] {
                            return Err(Error::NotPermutation(n));
                        }
                        seen[i] = true;
                    }
                    PlanStage::Permutation(perm)
                }
                StageWire::Dense { offset, matrix } => {
                    let k = matrix.len();
                    if k == 0 || matrix.iter().any(|row| row.len() != k) {
                        return Err(Error::InvalidInput("dense block is not square".into()));
                    }
                    if offset + k > n {
                        return Err(Error::InvalidInput(format!(
                            "dense block {k}×{k} at offset {offset} exceeds size {n}"
                        )));
                    }
                    PlanStage::DenseLeaf { offset, matrix: Mat::from_rows(&matrix) }
                }
                StageWire::Scale { factors } => {
                    if factors.len() != n {
                        return Err(Error::InvalidInput("scale factor length mismatch".into()));
                    }
                    PlanStage::Scale(factors)
                }
                StageWire::Givens { rotations } => {
                    let mut seen = vec![false; n];
                    let mut rots = Vec::with_capacity(rotations.len());
                    for (p, q, theta) in rotations {
                        if p >= n || q >= n || p == q || seen[p] || seen[q] {
                            return Err(Error::InvalidInput(format!(
                                "invalid rotation pair ({p}, {q})"
                            )));
                        }
                        if !theta.is_finite() || theta <= 0.0 || theta > std::f64::consts::PI {
                            return Err(Error::InvalidInput(format!(
                                "rotation angle {theta} outside (0, π]"
                            )));
                        }
                        seen[p] = true;
                        seen[q] = true;
                        rots.push(GivensRotation::new(p, q, theta));
                    }
                    PlanStage::Givens(rots)
                }
            });
        }
        let plan = FastGftPlan { n, stages, eigenvalues: wire.eigenvalues, provenance: None };
        let dev = plan.realized_matrix()?.orthogonality_deviation();
        if dev > 1e-9 {
            return Err(Error::Numerical(format!(
                "deserialized plan is not orthogonal (deviation {dev:e})"
            )));
        }
        Ok(plan)
    }
}

#[derive(Serialize, Deserialize)]
struct PlanWire {
    n: usize,
    stages: Vec<StageWire>,
    eigenvalues: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum StageWire {
    Haar { pairs: Vec<(usize, usize)> },
    Perm { perm: Vec<usize> },
    Dense { offset: usize, matrix: Vec<Vec<f64>> },
    Scale { factors: Vec<f64> },
    Givens { rotations: Vec<(usize, usize, f64)> },
}

/// Trivial plan: the full dense GFT as a single leaf. Reference point for
/// benchmarks; op count is exactly (n(n−1), n²).
pub fn dense_plan(g: &Graph) -> Result<FastGftPlan> {
    let spec = gft(g)?;
    let n = g.n();
    Ok(FastGftPlan {
        n,
        stages: vec![PlanStage::DenseLeaf { offset: 0, matrix: spec.eigenvectors.transpose() }],
        eigenvalues: spec.eigenvalues,
        provenance: Some(PlanTree::Leaf { n }),
    })
}

struct LeafRec {
    positions: Vec<usize>,
    matrix: Option<Mat>,
    scale: f64,
    eigenvalues: Vec<f64>,
}

struct Planner<'a> {
    top_n: usize,
    strategy: &'a PlanStrategy,
    haar_stages: Vec<HaarStage>,
    leaves: Vec<LeafRec>,
}

/// 2^{−count/2} with the even part exact.
fn haar_compensation(count: u32) -> f64 {
    let mut f = 0.5f64.powi((count / 2) as i32);
    if count % 2 == 1 {
        f /= std::f64::consts::SQRT_2;
    }
    f
}

fn looks_like_tree(g: &Graph) -> bool {
    g.n() >= 1 && g.edge_count() == g.n() - 1 && split_components(g).len() == 1
}

impl Planner<'_> {
    fn choose_involution(&self, g: &Graph, top_level: bool) -> Option<Involution> {
        if top_level {
            let mut valid: Vec<&Involution> = self
                .strategy
                .hints
                .iter()
                .filter(|phi| {
                    phi.len() == g.n()
                        && !phi.is_identity()
                        && is_phi_symmetric(g, phi, WEIGHT_REL_TOL)
                })
                .collect();
            if !valid.is_empty() {
                valid.sort_by(|a, b| {
                    b.pair_count().cmp(&a.pair_count()).then(a.as_slice().cmp(b.as_slice()))
                });
                return Some(valid[0].clone());
            }
        }
        if looks_like_tree(g) {
            if let Ok(found) = search_involutions_tree(g) {
                if let Some(first) = found.into_iter().next() {
                    return Some(first);
                }
            }
        }
        search_involutions(g, self.strategy.search_budget).involutions.into_iter().next()
    }

    fn emit_leaf(&mut self, sub: &Graph, map: Vec<usize>, counts: Vec<u32>) -> Result<PlanTree> {
        let n = sub.n();
        if n == 1 {
            self.leaves.push(LeafRec {
                positions: map,
                matrix: None,
                scale: haar_compensation(counts[0]),
                eigenvalues: vec![laplacian(sub)[(0, 0)]],
            });
        } else {
            let spec = gft(sub)?;
            let mut m = spec.eigenvectors.transpose();
            for c in 0..n {
                let f = haar_compensation(counts[c]);
                if f != 1.0 {
                    for r in 0..n {
                        m[(r, c)] *= f;
                    }
                }
            }
            self.leaves.push(LeafRec {
                positions: map,
                matrix: Some(m),
                scale: 1.0,
                eigenvalues: spec.eigenvalues,
            });
        }
        Ok(PlanTree::Leaf { n })
    }

    fn recurse(
        &mut self,
        sub: &Graph,
        map: Vec<usize>,
        counts: Vec<u32>,
        depth: usize,
    ) -> Result<PlanTree> {
        let n = sub.n();
        if n <= self.strategy.min_leaf || depth >= self.strategy.max_depth {
            return self.emit_leaf(sub, map, counts);
        }
        let phi = match self.choose_involution(sub, depth == 0) {
            Some(phi) => phi,
            None => return self.emit_leaf(sub, map, counts),
        };
        let d = decompose(sub, &phi)?;

        let mut paired = vec![false; self.top_n];
        let global_pairs: Vec<(usize, usize)> =
            d.stage.pairs.iter().map(|&(i, j)| (map[i], map[j])).collect();
        for &(i, j) in &global_pairs {
            paired[i] = true;
            paired[j] = true;
        }
        self.haar_stages.push(HaarStage {
            n: self.top_n,
            pairs: global_pairs,
            passthrough: (0..self.top_n).filter(|&i| !paired[i]).collect(),
        });

        let p = d.minus_nodes.len();
        let plus_map: Vec<usize> = d.plus_nodes.iter().map(|&i| map[i]).collect();
        let plus_counts: Vec<u32> = d
            .plus_nodes
            .iter()
            .enumerate()
            .map(|(a, &i)| counts[i] + u32::from(a < p))
            .collect();
        let plus_tree = self.recurse(&d.g_plus, plus_map, plus_counts, depth + 1)?;

        let mut minus_trees = Vec::new();
        for (comp, nodes) in split_components(&d.g_minus) {
            let comp_map: Vec<usize> = nodes.iter().map(|&b| map[d.minus_nodes[b]]).collect();
            let comp_counts: Vec<u32> =
                nodes.iter().map(|&b| counts[d.minus_nodes[b]] + 1).collect();
            minus_trees.push(self.recurse(&comp, comp_map, comp_counts, depth + 1)?);
        }
        Ok(PlanTree::Split {
            involution: phi,
            plus: Box::new(plus_tree),
            minus: minus_trees,
        })
    }
}

/// Build a fast plan for `g`: recursively find an involution (strategy hints
/// first at the top level, tree-aware search on trees, pruned search
/// otherwise; maximum pair count wins, ties broken lexicographically), emit
/// its Haar stage, and recurse into the sum graph and each connected
/// component of the difference graph. Sub-graphs with no involution, at the
/// leaf-size threshold, or at the depth cap become dense leaves. Output
/// coefficients are ordered by ascending eigenvalue, ties keeping
/// sum-before-difference provenance order.
pub fn plan_fast_gft(g: &Graph, strategy: &PlanStrategy) -> Result<FastGftPlan> {
    let n = g.n();
    let mut planner =
        Planner { top_n: n, strategy, haar_stages: Vec::new(), leaves: Vec::new() };
    let tree = planner.recurse(g, (0..n).collect(), vec![0; n], 0)?;

    let mut stages: Vec<PlanStage> =
        planner.haar_stages.into_iter().map(PlanStage::Haar).collect();

    // gather leaf blocks into contiguous slots, provenance order
    let gather: Vec<usize> =
        planner.leaves.iter().flat_map(|leaf| leaf.positions.iter().copied()).collect();
    if gather.iter().enumerate().any(|(dst, &src)| dst != src) {
        stages.push(PlanStage::Permutation(gather));
    }

    let mut scale = vec![1.0; n];
    let mut any_scale = false;
    let mut offset = 0;
    let mut eigenvalues: Vec<f64> = Vec::with_capacity(n);
    for leaf in &planner.leaves {
        let k = leaf.positions.len();
        match &leaf.matrix {
            Some(m) => stages.push(PlanStage::DenseLeaf { offset, matrix: m.clone() }),
            None => {
                if leaf.scale != 1.0 {
                    scale[offset] = leaf.scale;
                    any_scale = true;
                }
            }
        }
        eigenvalues.extend_from_slice(&leaf.eigenvalues);
        offset += k;
    }
    if any_scale {
        stages.push(PlanStage::Scale(scale));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eigenvalues[i].partial_cmp(&eigenvalues[j]).expect("finite"));
    if order.iter().enumerate().any(|(dst, &src)| dst != src) {
        stages.push(PlanStage::Permutation(order.clone()));
    }
    let sorted: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();

    Ok(FastGftPlan { n, stages, eigenvalues: sorted, provenance: Some(tree) })
}
