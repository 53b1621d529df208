//! Involutions, symmetry testing, node partitioning, and involution search.
//!
//! An involution φ is a permutation that is its own inverse; a graph is
//! φ-symmetric when `w_ij = w_{φ(i)φ(j)}` for all node pairs (self-loops
//! included). The 2-cycles of φ split the nodes into paired sets V_X / V_Y
//! plus fixed points V_Z; the pair count p_φ is the number of Haar units the
//! symmetry makes available.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::{approx_eq_tol, Error, Result, WEIGHT_REL_TOL};

/// Self-inverse node permutation, validated on construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Involution {
    phi: Vec<usize>,
}

impl Involution {
    pub fn new(phi: Vec<usize>) -> Result<Involution> {
        match is_involution(&phi)? {
            true => Ok(Involution { phi }),
            false => Err(Error::NotInvolution),
        }
    }

    pub fn identity(n: usize) -> Involution {
        Involution { phi: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.phi.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn map(&self, i: usize) -> usize {
        self.phi[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.phi
    }

    /// Number of 2-cycles.
    pub fn pair_count(&self) -> usize {
        self.phi.iter().enumerate().filter(|&(i, &m)| i < m).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InvolutionWire { phi: self.phi.clone() })
            .expect("involution serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Involution> {
        let wire: InvolutionWire = serde_json::from_str(s)?;
        Involution::new(wire.phi)
    }
}

#[derive(Serialize, Deserialize)]
struct InvolutionWire {
    phi: Vec<usize>,
}

/// Node sets of an involution: 2-cycle members split by pair orientation
/// (smaller index in `vx`, its partner in `vy`) and fixed points in `vz`.
/// `pairs[k] = (vx[k], vy[k])`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodePartition {
    pub vx: Vec<usize>,
    pub vy: Vec<usize>,
    pub vz: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

impl NodePartition {
    /// Number of available Haar units, p_φ = |vx|.
    pub fn p_phi(&self) -> usize {
        self.vx.len()
    }
}

/// True iff φ∘φ = id. Errors when an entry is out of range; in-range arrays
/// with φ∘φ = id are automatically permutations.
pub fn is_involution(phi: &[usize]) -> Result<bool> {
    let n = phi.len();
    if phi.iter().any(|&m| m >= n) {
        return Err(Error::NotPermutation(n));
    }
    Ok(phi.iter().enumerate().all(|(i, &m)| phi[m] == i))
}

/// Definition check: w_ij = w_{φ(i)φ(j)} for every pair, and s_i = s_{φ(i)}.
/// `tol` is a relative tolerance on weight equality.
pub fn is_phi_symmetric(g: &Graph, phi: &Involution, tol: f64) -> bool {
    if phi.len() != g.n() {
        return false;
    }
    for (i, j, w) in g.edges() {
        let (mi, mj) = (phi.map(i), phi.map(j));
        if mi == mj {
            // an edge may not map onto a single node
            return false;
        }
        if !approx_eq_tol(w, g.edge(mi, mj), tol) {
            return false;
        }
    }
    (0..g.n()).all(|i| approx_eq_tol(g.self_loop(i), g.self_loop(phi.map(i)), tol))
}

/// Split nodes by the 2-cycles of φ: fixed points to `vz`, the smaller member
/// of each 2-cycle to `vx`, its partner to `vy` (aligned with `vx` order).
pub fn partition(phi: &Involution) -> NodePartition {
    let mut vx = Vec::new();
    let mut vy = Vec::new();
    let mut vz = Vec::new();
    for i in 0..phi.len() {
        let m = phi.map(i);
        if m == i {
            vz.push(i);
        } else if i < m {
            vx.push(i);
            vy.push(m);
        }
    }
    let pairs = vx.iter().copied().zip(vy.iter().copied()).collect();
    NodePartition { vx, vy, vz, pairs }
}

/// Result of a pruned involution search. `truncated` is set when the budget
/// of candidate extensions ran out before the search space was exhausted, in
/// which case `involutions` may be incomplete.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub involutions: Vec<Involution>,
    pub truncated: bool,
}

/// All non-identity involutions φ with `is_phi_symmetric(g, φ)`, found by
/// backtracking over node pairings.
///
/// Pruning is by node signature — (weighted degree, self-loop weight, sorted
/// incident-weight multiset) — which is sound: nodes exchanged by a graph
/// symmetry necessarily share all three. Each partial assignment is checked
/// incrementally against already-assigned neighbors. Results are sorted by
/// descending pair count, then lexicographically.
pub fn search_involutions(g: &Graph, budget: usize) -> SearchOutcome {
    let n = g.n();
    let adj = g.adjacency();

    // node signatures for pair pruning
    let sig: Vec<(f64, f64, Vec<f64>)> = (0..n)
        .map(|i| {
            let mut weights: Vec<f64> = adj[i].iter().map(|&(_, w)| w).collect();
            weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (weights.iter().sum(), g.self_loop(i), weights)
        })
        .collect();
    let compatible = |a: usize, b: usize| -> bool {
        let (da, sa, wa) = &sig[a];
        let (db, sb, wb) = &sig[b];
        approx_eq_tol(*da, *db, WEIGHT_REL_TOL)
            && approx_eq_tol(*sa, *sb, WEIGHT_REL_TOL)
            && wa.len() == wb.len()
            && wa.iter().zip(wb).all(|(x, y)| approx_eq_tol(*x, *y, WEIGHT_REL_TOL))
    };

    struct State<'a> {
        g: &'a Graph,
        adj: &'a [Vec<(usize, f64)>],
        phi: Vec<Option<usize>>,
        extensions: usize,
        budget: usize,
        truncated: bool,
        found: Vec<Vec<usize>>,
    }

    // weights around i must match weights around its image at every assigned node
    fn consistent(st: &State, i: usize, image: usize) -> bool {
        for &(k, w) in &st.adj[i] {
            if let Some(mk) = st.phi[k] {
                if !approx_eq_tol(w, st.g.edge(image, mk), WEIGHT_REL_TOL) {
                    return false;
                }
            }
        }
        true
    }

    fn extend(st: &mut State, compatible: &dyn Fn(usize, usize) -> bool) {
        if st.truncated {
            return;
        }
        let i = match st.phi.iter().position(|m| m.is_none()) {
            Some(i) => i,
            None => {
                let phi: Vec<usize> = st.phi.iter().map(|m| m.unwrap()).collect();
                st.found.push(phi);
                return;
            }
        };
        let n = st.phi.len();
        let mut options: Vec<usize> = vec![i];
        options.extend((i + 1..n).filter(|&j| st.phi[j].is_none() && compatible(i, j)));
        for j in options {
            st.extensions += 1;
            if st.extensions > st.budget {
                st.truncated = true;
                return;
            }
            st.phi[i] = Some(j);
            st.phi[j] = Some(i);
            let ok = consistent(st, i, j) && (i == j || consistent(st, j, i));
            if ok {
                extend(st, compatible);
            }
            st.phi[i] = None;
            st.phi[j] = None;
            if st.truncated {
                return;
            }
        }
    }

    let mut st = State {
        g,
        adj: &adj,
        phi: vec![None; n],
        extensions: 0,
        budget,
        truncated: false,
        found: Vec::new(),
    };
    extend(&mut st, &compatible);

    let mut involutions: Vec<Involution> = st
        .found
        .into_iter()
        .filter(|phi| phi.iter().enumerate().any(|(i, &m)| i != m))
        .map(|phi| Involution { phi })
        .filter(|phi| is_phi_symmetric(g, phi, WEIGHT_REL_TOL))
        .collect();
    involutions.sort_by(|a, b| b.pair_count().cmp(&a.pair_count()).then(a.phi.cmp(&b.phi)));
    SearchOutcome { involutions, truncated: st.truncated }
}

/// Mirror involutions of a tree, from pairing identical branches.
///
/// Rooted subtrees get canonical codes (sorted child codes with edge weights
/// and self-loops folded in, interned to integers). Any tree symmetry maps the
/// centroid set to itself, so the search anchors there: identical child branches are
/// paired greedily under a single centroid, or the two halves swapped across a
/// centroid edge. Weight comparison is bitwise, so this is meant for graphs
/// with exact constants; every returned involution is re-checked with
/// [`is_phi_symmetric`]. Not exhaustive — the pruned search is the complete
/// one — but O(n log n) and sufficient for mirror symmetries of trees.
pub fn search_involutions_tree(g: &Graph) -> Result<Vec<Involution>> {
    let n = g.n();
    if n == 0 {
        return Err(Error::NotTree);
    }
    if g.edge_count() != n - 1 {
        return Err(Error::NotTree);
    }
    let adj = g.adjacency();
    // connectivity
    {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        if count != n {
            return Err(Error::NotTree);
        }
    }

    let centroids = tree_centroids(&adj, n);
    let mut results: Vec<Involution> = Vec::new();
    let mut interner: HashMap<CodeKey, u32> = HashMap::new();

    match centroids.as_slice() {
        &[c] => {
            let enc = TreeEncoding::build(g, &adj, c, None, &mut interner);
            let mut phi: Vec<usize> = (0..n).collect();
            pair_children(&enc, c, &mut phi);
            push_checked(g, phi, &mut results);
        }
        &[c1, c2] => {
            let enc1 = TreeEncoding::build(g, &adj, c1, Some(c2), &mut interner);
            let enc2 = TreeEncoding::build(g, &adj, c2, Some(c1), &mut interner);
            // the interner is shared, so equal codes mean isomorphic halves
            if enc1.code[c1] == enc2.code[c2] {
                let mut phi: Vec<usize> = (0..n).collect();
                map_isomorphic(&enc1, c1, &enc2, c2, &mut phi);
                push_checked(g, phi, &mut results);
            }
            let mut phi: Vec<usize> = (0..n).collect();
            pair_children(&enc1, c1, &mut phi);
            pair_children(&enc2, c2, &mut phi);
            push_checked(g, phi, &mut results);
        }
        _ => unreachable!("a tree has one or two centroids"),
    }

    results.sort_by(|a, b| b.pair_count().cmp(&a.pair_count()).then(a.phi.cmp(&b.phi)));
    results.dedup();
    Ok(results)
}

fn push_checked(g: &Graph, phi: Vec<usize>, out: &mut Vec<Involution>) {
    if phi.iter().enumerate().all(|(i, &m)| i == m) {
        return;
    }
    if let Ok(inv) = Involution::new(phi) {
        if is_phi_symmetric(g, &inv, WEIGHT_REL_TOL) {
            out.push(inv);
        }
    }
}

/// Nodes minimizing the largest component size after their removal.
fn tree_centroids(adj: &[Vec<(usize, f64)>], n: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &(u, _) in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = v;
                stack.push(u);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        if parent[v] != usize::MAX {
            size[parent[v]] += size[v];
        }
    }
    let worst = |v: usize| -> usize {
        let mut m = n - size[v];
        for &(u, _) in &adj[v] {
            if parent[u] == v {
                m = m.max(size[u]);
            }
        }
        m
    };
    let best = (0..n).map(worst).min().unwrap();
    (0..n).filter(|&v| worst(v) == best).collect()
}

/// Rooted tree with canonical integer codes per subtree.
struct TreeEncoding {
    /// children[v] sorted by (edge-weight bits, code, node index)
    children: Vec<Vec<usize>>,
    /// weight of the edge to the parent, as bits
    up_weight: Vec<u64>,
    code: Vec<u32>,
}

// Interner keys: (self-loop bits, sorted list of (edge-weight bits, child code)).
type CodeKey = (u64, Vec<(u64, u32)>);

impl TreeEncoding {
    fn build(
        g: &Graph,
        adj: &[Vec<(usize, f64)>],
        root: usize,
        blocked: Option<usize>,
        interner: &mut HashMap<CodeKey, u32>,
    ) -> Self {
        let n = adj.len();
        let mut parent = vec![usize::MAX; n];
        let mut order = Vec::new();
        let mut children = vec![Vec::new(); n];
        let mut up_weight = vec![0u64; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        if let Some(b) = blocked {
            seen[b] = true;
        }
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &(u, w) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = v;
                    up_weight[u] = w.to_bits();
                    children[v].push(u);
                    stack.push(u);
                }
            }
        }
        let mut code = vec![0u32; n];
        for &v in order.iter().rev() {
            let mut key_children: Vec<(u64, u32)> =
                children[v].iter().map(|&u| (up_weight[u], code[u])).collect();
            key_children.sort_unstable();
            let key = (g.self_loop(v).to_bits(), key_children);
            let next = interner.len() as u32;
            code[v] = *interner.entry(key).or_insert(next);
            children[v].sort_unstable_by_key(|&u| (up_weight[u], code[u], u));
        }
        TreeEncoding { children, up_weight, code }
    }
}

/// Greedily pair identical child branches of the fixed node v; an unpaired
/// leftover child stays fixed and is recursed into.
fn pair_children(enc: &TreeEncoding, v: usize, phi: &mut [usize]) {
    let kids = &enc.children[v];
    let mut i = 0;
    while i < kids.len() {
        let mut j = i + 1;
        let key = (enc.up_weight[kids[i]], enc.code[kids[i]]);
        while j < kids.len() && (enc.up_weight[kids[j]], enc.code[kids[j]]) == key {
            j += 1;
        }
        let group = &kids[i..j];
        let mut it = group.iter();
        loop {
            match (it.next(), it.next()) {
                (Some(&a), Some(&b)) => map_isomorphic(enc, a, enc, b, phi),
                (Some(&a), None) => pair_children(enc, a, phi),
                _ => break,
            }
        }
        i = j;
    }
}

/// Map subtree a onto subtree b (equal codes) by aligned canonical order.
fn map_isomorphic(ea: &TreeEncoding, a: usize, eb: &TreeEncoding, b: usize, phi: &mut [usize]) {
    phi[a] = b;
    phi[b] = a;
    debug_assert_eq!(ea.code[a], eb.code[b]);
    debug_assert_eq!(ea.children[a].len(), eb.children[b].len());
    for (&ca, &cb) in ea.children[a].iter().zip(&eb.children[b]) {
        map_isomorphic(ea, ca, eb, cb, phi);
    }
}

/// Number of involutions on n elements, T(n) = Σ_k n! / (2^k (n-2k)! k!),
/// in exact 128-bit arithmetic. Errors when the count overflows u128
/// (first at n = 55).
///
/// Uses T(n) = T(n-1) + (n-1)·T(n-2), whose intermediates never exceed the
/// result; the term-by-term sum would overflow at n = 54 even though T(54)
/// still fits.
pub fn involution_count(n: usize) -> Result<u128> {
    let mut prev: u128 = 1; // T(0)
    let mut cur: u128 = 1; // T(1)
    for m in 2..=n {
        let next = (m as u128 - 1)
            .checked_mul(prev)
            .and_then(|t| t.checked_add(cur))
            .ok_or(Error::CountOverflow(n))?;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}
