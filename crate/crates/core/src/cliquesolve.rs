//! Exact and heuristic maximum-weight clique search.
//!
//! The search is a branch-and-bound over bit-packed candidate sets with a
//! weighted greedy-coloring upper bound: candidates are partitioned into
//! independent classes, a clique takes at most one vertex per class, so
//! the sum of per-class maxima bounds every extension.  Classes are
//! assigned in a fixed order, giving each branch vertex a monotone prefix
//! bound that prunes whole suffixes at once.  A randomized greedy pass
//! seeds the incumbent.  [`brute_force_clique`] is a deliberately separate
//! exhaustive enumeration used as an oracle on small graphs.
//!
//! The exact search runs single-threaded so that identical inputs yield
//! identical results, vertex sets included.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::orbitgraph::{BitGraph, CompatibilityGraph};
use crate::{Error, Result};

/// Largest vertex count the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 40;

/// Resource limits and stopping rules for the exact search.
#[derive(Debug, Clone, Copy)]
pub struct SolveBudget {
    pub time_limit: Duration,
    pub node_limit: u64,
    /// Stop as soon as the incumbent reaches this weight.
    pub target_weight: Option<u64>,
    /// Seed for the greedy incumbent phase only.
    pub rng_seed: u64,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            time_limit: Duration::from_secs(3600),
            node_limit: u64::MAX,
            target_weight: None,
            rng_seed: 1,
        }
    }
}

impl SolveBudget {
    pub fn with_node_limit(node_limit: u64) -> Self {
        SolveBudget { node_limit, ..Default::default() }
    }
}

/// Outcome of a clique search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueResult {
    /// Vertex indices into the source graph, ascending.
    pub vertices: Vec<usize>,
    pub weight: u64,
    /// True iff branch-and-bound closed the whole tree within budget.
    pub proven_optimal: bool,
    pub nodes_explored: u64,
    pub wall_time: Duration,
}

impl CliqueResult {
    fn empty() -> Self {
        CliqueResult {
            vertices: Vec::new(),
            weight: 0,
            proven_optimal: true,
            nodes_explored: 0,
            wall_time: Duration::ZERO,
        }
    }

    /// JSON record with vertices, weight, optimality, nodes and seconds.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "vertices": self.vertices,
            "weight": self.weight,
            "proven_optimal": self.proven_optimal,
            "nodes_explored": self.nodes_explored,
            "wall_time_s": self.wall_time.as_secs_f64(),
        })
        .to_string()
    }
}

fn assert_is_clique(weights: &[u64], adj: &BitGraph, result: &CliqueResult) {
    let total: u64 = result.vertices.iter().map(|&v| weights[v]).sum();
    assert_eq!(total, result.weight, "clique weight does not match its vertices");
    for (a, &i) in result.vertices.iter().enumerate() {
        for &j in &result.vertices[a + 1..] {
            assert!(adj.has_edge(i, j), "returned vertex set is not a clique");
        }
    }
}

// ---------------------------------------------------------------------------
// exact search

struct Searcher<'a> {
    weights: &'a [u64],
    rows: Vec<Vec<u64>>,
    words: usize,
    nv: usize,
    /// candidate buffer per recursion depth
    cand: Vec<Vec<u64>>,
    stack: Vec<usize>,
    best_weight: u64,
    best_set: Vec<usize>,
    nodes: u64,
    node_limit: u64,
    deadline: Instant,
    target: Option<u64>,
    stopped: bool,
}

impl<'a> Searcher<'a> {
    fn bump_incumbent(&mut self, weight: u64) {
        if weight > self.best_weight {
            self.best_weight = weight;
            self.best_set = self.stack.clone();
            if let Some(t) = self.target {
                if self.best_weight >= t {
                    self.stopped = true;
                }
            }
        }
    }

    fn check_budget(&mut self) {
        self.nodes += 1;
        // The clock is only consulted every 4096 nodes; it is the slow check.
        if self.nodes >= self.node_limit
            || (self.nodes.is_multiple_of(4096) && Instant::now() >= self.deadline)
        {
            self.stopped = true;
        }
    }

    fn expand(&mut self, depth: usize, cur_weight: u64) {
        if self.stopped {
            return;
        }
        let members: Vec<usize> = {
            let cand = &self.cand[depth];
            (0..self.nv).filter(|&v| cand[v / 64] >> (v % 64) & 1 == 1).collect()
        };
        if members.is_empty() {
            return;
        }
        // greedy weighted coloring: place each candidate in the first
        // class it is independent of; a clique meets each class at most
        // once, so prefix sums of class maxima bound every extension
        let mut class_masks: Vec<Vec<u64>> = Vec::new();
        let mut class_max: Vec<u64> = Vec::new();
        let mut branch: Vec<(usize, usize)> = Vec::with_capacity(members.len()); // (class, vertex)
        for &v in &members {
            let row = &self.rows[v];
            let class = (0..class_masks.len())
                .find(|&c| class_masks[c].iter().zip(row).all(|(m, r)| m & r == 0))
                .unwrap_or_else(|| {
                    class_masks.push(vec![0u64; self.words]);
                    class_max.push(0);
                    class_masks.len() - 1
                });
            class_masks[class][v / 64] |= 1 << (v % 64);
            class_max[class] = class_max[class].max(self.weights[v]);
            branch.push((class, v));
        }
        branch.sort_unstable();
        let mut prefix: Vec<u64> = Vec::with_capacity(branch.len());
        let mut acc = 0u64;
        let mut last_class = usize::MAX;
        for &(c, _) in &branch {
            if c != last_class {
                acc += class_max[c];
                last_class = c;
            }
            prefix.push(acc);
        }
        if self.cand.len() <= depth + 1 {
            self.cand.push(vec![0u64; self.words]);
        }
        for i in (0..branch.len()).rev() {
            if self.stopped {
                return;
            }
            // bounds are non-decreasing in i, so everything up to i is
            // pruned along with it
            if cur_weight + prefix[i] <= self.best_weight {
                return;
            }
            let v = branch[i].1;
            self.check_budget();
            if self.stopped {
                return;
            }
            self.cand[depth][v / 64] &= !(1 << (v % 64));
            for w in 0..self.words {
                self.cand[depth + 1][w] = self.cand[depth][w] & self.rows[v][w];
            }
            let new_weight = cur_weight + self.weights[v];
            self.stack.push(v);
            self.bump_incumbent(new_weight);
            self.expand(depth + 1, new_weight);
            self.stack.pop();
        }
    }
}

/// Exact maximum-weight clique on raw weights and adjacency.
///
/// Returns the best clique found; `proven_optimal` tells whether the
/// search tree was closed within budget.  Deterministic for identical
/// inputs whenever the wall-clock limit is not what stops it.
pub fn max_weight_clique_raw(weights: &[u64], adj: &BitGraph, budget: &SolveBudget) -> CliqueResult {
    assert_eq!(weights.len(), adj.n(), "one weight per vertex");
    let start = Instant::now();
    let nv = adj.n();
    if nv == 0 {
        return CliqueResult::empty();
    }
    // static order: heavy first, dense first, then stable on index
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_unstable_by(|&a, &b| {
        weights[b]
            .cmp(&weights[a])
            .then(adj.degree(b).cmp(&adj.degree(a)))
            .then(a.cmp(&b))
    });
    let mut pos = vec![0usize; nv]; // original -> internal
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let words = nv.div_ceil(64);
    let mut rows = vec![vec![0u64; words]; nv];
    for v in 0..nv {
        for u in adj.neighbors(v) {
            let (a, b) = (pos[v], pos[u]);
            rows[a][b / 64] |= 1 << (b % 64);
        }
    }
    let seed_result = greedy_seed_raw(weights, adj, budget.rng_seed);
    let mut weights_perm = vec![0u64; nv];
    for v in 0..nv {
        weights_perm[pos[v]] = weights[v];
    }
    let mut all = vec![0u64; words];
    for v in 0..nv {
        all[v / 64] |= 1 << (v % 64);
    }
    let mut searcher = Searcher {
        weights: &weights_perm,
        rows,
        words,
        nv,
        cand: vec![all],
        stack: Vec::new(),
        best_weight: seed_result.weight,
        best_set: seed_result.vertices.iter().map(|&v| pos[v]).collect(),
        nodes: 0,
        node_limit: budget.node_limit,
        deadline: start + budget.time_limit,
        target: budget.target_weight,
        stopped: false,
    };
    if let Some(t) = budget.target_weight {
        if searcher.best_weight >= t {
            searcher.stopped = true;
        }
    }
    if !searcher.stopped {
        searcher.expand(0, 0);
    }
    let mut vertices: Vec<usize> = searcher.best_set.iter().map(|&p| order[p]).collect();
    vertices.sort_unstable();
    let result = CliqueResult {
        weight: searcher.best_weight,
        vertices,
        proven_optimal: !searcher.stopped,
        nodes_explored: searcher.nodes,
        wall_time: start.elapsed(),
    };
    assert_is_clique(weights, adj, &result);
    result
}

/// Exact maximum-weight clique over a compatibility graph.
pub fn max_weight_clique(graph: &CompatibilityGraph, budget: &SolveBudget) -> CliqueResult {
    max_weight_clique_raw(&graph.weights(), &graph.adjacency, budget)
}

/// Exhaustive oracle: enumerate every clique with no pruning beyond the
/// enumeration structure itself.  Independent of the branch-and-bound
/// code path; limited to [`BRUTE_FORCE_LIMIT`] vertices.
pub fn brute_force_clique_raw(weights: &[u64], adj: &BitGraph) -> Result<CliqueResult> {
    assert_eq!(weights.len(), adj.n(), "one weight per vertex");
    let start = Instant::now();
    let nv = adj.n();
    if nv > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { vertices: nv, limit: BRUTE_FORCE_LIMIT });
    }
    let neighbor_mask: Vec<u64> = (0..nv)
        .map(|v| adj.neighbors(v).fold(0u64, |m, u| m | 1 << u))
        .collect();
    struct Rec<'a> {
        weights: &'a [u64],
        neighbor_mask: &'a [u64],
        best_weight: u64,
        best_mask: u64,
        nodes: u64,
    }
    impl Rec<'_> {
        fn go(&mut self, clique_mask: u64, clique_weight: u64, cand: u64) {
            self.nodes += 1;
            if clique_weight > self.best_weight {
                self.best_weight = clique_weight;
                self.best_mask = clique_mask;
            }
            let mut rest = cand;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                self.go(
                    clique_mask | 1 << v,
                    clique_weight + self.weights[v],
                    // keep only later vertices to visit each clique once
                    cand & self.neighbor_mask[v] & !((1u64 << v) | ((1u64 << v) - 1)),
                );
            }
        }
    }
    let mut rec = Rec { weights, neighbor_mask: &neighbor_mask, best_weight: 0, best_mask: 0, nodes: 0 };
    let all = if nv == 64 { u64::MAX } else { (1u64 << nv) - 1 };
    rec.go(0, 0, all);
    let vertices: Vec<usize> = (0..nv).filter(|&v| rec.best_mask >> v & 1 == 1).collect();
    let result = CliqueResult {
        weight: rec.best_weight,
        vertices,
        proven_optimal: true,
        nodes_explored: rec.nodes,
        wall_time: start.elapsed(),
    };
    assert_is_clique(weights, adj, &result);
    Ok(result)
}

/// Exhaustive oracle over a compatibility graph.
pub fn brute_force_clique(graph: &CompatibilityGraph) -> Result<CliqueResult> {
    brute_force_clique_raw(&graph.weights(), &graph.adjacency)
}

/// Randomized weighted greedy: repeatedly extend by the candidate with the
/// best weight-plus-neighborhood score.  Result is always maximal, so its
/// weight is a valid lower bound.
pub fn greedy_seed_raw(weights: &[u64], adj: &BitGraph, rng_seed: u64) -> CliqueResult {
    assert_eq!(weights.len(), adj.n(), "one weight per vertex");
    let start = Instant::now();
    let nv = adj.n();
    if nv == 0 {
        return CliqueResult::empty();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let restarts = 8 + nv.min(64);
    let words = nv.div_ceil(64);
    let mut best: Option<(u64, Vec<usize>)> = None;
    for round in 0..restarts {
        let first = if round == 0 {
            // deterministic heavy start
            (0..nv)
                .max_by(|&a, &b| {
                    weights[a]
                        .cmp(&weights[b])
                        .then(adj.degree(a).cmp(&adj.degree(b)))
                        .then(b.cmp(&a))
                })
                .expect("nonempty graph")
        } else {
            rng.gen_range(0..nv)
        };
        let mut clique = vec![first];
        let mut weight = weights[first];
        let mut cand: Vec<u64> = vec![0; words];
        for u in adj.neighbors(first) {
            cand[u / 64] |= 1 << (u % 64);
        }
        loop {
            // prefer heavier, then better-connected, then lowest index
            let mut pick: Option<(u64, u64, usize)> = None; // (weight, score, vertex)
            for v in (0..nv).filter(|&v| cand[v / 64] >> (v % 64) & 1 == 1) {
                let score: u64 = adj
                    .neighbors(v)
                    .filter(|&u| cand[u / 64] >> (u % 64) & 1 == 1)
                    .map(|u| weights[u])
                    .sum();
                let better = match pick {
                    None => true,
                    Some((w, s, pv)) => {
                        (weights[v], score) > (w, s) || ((weights[v], score) == (w, s) && v < pv)
                    }
                };
                if better {
                    pick = Some((weights[v], score, v));
                }
            }
            let Some((_, _, v)) = pick else { break };
            clique.push(v);
            weight += weights[v];
            cand[v / 64] &= !(1 << (v % 64));
            for (cw, aw) in cand.iter_mut().zip(adj.row(v)) {
                *cw &= aw;
            }
        }
        if best.as_ref().is_none_or(|(bw, _)| weight > *bw) {
            clique.sort_unstable();
            best = Some((weight, clique));
        }
    }
    let (weight, vertices) = best.expect("at least one restart");
    let result = CliqueResult {
        vertices,
        weight,
        proven_optimal: false,
        nodes_explored: restarts as u64,
        wall_time: start.elapsed(),
    };
    assert_is_clique(weights, adj, &result);
    result
}

/// Greedy incumbent over a compatibility graph.
pub fn greedy_seed(graph: &CompatibilityGraph, rng_seed: u64) -> CliqueResult {
    greedy_seed_raw(&graph.weights(), &graph.adjacency, rng_seed)
}
