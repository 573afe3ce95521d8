//! Training-example selection by greedy vertex cover over a kNN graph.

use std::collections::BTreeSet;

use super::embed::SparseVector;

/// Undirected adjacency lists, neighbors ascending.
pub type Graph = Vec<BTreeSet<usize>>;

/// Directed kNN by cosine (each vertex links to its `k` most similar others,
/// zero-similarity pairs excluded, ties to the lower id), then symmetrized.
pub fn knn_graph(vectors: &[SparseVector], k: usize) -> Graph {
    let n = vectors.len();
    let mut adj: Graph = vec![BTreeSet::new(); n];
    for i in 0..n {
        let mut sims: Vec<(usize, f64)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (j, vectors[i].dot(&vectors[j])))
            .filter(|(_, s)| *s > 0.0)
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(j, _) in sims.iter().take(k) {
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    adj
}

/// Repeatedly take the vertex covering the most uncovered edges (lowest id on
/// ties) until every edge is covered or `limit` vertices are chosen. Returns
/// vertices in the order chosen.
pub fn greedy_vertex_cover(adj: &Graph, limit: usize) -> Vec<usize> {
    let n = adj.len();
    let mut residual: Vec<usize> = adj.iter().map(BTreeSet::len).collect();
    let mut chosen = vec![false; n];
    let mut order = Vec::new();
    while order.len() < limit {
        let best = (0..n).filter(|&v| !chosen[v]).max_by(|&a, &b| residual[a].cmp(&residual[b]).then(b.cmp(&a)));
        let Some(v) = best.filter(|&v| residual[v] > 0) else { break };
        chosen[v] = true;
        order.push(v);
        residual[v] = 0;
        for &u in &adj[v] {
            if !chosen[u] {
                residual[u] -= 1;
            }
        }
    }
    order
}

/// Greedy cover up to `target` vertices; spare slots go to the remaining
/// vertices of highest degree (lowest id on ties), since every residual
/// degree is zero once the cover is complete.
pub fn select_vertices(adj: &Graph, target: usize) -> Vec<usize> {
    let mut order = greedy_vertex_cover(adj, target);
    let mut taken = vec![false; adj.len()];
    for &v in &order {
        taken[v] = true;
    }
    let mut spare: Vec<usize> = (0..adj.len()).filter(|&v| !taken[v]).collect();
    spare.sort_by(|&a, &b| adj[b].len().cmp(&adj[a].len()).then(a.cmp(&b)));
    order.extend(spare.into_iter().take(target.saturating_sub(order.len())));
    order
}

pub fn is_vertex_cover(adj: &Graph, cover: &[usize]) -> bool {
    let set: BTreeSet<usize> = cover.iter().copied().collect();
    adj.iter().enumerate().all(|(v, ns)| set.contains(&v) || ns.iter().all(|u| set.contains(u)))
}

/// Select `target` example indices from embedded questions.
pub fn vertex_cover_select(vectors: &[SparseVector], k_neighbors: usize, target: usize) -> Vec<usize> {
    select_vertices(&knn_graph(vectors, k_neighbors.max(1)), target)
}
