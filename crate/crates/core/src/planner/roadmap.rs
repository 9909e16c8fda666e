use serde::{Deserialize, Serialize};

use super::{point_clear, segment_clear, PlannerError, PlannerParams};
use crate::geometry::{Disc, Vec2};

pub const START_INDEX: usize = 0;
pub const GOAL_INDEX: usize = 1;

/// Undirected weighted graph over planar nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roadmap {
    pub nodes: Vec<Vec2>,
    /// Neighbour lists sorted by node index.
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Roadmap {
    /// Graph with arbitrary symmetric weights; `edges` lists each link once.
    /// Duplicate links keep the lighter weight.
    pub fn from_edges(nodes: Vec<Vec2>, edges: &[(usize, usize, f64)]) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(u, v, w) in edges {
            assert!(u < nodes.len() && v < nodes.len(), "edge endpoint out of range");
            if u == v {
                continue;
            }
            insert_edge(&mut adjacency[u], v, w);
            insert_edge(&mut adjacency[v], u, w);
        }
        Roadmap { nodes, adjacency }
    }

    /// Add (or keep) the Euclidean edge between two nodes.
    pub(crate) fn link(&mut self, u: usize, v: usize) {
        let w = self.nodes[u.min(v)].distance(self.nodes[u.max(v)]);
        insert_edge(&mut self.adjacency[u], v, w);
        insert_edge(&mut self.adjacency[v], u, w);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(n, _)| n)
            .ok()
            .map(|i| self.adjacency[u][i].1)
    }

    /// Every edge once, as `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

fn insert_edge(list: &mut Vec<(usize, f64)>, v: usize, w: f64) {
    match list.binary_search_by_key(&v, |&(n, _)| n) {
        Ok(i) => list[i].1 = list[i].1.min(w),
        Err(i) => list.insert(i, (v, w)),
    }
}

/// Indices of the `k` nodes nearest to `i` (excluding `i`), ties broken by index.
pub(crate) fn k_nearest(nodes: &[Vec2], i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> = nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, p)| (p.distance(nodes[i]), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Node 0 is `start`, node 1 is `goal`, milestones follow in order. Each node
/// is linked to its `k_neighbors` nearest nodes where the segment is clear; the
/// edge set is then symmetrized.
pub fn build_roadmap(
    start: Vec2,
    goal: Vec2,
    milestones: &[Vec2],
    obstacles: &[Disc],
    params: &PlannerParams,
) -> Result<Roadmap, PlannerError> {
    if !point_clear(start, obstacles, params.clearance)
        || !point_clear(goal, obstacles, params.clearance)
    {
        return Err(PlannerError::StartOrGoalBlocked);
    }
    let mut nodes = Vec::with_capacity(milestones.len() + 2);
    nodes.push(start);
    nodes.push(goal);
    nodes.extend_from_slice(milestones);

    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in k_nearest(&nodes, i, params.k_neighbors) {
            let (u, v) = (i.min(j), i.max(j));
            if segment_clear(nodes[u], nodes[v], obstacles, params.clearance) {
                edges.push((u, v, nodes[u].distance(nodes[v])));
            }
        }
    }
    Ok(Roadmap::from_edges(nodes, &edges))
}
