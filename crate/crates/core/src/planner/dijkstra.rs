use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::Roadmap;

/// Search label. Ordered by total weight, then hop count, then the node
/// sequence itself, so equal-cost paths resolve the same way every run.
#[derive(Debug, Clone, PartialEq)]
struct Label {
    cost: f64,
    path: Vec<usize>,
}

impl Label {
    fn hops(&self) -> usize {
        self.path.len() - 1
    }

    fn node(&self) -> usize {
        *self.path.last().expect("labels are never empty")
    }
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.hops().cmp(&other.hops()))
            .then_with(|| self.path.cmp(&other.path))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-weight path from `start` to `goal` as node indices, both ends
/// included. `None` when the goal is unreachable. Ties go to the path with
/// fewer hops, then to the lexicographically smaller index sequence.
pub fn dijkstra(r: &Roadmap, start: usize, goal: usize) -> Option<Vec<usize>> {
    assert!(start < r.len() && goal < r.len(), "node index out of range");
    let mut best: Vec<Option<Label>> = vec![None; r.len()];
    let mut settled = vec![false; r.len()];
    let mut heap = BinaryHeap::new();

    let first = Label {
        cost: 0.0,
        path: vec![start],
    };
    best[start] = Some(first.clone());
    heap.push(std::cmp::Reverse(first));

    while let Some(std::cmp::Reverse(label)) = heap.pop() {
        let u = label.node();
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == goal {
            return Some(label.path);
        }
        for &(v, w) in r.neighbors(u) {
            if settled[v] {
                continue;
            }
            let mut path = label.path.clone();
            path.push(v);
            let candidate = Label {
                cost: label.cost + w,
                path,
            };
            if best[v].as_ref().is_none_or(|b| candidate < *b) {
                best[v] = Some(candidate.clone());
                heap.push(std::cmp::Reverse(candidate));
            }
        }
    }
    None
}

/// Sum of edge weights along `path`, accumulated from the first node.
pub fn path_weight(r: &Roadmap, path: &[usize]) -> Option<f64> {
    path.windows(2)
        .try_fold(0.0, |acc, pair| r.edge_weight(pair[0], pair[1]).map(|w| acc + w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> Roadmap {
        Roadmap::from_edges(vec![Vec2::ZERO; n], edges)
    }

    #[test]
    fn single_edge() {
        let r = graph(2, &[(0, 1, 1.5)]);
        assert_eq!(dijkstra(&r, 0, 1), Some(vec![0, 1]));
        assert_eq!(dijkstra(&r, 1, 0), Some(vec![1, 0]));
    }

    #[test]
    fn disconnected_goal() {
        let r = graph(3, &[(0, 1, 1.0)]);
        assert_eq!(dijkstra(&r, 0, 2), None);
    }

    #[test]
    fn start_is_goal() {
        let r = graph(2, &[]);
        assert_eq!(dijkstra(&r, 1, 1), Some(vec![1]));
    }

    #[test]
    fn prefers_lighter_path_over_fewer_hops() {
        let r = graph(4, &[(0, 3, 10.0), (0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        assert_eq!(dijkstra(&r, 0, 3), Some(vec![0, 1, 2, 3]));
        assert_eq!(path_weight(&r, &[0, 1, 2, 3]), Some(3.0));
    }

    #[test]
    fn ties_broken_by_hops_then_lexicographic() {
        // 0-3 direct costs 2, 0-1-3 and 0-2-3 also cost 2.
        let r = graph(4, &[(0, 3, 2.0), (0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)]);
        assert_eq!(dijkstra(&r, 0, 3), Some(vec![0, 3]));
        let r = graph(4, &[(0, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0), (1, 3, 1.0)]);
        assert_eq!(dijkstra(&r, 0, 3), Some(vec![0, 1, 3]));
    }
}
