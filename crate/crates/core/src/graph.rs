//! Simple undirected graphs and the bitmask helpers used by the search code.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Vertex set over at most 128 vertices.
pub type Mask = u128;

#[inline]
pub(crate) fn bit(v: usize) -> Mask {
    1u128 << v
}

pub(crate) fn bits(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(v)
        }
    })
}

pub(crate) fn mask_of(vs: impl IntoIterator<Item = usize>) -> Mask {
    vs.into_iter().fold(0, |m, v| m | bit(v))
}

/// Undirected simple graph on `0..n` with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::ForeignVertex(u.max(v)));
            }
            if u == v {
                return Err(Error::InvalidProblem(format!("loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adj })
    }

    /// Checks symmetry and rejects loops.
    pub fn from_adjacency(adj: Vec<Vec<usize>>) -> Result<Self> {
        let n = adj.len();
        let mut edges = Vec::new();
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                if v >= n {
                    return Err(Error::ForeignVertex(v));
                }
                if !adj[v].contains(&u) {
                    return Err(Error::InvalidProblem(format!(
                        "adjacency not symmetric at ({u}, {v})"
                    )));
                }
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    /// Subgraph induced on `keep` (in the given order); vertex `i` of the
    /// result is `keep[i]`.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let adj = keep
            .iter()
            .map(|&v| {
                let mut l: Vec<usize> = self.adj[v]
                    .iter()
                    .filter_map(|&w| (index[w] != usize::MAX).then_some(index[w]))
                    .collect();
                l.sort_unstable();
                l
            })
            .collect();
        Graph { adj }
    }

    /// Neighbourhood masks, available when the graph has at most 128 vertices.
    pub fn masks(&self) -> Option<Vec<Mask>> {
        (self.n() <= 128).then(|| self.adj.iter().map(|l| mask_of(l.iter().copied())).collect())
    }

    pub fn bfs_distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Whether the vertices not flagged in `removed` induce a connected graph.
    pub fn is_connected_without(&self, removed: &[bool]) -> bool {
        let Some(start) = (0..self.n()).find(|&v| !removed[v]) else {
            return true;
        };
        let mut seen = removed.to_vec();
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == removed.iter().filter(|&&r| !r).count()
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_without(&vec![false; self.n()])
    }
}

impl TryFrom<Vec<Vec<usize>>> for Graph {
    type Error = Error;
    fn try_from(adj: Vec<Vec<usize>>) -> Result<Self> {
        Graph::from_adjacency(adj)
    }
}

impl From<Graph> for Vec<Vec<usize>> {
    fn from(g: Graph) -> Self {
        g.adj
    }
}

/// Shortest path inside `region` (both ends must lie in it), preferring the
/// least vertex id at each BFS step.
pub(crate) fn mask_path(adj: &[Mask], region: Mask, from: usize, to: usize) -> Option<Vec<usize>> {
    if region & bit(from) == 0 || region & bit(to) == 0 {
        return None;
    }
    if from == to {
        return Some(vec![from]);
    }
    let mut layers = vec![bit(to)];
    let mut seen = bit(to);
    loop {
        let frontier = *layers.last().unwrap();
        let mut next = 0;
        for v in bits(frontier) {
            next |= adj[v];
        }
        next &= region & !seen;
        if next == 0 {
            return None;
        }
        seen |= next;
        layers.push(next);
        if next & bit(from) != 0 {
            break;
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    for layer in layers.iter().rev().skip(1) {
        cur = (adj[cur] & layer).trailing_zeros() as usize;
        path.push(cur);
    }
    Some(path)
}

/// Vertices reachable from `from` inside `region`.
pub(crate) fn mask_component(adj: &[Mask], region: Mask, from: usize) -> Mask {
    let mut seen = bit(from) & region;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0;
        for v in bits(frontier) {
            next |= adj[v];
        }
        frontier = next & region & !seen;
        seen |= frontier;
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn adjacency_round_trip() {
        let g = cycle(5);
        let json = serde_json::to_string(&g).unwrap();
        let back: Graph = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
        assert!(serde_json::from_str::<Graph>("[[1],[]]").is_err());
    }

    #[test]
    fn induced_relabels() {
        let g = cycle(6);
        let h = g.induced(&[0, 1, 2, 4]);
        assert_eq!(h.edge_count(), 2);
        assert!(h.has_edge(0, 1) && h.has_edge(1, 2) && !h.has_edge(2, 3));
    }

    #[test]
    fn mask_path_is_shortest() {
        let g = cycle(8);
        let adj = g.masks().unwrap();
        let p = mask_path(&adj, Mask::MAX, 0, 3).unwrap();
        assert_eq!(p, vec![0, 1, 2, 3]);
        let region = !bit(1);
        assert_eq!(mask_path(&adj, region, 0, 3).unwrap(), vec![0, 7, 6, 5, 4, 3]);
        assert!(mask_path(&adj, !bit(1) & !bit(5), 0, 3).is_none());
    }

    #[test]
    fn connectivity_with_removals() {
        let g = cycle(6);
        let mut removed = vec![false; 6];
        removed[0] = true;
        assert!(g.is_connected_without(&removed));
        removed[3] = true;
        assert!(!g.is_connected_without(&removed));
    }
}
