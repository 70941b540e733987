use super::search::{solve_masked, DEFAULT_BUDGET};
use super::verify::combinations;
use crate::error::{Error, Result};
use crate::graph::{bit, Graph, Mask};

/// All `size`-subsets whose removal disconnects `g`.
pub fn enumerate_separators(g: &Graph, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size + 2 > g.n() {
        return out;
    }
    let mut removed = vec![false; g.n()];
    for set in combinations(g.n(), size) {
        for &v in &set {
            removed[v] = true;
        }
        if !g.is_connected_without(&removed) {
            out.push(set.clone());
        }
        for &v in &set {
            removed[v] = false;
        }
    }
    out
}

/// Whether two vertices share at least three neighbours.
pub fn contains_k23(g: &Graph) -> bool {
    let mut common = vec![0u32; g.n()];
    for u in 0..g.n() {
        common.iter_mut().for_each(|c| *c = 0);
        for &w in g.neighbors(u) {
            for &x in g.neighbors(w) {
                if x > u {
                    common[x] += 1;
                    if common[x] >= 3 {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Indices of the pairs joined by a path whose inner vertices avoid `xs`.
pub fn short_distance_pairs(f: &Graph, xs: &[usize], pairs: &[(usize, usize)]) -> Result<Vec<usize>> {
    let adj = f
        .masks()
        .ok_or_else(|| Error::Unsupported("at most 128 vertices".into()))?;
    let all: Mask = if adj.len() == 128 { Mask::MAX } else { bit(adj.len()) - 1 };
    let x_mask = xs.iter().fold(0, |m, &v| m | bit(v));
    let mut out = Vec::new();
    for (i, &(s, t)) in pairs.iter().enumerate() {
        let allowed = (all & !x_mask) | bit(s) | bit(t);
        if solve_masked(&adj, allowed, &[(s, t)], DEFAULT_BUDGET)?.is_some() {
            out.push(i);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::cube_graph;

    #[test]
    fn cube_separators_are_independent() {
        let g = cube_graph(3).unwrap();
        let seps = enumerate_separators(&g, 3);
        assert!(seps.contains(&vec![1, 2, 4]));
        for s in &seps {
            for (a, &u) in s.iter().enumerate() {
                assert!(s[a + 1..].iter().all(|&w| !g.has_edge(u, w)));
            }
        }
    }

    #[test]
    fn k23_detection() {
        let k23 = Graph::from_edges(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
        assert!(contains_k23(&k23));
        for d in 1..=5 {
            assert!(!contains_k23(&cube_graph(d).unwrap()));
        }
    }

    #[test]
    fn blocked_pair_is_excluded() {
        let g = cube_graph(3).unwrap();
        // Pair {000, 110}: every neighbour of either end is a terminal.
        let xs = [0, 3, 1, 7, 2, 4];
        let pairs = [(0, 3), (1, 7), (2, 4)];
        let got = short_distance_pairs(&g, &xs, &pairs).unwrap();
        assert!(!got.contains(&0));
        let adjacent = short_distance_pairs(&g, &[0, 1], &[(0, 1)]).unwrap();
        assert_eq!(adjacent, vec![0]);
    }
}
