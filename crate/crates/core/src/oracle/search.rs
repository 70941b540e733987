//! Complete depth-first search for vertex-disjoint paths on bitmask graphs.
//!
//! Paths are grown one pair at a time. Three rules keep the search small
//! without losing completeness: a head adjacent to its own target always
//! closes the path (any linkage can be shortened that way); a new vertex may
//! not be adjacent to earlier vertices of its own path (every path can be
//! shortened to an induced one); and every unfinished pair must stay
//! connected through free vertices.

use crate::error::{Error, Result};
use crate::graph::{bit, bits, mask_component, Mask};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

struct Search<'a> {
    adj: &'a [Mask],
    pairs: &'a [(usize, usize)],
    done: Vec<bool>,
    reversed: Vec<bool>,
    paths: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
}

/// Finds disjoint paths for `pairs` using only vertices of `allowed`; every
/// terminal must lie in `allowed`.
pub(crate) fn solve_masked(
    adj: &[Mask],
    allowed: Mask,
    pairs: &[(usize, usize)],
    budget: u64,
) -> Result<Option<Vec<Vec<usize>>>> {
    let mut terminals: Mask = 0;
    for &(s, t) in pairs {
        for v in [s, t] {
            if v >= adj.len() || allowed & bit(v) == 0 || terminals & bit(v) != 0 {
                return Err(Error::InvalidProblem(format!(
                    "terminal {v} repeated, out of range, or not allowed"
                )));
            }
            terminals |= bit(v);
        }
    }
    let mut search = Search {
        adj,
        pairs,
        done: vec![false; pairs.len()],
        reversed: vec![false; pairs.len()],
        paths: vec![Vec::new(); pairs.len()],
        nodes: 0,
        budget,
    };
    if !search.route(allowed & !terminals)? {
        return Ok(None);
    }
    let mut paths = search.paths;
    for (p, &rev) in paths.iter_mut().zip(&search.reversed) {
        if rev {
            p.reverse();
        }
    }
    Ok(Some(paths))
}

impl Search<'_> {
    fn connected(&self, s: usize, t: usize, free: Mask) -> bool {
        self.adj[s] & bit(t) != 0 || mask_component(self.adj, free | bit(s) | bit(t), s) & bit(t) != 0
    }

    fn route(&mut self, free: Mask) -> Result<bool> {
        let mut best: Option<(usize, bool, u32)> = None;
        for i in 0..self.pairs.len() {
            if self.done[i] {
                continue;
            }
            let (s, t) = self.pairs[i];
            if self.adj[s] & bit(t) != 0 {
                self.done[i] = true;
                self.reversed[i] = false;
                self.paths[i] = vec![s, t];
                if self.route(free)? {
                    return Ok(true);
                }
                self.done[i] = false;
                return Ok(false);
            }
            if !self.connected(s, t, free) {
                return Ok(false);
            }
            let cs = (self.adj[s] & free).count_ones();
            let ct = (self.adj[t] & free).count_ones();
            let cand = if ct < cs { (i, true, ct) } else { (i, false, cs) };
            if best.is_none_or(|b| cand.2 < b.2) {
                best = Some(cand);
            }
        }
        let Some((i, rev, _)) = best else {
            return Ok(true);
        };
        let (s, t) = self.pairs[i];
        let (a, b) = if rev { (t, s) } else { (s, t) };
        self.done[i] = true;
        self.reversed[i] = rev;
        self.paths[i] = vec![a];
        let ok = self.extend(i, a, b, 0, free)?;
        if !ok {
            self.done[i] = false;
        }
        Ok(ok)
    }

    fn extend(&mut self, i: usize, head: usize, target: usize, near: Mask, free: Mask) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        let adj = self.adj;
        if adj[head] & bit(target) != 0 {
            self.paths[i].push(target);
            if self.route(free)? {
                return Ok(true);
            }
            self.paths[i].pop();
            return Ok(false);
        }
        let region = free & !near;
        let mut layers: [Mask; 130] = [0; 130];
        let mut depth = 1;
        let mut seen = bit(target);
        let mut frontier = seen;
        let wanted = adj[head] & region;
        while frontier != 0 && seen & wanted != wanted {
            let mut next = 0;
            for v in bits(frontier) {
                next |= adj[v];
            }
            frontier = next & region & !seen;
            seen |= frontier;
            layers[depth] = frontier;
            depth += 1;
        }
        let cands = wanted & seen;
        if cands == 0 {
            return Ok(false);
        }
        for j in 0..self.pairs.len() {
            if !self.done[j] {
                let (s, t) = self.pairs[j];
                if !self.connected(s, t, free) {
                    return Ok(false);
                }
            }
        }
        for layer in &layers[1..depth] {
            for c in bits(cands & layer) {
                self.paths[i].push(c);
                if self.extend(i, c, target, near | adj[head], free & !bit(c))? {
                    return Ok(true);
                }
                self.paths[i].pop();
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::cube_graph;

    fn q(d: usize) -> Vec<Mask> {
        cube_graph(d).unwrap().masks().unwrap()
    }

    #[test]
    fn interleaved_square_is_unlinked() {
        let adj = q(3);
        // Terminals around the square x_0 = 0 in cyclic order 0, 2, 6, 4.
        assert!(solve_masked(&adj, Mask::MAX, &[(0, 6), (2, 4)], DEFAULT_BUDGET)
            .unwrap()
            .is_none());
        assert!(solve_masked(&adj, Mask::MAX, &[(0, 2), (6, 4)], DEFAULT_BUDGET)
            .unwrap()
            .is_some());
    }

    #[test]
    fn paths_are_oriented_and_disjoint() {
        let adj = q(4);
        let pairs = [(0, 15), (3, 12)];
        let paths = solve_masked(&adj, Mask::MAX, &pairs, DEFAULT_BUDGET).unwrap().unwrap();
        let mut used = 0u128;
        for (p, &(s, t)) in paths.iter().zip(&pairs) {
            assert_eq!((p[0], *p.last().unwrap()), (s, t));
            for w in p.windows(2) {
                assert!(adj[w[0]] & bit(w[1]) != 0);
            }
            for &v in p {
                assert!(used & bit(v) == 0);
                used |= bit(v);
            }
        }
    }

    #[test]
    fn budget_is_reported() {
        let adj = q(3);
        let err = solve_masked(&adj, Mask::MAX, &[(0, 6), (2, 4)], 1).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(1)));
    }

    #[test]
    fn allowed_region_is_respected() {
        let adj = q(3);
        let allowed = Mask::MAX & !bit(1) & !bit(2) & !bit(4);
        assert!(solve_masked(&adj, allowed, &[(0, 7)], DEFAULT_BUDGET).unwrap().is_none());
        assert!(solve_masked(&adj, allowed, &[(0, 1)], DEFAULT_BUDGET).is_err());
    }
}
