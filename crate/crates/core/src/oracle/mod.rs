//! Ground truth for linkage questions: complete search, Menger paths,
//! exhaustive and sampled linkedness campaigns, separators.

mod search;
mod structure;
mod symmetry;
mod verify;

pub use search::DEFAULT_BUDGET;
pub use structure::{contains_k23, enumerate_separators, short_distance_pairs};
pub use symmetry::CubeSymmetry;
pub use verify::{
    combinations, pairings, verify_k_linked, verify_strongly_linked, Mode, Status, Verdict,
    VerifyOptions,
};

pub(crate) use search::solve_masked;
pub(crate) use verify::{sample_pairing, sample_subset, sweep_exhaustive, sweep_sampled, Tally};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::disjoint_ab_paths;
use crate::generators::InstanceSpec;
use crate::graph::{bit, Graph, Mask};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkageProblem {
    pub graph: Graph,
    pub pairs: Vec<(usize, usize)>,
    pub forbidden: Vec<usize>,
}

/// JSON form of a problem: the graph is an adjacency list or an instance.
#[derive(Clone, Debug, Deserialize)]
pub struct ProblemFile {
    pub graph: GraphSource,
    pub pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub forbidden: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Adjacency(Graph),
    Instance(InstanceSpec),
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<LinkageProblem> {
        let graph = match self.graph {
            GraphSource::Adjacency(g) => g,
            GraphSource::Instance(spec) => spec.build()?.complex.universe_graph(),
        };
        LinkageProblem::new(graph, self.pairs, self.forbidden)
    }
}

impl LinkageProblem {
    pub fn new(graph: Graph, pairs: Vec<(usize, usize)>, forbidden: Vec<usize>) -> Result<Self> {
        let p = LinkageProblem {
            graph,
            pairs,
            forbidden,
        };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let n = self.graph.n();
        let mut seen = vec![false; n];
        for v in self.terminals().chain(self.forbidden.iter().copied()) {
            if v >= n {
                return Err(Error::ForeignVertex(v));
            }
            if seen[v] {
                return Err(Error::InvalidProblem(format!("vertex {v} used twice")));
            }
            seen[v] = true;
        }
        Ok(())
    }

    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().flat_map(|&(s, t)| [s, t])
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str::<ProblemFile>(text)?.into_problem()
    }
}

/// One path per pair, path `i` running from `s_i` to `t_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Linkage {
    pub paths: Vec<Vec<usize>>,
}

impl Linkage {
    /// Endpoints, edges, pairwise disjointness and forbidden avoidance.
    pub fn validate(&self, g: &Graph, pairs: &[(usize, usize)], forbidden: &[usize]) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProblem(format!("invalid linkage: {m}")));
        if self.paths.len() != pairs.len() {
            return bad(format!("{} paths for {} pairs", self.paths.len(), pairs.len()));
        }
        let mut used = vec![false; g.n()];
        for &v in forbidden {
            used[v] = true;
        }
        for (i, (p, &(s, t))) in self.paths.iter().zip(pairs).enumerate() {
            let ends = (p.first().copied(), p.last().copied());
            if ends != (Some(s), Some(t)) && ends != (Some(t), Some(s)) {
                return bad(format!("path {i} does not join {s} and {t}"));
            }
            for w in p.windows(2) {
                if !g.has_edge(w[0], w[1]) {
                    return bad(format!("path {i} uses a non-edge {}-{}", w[0], w[1]));
                }
            }
            for &v in p {
                if v >= g.n() || used[v] {
                    return bad(format!("vertex {v} reused or forbidden on path {i}"));
                }
                used[v] = true;
            }
        }
        Ok(())
    }

    pub fn check(&self, p: &LinkageProblem) -> Result<()> {
        self.validate(&p.graph, &p.pairs, &p.forbidden)
    }
}

/// A linkage for `p`, or `None` if none exists. At most four pairs.
pub fn solve_linkage(p: &LinkageProblem, budget: u64) -> Result<Option<Linkage>> {
    p.check()?;
    if p.pairs.len() > 4 {
        return Err(Error::InvalidProblem("at most 4 pairs are supported".into()));
    }
    let adj = p
        .graph
        .masks()
        .ok_or_else(|| Error::Unsupported("search needs at most 128 vertices".into()))?;
    let mut allowed: Mask = if adj.len() == 128 { Mask::MAX } else { bit(adj.len()) - 1 };
    for &v in &p.forbidden {
        allowed &= !bit(v);
    }
    Ok(solve_masked(&adj, allowed, &p.pairs, budget)?.map(|paths| Linkage { paths }))
}

/// `k` disjoint A-B paths, each meeting `a` only at its start and `b` only
/// at its end, or `None` when a cut of fewer than `k` vertices separates them.
pub fn menger_paths(g: &Graph, a: &[usize], b: &[usize], k: usize) -> Result<Option<Vec<Vec<usize>>>> {
    if a.len() < k || b.len() < k {
        return Err(Error::InvalidProblem(format!(
            "need |A|, |B| >= {k}, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if let Some(&v) = a.iter().chain(b).find(|&&v| v >= g.n()) {
        return Err(Error::ForeignVertex(v));
    }
    let paths = disjoint_ab_paths(g.adjacency(), &|_| true, a, b, k);
    Ok((paths.len() == k).then_some(paths))
}

/// Maximum number of disjoint A-B paths.
pub fn max_disjoint_paths(g: &Graph, a: &[usize], b: &[usize]) -> usize {
    disjoint_ab_paths(g.adjacency(), &|_| true, a, b, a.len().min(b.len())).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{cube_graph, CubeVertex};

    fn v(label: &str) -> usize {
        CubeVertex::parse(label).unwrap().bits as usize
    }

    fn problem(d: usize, pairs: &[(&str, &str)]) -> LinkageProblem {
        let pairs = pairs.iter().map(|&(s, t)| (v(s), v(t))).collect();
        LinkageProblem::new(cube_graph(d).unwrap(), pairs, vec![]).unwrap()
    }

    #[test]
    fn cube_examples() {
        let p = problem(3, &[("000", "011"), ("010", "001")]);
        assert_eq!(solve_linkage(&p, DEFAULT_BUDGET).unwrap(), None);
        let p = problem(3, &[("000", "111"), ("011", "100")]);
        let l = solve_linkage(&p, DEFAULT_BUDGET).unwrap().unwrap();
        l.check(&p).unwrap();
        let hand = Linkage {
            paths: vec![
                ["000", "010", "110", "111"].map(v).to_vec(),
                ["011", "001", "101", "100"].map(v).to_vec(),
            ],
        };
        hand.check(&p).unwrap();
    }

    #[test]
    fn adjacent_pairs_give_edges() {
        let p = problem(4, &[("0000", "1000"), ("0110", "0111"), ("1111", "1011")]);
        let l = solve_linkage(&p, DEFAULT_BUDGET).unwrap().unwrap();
        assert!(l.paths.iter().all(|q| q.len() == 2));
    }

    #[test]
    fn problem_validation() {
        let g = cube_graph(3).unwrap();
        assert!(LinkageProblem::new(g.clone(), vec![(0, 1), (1, 2)], vec![]).is_err());
        assert!(LinkageProblem::new(g.clone(), vec![(0, 1)], vec![1]).is_err());
        assert!(LinkageProblem::new(g, vec![(0, 9)], vec![]).is_err());
    }

    #[test]
    fn rejects_bad_linkages() {
        let p = problem(3, &[("000", "111")]);
        let gap = Linkage { paths: vec![vec![0, 3, 7]] };
        assert!(gap.check(&p).is_err());
        let mut q = p.clone();
        q.forbidden = vec![1];
        let through = Linkage { paths: vec![vec![0, 1, 3, 7]] };
        assert!(through.check(&p).is_ok() && through.check(&q).is_err());
    }

    #[test]
    fn problem_json() {
        let text = r#"{"graph": {"kind": "cube", "dim": 3}, "pairs": [[0, 7]], "forbidden": [1]}"#;
        let p = LinkageProblem::from_json_str(text).unwrap();
        assert_eq!(p.graph.n(), 8);
        let text = r#"{"graph": [[1], [0]], "pairs": [[0, 1]]}"#;
        assert!(LinkageProblem::from_json_str(text).is_ok());
    }

    #[test]
    fn menger_examples() {
        let g = cube_graph(3).unwrap();
        let a = g.neighbors(0).to_vec();
        let b = g.neighbors(7).to_vec();
        let paths = menger_paths(&g, &a, &b, 3).unwrap().unwrap();
        assert_eq!(paths.len(), 3);
        let same = menger_paths(&g, &a, &a, 2).unwrap().unwrap();
        assert!(same.iter().all(|p| p.len() == 1));
        assert_eq!(menger_paths(&g, &[0, 1, 2, 3], &[4, 5, 6, 7], 5).ok(), None);
        assert_eq!(menger_paths(&g, &[0], &[7], 1).unwrap().unwrap().len(), 1);
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(menger_paths(&path, &[0, 1], &[2, 1], 2).unwrap(), None);
    }
}
