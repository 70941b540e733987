//! Constructive routing in stars of vertices and in cubical polytopes.
//!
//! Sub-linkages inside facets, ridges and antistars are found with the
//! complete search of [`crate::oracle`] restricted to the relevant vertex
//! set; every emitted linkage is re-validated before it is returned.

mod config;
mod frame;
mod polytope;
mod star;
mod strong;

pub use config::{detect_config_df, ConfigDFContext};
pub use polytope::{link_in_polytope, PolytopeLinker, PolytopeOutcome};
pub use star::{link_in_star, StarLinker, StarOutcome, StarProblem};
pub use strong::strong_link_even;

use frame::Frame;

use crate::error::{contract, Result};
use crate::flow::disjoint_ab_paths;
use crate::graph::{bit, bits, mask_path, Graph, Mask};
use crate::oracle::{solve_masked, Linkage};

/// Concatenates path pieces, merging a repeated junction vertex.
pub(crate) fn join(parts: &[&[usize]]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for part in parts {
        for &v in *part {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Path and linkage primitives on the graph of a frame.
#[derive(Clone, Debug)]
pub(crate) struct Router {
    pub fr: Frame,
    pub lists: Vec<Vec<usize>>,
    pub graph: Graph,
    pub budget: u64,
}

impl Router {
    pub fn new(fr: Frame, budget: u64) -> Self {
        let lists: Vec<Vec<usize>> = fr.adj.iter().map(|&m| bits(m).collect()).collect();
        let graph = Graph::from_adjacency(lists.clone()).expect("frame adjacency is symmetric");
        Router {
            fr,
            lists,
            graph,
            budget,
        }
    }

    pub fn try_path(&self, region: Mask, a: usize, b: usize) -> Option<Vec<usize>> {
        mask_path(&self.fr.adj, region, a, b)
    }

    pub fn path(&self, region: Mask, a: usize, b: usize, step: &'static str) -> Result<Vec<usize>> {
        self.try_path(region, a, b)
            .ok_or_else(|| contract(step, format!("no {a}-{b} path in the region")))
    }

    pub fn solve(&self, region: Mask, pairs: &[(usize, usize)], step: &'static str) -> Result<Vec<Vec<usize>>> {
        for &(s, t) in pairs {
            if region & bit(s) == 0 || region & bit(t) == 0 {
                return Err(contract(step, format!("pair {s}-{t} leaves the region")));
            }
        }
        solve_masked(&self.fr.adj, region, pairs, self.budget)?
            .ok_or_else(|| contract(step, format!("pairs {pairs:?} not linked in the region")))
    }

    /// `|from|` disjoint paths inside `region` from `from` to `to`.
    pub fn menger(&self, region: Mask, from: Mask, to: Mask, step: &'static str) -> Result<Vec<Vec<usize>>> {
        let a: Vec<usize> = bits(from).collect();
        let b: Vec<usize> = bits(to).collect();
        let allowed = |v: usize| region & bit(v) != 0;
        let paths = disjoint_ab_paths(&self.lists, &allowed, &a, &b, a.len());
        if paths.len() < a.len() {
            return Err(contract(step, format!("{} of {} disjoint paths", paths.len(), a.len())));
        }
        Ok(paths)
    }

    /// Orients each path from `s_i` to `t_i` and validates the linkage.
    pub fn finish(
        &self,
        mut paths: Vec<Vec<usize>>,
        pairs: &[(usize, usize)],
        forbidden: &[usize],
        step: &'static str,
    ) -> Result<Linkage> {
        for (p, &(s, _)) in paths.iter_mut().zip(pairs) {
            if p.first() != Some(&s) {
                p.reverse();
            }
        }
        let linkage = Linkage { paths };
        linkage
            .validate(&self.graph, pairs, forbidden)
            .map_err(|e| contract(step, e.to_string()))?;
        Ok(linkage)
    }
}
