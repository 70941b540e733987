use std::sync::OnceLock;

use serde::Serialize;

use super::config::{config_facet, escape_through, Escape};
use super::frame::Frame;
use super::star::{StarLinker, StarOutcome};
use super::{join, Router};
use crate::complex::PolytopalComplex;
use crate::error::{contract, Error, Result};
use crate::flow::disjoint_ab_paths;
use crate::graph::{bit, bits, mask_of, mask_path, Mask};
use crate::oracle::{Linkage, DEFAULT_BUDGET};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolytopeOutcome {
    pub linkage: Linkage,
    /// How the star problem was set up: `direct`, `escape.good`,
    /// `escape.detour`, `ridge` or `even`.
    pub branch: &'static str,
    /// Branch of the star construction, when one ran.
    pub star_branch: Option<&'static str>,
}

struct StarData {
    adj: Vec<Mask>,
    verts: Mask,
    linker: Option<StarLinker>,
}

/// Linker for one cubical polytope, caching the star of each vertex.
pub struct PolytopeLinker {
    rt: Router,
    complex: PolytopalComplex,
    stars: Vec<OnceLock<std::result::Result<StarData, String>>>,
}

impl PolytopeLinker {
    /// `p` is the boundary complex of a cubical `d`-polytope, `d >= 4`.
    pub fn new(p: &PolytopalComplex) -> Result<Self> {
        let fr = Frame::new(p)?;
        let d = fr.top + 1;
        if d < 4 {
            return Err(Error::Unsupported(format!("linkage needs d >= 4, got {d}")));
        }
        let n = fr.adj.len();
        Ok(PolytopeLinker {
            rt: Router::new(fr, DEFAULT_BUDGET),
            complex: p.clone(),
            stars: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.rt.budget = budget;
        self
    }

    pub fn dim(&self) -> usize {
        self.rt.fr.top + 1
    }

    fn star(&self, v: usize) -> Result<&StarData> {
        let data = self.stars[v].get_or_init(|| {
            let build = || -> Result<StarData> {
                let star = self.complex.star(self.complex.vertex_handle(v)?)?;
                let fr = Frame::new(&star)?;
                let linker = if (fr.top + 1) % 2 == 1 {
                    Some(StarLinker::new(&star, v)?.with_budget(self.rt.budget))
                } else {
                    None
                };
                Ok(StarData {
                    adj: fr.adj.clone(),
                    verts: fr.verts,
                    linker,
                })
            };
            build().map_err(|e| e.to_string())
        });
        data.as_ref().map_err(|e| contract("polytope.star", e.clone()))
    }

    fn check_pairs(&self, pairs: &[(usize, usize)], extra: &[usize]) -> Result<Mask> {
        let mut x: Mask = 0;
        for v in pairs.iter().flat_map(|&(s, t)| [s, t]).chain(extra.iter().copied()) {
            if v >= self.rt.fr.adj.len() || self.rt.fr.verts & bit(v) == 0 {
                return Err(Error::ForeignVertex(v));
            }
            if x & bit(v) != 0 {
                return Err(Error::InvalidProblem(format!("vertex {v} repeated")));
            }
            x |= bit(v);
        }
        Ok(x)
    }

    /// Disjoint paths from every terminal in `from` into `to`, avoiding
    /// `skip`, indexed by terminal.
    fn approach(&self, from: Mask, to: Mask, skip: usize, step: &'static str) -> Result<Vec<Vec<usize>>> {
        let a: Vec<usize> = bits(from).collect();
        let b: Vec<usize> = bits(to).collect();
        let paths = disjoint_ab_paths(&self.rt.lists, &|v| v != skip, &a, &b, a.len());
        if paths.len() < a.len() {
            return Err(contract(step, format!("{} of {} disjoint paths", paths.len(), a.len())));
        }
        let mut by_start = vec![Vec::new(); self.rt.fr.adj.len()];
        for p in paths {
            let s = p[0];
            by_start[s] = p;
        }
        Ok(by_start)
    }

    /// A linkage of `pairs` with `2 floor((d+1)/2)` terminals.
    pub fn link(&self, pairs: &[(usize, usize)]) -> Result<PolytopeOutcome> {
        let d = self.dim();
        let k = (d + 1) / 2;
        if pairs.len() != k {
            return Err(Error::InvalidProblem(format!("need {k} pairs, got {}", pairs.len())));
        }
        let x = self.check_pairs(pairs, &[])?;
        if d % 2 == 0 {
            let spare = bits(self.rt.fr.verts & !x)
                .next()
                .ok_or_else(|| Error::InvalidProblem("no vertex outside the terminals".into()))?;
            return self.strong_link(pairs, spare);
        }
        self.link_odd(pairs, x)
    }

    fn link_odd(&self, pairs: &[(usize, usize)], x: Mask) -> Result<PolytopeOutcome> {
        let fr = &self.rt.fr;
        let s1 = pairs[0].0;
        let star = self.star(s1)?;
        let linker = star.linker.as_ref().unwrap();
        let mut routes = self.approach(x & !bit(s1), star.verts & !bit(s1), s1, "polytope.menger")?;
        routes[s1] = vec![s1];
        let bar = |routes: &[Vec<usize>]| -> Vec<(usize, usize)> {
            pairs
                .iter()
                .map(|&(s, t)| (*routes[s].last().unwrap(), *routes[t].last().unwrap()))
                .collect()
        };
        let mut pbar = bar(&routes);
        let xbar = |pb: &[(usize, usize)]| mask_of(pb.iter().flat_map(|&(s, t)| [s, t]));
        let mut branch = "direct";
        if let Some(f) = config_facet(linker.frame(), xbar(&pbar), s1, pbar[0].1)? {
            let fm = linker.frame().facet(f);
            let f1 = fr
                .facets()
                .iter()
                .position(|&g| g == fm)
                .ok_or_else(|| contract("polytope.facet", "star facet missing from the polytope"))?;
            let tb1 = pbar[0].1;
            let ri = fr
                .ridges_of(f1, bit(tb1), 0)
                .next()
                .ok_or_else(|| contract("polytope.ridge", "no ridge through t1"))?;
            let e = escape_through(fr, xbar(&pbar), f1, ri)?
                .ok_or_else(|| contract("polytope.escape", "ridge lies in one facet"))?;
            let rj = fr.ridge(e.r_j);
            let order: Vec<usize> = pairs
                .iter()
                .enumerate()
                .flat_map(|(i, &(s, t))| if i == 0 { vec![t] } else { vec![s, t] })
                .collect();
            let touching: Vec<usize> = order
                .iter()
                .copied()
                .filter(|&v| routes[v].iter().any(|&w| rj & bit(w) != 0))
                .collect();
            if touching.is_empty() {
                let paths = self.ridge_route(&pbar, &e)?;
                let linkage = self.compose(&routes, pairs, &pbar, paths)?;
                return Ok(PolytopeOutcome {
                    linkage,
                    branch: "ridge",
                    star_branch: None,
                });
            }
            branch = self.redirect(&mut routes, &touching, &e, tb1, star.verts, s1)?;
            pbar = bar(&routes);
            if config_facet(linker.frame(), xbar(&pbar), s1, pbar[0].1)?.is_some() {
                log::warn!("redirected terminals still put {s1} in Configuration dF");
                return Err(contract("polytope.redirect", "still in Configuration dF"));
            }
        }
        match linker.link(&pbar)? {
            StarOutcome::Linked { linkage, branch: sb } => {
                let linkage = self.compose(&routes, pairs, &pbar, linkage.paths)?;
                Ok(PolytopeOutcome {
                    linkage,
                    branch,
                    star_branch: Some(sb),
                })
            }
            StarOutcome::Refused { .. } => Err(contract("polytope.star", "star linkage refused")),
        }
    }

    /// Replaces one approach path touching `R_J` so that its new end breaks
    /// the configuration. Tiers: a path meeting the good part, then a path
    /// missing the projection of `t1`, then the only touching path.
    fn redirect(
        &self,
        routes: &mut [Vec<usize>],
        touching: &[usize],
        e: &Escape,
        tb1: usize,
        star_verts: Mask,
        s1: usize,
    ) -> Result<&'static str> {
        let fr = &self.rt.fr;
        let rj = fr.ridge(e.r_j);
        let r = fr.ridge(e.r);
        let pt1 = fr.project(tb1, rj)?;
        let meets = |v: usize, m: Mask| routes[v].iter().any(|&w| m & bit(w) != 0);
        let good_hit = touching.iter().copied().find(|&v| meets(v, e.good));
        let (v, branch) = match good_hit {
            Some(v) => (v, "escape.good"),
            None => (
                touching.iter().copied().find(|&v| !meets(v, bit(pt1))).unwrap_or(touching[0]),
                "escape.detour",
            ),
        };
        let old = routes[v].clone();
        let mut new = if good_hit.is_some() {
            let at = old.iter().position(|&w| e.good & bit(w) != 0).unwrap();
            let g = old[at];
            join(&[&old[..=at], &[fr.project(g, r)?]])
        } else {
            let at = old.iter().position(|&w| rj & bit(w) != 0).unwrap();
            let mut used = bit(s1) | mask_of(old[..at].iter().copied());
            for (u, p) in routes.iter().enumerate() {
                if u != v {
                    used |= mask_of(p.iter().copied());
                }
            }
            let region = rj & !used;
            let m = nearest(&fr.adj, region, old[at], e.good)
                .ok_or_else(|| contract("polytope.redirect", "no detour to the good part"))?;
            let last = *m.last().unwrap();
            let mut p = join(&[&old[..at], &m]);
            if star_verts & bit(last) == 0 {
                p.push(fr.project(last, r)?);
            }
            p
        };
        if let Some(cut) = new.iter().position(|&w| star_verts & bit(w) != 0) {
            new.truncate(cut + 1);
        }
        routes[v] = new;
        Ok(branch)
    }

    /// The linkage in the star when no approach path touches `R_J`.
    fn ridge_route(&self, pbar: &[(usize, usize)], e: &Escape) -> Result<Vec<Vec<usize>>> {
        let fr = &self.rt.fr;
        let (r, rf, rj) = (fr.ridge(e.r), fr.ridge(e.r_f), fr.ridge(e.r_j));
        let (s1, tb1) = pbar[0];
        let sk = fr.project(tb1, rf)?;
        let kk = pbar
            .iter()
            .position(|&(a, b)| a == sk || b == sk)
            .ok_or_else(|| contract("polytope.ridge", "neighbour of t1 in R_F is not a terminal"))?;
        let tk = if pbar[kk].0 == sk { pbar[kk].1 } else { pbar[kk].0 };
        let mid: Vec<usize> = (1..pbar.len()).filter(|&i| i != kk).collect();
        let p = |v: usize| fr.project(v, rj);
        let s1r = fr.project(s1, r)?;
        let mut sub = vec![(p(s1r)?, p(tb1)?)];
        for &i in &mid {
            sub.push((p(pbar[i].0)?, p(pbar[i].1)?));
        }
        let sol = self.rt.solve(rj, &sub, "polytope.ridge.link")?;
        let mut paths = vec![Vec::new(); pbar.len()];
        paths[0] = join(&[&[s1, s1r], &sol[0], &[tb1]]);
        for (n, &i) in mid.iter().enumerate() {
            paths[i] = join(&[&[pbar[i].0], &sol[n + 1], &[pbar[i].1]]);
        }
        paths[kk] = vec![sk, fr.project(tk, rf)?, tk];
        Ok(paths)
    }

    fn compose(
        &self,
        routes: &[Vec<usize>],
        pairs: &[(usize, usize)],
        pbar: &[(usize, usize)],
        inner: Vec<Vec<usize>>,
    ) -> Result<Linkage> {
        let mut paths = Vec::with_capacity(pairs.len());
        for ((&(s, t), &(sb, _)), mut mid) in pairs.iter().zip(pbar).zip(inner) {
            if mid.first() != Some(&sb) {
                mid.reverse();
            }
            let mut back = routes[t].clone();
            back.reverse();
            paths.push(join(&[&routes[s], &mid, &back]));
        }
        self.rt.finish(paths, pairs, &[], "polytope.validate")
    }

    /// A linkage of `pairs` avoiding the unpaired vertex `x`; even `d`.
    ///
    /// The terminals are brought to the link of `x` and linked there. At
    /// `d = 4` the link need not be 2-linked; then one pair is joined
    /// through the vertices outside the star of `x` and the rest inside
    /// what remains.
    pub fn strong_link(&self, pairs: &[(usize, usize)], x: usize) -> Result<PolytopeOutcome> {
        let d = self.dim();
        if d % 2 == 1 {
            return Err(Error::Unsupported(format!("strong linkage construction needs even d, got {d}")));
        }
        if pairs.len() != d / 2 {
            return Err(Error::InvalidProblem(format!("need {} pairs, got {}", d / 2, pairs.len())));
        }
        let terminals = self.check_pairs(pairs, &[x])? & !bit(x);
        let star = self.star(x)?;
        let lk = star.verts & !bit(x);
        let routes = self.approach(terminals, lk, x, "strong.menger")?;
        let sub: Vec<(usize, usize)> = pairs
            .iter()
            .map(|&(s, t)| (*routes[s].last().unwrap(), *routes[t].last().unwrap()))
            .collect();
        let budget = self.rt.budget;
        let used = routes.iter().fold(0, |m, r| m | mask_of(r.iter().copied()));
        let (paths, branch) = if let Some(inner) = crate::oracle::solve_masked(&star.adj, lk, &sub, budget)? {
            (self.extend(&routes, pairs, inner), "link")
        } else if let Some(inner) = self.outside(&sub, lk, x, used)? {
            (self.extend(&routes, pairs, inner), "outside")
        } else {
            let direct = self
                .outside(pairs, lk, x, 0)?
                .ok_or_else(|| contract("strong.outside", "no pair can be rerouted outside the star"))?;
            (direct, "outside.direct")
        };
        let linkage = self.rt.finish(paths, pairs, &[x], "strong.validate")?;
        Ok(PolytopeOutcome {
            linkage,
            branch,
            star_branch: None,
        })
    }

    /// Joins one pair by a shortest path that leaves the link and the
    /// other pairs inside the rest of the link, or failing that anywhere
    /// else away from `x` and the approach paths.
    fn outside(&self, sub: &[(usize, usize)], lk: Mask, x: usize, used: Mask) -> Result<Option<Vec<Vec<usize>>>> {
        let fr = &self.rt.fr;
        let ends = mask_of(sub.iter().flat_map(|&(s, t)| [s, t]));
        let free = fr.verts & !bit(x) & !(used & !ends);
        let away = free & !lk;
        for wide in [false, true] {
            for (i, &(s, t)) in sub.iter().enumerate() {
                let own = bit(s) | bit(t);
                let near = (fr.adj[s] | fr.adj[t]) & lk & !ends;
                let rest: Vec<(usize, usize)> = sub.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &q)| q).collect();
                for region in [away | own, away | own | near, free & !(ends & !own)] {
                    let Some(p) = mask_path(&fr.adj, region, s, t) else {
                        continue;
                    };
                    let base = if wide { free } else { lk };
                    let left = base & !mask_of(p.iter().copied());
                    if ends & !own & !left != 0 {
                        continue;
                    }
                    if let Some(mut sol) = crate::oracle::solve_masked(&fr.adj, left, &rest, self.rt.budget)? {
                        sol.insert(i, p);
                        return Ok(Some(sol));
                    }
                }
            }
        }
        Ok(None)
    }

    fn extend(&self, routes: &[Vec<usize>], pairs: &[(usize, usize)], inner: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        pairs
            .iter()
            .zip(inner)
            .map(|(&(s, t), mid)| {
                let mut back = routes[t].clone();
                back.reverse();
                join(&[&routes[s], &mid, &back])
            })
            .collect()
    }
}

/// Shortest path in `region` from `from` to the least nearest vertex of
/// `goal`.
fn nearest(adj: &[Mask], region: Mask, from: usize, goal: Mask) -> Option<Vec<usize>> {
    let mut seen = bit(from);
    let mut frontier = bit(from);
    while frontier & goal == 0 {
        let mut next = 0;
        for v in bits(frontier) {
            next |= adj[v];
        }
        frontier = next & region & !seen;
        if frontier == 0 {
            return None;
        }
        seen |= frontier;
    }
    let target = (frontier & goal).trailing_zeros() as usize;
    mask_path(adj, region | bit(from), from, target)
}

pub fn link_in_polytope(p: &PolytopalComplex, pairs: &[(usize, usize)]) -> Result<PolytopeOutcome> {
    PolytopeLinker::new(p)?.link(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::CubeVertex;
    use crate::generators::{cube_boundary, glued_cubes};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(label: &str) -> usize {
        CubeVertex::parse(label).unwrap().bits as usize
    }

    #[test]
    fn q5_three_pairs() {
        let p = cube_boundary(5).unwrap();
        let pairs = [(v("00000"), v("11111")), (v("00011"), v("11100")), (v("01010"), v("10101"))];
        let out = link_in_polytope(&p, &pairs).unwrap();
        assert_eq!(out.linkage.paths.len(), 3);
        for (path, &(s, t)) in out.linkage.paths.iter().zip(&pairs) {
            assert_eq!((path[0], *path.last().unwrap()), (s, t));
        }
    }

    #[test]
    fn edge_pairs() {
        let p = cube_boundary(5).unwrap();
        let pairs = [(0, 1), (6, 14), (24, 25)];
        let out = link_in_polytope(&p, &pairs).unwrap();
        assert_eq!(out.branch, "direct");
        assert!(out.linkage.paths.iter().all(|q| q.len() >= 2));
    }

    #[test]
    fn escapes_configuration_df() {
        let p = cube_boundary(5).unwrap();
        let t1 = 0b01111;
        let pairs = [(0, t1), (t1 ^ 1, t1 ^ 2), (t1 ^ 4, t1 ^ 8)];
        let out = link_in_polytope(&p, &pairs).unwrap();
        assert_ne!(out.branch, "direct");
    }

    #[test]
    fn random_pairs_in_glued_cubes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d, n) in [(5, 2), (5, 3), (4, 2), (4, 3)] {
            let p = glued_cubes(d, n).unwrap();
            let linker = PolytopeLinker::new(&p).unwrap();
            let verts = p.vertex_ids();
            let k = (d + 1) / 2;
            for _ in 0..300 {
                let xs: Vec<usize> = verts.choose_multiple(&mut rng, 2 * k).copied().collect();
                let pairs: Vec<(usize, usize)> = xs.chunks(2).map(|c| (c[0], c[1])).collect();
                linker.link(&pairs).unwrap_or_else(|e| panic!("{d} {n} {pairs:?}: {e}"));
            }
        }
    }

    #[test]
    fn strong_avoids_the_spare_vertex() {
        let p = cube_boundary(4).unwrap();
        let pairs = [(v("0000"), v("1111")), (v("1000"), v("0111"))];
        let x = v("0100");
        let l = strong_link_even_helper(&p, &pairs, x);
        assert!(l.paths.iter().all(|q| !q.contains(&x)));
        // A crossed square inside the link of x.
        let out = PolytopeLinker::new(&p).unwrap().strong_link(&[(0, 3), (1, 2)], 4).unwrap();
        assert_eq!(out.branch, "outside");
        assert!(out.linkage.paths.iter().all(|q| !q.contains(&4)));
        let five = cube_boundary(5).unwrap();
        assert!(PolytopeLinker::new(&five).unwrap().strong_link(&pairs, x).is_err());
    }

    fn strong_link_even_helper(p: &PolytopalComplex, pairs: &[(usize, usize)], x: usize) -> Linkage {
        super::super::strong_link_even(p, pairs, x).unwrap()
    }
}
