//! Bitmask view of a pure cubical complex: faces by dimension, facet-ridge
//! incidence, and the cube operations the constructions need.

use crate::complex::PolytopalComplex;
use crate::error::{contract, Error, Result};
use crate::graph::{bit, bits, mask_of, mask_path, Mask};

#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub adj: Vec<Mask>,
    pub verts: Mask,
    /// Dimension of the facets.
    pub top: usize,
    pub faces: Vec<Vec<Mask>>,
    pub facet_ridges: Vec<Vec<usize>>,
    pub ridge_facets: Vec<Vec<usize>>,
}

impl Frame {
    pub fn new(c: &PolytopalComplex) -> Result<Self> {
        if c.universe_size() > 128 {
            return Err(Error::Unsupported("constructions need at most 128 vertices".into()));
        }
        if !c.is_pure() {
            return Err(Error::NotPure);
        }
        let top = c.dim().ok_or(Error::EmptySet)?;
        if top < 2 {
            return Err(Error::DimensionOutOfRange(top + 1, ">= 3"));
        }
        let faces: Vec<Vec<Mask>> = (0..=top)
            .map(|k| {
                c.faces_of_dim(k)
                    .iter()
                    .map(|f| mask_of(f.iter().copied()))
                    .collect()
            })
            .collect();
        let mut adj = vec![0; c.universe_size()];
        for e in &faces[1] {
            let mut vs = bits(*e);
            let (u, w) = (vs.next().unwrap(), vs.next().unwrap());
            adj[u] |= bit(w);
            adj[w] |= bit(u);
        }
        let verts = faces[0].iter().fold(0, |m, v| m | v);
        let mut facet_ridges = vec![Vec::new(); faces[top].len()];
        let mut ridge_facets = vec![Vec::new(); faces[top - 1].len()];
        for (fi, &f) in faces[top].iter().enumerate() {
            for (ri, &r) in faces[top - 1].iter().enumerate() {
                if r & !f == 0 {
                    facet_ridges[fi].push(ri);
                    ridge_facets[ri].push(fi);
                }
            }
        }
        Ok(Frame {
            adj,
            verts,
            top,
            faces,
            facet_ridges,
            ridge_facets,
        })
    }

    pub fn facets(&self) -> &[Mask] {
        &self.faces[self.top]
    }

    pub fn facet(&self, i: usize) -> Mask {
        self.faces[self.top][i]
    }

    pub fn ridge(&self, i: usize) -> Mask {
        self.faces[self.top - 1][i]
    }

    /// Ridges of facet `f` containing all of `inside` and none of `outside`,
    /// in index order.
    pub fn ridges_of(&self, f: usize, inside: Mask, outside: Mask) -> impl Iterator<Item = usize> + '_ {
        self.facet_ridges[f]
            .iter()
            .copied()
            .filter(move |&r| self.ridge(r) & inside == inside && self.ridge(r) & outside == 0)
    }

    /// The ridge of facet `f` disjoint from its ridge `r`.
    pub fn opposite_ridge(&self, f: usize, r: usize) -> Result<usize> {
        self.ridges_of(f, 0, self.ridge(r))
            .next()
            .ok_or_else(|| contract("frame.opposite_ridge", "facet is not a cube"))
    }

    /// The facet other than `f` on ridge `r`, if the complex has one.
    pub fn other_facet(&self, r: usize, f: usize) -> Option<usize> {
        self.ridge_facets[r].iter().copied().find(|&g| g != f)
    }

    /// Faces of dimension `k` inside the face `q`.
    pub fn faces_in(&self, q: Mask, k: usize) -> impl Iterator<Item = Mask> + '_ {
        self.faces[k].iter().copied().filter(move |&x| x & !q == 0)
    }

    /// The vertex of the `k`-face `q` opposite `v`.
    pub fn opposite_vertex(&self, q: Mask, k: usize, v: usize) -> Result<usize> {
        if k == 0 {
            return Ok(v);
        }
        let near = self
            .faces_in(q, k - 1)
            .filter(|&x| x & bit(v) != 0)
            .fold(0, |m, x| m | x);
        let far = q & !near;
        if far.count_ones() != 1 {
            return Err(contract("frame.opposite_vertex", "face is not a cube"));
        }
        Ok(far.trailing_zeros() as usize)
    }

    /// The facet-level version of [`Frame::opposite_vertex`].
    pub fn facet_opposite(&self, f: usize, v: usize) -> Result<usize> {
        let near = self
            .ridges_of(f, bit(v), 0)
            .fold(0, |m, r| m | self.ridge(r));
        let far = self.facet(f) & !near;
        if far.count_ones() != 1 {
            return Err(contract("frame.facet_opposite", "facet is not a cube"));
        }
        Ok(far.trailing_zeros() as usize)
    }

    /// `v` itself if it lies in `target`, else its unique neighbour there.
    pub fn project(&self, v: usize, target: Mask) -> Result<usize> {
        if target & bit(v) != 0 {
            return Ok(v);
        }
        let hit = self.adj[v] & target;
        if hit.count_ones() != 1 {
            return Err(contract("frame.project", format!("vertex {v} has {} neighbours in the target", hit.count_ones())));
        }
        Ok(hit.trailing_zeros() as usize)
    }

    pub fn project_set(&self, vs: Mask, target: Mask) -> Result<Mask> {
        bits(vs).try_fold(0, |m, v| Ok(m | bit(self.project(v, target)?)))
    }

    pub fn distance_in(&self, region: Mask, u: usize, v: usize) -> Option<usize> {
        mask_path(&self.adj, region, u, v).map(|p| p.len() - 1)
    }

    /// Whether `a, b, c, e` run around a square of the complex in this order.
    pub fn cyclic_in_square(&self, a: usize, b: usize, c: usize, e: usize) -> bool {
        let four = bit(a) | bit(b) | bit(c) | bit(e);
        let adj = |x: usize, y: usize| self.adj[x] & bit(y) != 0;
        four.count_ones() == 4
            && adj(a, b)
            && adj(b, c)
            && adj(c, e)
            && adj(e, a)
            && self.faces[2].iter().any(|&q| q == four)
    }

    /// Pairs of opposite ridges of facet `f`, each as `(r, r^o)` with
    /// `r < r^o`, ordered by `r`.
    pub fn ridge_pairs(&self, f: usize) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for &r in &self.facet_ridges[f] {
            let o = self.opposite_ridge(f, r)?;
            if r < o {
                out.push((r, o));
            }
        }
        Ok(out)
    }

    /// The first ridge pair of `f` not associated with `z`: no vertex of `z`
    /// has its projection across the pair in `z`.
    pub fn free_ridge_pair(&self, f: usize, z: Mask) -> Result<Option<(usize, usize)>> {
        for (r, o) in self.ridge_pairs(f)? {
            let across = self.project_set(z & self.ridge(r), self.ridge(o))?;
            if across & z == 0 {
                return Ok(Some((r, o)));
            }
        }
        Ok(None)
    }
}

/// The injection of `V(F) \ {s^o}` into the antistar of `F` in the star of
/// `s`, as a table indexed by vertex. Ridges through `s` are taken in index
/// order.
pub(crate) fn star_injection(star: &Frame, f: usize, s: usize) -> Result<Vec<Option<usize>>> {
    let mut table = vec![None; star.adj.len()];
    let mut covered: Mask = 0;
    for r in star.ridges_of(f, bit(s), 0).collect::<Vec<_>>() {
        let j = star
            .other_facet(r, f)
            .ok_or_else(|| contract("injection", "ridge through the center lies in one facet"))?;
        let ro = star.opposite_ridge(j, r)?;
        for v in bits(star.ridge(r) & !covered) {
            table[v] = Some(star.project(v, star.ridge(ro))?);
        }
        covered |= star.ridge(r);
    }
    Ok(table)
}
