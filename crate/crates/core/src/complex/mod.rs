//! Polytopal complexes stored as explicit graded face lattices.
//!
//! Vertex ids index a label universe shared by a complex and all of its
//! subcomplexes, so a star or antistar keeps the ids of its parent.

mod json;
mod lemma;

pub use json::ComplexFile;
pub use lemma::{injection_into_antistar, technical_lemma_check, TechnicalReport};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flow::disjoint_ab_paths;
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceHandle {
    pub dim: usize,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct PolytopalComplex {
    labels: Arc<Vec<String>>,
    faces: Vec<Vec<Vec<usize>>>,
    bits: Vec<Vec<FixedBitSet>>,
    lookup: HashMap<FixedBitSet, FaceHandle>,
    down: Vec<Vec<Vec<usize>>>,
    up: Vec<Vec<Vec<usize>>>,
    pure: bool,
}

impl PolytopalComplex {
    /// Builds and fully validates a complex from faces grouped by dimension.
    pub fn from_faces(labels: Vec<String>, faces: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let n = labels.len();
        let mut faces = faces;
        for (dim, layer) in faces.iter_mut().enumerate() {
            for f in layer.iter_mut() {
                f.sort_unstable();
                if f.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidComplex(format!("repeated vertex in a {dim}-face")));
                }
                if let Some(&v) = f.iter().find(|&&v| v >= n) {
                    return Err(Error::ForeignVertex(v));
                }
                if f.is_empty() {
                    return Err(Error::InvalidComplex("empty face listed explicitly".into()));
                }
            }
            layer.sort();
            if layer.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidComplex(format!("duplicate {dim}-face")));
            }
        }
        while faces.last().is_some_and(Vec::is_empty) {
            faces.pop();
        }
        let c = Self::build(Arc::new(labels), faces)?;
        c.validate()?;
        if c.faces_of_dim(0).len() != n {
            return Err(Error::InvalidComplex("every listed vertex must be a 0-face".into()));
        }
        Ok(c)
    }

    /// Builds the cover relation by subset tests between consecutive layers.
    pub(crate) fn build(labels: Arc<Vec<String>>, faces: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let n = labels.len();
        let bits: Vec<Vec<FixedBitSet>> = faces
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|f| {
                        let mut b = FixedBitSet::with_capacity(n);
                        f.iter().for_each(|&v| b.insert(v));
                        b
                    })
                    .collect()
            })
            .collect();
        let mut lookup = HashMap::new();
        for (dim, layer) in bits.iter().enumerate() {
            for (index, b) in layer.iter().enumerate() {
                if lookup.insert(b.clone(), FaceHandle { dim, index }).is_some() {
                    return Err(Error::InvalidComplex(
                        "two faces share a vertex set".into(),
                    ));
                }
            }
        }
        let mut down = vec![Vec::new(); faces.len()];
        let mut up: Vec<Vec<Vec<usize>>> = faces.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for dim in 1..faces.len() {
            down[dim] = bits[dim]
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let covered: Vec<usize> = bits[dim - 1]
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.is_subset(b))
                        .map(|(j, _)| j)
                        .collect();
                    for &j in &covered {
                        up[dim - 1][j].push(i);
                    }
                    covered
                })
                .collect();
        }
        let pure = Self::purity(&faces, &up);
        Ok(PolytopalComplex {
            labels,
            faces,
            bits,
            lookup,
            down,
            up,
            pure,
        })
    }

    fn purity(faces: &[Vec<Vec<usize>>], up: &[Vec<Vec<usize>>]) -> bool {
        let top = faces.len().saturating_sub(1);
        (0..top).all(|d| up[d].iter().all(|u| !u.is_empty()))
    }

    /// Keeps the flagged faces; the flags must describe a subcomplex.
    fn filtered(&self, keep: &[Vec<bool>]) -> PolytopalComplex {
        let remap: Vec<Vec<usize>> = keep
            .iter()
            .map(|layer| {
                let mut next = 0;
                layer
                    .iter()
                    .map(|&k| {
                        if k {
                            next += 1;
                            next - 1
                        } else {
                            usize::MAX
                        }
                    })
                    .collect()
            })
            .collect();
        let mut top = keep.len();
        while top > 0 && !keep[top - 1].iter().any(|&k| k) {
            top -= 1;
        }
        let mut faces = Vec::with_capacity(top);
        let mut bits = Vec::with_capacity(top);
        let mut down = Vec::with_capacity(top);
        let mut up = Vec::with_capacity(top);
        let mut lookup = HashMap::new();
        for dim in 0..top {
            let mut fl = Vec::new();
            let mut bl = Vec::new();
            let mut dl = Vec::new();
            let mut ul = Vec::new();
            for i in (0..self.faces[dim].len()).filter(|&i| keep[dim][i]) {
                lookup.insert(self.bits[dim][i].clone(), FaceHandle { dim, index: fl.len() });
                fl.push(self.faces[dim][i].clone());
                bl.push(self.bits[dim][i].clone());
                dl.push(if dim == 0 {
                    Vec::new()
                } else {
                    self.down[dim][i].iter().map(|&j| remap[dim - 1][j]).collect()
                });
                ul.push(if dim + 1 < top {
                    self.up[dim][i]
                        .iter()
                        .filter(|&&j| keep[dim + 1][j])
                        .map(|&j| remap[dim + 1][j])
                        .collect()
                } else {
                    Vec::new()
                });
            }
            faces.push(fl);
            bits.push(bl);
            down.push(dl);
            up.push(ul);
        }
        let pure = Self::purity(&faces, &up);
        PolytopalComplex {
            labels: Arc::clone(&self.labels),
            faces,
            bits,
            lookup,
            down,
            up,
            pure,
        }
    }

    fn keep_where(&self, pred: impl Fn(&FixedBitSet) -> bool) -> Vec<Vec<bool>> {
        self.bits
            .iter()
            .map(|layer| layer.iter().map(&pred).collect())
            .collect()
    }

    /// Re-checks the lattice invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidComplex(m));
        let Some(vertices) = self.faces.first() else {
            return Ok(());
        };
        if vertices.iter().any(|f| f.len() != 1) {
            return bad("0-faces must be single vertices".into());
        }
        for dim in 1..self.faces.len() {
            for (i, f) in self.faces[dim].iter().enumerate() {
                if f.len() < dim + 1 {
                    return bad(format!("{dim}-face with only {} vertices", f.len()));
                }
                if dim == 1 && f.len() != 2 {
                    return bad("edge with more than 2 vertices".into());
                }
                if f.iter().any(|&v| !self.lookup.contains_key(&self.singleton(v))) {
                    return bad(format!("{dim}-face uses a vertex that is not a 0-face"));
                }
                let mut union = FixedBitSet::with_capacity(self.labels.len());
                for &j in &self.down[dim][i] {
                    union.union_with(&self.bits[dim - 1][j]);
                }
                if union != self.bits[dim][i] {
                    return bad(format!("{dim}-face {f:?} is not the union of its facets"));
                }
                // Diamond property: every interval of length two has two middle elements.
                let mut count: HashMap<usize, usize> = HashMap::new();
                for &j in &self.down[dim][i] {
                    if dim >= 2 {
                        for &g in &self.down[dim - 1][j] {
                            *count.entry(g).or_default() += 1;
                        }
                    }
                }
                if count.values().any(|&c| c != 2) {
                    return bad(format!("{dim}-face {f:?} violates the diamond property"));
                }
            }
        }
        let all: Vec<&FixedBitSet> = self.bits.iter().flatten().collect();
        for (a, x) in all.iter().enumerate() {
            for y in &all[a + 1..] {
                let mut meet = (*x).clone();
                meet.intersect_with(y);
                if !meet.is_clear() && !self.lookup.contains_key(&meet) {
                    return bad("face intersection is not a face".into());
                }
            }
        }
        Ok(())
    }

    fn singleton(&self, v: usize) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.labels.len());
        b.insert(v);
        b
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn universe_size(&self) -> usize {
        self.labels.len()
    }

    /// Dimension of the complex; `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.faces.len().checked_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.faces.iter().map(Vec::len).collect()
    }

    pub fn vertex_ids(&self) -> Vec<usize> {
        self.faces.first().map_or(Vec::new(), |l| l.iter().map(|f| f[0]).collect())
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        v < self.labels.len() && self.lookup.contains_key(&self.singleton(v))
    }

    pub fn faces_of_dim(&self, dim: usize) -> &[Vec<usize>] {
        self.faces.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn handles_of_dim(&self, dim: usize) -> impl Iterator<Item = FaceHandle> {
        (0..self.faces_of_dim(dim).len()).map(move |index| FaceHandle { dim, index })
    }

    pub fn face(&self, h: FaceHandle) -> Result<&[usize]> {
        self.faces
            .get(h.dim)
            .and_then(|l| l.get(h.index))
            .map(Vec::as_slice)
            .ok_or(Error::InvalidHandle {
                dim: h.dim,
                index: h.index,
            })
    }

    pub(crate) fn face_bits(&self, h: FaceHandle) -> &FixedBitSet {
        &self.bits[h.dim][h.index]
    }

    pub fn handle_of(&self, vertices: &[usize]) -> Option<FaceHandle> {
        if vertices.iter().any(|&v| v >= self.labels.len()) {
            return None;
        }
        let mut b = FixedBitSet::with_capacity(self.labels.len());
        vertices.iter().for_each(|&v| b.insert(v));
        self.lookup.get(&b).copied()
    }

    pub fn vertex_handle(&self, v: usize) -> Result<FaceHandle> {
        self.handle_of(&[v]).ok_or(Error::ForeignVertex(v))
    }

    /// Faces covered by `h` (one dimension lower).
    pub fn subfaces(&self, h: FaceHandle) -> Vec<FaceHandle> {
        if h.dim == 0 {
            return Vec::new();
        }
        self.down[h.dim][h.index]
            .iter()
            .map(|&index| FaceHandle { dim: h.dim - 1, index })
            .collect()
    }

    /// Faces covering `h` (one dimension higher).
    pub fn superfaces(&self, h: FaceHandle) -> Vec<FaceHandle> {
        self.up[h.dim][h.index]
            .iter()
            .map(|&index| FaceHandle { dim: h.dim + 1, index })
            .collect()
    }

    /// Maximal faces; for a pure complex, the top-dimensional ones.
    pub fn facets(&self) -> Vec<FaceHandle> {
        let top = self.faces.len();
        (0..top)
            .flat_map(|dim| {
                (0..self.faces[dim].len())
                    .filter(move |&i| dim + 1 == top || self.up[dim][i].is_empty())
                    .map(move |index| FaceHandle { dim, index })
            })
            .collect()
    }

    fn check(&self, h: FaceHandle) -> Result<()> {
        self.face(h).map(|_| ())
    }

    /// All faces containing `f`, and their faces.
    pub fn star(&self, f: FaceHandle) -> Result<PolytopalComplex> {
        self.check(f)?;
        let mut keep: Vec<Vec<bool>> = self.faces.iter().map(|l| vec![false; l.len()]).collect();
        let mut containing = vec![f];
        let mut queue = VecDeque::from([f]);
        keep[f.dim][f.index] = true;
        while let Some(h) = queue.pop_front() {
            for g in self.superfaces(h) {
                if !keep[g.dim][g.index] {
                    keep[g.dim][g.index] = true;
                    containing.push(g);
                    queue.push_back(g);
                }
            }
        }
        let mut stack = containing;
        while let Some(h) = stack.pop() {
            for g in self.subfaces(h) {
                if !keep[g.dim][g.index] {
                    keep[g.dim][g.index] = true;
                    stack.push(g);
                }
            }
        }
        Ok(self.filtered(&keep))
    }

    /// Faces disjoint from `f`.
    pub fn antistar(&self, f: FaceHandle) -> Result<PolytopalComplex> {
        self.check(f)?;
        let fb = self.face_bits(f).clone();
        Ok(self.filtered(&self.keep_where(|b| b.is_disjoint(&fb))))
    }

    /// Faces of the star of `f` disjoint from `f`.
    pub fn link(&self, f: FaceHandle) -> Result<PolytopalComplex> {
        let fb = self.face_bits(f).clone();
        let star = self.star(f)?;
        let keep = star.keep_where(|b| b.is_disjoint(&fb));
        Ok(star.filtered(&keep))
    }

    /// Faces all of whose vertices lie in `xs`.
    pub fn induced_subcomplex(&self, xs: &[usize]) -> Result<PolytopalComplex> {
        let mut allowed = FixedBitSet::with_capacity(self.labels.len());
        for &v in xs {
            if !self.contains_vertex(v) {
                return Err(Error::ForeignVertex(v));
            }
            allowed.insert(v);
        }
        Ok(self.filtered(&self.keep_where(|b| b.is_subset(&allowed))))
    }

    /// The complex without the given vertices: `C - X`.
    pub fn without_vertices(&self, xs: &[usize]) -> Result<PolytopalComplex> {
        let mut removed = FixedBitSet::with_capacity(self.labels.len());
        for &v in xs {
            if v >= self.labels.len() {
                return Err(Error::ForeignVertex(v));
            }
            removed.insert(v);
        }
        Ok(self.filtered(&self.keep_where(|b| b.is_disjoint(&removed))))
    }

    /// Graph of the complex on the full label universe; ids outside the
    /// complex are isolated.
    pub fn universe_graph(&self) -> Graph {
        let edges = self.faces_of_dim(1).iter().map(|e| (e[0], e[1]));
        Graph::from_edges(self.labels.len(), edges).expect("edges use universe ids")
    }

    /// Graph on the vertices of the complex; vertex `i` is `ids[i]`.
    pub fn graph(&self) -> (Graph, Vec<usize>) {
        let ids = self.vertex_ids();
        (self.universe_graph().induced(&ids), ids)
    }

    fn dual_adjacency(&self, top: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.faces[top].len()];
        if top == 0 {
            return adj;
        }
        for ups in &self.up[top - 1] {
            for (a, &x) in ups.iter().enumerate() {
                for &y in &ups[a + 1..] {
                    adj[x].push(y);
                    adj[y].push(x);
                }
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    /// Whether the facet-ridge dual graph is connected.
    pub fn is_strongly_connected(&self) -> Result<bool> {
        if !self.pure {
            return Err(Error::NotPure);
        }
        let top = self.dim().ok_or(Error::EmptySet)?;
        let adj = self.dual_adjacency(top);
        let mut seen = vec![false; adj.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        Ok(seen.iter().all(|&s| s))
    }

    /// Shortest facet-ridge path from `from` to `to` avoiding the facets in
    /// `avoid`; among shortest paths the lexicographically least by facet index.
    pub fn facet_ridge_path(
        &self,
        from: FaceHandle,
        to: FaceHandle,
        avoid: &[FaceHandle],
    ) -> Result<Vec<FaceHandle>> {
        self.check(from)?;
        self.check(to)?;
        let top = self.dim().ok_or(Error::EmptySet)?;
        if from.dim != top || to.dim != top {
            return Err(Error::InvalidProblem("facet_ridge_path needs facets".into()));
        }
        let adj = self.dual_adjacency(top);
        let mut blocked = vec![false; adj.len()];
        for a in avoid {
            if a.dim == top && a.index < blocked.len() {
                blocked[a.index] = true;
            }
        }
        if blocked[from.index] || blocked[to.index] {
            return Err(Error::NoPath);
        }
        let mut dist = vec![usize::MAX; adj.len()];
        dist[to.index] = 0;
        let mut queue = VecDeque::from([to.index]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !blocked[w] && dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if dist[from.index] == usize::MAX {
            return Err(Error::NoPath);
        }
        let mut path = vec![from];
        let mut cur = from.index;
        while cur != to.index {
            cur = *adj[cur]
                .iter()
                .find(|&&w| dist[w] == dist[cur] - 1)
                .expect("BFS layer");
            path.push(FaceHandle { dim: top, index: cur });
        }
        Ok(path)
    }
}

/// Vertex connectivity by unit-capacity max-flow.
pub fn graph_vertex_connectivity(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n < 2 {
        return Err(Error::TrivialGraph("connectivity needs at least two vertices"));
    }
    if !g.is_connected() {
        return Ok(0);
    }
    let mut best = (0..n).map(|v| g.degree(v)).min().unwrap();
    let adj = g.adjacency();
    let mut i = 0;
    while i < n && i <= best {
        for j in 0..n {
            if j == i || g.has_edge(i, j) {
                continue;
            }
            let local = disjoint_ab_paths(
                adj,
                &|v| v != i && v != j,
                g.neighbors(i),
                g.neighbors(j),
                best,
            )
            .len();
            best = best.min(local);
        }
        i += 1;
    }
    Ok(best)
}

/// `k`-connected in the usual sense: more than `k` vertices and no separator
/// of fewer than `k` vertices.
pub fn is_k_connected(g: &Graph, k: usize) -> bool {
    if g.n() <= k {
        return false;
    }
    if k == 0 || g.n() == 1 {
        return true;
    }
    graph_vertex_connectivity(g).is_ok_and(|c| c >= k)
}
