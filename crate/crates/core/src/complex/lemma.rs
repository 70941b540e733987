use serde::Serialize;
use std::collections::BTreeMap;

use super::{is_k_connected, FaceHandle, PolytopalComplex};
use crate::error::{Error, Result};

fn facet_of(c: &PolytopalComplex, f: FaceHandle) -> Result<&[usize]> {
    let verts = c.face(f)?;
    if Some(f.dim) != c.dim() {
        return Err(Error::InvalidProblem(format!("face ({}, {}) is not a facet", f.dim, f.index)));
    }
    Ok(verts)
}

/// The map `f` from `V(F) \ {s^o}` into `V(S) \ V(F)`: a vertex first met in
/// the `j`-th ridge of `F` through `s` goes to its neighbour in the ridge of
/// `J_j` opposite that ridge, where `J_j` is the other facet of `S` on it.
/// Ridges are taken in face-index order.
pub fn injection_into_antistar(
    star: &PolytopalComplex,
    f: FaceHandle,
    s: usize,
) -> Result<BTreeMap<usize, usize>> {
    let fverts = facet_of(star, f)?;
    if !fverts.contains(&s) {
        return Err(Error::VertexNotInFace(s as u32));
    }
    let ridges: Vec<FaceHandle> = star
        .subfaces(f)
        .into_iter()
        .filter(|&r| star.face_bits(r).contains(s))
        .collect();
    let within_ridges = |v: usize| ridges.iter().position(|&r| star.face_bits(r).contains(v));
    let far: Vec<usize> = fverts.iter().copied().filter(|&v| within_ridges(v).is_none()).collect();
    if far.len() != 1 {
        return Err(Error::InvalidComplex("facet is not a combinatorial cube".into()));
    }
    let mut targets = Vec::with_capacity(ridges.len());
    for &r in &ridges {
        let others: Vec<FaceHandle> = star.superfaces(r).into_iter().filter(|&j| j != f).collect();
        let [j] = others[..] else {
            return Err(Error::InvalidComplex("ridge through the center is not in two facets".into()));
        };
        let opposite: Vec<FaceHandle> = star
            .subfaces(j)
            .into_iter()
            .filter(|&q| star.face_bits(q).is_disjoint(star.face_bits(r)))
            .collect();
        let [q] = opposite[..] else {
            return Err(Error::InvalidComplex("facet is not a combinatorial cube".into()));
        };
        targets.push(q);
    }
    let g = star.universe_graph();
    let mut map = BTreeMap::new();
    for &v in fverts.iter().filter(|&&v| v != far[0]) {
        let j = within_ridges(v).unwrap();
        let q = star.face_bits(targets[j]);
        let hits: Vec<usize> = g.neighbors(v).iter().copied().filter(|&w| q.contains(w)).collect();
        let [w] = hits[..] else {
            return Err(Error::InvalidComplex("projection between opposite ridges is not unique".into()));
        };
        map.insert(v, w);
    }
    Ok(map)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TechnicalReport {
    /// The star of `s2` in `S1` is a strongly connected `(d-1)`-complex.
    pub strongly_connected: bool,
    /// With more than two facets, facets other than `F12` are joined by
    /// facet-ridge paths avoiding `F12`.
    pub paths_avoid_f12: bool,
    /// The graph of `S12 - (V(F1) u V(F12))` is `(d-3)`-connected.
    pub remainder_connected: bool,
    pub s12_facets: usize,
}

impl TechnicalReport {
    pub fn holds(&self) -> bool {
        self.strongly_connected && self.paths_avoid_f12 && self.remainder_connected
    }
}

/// Checks the three structural claims about `S12`, the star of `s2` inside
/// the star `S1` of `s1`, relative to facets `F1` (through `s1`, not `s2`)
/// and `F12` (through both).
pub fn technical_lemma_check(
    s1_star: &PolytopalComplex,
    s1: usize,
    s2: usize,
    f1: FaceHandle,
    f12: FaceHandle,
) -> Result<TechnicalReport> {
    let top = s1_star.dim().ok_or(Error::EmptySet)?;
    let d = top + 1;
    if d < 4 {
        return Err(Error::DimensionOutOfRange(d, ">= 4"));
    }
    let v1 = facet_of(s1_star, f1)?;
    let v12 = facet_of(s1_star, f12)?;
    if !v1.contains(&s1) || v1.contains(&s2) || !v12.contains(&s1) || !v12.contains(&s2) {
        return Err(Error::InvalidProblem(
            "need s1 in F1, s2 not in F1, and s1, s2 in F12".into(),
        ));
    }
    if s1_star.facets().iter().any(|&g| !s1_star.face_bits(g).contains(s1)) {
        return Err(Error::InvalidProblem("S1 is not the star of s1".into()));
    }
    let s12 = s1_star.star(s1_star.vertex_handle(s2)?)?;
    let strongly_connected = s12.dim() == Some(top) && s12.is_strongly_connected()?;
    let facets = s12.facets();
    let f12_here = s12.handle_of(v12).ok_or_else(|| Error::InvalidProblem("F12 not in S12".into()))?;
    let mut paths_avoid_f12 = true;
    if facets.len() > 2 {
        let rest: Vec<FaceHandle> = facets.iter().copied().filter(|&g| g != f12_here).collect();
        'outer: for (a, &x) in rest.iter().enumerate() {
            for &y in &rest[a + 1..] {
                if s12.facet_ridge_path(x, y, &[f12_here]).is_err() {
                    paths_avoid_f12 = false;
                    break 'outer;
                }
            }
        }
    }
    let mut remainder_connected = true;
    if facets.len() > 1 {
        let keep: Vec<usize> = s12
            .vertex_ids()
            .into_iter()
            .filter(|v| !v1.contains(v) && !v12.contains(v))
            .collect();
        let a12 = s12.induced_subcomplex(&keep)?;
        let (g, _) = a12.graph();
        remainder_connected = is_k_connected(&g, d - 3);
    }
    Ok(TechnicalReport {
        strongly_connected,
        paths_avoid_f12,
        remainder_connected,
        s12_facets: facets.len(),
    })
}
