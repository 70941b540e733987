//! Bit-pattern model of the d-cube.
//!
//! A vertex of `Q_d` is a `d`-bit pattern; coordinate `i` is bit `i`. Labels
//! list the coordinates starting from `x_0`, so `"1100"` has `x_0 = x_1 = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const MAX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeVertex {
    pub dim: u8,
    pub bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubeFace {
    pub dim: u8,
    pub fixed_mask: u32,
    pub fixed_values: u32,
}

/// The facet pair `{x_coord = 0, x_coord = 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OppositeFacetPair {
    pub dim: u8,
    pub coord: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FacetSide {
    Zero,
    One,
}

fn low_mask(dim: u8) -> u32 {
    if dim as usize >= 32 {
        u32::MAX
    } else {
        (1u32 << dim) - 1
    }
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::DimensionOutOfRange(d, "1..=16"))
    }
}

impl CubeVertex {
    pub fn new(dim: usize, bits: u32) -> Result<Self> {
        check_dim(dim)?;
        if bits & !low_mask(dim as u8) != 0 {
            return Err(Error::InvalidProblem(format!(
                "pattern {bits:#b} uses more than {dim} coordinates"
            )));
        }
        Ok(CubeVertex { dim: dim as u8, bits })
    }

    /// Parses a label such as `"01101"` (`x_0` first).
    pub fn parse(label: &str) -> Result<Self> {
        let mut bits = 0u32;
        for (i, c) in label.chars().enumerate() {
            match c {
                '0' => {}
                '1' if i < 32 => bits |= 1 << i,
                _ => return Err(Error::InvalidProblem(format!("bad vertex label {label:?}"))),
            }
        }
        CubeVertex::new(label.len(), bits)
    }

    pub fn label(&self) -> String {
        (0..self.dim as usize)
            .map(|i| if self.coord(i) { '1' } else { '0' })
            .collect()
    }

    pub fn coord(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    /// The antipodal vertex `v^o`.
    pub fn opposite(&self) -> CubeVertex {
        CubeVertex {
            dim: self.dim,
            bits: !self.bits & low_mask(self.dim),
        }
    }

    pub fn is_adjacent(&self, other: &CubeVertex) -> bool {
        self.dim == other.dim && (self.bits ^ other.bits).count_ones() == 1
    }
}

impl CubeFace {
    pub fn new(dim: usize, fixed_mask: u32, fixed_values: u32) -> Result<Self> {
        check_dim(dim)?;
        let low = low_mask(dim as u8);
        if fixed_mask & !low != 0 || fixed_values & !fixed_mask != 0 {
            return Err(Error::InvalidProblem(format!(
                "bad face mask {fixed_mask:#b} / values {fixed_values:#b}"
            )));
        }
        Ok(CubeFace {
            dim: dim as u8,
            fixed_mask,
            fixed_values,
        })
    }

    /// The facet `x_coord = side`.
    pub fn facet(pair: OppositeFacetPair, side: FacetSide) -> Self {
        let m = 1u32 << pair.coord;
        CubeFace {
            dim: pair.dim,
            fixed_mask: m,
            fixed_values: if side == FacetSide::One { m } else { 0 },
        }
    }

    pub fn whole(dim: usize) -> Result<Self> {
        CubeFace::new(dim, 0, 0)
    }

    pub fn face_dim(&self) -> usize {
        self.dim as usize - self.fixed_mask.count_ones() as usize
    }

    pub fn free_mask(&self) -> u32 {
        !self.fixed_mask & low_mask(self.dim)
    }

    pub fn contains(&self, v: &CubeVertex) -> bool {
        v.dim == self.dim && v.bits & self.fixed_mask == self.fixed_values
    }

    pub fn contains_face(&self, other: &CubeFace) -> bool {
        other.dim == self.dim
            && self.fixed_mask & !other.fixed_mask == 0
            && other.fixed_values & self.fixed_mask == self.fixed_values
    }

    pub fn vertices(&self) -> impl Iterator<Item = CubeVertex> + '_ {
        let free = self.free_mask();
        // Enumerate submasks of `free` in increasing order.
        let mut sub = Some(0u32);
        std::iter::from_fn(move || {
            let s = sub?;
            sub = if s == free { None } else { Some((s | !free).wrapping_add(1) & free) };
            Some(CubeVertex {
                dim: self.dim,
                bits: self.fixed_values | s,
            })
        })
    }
}

pub fn cube_graph(d: usize) -> Result<Graph> {
    check_dim(d)?;
    let n = 1usize << d;
    Graph::from_edges(
        n,
        (0..n).flat_map(|v| (0..d).map(move |i| (v, v ^ (1 << i))).filter(|&(u, w)| u < w)),
    )
}

pub fn distance(u: &CubeVertex, v: &CubeVertex) -> Result<usize> {
    if u.dim != v.dim {
        return Err(Error::DimensionMismatch(u.dim as usize, v.dim as usize));
    }
    Ok((u.bits ^ v.bits).count_ones() as usize)
}

/// The vertex of `f` at distance `dim f` from `v`.
pub fn opposite_in_face(v: &CubeVertex, f: &CubeFace) -> Result<CubeVertex> {
    if v.dim != f.dim {
        return Err(Error::DimensionMismatch(v.dim as usize, f.dim as usize));
    }
    if !f.contains(v) {
        return Err(Error::VertexNotInFace(v.bits));
    }
    Ok(CubeVertex {
        dim: v.dim,
        bits: v.bits ^ f.free_mask(),
    })
}

pub fn min_face(u: &CubeVertex, v: &CubeVertex) -> Result<CubeFace> {
    if u.dim != v.dim {
        return Err(Error::DimensionMismatch(u.dim as usize, v.dim as usize));
    }
    let mask = !(u.bits ^ v.bits) & low_mask(u.dim);
    Ok(CubeFace {
        dim: u.dim,
        fixed_mask: mask,
        fixed_values: u.bits & mask,
    })
}

pub fn project(x: &CubeVertex, pair: OppositeFacetPair, target: FacetSide) -> Result<CubeVertex> {
    if x.dim != pair.dim {
        return Err(Error::DimensionMismatch(x.dim as usize, pair.dim as usize));
    }
    let want = target == FacetSide::One;
    Ok(if x.coord(pair.coord as usize) == want {
        *x
    } else {
        CubeVertex {
            dim: x.dim,
            bits: x.bits ^ (1 << pair.coord),
        }
    })
}

/// Projects a face lying in the facet opposite `target` onto `target`.
pub fn project_face(j: &CubeFace, pair: OppositeFacetPair, target: FacetSide) -> Result<CubeFace> {
    if j.dim != pair.dim {
        return Err(Error::DimensionMismatch(j.dim as usize, pair.dim as usize));
    }
    let other = match target {
        FacetSide::One => FacetSide::Zero,
        FacetSide::Zero => FacetSide::One,
    };
    if !CubeFace::facet(pair, other).contains_face(j) {
        return Err(Error::FaceNotInSource);
    }
    Ok(CubeFace {
        dim: j.dim,
        fixed_mask: j.fixed_mask,
        fixed_values: j.fixed_values ^ (1 << pair.coord),
    })
}

/// Coordinates `i` such that some `z` in `zs` has its `x_i`-flip in `zs`.
pub fn associated_pairs(zs: &[CubeVertex]) -> Result<Vec<OppositeFacetPair>> {
    let first = zs.first().ok_or(Error::EmptySet)?;
    if let Some(z) = zs.iter().find(|z| z.dim != first.dim) {
        return Err(Error::DimensionMismatch(first.dim as usize, z.dim as usize));
    }
    let mut sorted: Vec<u32> = zs.iter().map(|z| z.bits).collect();
    sorted.sort_unstable();
    let flips = associated_mask(&sorted);
    Ok((0..first.dim)
        .filter(|&i| flips >> i & 1 == 1)
        .map(|coord| OppositeFacetPair { dim: first.dim, coord })
        .collect())
}

/// Bitmask of associated coordinates for a sorted vertex list.
pub(crate) fn associated_mask(sorted: &[u32]) -> u32 {
    let mut flips = 0u32;
    for (a, &x) in sorted.iter().enumerate() {
        for &y in &sorted[a + 1..] {
            let diff = x ^ y;
            if diff.is_power_of_two() {
                flips |= diff;
            }
        }
    }
    flips
}

/// The least coordinate pair not associated with `zs`.
pub fn free_pair(zs: &[CubeVertex]) -> Result<Option<OppositeFacetPair>> {
    let first = zs.first().ok_or(Error::EmptySet)?;
    let assoc = associated_pairs(zs)?;
    Ok((0..first.dim)
        .find(|&c| !assoc.iter().any(|p| p.coord == c))
        .map(|coord| OppositeFacetPair { dim: first.dim, coord }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(label: &str) -> CubeVertex {
        CubeVertex::parse(label).unwrap()
    }

    #[test]
    fn graph_counts() {
        let g1 = cube_graph(1).unwrap();
        assert_eq!((g1.n(), g1.edge_count()), (2, 1));
        let g3 = cube_graph(3).unwrap();
        assert_eq!((g3.n(), g3.edge_count()), (8, 12));
        assert!((0..8).all(|u| g3.degree(u) == 3));
        assert_eq!(cube_graph(5).unwrap().edge_count(), 80);
        assert!(cube_graph(0).is_err() && cube_graph(17).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(distance(&v("0000"), &v("1111")).unwrap(), 4);
        assert_eq!(distance(&v("000"), &v("000")).unwrap(), 0);
        assert_eq!(distance(&v("01101"), &v("01011")).unwrap(), 2);
        assert!(distance(&v("01"), &v("011")).is_err());
    }

    #[test]
    fn opposites_in_faces() {
        let whole = CubeFace::whole(3).unwrap();
        assert_eq!(opposite_in_face(&v("000"), &whole).unwrap(), v("111"));
        let x2 = CubeFace::new(3, 0b100, 0).unwrap();
        assert_eq!(opposite_in_face(&v("000"), &x2).unwrap(), v("110"));
        let x0 = CubeFace::new(4, 1, 1).unwrap();
        let o = opposite_in_face(&v("1010"), &x0).unwrap();
        assert_eq!(o, v("1101"));
        assert_eq!(min_face(&v("1010"), &o).unwrap(), x0);
        assert!(opposite_in_face(&v("0100"), &x0).is_err());
    }

    #[test]
    fn minimal_faces() {
        let f = min_face(&v("000"), &v("000")).unwrap();
        assert_eq!(f.face_dim(), 0);
        assert_eq!(min_face(&v("000"), &v("111")).unwrap(), CubeFace::whole(3).unwrap());
        let f = min_face(&v("1010"), &v("0110")).unwrap();
        assert_eq!(f, CubeFace::new(4, 0b1100, 0b0100).unwrap());
        assert_eq!(f.face_dim(), 2);
    }

    #[test]
    fn projections() {
        let p = OppositeFacetPair { dim: 3, coord: 0 };
        assert_eq!(project(&v("000"), p, FacetSide::One).unwrap(), v("100"));
        assert_eq!(project(&v("100"), p, FacetSide::One).unwrap(), v("100"));
        let edge = CubeFace::new(3, 0b101, 0).unwrap();
        let img = project_face(&edge, p, FacetSide::One).unwrap();
        let got: Vec<_> = img.vertices().map(|x| x.label()).collect();
        assert_eq!(got, ["100", "110"]);
        assert!(project_face(&img, p, FacetSide::One).is_err());
    }

    #[test]
    fn projection_bijective_between_facets() {
        for coord in 0..4 {
            let p = OppositeFacetPair { dim: 4, coord };
            let src = CubeFace::facet(p, FacetSide::Zero);
            let mut seen = std::collections::HashSet::new();
            for x in src.vertices() {
                let y = project(&x, p, FacetSide::One).unwrap();
                assert!(CubeFace::facet(p, FacetSide::One).contains(&y));
                assert!(seen.insert(y));
                assert_eq!(project(&y, p, FacetSide::Zero).unwrap(), x);
            }
            assert_eq!(seen.len(), 8);
        }
    }

    #[test]
    fn associated_examples() {
        assert!(associated_pairs(&[v("000"), v("111")]).unwrap().is_empty());
        let z = [v("000"), v("100")];
        let a = associated_pairs(&z).unwrap();
        assert_eq!(a, vec![OppositeFacetPair { dim: 3, coord: 0 }]);
        assert_eq!(free_pair(&z).unwrap().unwrap().coord, 1);
        let all: Vec<_> = (0..8).map(|b| CubeVertex::new(3, b).unwrap()).collect();
        assert_eq!(associated_pairs(&all).unwrap().len(), 3);
        assert_eq!(free_pair(&all).unwrap(), None);
        assert!(associated_pairs(&[]).is_err());
    }

    #[test]
    fn face_vertex_enumeration() {
        let f = CubeFace::new(5, 0b10010, 0b00010).unwrap();
        let vs: Vec<_> = f.vertices().collect();
        assert_eq!(vs.len(), 8);
        assert!(vs.iter().all(|x| f.contains(x)));
        assert!(vs.windows(2).all(|w| w[0].bits < w[1].bits));
    }
}
