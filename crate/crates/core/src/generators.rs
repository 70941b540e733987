//! Instance corpus: cube complexes, facet-glued cube chains, vertex stars.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::complex::PolytopalComplex;
use crate::cube::CubeVertex;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Cube,
    GluedChain,
    StarOfVertex,
    FromFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_length: Option<usize>,
    /// Star center for `star_of_vertex`; the star is taken in the cube
    /// boundary, or in the glued chain when `chain_length` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A boundary complex, or a vertex star inside one.
#[derive(Clone, Debug)]
pub struct Instance {
    pub complex: PolytopalComplex,
    pub center: Option<usize>,
}

impl InstanceSpec {
    pub fn cube(dim: usize) -> Self {
        InstanceSpec {
            kind: InstanceKind::Cube,
            dim,
            chain_length: None,
            center: None,
            file: None,
            seed: None,
        }
    }

    pub fn glued(dim: usize, chain_length: usize) -> Self {
        InstanceSpec {
            kind: InstanceKind::GluedChain,
            chain_length: Some(chain_length),
            ..Self::cube(dim)
        }
    }

    pub fn build(&self) -> Result<Instance> {
        let base = || match self.chain_length {
            Some(n) => glued_cubes(self.dim, n),
            None => cube_boundary(self.dim),
        };
        match self.kind {
            InstanceKind::Cube => Ok(Instance {
                complex: cube_boundary(self.dim)?,
                center: None,
            }),
            InstanceKind::GluedChain => {
                let n = self
                    .chain_length
                    .ok_or_else(|| Error::InvalidProblem("glued_chain needs a chain length".into()))?;
                Ok(Instance {
                    complex: glued_cubes(self.dim, n)?,
                    center: None,
                })
            }
            InstanceKind::StarOfVertex => {
                let center = self.center.unwrap_or(0);
                Ok(Instance {
                    complex: star_instance(&base()?, center)?,
                    center: Some(center),
                })
            }
            InstanceKind::FromFile => {
                let path = self
                    .file
                    .as_deref()
                    .ok_or_else(|| Error::InvalidProblem("from_file needs a path".into()))?;
                Ok(Instance {
                    complex: from_file(path)?,
                    center: None,
                })
            }
        }
    }
}

fn cube_faces(d: usize, keep_top: bool) -> Vec<Vec<Vec<usize>>> {
    let full = (1u32 << d) - 1;
    let top = if keep_top { d } else { d - 1 };
    let mut layers: Vec<Vec<Vec<usize>>> = vec![Vec::new(); top + 1];
    for mask in 0..=full {
        let dim = d - mask.count_ones() as usize;
        if dim > top {
            continue;
        }
        // Iterate over value patterns on the fixed coordinates.
        let mut values = 0u32;
        loop {
            let face: Vec<usize> = (0..=full)
                .filter(|v| v & mask == values)
                .map(|v| v as usize)
                .collect();
            layers[dim].push(face);
            if values == mask {
                break;
            }
            values = (values | !mask).wrapping_add(1) & mask;
        }
    }
    for layer in &mut layers {
        layer.sort();
    }
    layers
}

fn cube_labels(d: usize) -> Vec<String> {
    (0..1u32 << d)
        .map(|b| CubeVertex { dim: d as u8, bits: b }.label())
        .collect()
}

/// Boundary complex of `Q_d`; vertex ids are the coordinate bit patterns.
pub fn cube_boundary(d: usize) -> Result<PolytopalComplex> {
    if !(2..=7).contains(&d) {
        return Err(Error::DimensionOutOfRange(d, "2..=7"));
    }
    PolytopalComplex::build(Arc::new(cube_labels(d)), cube_faces(d, false))
}

/// The complex of all faces of `Q_d`, the cube itself included.
pub fn cube_complex(d: usize) -> Result<PolytopalComplex> {
    if !(1..=7).contains(&d) {
        return Err(Error::DimensionOutOfRange(d, "1..=7"));
    }
    PolytopalComplex::build(Arc::new(cube_labels(d)), cube_faces(d, true))
}

/// Boundary complex of `n` copies of `Q_d` glued facet-to-facet in a chain.
///
/// Cube `c` spans levels `c` and `c + 1` of coordinate `x_0`; a vertex is a
/// level together with the remaining `d - 1` coordinates, and its id is
/// `level * 2^(d-1) + rest`.
pub fn glued_cubes(d: usize, n: usize) -> Result<PolytopalComplex> {
    if !(3..=7).contains(&d) {
        return Err(Error::DimensionOutOfRange(d, "3..=7"));
    }
    if !(2..=16).contains(&n) {
        return Err(Error::InvalidProblem(format!("chain length {n} outside 2..=16")));
    }
    let half = 1usize << (d - 1);
    let full = (1u32 << d) - 1;
    let mut layers: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); d];
    for c in 0..n {
        for mask in 1..=full {
            let dim = d - mask.count_ones() as usize;
            let mut values = 0u32;
            loop {
                let glued = mask == 1 && {
                    let level = c + values as usize;
                    level > 0 && level < n
                };
                if !glued {
                    let mut face: Vec<usize> = (0..=full)
                        .filter(|b| b & mask == values)
                        .map(|b| (c + (b & 1) as usize) * half + (b >> 1) as usize)
                        .collect();
                    face.sort_unstable();
                    layers[dim].insert(face);
                }
                if values == mask {
                    break;
                }
                values = (values | !mask).wrapping_add(1) & mask;
            }
        }
    }
    let labels = (0..(n + 1) * half)
        .map(|id| {
            let rest = CubeVertex {
                dim: (d - 1) as u8,
                bits: (id % half) as u32,
            };
            format!("{}:{}", id / half, rest.label())
        })
        .collect();
    PolytopalComplex::build(
        Arc::new(labels),
        layers.into_iter().map(|l| l.into_iter().collect()).collect(),
    )
}

/// The star of `s1`, keeping the ids of `c`.
pub fn star_instance(c: &PolytopalComplex, s1: usize) -> Result<PolytopalComplex> {
    c.star(c.vertex_handle(s1)?)
}

pub fn from_file(path: &Path) -> Result<PolytopalComplex> {
    PolytopalComplex::from_json_file(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn cube_f_vectors() {
        assert_eq!(cube_boundary(3).unwrap().f_vector(), vec![8, 12, 6]);
        assert_eq!(cube_boundary(4).unwrap().f_vector(), vec![16, 32, 24, 8]);
        for d in 2..=6 {
            let f = cube_boundary(d).unwrap().f_vector();
            let want: Vec<usize> = (0..d).map(|i| (1 << (d - i)) * binom(d, i)).collect();
            assert_eq!(f, want);
        }
        assert!(cube_boundary(1).is_err() && cube_boundary(8).is_err());
    }

    #[test]
    fn glued_counts() {
        let c = glued_cubes(3, 2).unwrap();
        assert_eq!(c.f_vector()[0], 12);
        assert_eq!(c.f_vector()[2], 10);
        let c = glued_cubes(4, 2).unwrap();
        assert_eq!((c.f_vector()[0], c.f_vector()[3]), (24, 14));
        let c = glued_cubes(3, 4).unwrap();
        assert_eq!(c.f_vector()[0], 4 * 8 - 3 * 4);
        assert_eq!(c.f_vector()[2], 2 * 3 * 4 - 2 * 3);
        assert!(glued_cubes(3, 1).is_err());
    }

    #[test]
    fn generated_complexes_validate() {
        for d in 2..=5 {
            cube_boundary(d).unwrap().validate().unwrap();
            cube_complex(d).unwrap().validate().unwrap();
        }
        glued_cubes(3, 3).unwrap().validate().unwrap();
        glued_cubes(4, 2).unwrap().validate().unwrap();
    }

    #[test]
    fn spec_round_trip() {
        let spec = InstanceSpec {
            kind: InstanceKind::StarOfVertex,
            center: Some(3),
            ..InstanceSpec::cube(4)
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<InstanceSpec>(&json).unwrap(), spec);
        let inst = spec.build().unwrap();
        assert_eq!(inst.center, Some(3));
        assert_eq!(inst.complex.facets().len(), 4);
    }
}
