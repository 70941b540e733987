use super::PolytopeLinker;
use crate::complex::PolytopalComplex;
use crate::error::Result;
use crate::oracle::Linkage;

/// Links `pairs` in an even-dimensional cubical polytope through the link
/// of the unpaired terminal `x`, which no path touches. See
/// [`PolytopeLinker::strong_link`].
pub fn strong_link_even(p: &PolytopalComplex, pairs: &[(usize, usize)], x: usize) -> Result<Linkage> {
    Ok(PolytopeLinker::new(p)?.strong_link(pairs, x)?.linkage)
}
