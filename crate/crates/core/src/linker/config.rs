use serde::Serialize;

use super::frame::Frame;
use crate::complex::{FaceHandle, PolytopalComplex};
use crate::error::{Error, Result};
use crate::graph::{bit, bits, mask_of, Mask};

/// The facet and ridge frame around a terminal `t1` in Configuration dF.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigDFContext {
    pub f1: FaceHandle,
    /// Ridge of `F1` through `t1`.
    pub r: FaceHandle,
    /// Ridge of `F1` opposite `R`.
    pub r_f: FaceHandle,
    /// The other facet on `R`.
    pub j: FaceHandle,
    /// Ridge of `J` opposite `R`.
    pub r_j: FaceHandle,
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
}

/// Index-level form of [`ConfigDFContext`].
#[derive(Clone, Copy, Debug)]
pub(crate) struct Escape {
    pub f1: usize,
    pub r: usize,
    pub r_f: usize,
    pub j: usize,
    pub r_j: usize,
    pub good: Mask,
    pub bad: Mask,
}

/// The first facet (by index) in which `s1` is in Configuration dF.
pub(crate) fn config_facet(fr: &Frame, terminals: Mask, s1: usize, t1: usize) -> Result<Option<usize>> {
    let d = fr.top + 1;
    for (i, &f) in fr.facets().iter().enumerate() {
        if (f & terminals).count_ones() as usize >= d + 1
            && f & bit(s1) != 0
            && f & bit(t1) != 0
            && fr.facet_opposite(i, s1)? == t1
            && fr.adj[t1] & f & !terminals == 0
        {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Escape frame through ridge `r` of `f1`, which must contain `t1`; `fr` is
/// the frame of the whole boundary complex.
pub(crate) fn escape_through(fr: &Frame, terminals: Mask, f1: usize, r: usize) -> Result<Option<Escape>> {
    let r_f = fr.opposite_ridge(f1, r)?;
    let Some(j) = fr.other_facet(r, f1) else {
        return Ok(None);
    };
    let r_j = fr.opposite_ridge(j, r)?;
    let bad = fr.project_set(terminals & fr.ridge(r), fr.ridge(r_j))?;
    Ok(Some(Escape {
        f1,
        r,
        r_f,
        j,
        r_j,
        good: fr.ridge(r_j) & !bad,
        bad,
    }))
}

fn check_odd(d: usize) -> Result<()> {
    if d % 2 == 0 || d < 3 {
        return Err(Error::Unsupported(format!(
            "Configuration dF needs odd d >= 3, got {d}"
        )));
    }
    Ok(())
}

/// Detects whether `s1` is in Configuration dF with respect to the pairing,
/// returning the witnessing facet and the escape frame through its least
/// ridge containing `t1`.
pub fn detect_config_df(
    p: &PolytopalComplex,
    terminals: &[usize],
    pairs: &[(usize, usize)],
    s1: usize,
) -> Result<Option<(FaceHandle, ConfigDFContext)>> {
    let fr = Frame::new(p)?;
    check_odd(fr.top + 1)?;
    let t1 = pairs
        .iter()
        .find_map(|&(a, b)| match (a == s1, b == s1) {
            (true, _) => Some(b),
            (_, true) => Some(a),
            _ => None,
        })
        .ok_or_else(|| Error::InvalidProblem(format!("{s1} is not paired")))?;
    if let Some(&v) = terminals.iter().find(|&&v| v >= fr.adj.len()) {
        return Err(Error::ForeignVertex(v));
    }
    let x = mask_of(terminals.iter().copied());
    let Some(f1) = config_facet(&fr, x, s1, t1)? else {
        return Ok(None);
    };
    let r = fr
        .ridges_of(f1, bit(t1), 0)
        .next()
        .ok_or_else(|| Error::InvalidComplex("facet has no ridge through t1".into()))?;
    let e = escape_through(&fr, x, f1, r)?
        .ok_or_else(|| Error::InvalidComplex("ridge lies in a single facet".into()))?;
    let facet = |index| FaceHandle { dim: fr.top, index };
    let ridge = |index| FaceHandle { dim: fr.top - 1, index };
    let ctx = ConfigDFContext {
        f1: facet(e.f1),
        r: ridge(e.r),
        r_f: ridge(e.r_f),
        j: facet(e.j),
        r_j: ridge(e.r_j),
        good: bits(e.good).collect(),
        bad: bits(e.bad).collect(),
    };
    Ok(Some((facet(f1), ctx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::CubeVertex;
    use crate::generators::cube_boundary;

    fn v(label: &str) -> usize {
        CubeVertex::parse(label).unwrap().bits as usize
    }

    #[test]
    fn q5_configuration() {
        let p = cube_boundary(5).unwrap();
        // F = {x_4 = 0}; t1 is opposite s1 there, and all its neighbours in
        // F are terminals.
        let s1 = v("00000");
        let t1 = 0b01111;
        let others: Vec<usize> = (0..4).map(|i| t1 ^ (1 << i)).collect();
        let mut xs = vec![s1, t1];
        xs.extend(&others);
        let pairs = [(s1, t1), (others[0], others[1]), (others[2], others[3])];
        let (f, ctx) = detect_config_df(&p, &xs, &pairs, s1).unwrap().unwrap();
        let fverts = p.face(f).unwrap();
        assert!(fverts.iter().all(|&w| w & 0b10000 == 0));
        assert_eq!(ctx.good.len() + ctx.bad.len(), 8);
        let rj = p.face(ctx.r_j).unwrap();
        assert!(rj.iter().all(|w| !fverts.contains(w)));
        let r = p.face(ctx.r).unwrap();
        assert_eq!(ctx.bad.len(), xs.iter().filter(|x| r.contains(x)).count());

        // t1 at distance 3 from s1 breaks clause (ii).
        let t1 = 0b00111;
        let others: Vec<usize> = (0..3).map(|i| t1 ^ (1 << i)).chain([0b01000]).collect();
        let mut xs = vec![s1, t1];
        xs.extend(&others);
        let pairs = [(s1, t1), (others[0], others[1]), (others[2], others[3])];
        assert!(detect_config_df(&p, &xs, &pairs, s1).unwrap().is_none());
    }

    #[test]
    fn spread_terminals_are_not_detected() {
        let p = cube_boundary(5).unwrap();
        let xs = [0, 31, 3, 28, 10, 21];
        let pairs = [(0, 31), (3, 28), (10, 21)];
        assert!(detect_config_df(&p, &xs, &pairs, 0).unwrap().is_none());
        let q4 = cube_boundary(4).unwrap();
        assert!(detect_config_df(&q4, &xs[..4], &pairs[..2], 0).is_err());
    }
}
