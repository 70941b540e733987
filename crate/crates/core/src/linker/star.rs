use serde::Serialize;

use super::config::config_facet;
use super::frame::{star_injection, Frame};
use super::{join, Router};
use crate::complex::{FaceHandle, PolytopalComplex};
use crate::error::{contract, Error, Result};
use crate::graph::{bit, bits, mask_of, Mask};
use crate::oracle::{Linkage, DEFAULT_BUDGET};

/// A pairing of terminals in the star of `pairs[0].0`.
#[derive(Clone, Debug)]
pub struct StarProblem {
    pub star: PolytopalComplex,
    pub pairs: Vec<(usize, usize)>,
}

impl StarProblem {
    pub fn terminals(&self) -> Vec<usize> {
        self.pairs.iter().flat_map(|&(s, t)| [s, t]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StarOutcome {
    /// `branch` names the case of the construction that produced it.
    Linked { linkage: Linkage, branch: &'static str },
    /// The center is in Configuration dF; `facet` is a star facet.
    Refused { facet: FaceHandle },
}

impl StarOutcome {
    pub fn linkage(&self) -> Option<&Linkage> {
        match self {
            StarOutcome::Linked { linkage, .. } => Some(linkage),
            StarOutcome::Refused { .. } => None,
        }
    }
}

/// Reusable linker for one star; odd `d >= 5`.
#[derive(Clone, Debug)]
pub struct StarLinker {
    rt: Router,
    center: usize,
    injections: Vec<Vec<Option<usize>>>,
}

impl StarLinker {
    pub fn new(star: &PolytopalComplex, center: usize) -> Result<Self> {
        let fr = Frame::new(star)?;
        let d = fr.top + 1;
        if d % 2 == 0 || d < 5 {
            return Err(Error::Unsupported(format!("star linkage needs odd d >= 5, got {d}")));
        }
        if fr.facets().iter().any(|&f| f & bit(center) == 0) {
            return Err(Error::InvalidProblem(format!("{center} is not the center of the star")));
        }
        let injections = (0..fr.facets().len())
            .map(|f| star_injection(&fr, f, center))
            .collect::<Result<_>>()?;
        Ok(StarLinker {
            rt: Router::new(fr, DEFAULT_BUDGET),
            center,
            injections,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.rt.budget = budget;
        self
    }

    pub fn dim(&self) -> usize {
        self.rt.fr.top + 1
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn vertex_mask(&self) -> Mask {
        self.rt.fr.verts
    }

    pub(crate) fn frame(&self) -> &Frame {
        &self.rt.fr
    }

    fn check(&self, pairs: &[(usize, usize)]) -> Result<Mask> {
        let fr = &self.rt.fr;
        let k = (fr.top + 2) / 2;
        if pairs.len() != k {
            return Err(Error::InvalidProblem(format!("need {k} pairs, got {}", pairs.len())));
        }
        if pairs[0].0 != self.center {
            return Err(Error::InvalidProblem("the first pair must start at the center".into()));
        }
        let mut x: Mask = 0;
        for v in pairs.iter().flat_map(|&(s, t)| [s, t]) {
            if v >= fr.adj.len() || fr.verts & bit(v) == 0 {
                return Err(Error::ForeignVertex(v));
            }
            if x & bit(v) != 0 {
                return Err(Error::InvalidProblem(format!("terminal {v} repeated")));
            }
            x |= bit(v);
        }
        Ok(x)
    }

    /// The facet witnessing Configuration dF for the center, if any.
    pub fn configuration(&self, pairs: &[(usize, usize)]) -> Result<Option<FaceHandle>> {
        let x = self.check(pairs)?;
        let f = config_facet(&self.rt.fr, x, pairs[0].0, pairs[0].1)?;
        Ok(f.map(|index| FaceHandle { dim: self.rt.fr.top, index }))
    }

    /// Links `pairs` in the star, or refuses when the center is in
    /// Configuration dF. `pairs[0]` must start at the center.
    pub fn link(&self, pairs: &[(usize, usize)]) -> Result<StarOutcome> {
        let fr = &self.rt.fr;
        let d = fr.top + 1;
        let k = (d + 1) / 2;
        let x = self.check(pairs)?;
        let (s1, t1) = pairs[0];
        if let Some(f) = config_facet(fr, x, s1, t1)? {
            return Ok(StarOutcome::Refused {
                facet: FaceHandle { dim: fr.top, index: f },
            });
        }
        let mut f1 = usize::MAX;
        let mut best = 0;
        for (i, &f) in fr.facets().iter().enumerate() {
            let c = (f & x).count_ones();
            if f & bit(t1) != 0 && c > best {
                best = c;
                f1 = i;
            }
        }
        let fm = fr.facet(f1);
        let mut ctx = Ctx {
            rt: &self.rt,
            inj: &self.injections[f1],
            d,
            k,
            x,
            pr: pairs.to_vec(),
            s1,
            t1,
            f1,
            fm,
            a1: fr.verts & !fm,
            s1o: fr.facet_opposite(f1, s1)?,
        };
        let (paths, branch) = ctx.run()?;
        let linkage = self.rt.finish(paths, pairs, &[], "star.validate")?;
        Ok(StarOutcome::Linked { linkage, branch })
    }
}

pub fn link_in_star(p: &StarProblem) -> Result<StarOutcome> {
    let center = p
        .pairs
        .first()
        .ok_or_else(|| Error::InvalidProblem("no pairs".into()))?
        .0;
    StarLinker::new(&p.star, center)?.link(&p.pairs)
}


type Out = [Vec<usize>];

struct Ctx<'a> {
    rt: &'a Router,
    inj: &'a [Option<usize>],
    d: usize,
    k: usize,
    x: Mask,
    /// Pairs in the orientation the current case uses.
    pr: Vec<(usize, usize)>,
    s1: usize,
    t1: usize,
    f1: usize,
    fm: Mask,
    a1: Mask,
    s1o: usize,
}

fn ends(p: (usize, usize)) -> Mask {
    bit(p.0) | bit(p.1)
}

fn lowest(m: Mask) -> Option<usize> {
    (m != 0).then(|| m.trailing_zeros() as usize)
}

fn single(v: usize) -> Result<Vec<usize>> {
    Ok(vec![v])
}

impl<'a> Ctx<'a> {
    fn fr(&self) -> &'a Frame {
        &self.rt.fr
    }

    fn run(&mut self) -> Result<(Vec<Vec<usize>>, &'static str)> {
        let mut out = vec![Vec::new(); self.k];
        let m = (self.x & self.fm).count_ones() as usize;
        let branch = if m == self.d + 1 {
            self.case4(&mut out)?
        } else if m == self.d {
            self.case1(&mut out)?
        } else if m >= 3 {
            self.case2(&mut out)?
        } else {
            self.case3(&mut out)?
        };
        Ok((out, branch))
    }

    fn f(&self, v: usize) -> Result<usize> {
        self.inj[v].ok_or_else(|| contract("star.injection", format!("{v} has no image")))
    }

    fn proj(&self, v: usize, target: Mask) -> Result<usize> {
        self.fr().project(v, target)
    }

    /// Terminals other than the ends of pair `i`.
    fn others(&self, i: usize) -> Mask {
        self.x & !ends(self.pr[i])
    }

    /// X-valid path for pair `i` inside `region`.
    fn valid_path(&self, region: Mask, i: usize, step: &'static str) -> Result<Vec<usize>> {
        let (s, t) = self.pr[i];
        self.rt.path(region & !self.others(i), s, t, step)
    }

    fn try_valid_path(&self, region: Mask, i: usize) -> Option<Vec<usize>> {
        let (s, t) = self.pr[i];
        self.rt.try_path(region & !self.others(i), s, t)
    }

    /// `s f(s)`, a path in the antistar, then `f(t) t`.
    fn detour(&self, i: usize, step: &'static str) -> Result<Vec<usize>> {
        let (s, t) = self.pr[i];
        let mid = self.rt.path(self.a1, self.f(s)?, self.f(t)?, step)?;
        Ok(join(&[&[s], &mid, &[t]]))
    }

    /// `v f(v)` followed by a path in the antistar to `t`.
    fn into_antistar(&self, v: usize, t: usize, step: &'static str) -> Result<Vec<usize>> {
        let mid = self.rt.path(self.a1, self.f(v)?, t, step)?;
        Ok(join(&[&[v], &mid]))
    }

    /// Brings both ends of each pair in `idx` to new ends with `approach`,
    /// links the new ends in `region`, and stores the concatenations.
    fn link_images(
        &self,
        out: &mut Out,
        region: Mask,
        idx: &[usize],
        approach: &dyn Fn(usize) -> Result<Vec<usize>>,
        step: &'static str,
    ) -> Result<()> {
        let mut heads = Vec::new();
        let mut tails = Vec::new();
        for &i in idx {
            let (s, t) = self.pr[i];
            heads.push(approach(s)?);
            tails.push(approach(t)?);
        }
        let sub: Vec<(usize, usize)> = heads
            .iter()
            .zip(&tails)
            .map(|(a, b)| (*a.last().unwrap(), *b.last().unwrap()))
            .collect();
        let sol = self.rt.solve(region, &sub, step)?;
        for (n, &i) in idx.iter().enumerate() {
            let mut back = tails[n].clone();
            back.reverse();
            out[i] = join(&[&heads[n], &sol[n], &back]);
        }
        Ok(())
    }

    /// Links pair `i` through its projections onto `target`.
    fn via_projection(&self, target: Mask, avoid: Mask, i: usize, step: &'static str) -> Result<Vec<usize>> {
        let (s, t) = self.pr[i];
        let mid = self.rt.path(target & !avoid, self.proj(s, target)?, self.proj(t, target)?, step)?;
        Ok(join(&[&[s], &mid, &[t]]))
    }

    fn orient_into(&mut self, i: usize, region: Mask) {
        let (s, t) = self.pr[i];
        if region & bit(s) == 0 && region & bit(t) != 0 {
            self.pr[i] = (t, s);
        }
    }

    /// Ridge pair `(a, b)` of `F1` as masks, `a` the one containing `v`.
    fn split(&self, (r, o): (usize, usize), v: usize) -> (Mask, Mask) {
        let fr = self.fr();
        if fr.ridge(r) & bit(v) != 0 {
            (fr.ridge(r), fr.ridge(o))
        } else {
            (fr.ridge(o), fr.ridge(r))
        }
    }

    /// Menger paths inside `region` from the terminals in `from` to `to`,
    /// indexed by start vertex.
    fn menger(&self, region: Mask, from: Mask, to: Mask, step: &'static str) -> Result<Vec<Option<Vec<usize>>>> {
        let mut by_start = vec![None; self.fr().adj.len()];
        for p in self.rt.menger(region, from, to, step)? {
            let s = p[0];
            by_start[s] = Some(p);
        }
        Ok(by_start)
    }

    // |X ∩ F1| = d: one terminal lies outside F1.
    fn case1(&mut self, out: &mut Out) -> Result<&'static str> {
        let (fm, k, s1, t1) = (self.fm, self.k, self.s1, self.t1);
        let j = (1..k)
            .find(|&i| ends(self.pr[i]) & !fm != 0)
            .ok_or_else(|| contract("case1", "no terminal outside F1"))?;
        self.orient_into(j, fm);
        let (s2, t2) = self.pr[j];
        let rest: Vec<usize> = (0..k).filter(|&i| i != j).collect();
        if s2 != self.s1o {
            out[j] = self.into_antistar(s2, t2, "case1.a.antistar")?;
            self.link_images(out, fm & !bit(s2), &rest, &single, "case1.a.facet")?;
            return Ok("case1.a");
        }
        let pair = self
            .fr()
            .free_ridge_pair(self.f1, self.x & fm & !bit(s2))?
            .ok_or_else(|| contract("case1.b.free_pair", "every ridge pair is associated"))?;
        let (r, ro) = self.split(pair, s2);
        let third: Vec<usize> = (1..k).filter(|&i| i != j).collect();
        let adj = &self.fr().adj;
        if adj[s2] & r & !self.x == 0 {
            let p = self.proj(s2, ro)?;
            self.link_images(out, r & !bit(s2) & !bit(t1), &third, &single, "case1.b1.ridge")?;
            out[j] = join(&[&[s2], &self.into_antistar(p, t2, "case1.b1.antistar")?]);
            let l1 = self.rt.path(ro & !bit(p), s1, self.proj(t1, ro)?, "case1.b1.l1")?;
            out[0] = join(&[&l1, &[t1]]);
            return Ok("case1.b1");
        }
        let sb = lowest(adj[s2] & r & !self.x).unwrap();
        out[j] = join(&[&[s2], &self.into_antistar(sb, t2, "case1.b2.antistar")?]);
        let cyclic = self.d == 5 && {
            let (s3, t3) = self.pr[third[0]];
            let p = |v| self.proj(v, ro);
            self.fr().cyclic_in_square(s1, p(s3)?, p(t1)?, p(t3)?)
        };
        if !cyclic {
            let step = |v: usize| -> Result<Vec<usize>> { Ok(join(&[&[v], &[self.proj(v, ro)?]])) };
            self.link_images(out, ro, &rest, &step, "case1.b2.ridge")?;
            return Ok("case1.b2");
        }
        let i3 = third[0];
        out[i3] = self.via_projection(r, bit(s2) | bit(sb) | bit(t1), i3, "case1.b2.cyclic.l3")?;
        let (s3, t3) = self.pr[i3];
        let avoid = bit(self.proj(s3, ro)?) | bit(self.proj(t3, ro)?);
        let l1 = self.rt.path(ro & !avoid, s1, self.proj(t1, ro)?, "case1.b2.cyclic.l1")?;
        out[0] = join(&[&l1, &[t1]]);
        Ok("case1.b2.cyclic")
    }

    // 3 <= |X ∩ F1| <= d - 1.
    fn case2(&mut self, out: &mut Out) -> Result<&'static str> {
        let (fm, k, s1, t1, x) = (self.fm, self.k, self.s1, self.t1, self.x);
        let fr = self.fr();
        let pair = fr
            .free_ridge_pair(self.f1, x & fm)?
            .ok_or_else(|| contract("case2.free_pair", "every ridge pair is associated"))?;
        let (r, ro) = self.split(pair, s1);
        let ax = x & self.a1;
        let rest: Vec<usize> = (1..k).collect();
        if r & bit(t1) != 0 {
            out[0] = self.valid_path(r, 0, "case2.a.l1")?;
            let xro = fr.project_set(x & fm & !ends(self.pr[0]), ro)?;
            let avoid = xro | bit(self.s1o);
            let need = ax.count_ones();
            let mut zbar: Mask = 0;
            if self.d == 5 {
                let far = bits(xro).any(|u| bits(xro).any(|v| fr.distance_in(ro, u, v) == Some(3)));
                if !far {
                    let z = bits(xro)
                        .map(|v| fr.opposite_vertex(ro, self.d - 2, v))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .find(|&z| avoid & bit(z) == 0)
                        .ok_or_else(|| contract("case2.a.far_vertex", "no vertex at distance 3"))?;
                    zbar |= bit(z);
                }
            }
            for v in bits(ro & !avoid & !zbar) {
                if zbar.count_ones() >= need {
                    break;
                }
                zbar |= bit(v);
            }
            if zbar.count_ones() < need {
                return Err(contract("case2.a.zbar", "ridge too small"));
            }
            let mut back = vec![usize::MAX; fr.adj.len()];
            let mut zset: Mask = 0;
            for zb in bits(zbar) {
                let z = self.f(zb)?;
                back[z] = zb;
                zset |= bit(z);
            }
            let routes = self.menger(self.a1, ax, zset, "case2.a.menger")?;
            let approach = |v: usize| -> Result<Vec<usize>> {
                if ax & bit(v) != 0 {
                    let p = routes[v].clone().unwrap();
                    let z = *p.last().unwrap();
                    Ok(join(&[&p, &[back[z]]]))
                } else {
                    Ok(join(&[&[v], &[self.proj(v, ro)?]]))
                }
            };
            self.link_images(out, ro, &rest, &approach, "case2.a.ridge")?;
            return Ok("case2.a");
        }
        let l1 = self.rt.path(ro & !(x & !bit(t1)), self.proj(s1, ro)?, t1, "case2.b.l1")?;
        out[0] = join(&[&[s1], &l1]);
        let (ri, _) = if fr.ridge(pair.0) == r { pair } else { (pair.1, pair.0) };
        let j = fr
            .other_facet(ri, self.f1)
            .ok_or_else(|| contract("case2.b.facet", "ridge through the center in one facet"))?;
        let rj = fr.ridge(fr.opposite_ridge(j, ri)?);
        let routes = self.menger(self.a1, ax, rj, "case2.b.menger")?;
        let approach = |v: usize| -> Result<Vec<usize>> {
            if ax & bit(v) != 0 {
                Ok(routes[v].clone().unwrap())
            } else {
                Ok(join(&[&[v], &[self.proj(v, r)?]]))
            }
        };
        self.link_images(out, fr.facet(j) & !bit(s1), &rest, &approach, "case2.b.facet")?;
        Ok("case2.b")
    }

    // |X ∩ F1| = 2: only s1 and t1 lie in F1.
    fn case3(&mut self, out: &mut Out) -> Result<&'static str> {
        let (fm, k, s1, t1, x) = (self.fm, self.k, self.s1, self.t1, self.x);
        let fr = self.fr();
        let (s2, t2) = self.pr[1];
        let s12: Vec<usize> = (0..fr.facets().len()).filter(|&f| fr.facet(f) & bit(s2) != 0).collect();
        let s12m = s12.iter().fold(0, |m, &f| m | fr.facet(f));
        let ax = x & self.a1;
        let routes = self.menger(self.a1, ax, s12m & !fm, "case3.menger")?;
        let hat = |v: usize| *routes[v].as_ref().unwrap().last().unwrap();
        let f12 = *s12
            .iter()
            .find(|&&f| fr.facet(f) & bit(hat(t2)) != 0)
            .ok_or_else(|| contract("case3.f12", "no facet of the star of s2 holds the image of t2"))?;
        let f12m = fr.facet(f12);
        let r = fr
            .ridges_of(self.f1, f12m & fm, bit(t1))
            .next()
            .ok_or_else(|| contract("case3.ridge", "no ridge of F1 contains F1 ∩ F12"))?;
        let ro = fr.ridge(fr.opposite_ridge(self.f1, r)?);
        let l1 = self.rt.path(ro, self.proj(s1, ro)?, t1, "case3.l1")?;
        out[0] = join(&[&[s1], &l1]);
        let rest: Vec<usize> = (1..k).collect();
        if s12.len() == 1 {
            let approach = |v: usize| Ok(routes[v].clone().unwrap());
            self.link_images(out, f12m & !bit(s1), &rest, &approach, "case3.single.facet")?;
            return Ok("case3.single");
        }
        let a12 = s12m & !fm & !f12m;
        let u = fr
            .ridges_of(f12, bit(s1) | bit(s2), 0)
            .next()
            .ok_or_else(|| contract("case3.u", "s2 is opposite s1 in F12"))?;
        let j12 = fr
            .other_facet(u, f12)
            .ok_or_else(|| contract("case3.j12", "ridge through the center in one facet"))?;
        let um = fr.ridge(u);
        let uj = fr.ridge(fr.opposite_ridge(j12, u)?);
        let xhat = mask_of(bits(x & !ends(self.pr[0])).map(hat));
        let blocked = fr.project_set((xhat | bit(s1)) & um, uj)?;
        let need = (xhat & a12).count_ones() as usize;
        let w: Vec<usize> = bits(uj & !fm & !blocked).take(need).collect();
        if w.len() < need {
            return Err(contract("case3.w", "U_J too small"));
        }
        let inner = self.menger(a12, xhat & a12, mask_of(w.iter().copied()), "case3.menger12")?;
        let approach = |v: usize| -> Result<Vec<usize>> {
            let outer = routes[v].clone().unwrap();
            let h = *outer.last().unwrap();
            if a12 & bit(h) == 0 {
                return Ok(outer);
            }
            let p = inner[h].clone().unwrap();
            let end = self.proj(*p.last().unwrap(), um)?;
            Ok(join(&[&outer, &p, &[end]]))
        };
        self.link_images(out, f12m & !bit(s1), &rest, &approach, "case3.multi.facet")?;
        Ok("case3.multi")
    }

    // |X ∩ F1| = d + 1 and the center is not in Configuration dF.
    fn case4(&mut self, out: &mut Out) -> Result<&'static str> {
        if self.d == 5 {
            return if self.t1 == self.s1o {
                self.case4_c5(out)
            } else {
                self.case4_ab5(out)
            };
        }
        let (fm, k, s1, t1, x, s1o) = (self.fm, self.k, self.s1, self.t1, self.x, self.s1o);
        let adj = &self.fr().adj;
        if t1 == s1o {
            let t1f = lowest(adj[t1] & fm & !x).ok_or_else(|| contract("case4.C", "t1 is blocked"))?;
            let rest: Vec<usize> = (1..k).collect();
            self.link_images(out, fm & !bit(s1) & !bit(t1), &rest, &single, "case4.C.link")?;
            return self.close_through(out, t1f, None, "case4.C");
        }
        if x & bit(s1o) == 0 {
            let rest: Vec<usize> = (1..k).collect();
            self.link_images(out, fm & !bit(s1), &rest, &single, "case4.A.facet")?;
            return self.close_through(out, t1, None, "case4.A");
        }
        let j = (1..k).find(|&i| ends(self.pr[i]) & bit(s1o) != 0).unwrap();
        if self.pr[j].1 == s1o {
            self.pr[j] = (s1o, self.pr[j].0);
        }
        let (s2, t2) = self.pr[j];
        let lk = fm & !bit(s1) & !bit(s2);
        let third: Vec<usize> = (1..k).filter(|&i| i != j).collect();
        if adj[s2] & bit(t2) != 0 {
            out[j] = vec![s2, t2];
            self.link_images(out, lk & !bit(t1) & !bit(t2), &third, &single, "case4.B.edge.link")?;
            return self.close_through(out, t1, None, "case4.B.edge");
        }
        let s2f = lowest(adj[s2] & fm & !x).ok_or_else(|| contract("case4.B", "s2 is blocked"))?;
        let saved = self.pr[j];
        self.pr[j] = (s2f, t2);
        let mut idx = vec![j];
        idx.extend(&third);
        self.link_images(out, lk, &idx, &single, "case4.B.link")?;
        out[j].insert(0, s2);
        self.pr[j] = saved;
        self.close_through(out, t1, Some((j, s2f)), "case4.B")
    }

    /// Finishes `L1` as `s1 f(s1) ... f(end) end t1` when `end` is free,
    /// else reroutes the path through `end` together with `L1` in the
    /// antistar. `lead` marks a pair whose path starts with an extra edge
    /// `s_j lead.1`.
    fn close_through(
        &self,
        out: &mut Out,
        end: usize,
        lead: Option<(usize, usize)>,
        branch: &'static str,
    ) -> Result<&'static str> {
        let (s1, t1) = (self.s1, self.t1);
        let tail: Vec<usize> = if end == t1 { vec![t1] } else { vec![end, t1] };
        let hit = (1..self.k).find(|&i| out[i].contains(&end));
        let Some(j) = hit else {
            let mid = self.rt.path(self.a1, self.f(s1)?, self.f(end)?, "case4.l1")?;
            out[0] = join(&[&[s1], &mid, &tail]);
            return Ok(branch);
        };
        let (sj, tj) = self.pr[j];
        let start = match lead {
            Some((l, v)) if l == j => v,
            _ => sj,
        };
        let pairs = [(self.f(s1)?, self.f(end)?), (self.f(start)?, self.f(tj)?)];
        let sol = self.rt.solve(self.a1, &pairs, "case4.reroute")?;
        out[0] = join(&[&[s1], &sol[0], &tail]);
        let head: Vec<usize> = if start == sj { vec![sj] } else { vec![sj, start] };
        out[j] = join(&[&head, &sol[1], &[tj]]);
        Ok(match branch {
            "case4.A" => "case4.A.reroute",
            "case4.B" => "case4.B.reroute",
            "case4.B.edge" => "case4.B.edge.reroute",
            _ => "case4.C.reroute",
        })
    }

    // d = 5, |X ∩ F1| = 6 and t1 is not opposite s1 in F1.
    fn case4_ab5(&mut self, out: &mut Out) -> Result<&'static str> {
        let (s1, t1, x, s1o) = (self.s1, self.t1, self.x, self.s1o);
        let fr = self.fr();
        let ri = fr
            .ridges_of(self.f1, bit(s1) | bit(t1), 0)
            .next()
            .ok_or_else(|| contract("case4.d5.ridge", "no ridge holds s1 and t1"))?;
        let r = fr.ridge(ri);
        let rf = fr.ridge(fr.opposite_ridge(self.f1, ri)?);
        let j1 = fr
            .other_facet(ri, self.f1)
            .ok_or_else(|| contract("case4.d5.facet", "ridge through the center in one facet"))?;
        let jm = fr.facet(j1);
        let rj = fr.ridge(fr.opposite_ridge(j1, ri)?);
        let inside = |i: usize, m: Mask| ends(self.pr[i]) & !m == 0;

        if x & !r == 0 {
            let p = |v| self.proj(v, rj);
            let mut chosen = None;
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let (sa, ta) = self.pr[a];
                let (sb, tb) = self.pr[b];
                if !fr.cyclic_in_square(p(sa)?, p(sb)?, p(ta)?, p(tb)?) {
                    chosen = Some((a, b));
                    break;
                }
            }
            let (a, b) = chosen.ok_or_else(|| contract("case4.d5.i.claim", "every two pairs are cyclic"))?;
            let c = 3 - a - b;
            let step = |v: usize| -> Result<Vec<usize>> { Ok(vec![v, self.proj(v, rj)?]) };
            self.link_images(out, rj, &[a, b], &step, "case4.d5.i.link")?;
            out[c] = self.via_projection(rf, 0, c, "case4.d5.i.rf")?;
            return Ok("case4.d5.i");
        }

        if let Some(i) = (1..3).find(|&i| inside(i, r)) {
            let c = 3 - i;
            let other = match self.try_valid_path(r, 0) {
                Some(p) => {
                    out[0] = p;
                    i
                }
                None => {
                    out[i] = self.valid_path(r, i, "case4.d5.ii.r")?;
                    0
                }
            };
            out[other] = self.via_projection(rj, 0, other, "case4.d5.ii.rj")?;
            out[c] = self.via_projection(rf, 0, c, "case4.d5.ii.rf")?;
            return Ok("case4.d5.ii");
        }

        if let Some(p2) = (1..3).find(|&i| inside(i, rf)) {
            let p3 = 3 - p2;
            if ends(self.pr[p3]) & r != 0 {
                self.orient_into(p3, r);
                let (s3, t3) = self.pr[p3];
                let bad = x & !ends(self.pr[p3]);
                let t3_path = self.short_path(t3, rf, r, bad, 0);
                if let Some(tp) = t3_path {
                    let tm = mask_of(tp.iter().copied());
                    let t3p = *tp.last().unwrap();
                    let mut back = tp.clone();
                    back.reverse();
                    if t3p == s3 {
                        out[0] = self.valid_path(jm & !tm, 0, "case4.d5.iii.j1")?;
                        out[p3] = back;
                    } else {
                        let sol = self.rt.solve(jm & !(tm & !bit(t3p)), &[(s1, t1), (s3, t3p)], "case4.d5.iii.j1")?;
                        out[0] = sol[0].clone();
                        out[p3] = join(&[&sol[1], &back]);
                    }
                    out[p2] = self.valid_path(rf & !tm, p2, "case4.d5.iii.l2")?;
                    return Ok("case4.d5.iii.short");
                }
                out[0] = self.valid_path(r, 0, "case4.d5.iii.l1")?;
                out[p2] = self.valid_path(rf, p2, "case4.d5.iii.l2")?;
                out[p3] = self.detour(p3, "case4.d5.iii.l3")?;
                return Ok("case4.d5.iii.antistar");
            }
            out[0] = self.valid_path(r, 0, "case4.d5.iii.l1")?;
            let (pa, pb) = if ends(self.pr[p3]) & bit(s1o) != 0 { (p3, p2) } else { (p2, p3) };
            out[pa] = self.valid_path(rf, pa, "case4.d5.iii.l2")?;
            out[pb] = self.detour(pb, "case4.d5.iii.l3")?;
            return Ok("case4.d5.iii.ridge");
        }

        self.orient_into(1, r);
        self.orient_into(2, r);
        let (a, b) = if self.pr[1].1 == s1o { (2, 1) } else { (1, 2) };
        let (s2, t2) = self.pr[a];
        let (s3, t3) = self.pr[b];
        if let Some(sp) = self.short_path(s3, r, rf, x & !ends(self.pr[b]), 0) {
            out[a] = self.detour(a, "case4.d5.iv.l2")?;
            let hat = *sp.last().unwrap();
            let l3 = self.rt.path(rf & !bit(t2), hat, t3, "case4.d5.iv.l3")?;
            out[b] = join(&[&sp, &l3]);
            let block = (mask_of(sp.iter().copied()) & r) | bit(s2);
            out[0] = self.valid_path(r & !block, 0, "case4.d5.iv.l1")?;
            return Ok("case4.d5.iv.short");
        }
        let t3_tail = if t3 != s1o {
            vec![t3, self.f(t3)?]
        } else {
            let u = lowest(fr.adj[t3] & rf & !bit(t2))
                .ok_or_else(|| contract("case4.d5.iv.u", "t3 has no free neighbour"))?;
            vec![t3, u, self.f(u)?]
        };
        let tm = mask_of(t3_tail.iter().copied());
        let mid = self.rt.path(self.a1, self.f(s3)?, *t3_tail.last().unwrap(), "case4.d5.iv.l3")?;
        let mut back = t3_tail.clone();
        back.reverse();
        out[b] = join(&[&[s3], &mid, &back]);
        let avoid = tm | bit(s1) | bit(t1) | bit(s3);
        let sp = self
            .short_path(s2, r, rf, avoid, 0)
            .ok_or_else(|| contract("case4.d5.iv.s2", "no short path from s2 to R_F"))?;
        let l2 = self.rt.path(rf & !tm, *sp.last().unwrap(), t2, "case4.d5.iv.l2")?;
        out[a] = join(&[&sp, &l2]);
        let block = (mask_of(sp.iter().copied()) & r) | bit(s3);
        out[0] = self.valid_path(r & !block, 0, "case4.d5.iv.l1")?;
        Ok("case4.d5.iv.antistar")
    }

    /// A path of length at most two from `v` (in `side`) into `target`
    /// inside F1, avoiding `bad` and `also`: the direct projection first,
    /// then through neighbours of `v` in `side` in index order.
    fn short_path(&self, v: usize, side: Mask, target: Mask, bad: Mask, also: Mask) -> Option<Vec<usize>> {
        let fr = self.fr();
        let bad = bad | also;
        let p = fr.project(v, target).ok()?;
        if bad & bit(p) == 0 {
            return Some(vec![v, p]);
        }
        for u in bits(fr.adj[v] & side & !bad & !self.x) {
            let w = fr.project(u, target).ok()?;
            if bad & bit(w) == 0 {
                return Some(vec![v, u, w]);
            }
        }
        None
    }

    // d = 5, |X ∩ F1| = 6 and t1 is opposite s1 in F1.
    fn case4_c5(&mut self, out: &mut Out) -> Result<&'static str> {
        let (fm, s1, t1, x) = (self.fm, self.s1, self.t1, self.x);
        let fr = self.fr();
        let t1p = lowest(fr.adj[t1] & fm & !x).ok_or_else(|| contract("case4.d5.C", "t1 is blocked"))?;
        let ri = fr
            .ridges_of(self.f1, bit(s1) | bit(t1p), 0)
            .next()
            .ok_or_else(|| contract("case4.d5.C.ridge", "no ridge holds s1 and t1'"))?;
        let r = fr.ridge(ri);
        let rf = fr.ridge(fr.opposite_ridge(self.f1, ri)?);
        let j1 = fr
            .other_facet(ri, self.f1)
            .ok_or_else(|| contract("case4.d5.C.facet", "ridge through the center in one facet"))?;
        let rj = fr.ridge(fr.opposite_ridge(j1, ri)?);
        let inside = |i: usize, m: Mask| ends(self.pr[i]) & !m == 0;

        if let Some(i) = (1..3).find(|&i| inside(i, r)) {
            let o = 3 - i;
            let p = |v| self.proj(v, rj);
            let (si, ti) = self.pr[i];
            let sol = self.rt.solve(rj, &[(p(s1)?, p(t1p)?), (p(si)?, p(ti)?)], "case4.d5.C.i.rj")?;
            out[0] = join(&[&[s1], &sol[0], &[t1p, t1]]);
            out[i] = join(&[&[si], &sol[1], &[ti]]);
            out[o] = self.via_projection(rf, bit(t1), o, "case4.d5.C.i.rf")?;
            return Ok("case4.d5.C.i");
        }

        let in_rf: Vec<usize> = (1..3).filter(|&i| inside(i, rf)).collect();
        if !in_rf.is_empty() {
            let (i, p) = in_rf
                .iter()
                .find_map(|&i| self.try_valid_path(rf, i).map(|p| (i, p)))
                .ok_or_else(|| contract("case4.d5.C.ii.rf", "no X-valid path in R_F"))?;
            let o = 3 - i;
            out[i] = p;
            out[o] = self.detour(o, "case4.d5.C.ii.antistar")?;
            let l1 = self.rt.path(r & !(x & !bit(s1)), s1, t1p, "case4.d5.C.ii.l1")?;
            out[0] = join(&[&l1, &[t1]]);
            return Ok("case4.d5.C.ii");
        }

        self.orient_into(1, r);
        self.orient_into(2, r);
        let (i, sp) = [1, 2]
            .into_iter()
            .find_map(|i| {
                let bad = x & !ends(self.pr[i]);
                self.short_path(self.pr[i].0, r, rf, bad, bit(t1p)).map(|p| (i, p))
            })
            .ok_or_else(|| contract("case4.d5.C.iii.short", "no short path to R_F"))?;
        let o = 3 - i;
        let ti = self.pr[i].1;
        let li = self.rt.path(rf & !(x & !bit(ti)), *sp.last().unwrap(), ti, "case4.d5.C.iii.rf")?;
        out[i] = join(&[&sp, &li]);
        out[o] = self.detour(o, "case4.d5.C.iii.antistar")?;
        let block = (mask_of(sp.iter().copied()) & r) | bit(self.pr[o].0);
        let l1 = self.rt.path(r & !block & !(x & !bit(s1)), s1, t1p, "case4.d5.C.iii.l1")?;
        out[0] = join(&[&l1, &[t1]]);
        Ok("case4.d5.C.iii")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::CubeVertex;
    use crate::generators::{cube_boundary, star_instance};
    use crate::oracle::solve_masked;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(label: &str) -> usize {
        CubeVertex::parse(label).unwrap().bits as usize
    }

    fn q5_star() -> (PolytopalComplex, StarLinker) {
        let star = star_instance(&cube_boundary(5).unwrap(), 0).unwrap();
        let linker = StarLinker::new(&star, 0).unwrap();
        (star, linker)
    }

    #[test]
    fn refuses_configuration_df() {
        let (star, _) = q5_star();
        let t1 = 0b01111;
        let pairs = vec![(0, t1), (t1 ^ 1, t1 ^ 2), (t1 ^ 4, t1 ^ 8)];
        let out = link_in_star(&StarProblem { star, pairs }).unwrap();
        assert!(matches!(out, StarOutcome::Refused { .. }));
        assert!(out.linkage().is_none());
    }

    #[test]
    fn links_spread_pairs() {
        let (_, linker) = q5_star();
        let pairs = [(0, v("11100")), (v("10000"), v("00110")), (v("01000"), v("00011"))];
        let out = linker.link(&pairs).unwrap();
        let l = out.linkage().unwrap();
        assert_eq!(l.paths.len(), 3);
        assert_eq!(l.paths[0][0], 0);
    }

    #[test]
    fn rejects_malformed_problems() {
        let (_, linker) = q5_star();
        assert!(linker.link(&[(0, 3), (5, 6)]).is_err());
        assert!(linker.link(&[(3, 0), (5, 6), (9, 10)]).is_err());
        assert!(linker.link(&[(0, 3), (3, 6), (9, 10)]).is_err());
        let q4 = star_instance(&cube_boundary(4).unwrap(), 0).unwrap();
        assert!(StarLinker::new(&q4, 0).is_err());
    }

    #[test]
    fn agrees_with_oracle_on_samples() {
        let (star, linker) = q5_star();
        let adj = star.universe_graph().masks().unwrap();
        let verts = linker.vertex_mask();
        let others: Vec<usize> = bits(verts & !1).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3000 {
            let mut xs: Vec<usize> = others.choose_multiple(&mut rng, 5).copied().collect();
            xs.shuffle(&mut rng);
            let pairs = [(0, xs[0]), (xs[1], xs[2]), (xs[3], xs[4])];
            let linked = solve_masked(&adj, verts, &pairs, DEFAULT_BUDGET).unwrap().is_some();
            match linker.link(&pairs) {
                Ok(StarOutcome::Linked { .. }) => assert!(linked, "{pairs:?}"),
                Ok(StarOutcome::Refused { .. }) => assert!(!linked, "{pairs:?}"),
                Err(e) => panic!("{pairs:?}: {e}"),
            }
        }
    }
}
