//! Reproducible verification campaigns over the instance corpus.
//!
//! A [`Campaign`] names an instance, a check and an enumeration mode; [`run`]
//! returns a [`Report`] whose JSON form is identical across runs with the
//! same inputs apart from `elapsed_ms`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::time::Instant;

use crate::complex::{is_k_connected, technical_lemma_check, PolytopalComplex};
use crate::cube::associated_mask;
use crate::error::{Error, Result};
use crate::generators::{InstanceKind, InstanceSpec};
use crate::graph::{bit, bits, Graph, Mask};
use crate::linker::{PolytopeLinker, StarLinker, StarOutcome};
use crate::oracle::{
    contains_k23, pairings, sample_pairing, sample_subset, solve_masked, sweep_exhaustive, sweep_sampled, verify_k_linked, verify_strongly_linked, CubeSymmetry, Linkage, Mode,
    Status, Tally, Verdict, VerifyOptions, DEFAULT_BUDGET,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    KLinked,
    StronglyLinked,
    Lemma6,
    Separators,
    StarLemma,
    TechnicalLemma,
    K23,
    LinkConstruct,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::KLinked,
        Check::StronglyLinked,
        Check::Lemma6,
        Check::Separators,
        Check::StarLemma,
        Check::TechnicalLemma,
        Check::K23,
        Check::LinkConstruct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::KLinked => "k_linked",
            Check::StronglyLinked => "strongly_linked",
            Check::Lemma6 => "lemma6",
            Check::Separators => "separators",
            Check::StarLemma => "star_lemma",
            Check::TechnicalLemma => "technical_lemma",
            Check::K23 => "k23",
            Check::LinkConstruct => "link_construct",
        }
    }
}

impl std::str::FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidProblem(format!("unknown check {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct Campaign {
    pub instance: InstanceSpec,
    pub check: Check,
    /// Pairs for linkage checks, separator size for `separators`; each check
    /// has a default.
    pub k: Option<usize>,
    pub mode: Mode,
    /// Orbit reduction for `k_linked` and `strongly_linked` on cubes.
    pub symmetry: bool,
    pub budget: u64,
    pub jobs: usize,
}

impl Campaign {
    pub fn new(instance: InstanceSpec, check: Check) -> Self {
        Campaign {
            instance,
            check,
            k: None,
            mode: Mode::Exhaustive,
            symmetry: false,
            budget: DEFAULT_BUDGET,
            jobs: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Mode::Sampled { n: 0, .. } = self.mode {
            return Err(Error::InvalidProblem("sampled mode needs at least one sample".into()));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidProblem("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub check: Check,
    pub instance: InstanceSpec,
    pub k: Option<usize>,
    pub mode: Mode,
    pub status: Status,
    pub checked: u64,
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbits: Option<u64>,
    pub witness: Option<Value>,
    /// Instance counts per construction branch or structural outcome.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub branches: BTreeMap<String, u64>,
    pub seed: Option<u64>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status != Status::Counterexample
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,instance,dim,mode,status,checked,failures,orbits,seed,elapsed_ms\n");
        let mode = match self.mode {
            Mode::Exhaustive => "exhaustive".to_string(),
            Mode::Sampled { n, .. } => format!("sampled({n})"),
        };
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        out += &format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            self.check.name(),
            kind_name(self.instance.kind),
            self.instance.dim,
            mode,
            status_name(self.status),
            self.checked,
            self.failures,
            opt(self.orbits),
            opt(self.seed),
            self.elapsed_ms
        );
        if !self.branches.is_empty() {
            out += "branch,count\n";
            for (b, c) in &self.branches {
                out += &format!("{b},{c}\n");
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} on {} d={}: {} ({} checked, {} failures)\n",
            self.check.name(),
            kind_name(self.instance.kind),
            self.instance.dim,
            status_name(self.status),
            self.checked,
            self.failures
        );
        if let Some(o) = self.orbits {
            out += &format!("orbits: {o}\n");
        }
        if let Some(s) = self.seed {
            out += &format!("seed: {s}\n");
        }
        for (b, c) in &self.branches {
            out += &format!("  {b}: {c}\n");
        }
        if let Some(w) = &self.witness {
            out += &format!("witness: {w}\n");
        }
        out += &format!("elapsed: {} ms\n", self.elapsed_ms);
        out
    }
}

fn kind_name(k: InstanceKind) -> &'static str {
    match k {
        InstanceKind::Cube => "cube",
        InstanceKind::GluedChain => "glued_chain",
        InstanceKind::StarOfVertex => "star_of_vertex",
        InstanceKind::FromFile => "from_file",
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::Counterexample => "counterexample",
        Status::SampledPass => "sampled_pass",
    }
}

/// Outcome of one check before it is stamped with campaign metadata.
struct Outcome {
    tally: Tally<Value>,
    orbits: Option<u64>,
}

impl From<Tally<Value>> for Outcome {
    fn from(tally: Tally<Value>) -> Self {
        Outcome { tally, orbits: None }
    }
}

pub fn run(c: &Campaign) -> Result<Report> {
    c.validate()?;
    let start = Instant::now();
    let inst = c.instance.build()?;
    let complex = &inst.complex;
    let out = match c.check {
        Check::KLinked | Check::StronglyLinked => linkedness(c, complex)?,
        Check::Lemma6 => lemma6(c)?.into(),
        Check::Separators => separators(c, complex)?.into(),
        Check::K23 => k23(complex).into(),
        Check::StarLemma => star_lemma(c, complex, inst.center)?.into(),
        Check::TechnicalLemma => technical(c, complex)?.into(),
        Check::LinkConstruct => construct(c, complex)?.into(),
    };
    let exhaustive = matches!(c.mode, Mode::Exhaustive) || c.check == Check::K23;
    let status = match (out.tally.failures, exhaustive) {
        (0, true) => Status::Verified,
        (0, false) => Status::SampledPass,
        _ => Status::Counterexample,
    };
    let seed = match c.mode {
        Mode::Sampled { seed, .. } if !exhaustive => Some(seed),
        _ => None,
    };
    log::info!(
        "{} finished: {} checked, {} failures",
        c.check.name(),
        out.tally.checked,
        out.tally.failures
    );
    Ok(Report {
        check: c.check,
        instance: c.instance.clone(),
        k: c.k,
        mode: c.mode,
        status,
        checked: out.tally.checked,
        failures: out.tally.failures,
        orbits: out.orbits,
        witness: out.tally.witness,
        branches: out.tally.branches,
        seed,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

fn terminal_witness(c: &PolytopalComplex, pairs: &[(usize, usize)], forbidden: &[usize]) -> Value {
    json!({
        "pairs": pairs,
        "forbidden": forbidden,
        "labels": pairs
            .iter()
            .map(|&(s, t)| [c.label(s), c.label(t)])
            .collect::<Vec<_>>(),
    })
}

fn linkedness(c: &Campaign, complex: &PolytopalComplex) -> Result<Outcome> {
    let d = complex.dim().ok_or(Error::EmptySet)? + 1;
    let strong = c.check == Check::StronglyLinked;
    let k = c.k.unwrap_or(if strong { d / 2 } else { (d + 1) / 2 });
    let (g, ids) = complex.graph();
    let symmetry = if c.symmetry {
        if c.instance.kind != InstanceKind::Cube {
            return Err(Error::InvalidProblem("symmetry reduction needs a cube instance".into()));
        }
        Some(CubeSymmetry::new(d)?)
    } else {
        None
    };
    let opts = VerifyOptions {
        mode: c.mode,
        symmetry,
        budget: c.budget,
        jobs: c.jobs,
    };
    let v: Verdict = if strong {
        verify_strongly_linked(&g, k, &opts)?
    } else {
        verify_k_linked(&g, k, &opts)?
    };
    let mut tally = Tally {
        checked: v.instances_checked,
        failures: v.failures,
        ..Tally::default()
    };
    tally.witness = v.witness.map(|w| {
        let pairs: Vec<(usize, usize)> = w.pairs.iter().map(|&(s, t)| (ids[s], ids[t])).collect();
        let forbidden: Vec<usize> = w.forbidden.iter().map(|&x| ids[x]).collect();
        terminal_witness(complex, &pairs, &forbidden)
    });
    Ok(Outcome { tally, orbits: v.orbits })
}

fn cube_dim(c: &Campaign) -> Result<usize> {
    if c.instance.kind != InstanceKind::Cube {
        return Err(Error::InvalidProblem(format!("{} needs a cube instance", c.check.name())));
    }
    Ok(c.instance.dim)
}

fn lemma6(c: &Campaign) -> Result<Tally<Value>> {
    let d = cube_dim(c)?;
    let n = 1usize << d;
    let check = |set: &[u32], tally: &mut Tally<Value>| {
        tally.checked += 1;
        let pairs = associated_mask(set).count_ones() as usize;
        if pairs + 1 > set.len() {
            tally.fail(|| json!({ "set": set, "associated": pairs }));
        }
    };
    match c.mode {
        Mode::Exhaustive => {
            if d > 4 {
                return Err(Error::Unsupported(format!(
                    "exhaustive lemma6 needs d <= 4, use sampled mode for d = {d}"
                )));
            }
            let total = 1u64 << n;
            let chunks: Vec<u64> = (0..total.div_ceil(1 << 12)).collect();
            let parts = pool(c.jobs)?.install(|| {
                use rayon::prelude::*;
                chunks
                    .par_iter()
                    .map(|&ch| {
                        let mut tally = Tally::default();
                        let mut set = Vec::with_capacity(n);
                        for m in (ch << 12).max(1)..((ch + 1) << 12).min(total) {
                            set.clear();
                            set.extend((0..n as u32).filter(|&v| m >> v & 1 == 1));
                            check(&set, &mut tally);
                        }
                        tally
                    })
                    .collect::<Vec<_>>()
            });
            Ok(parts.into_iter().fold(Tally::default(), Tally::merge))
        }
        Mode::Sampled { n: samples, seed } => {
            let universe: Vec<usize> = (0..n).collect();
            sweep_sampled(samples, seed, c.jobs, |rng, tally| {
                let size = rng.gen_range(1..=(2 * d).min(n));
                let set: Vec<u32> = sample_subset(rng, &universe, size).into_iter().map(|v| v as u32).collect();
                check(&set, tally);
                Ok(())
            })
        }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))
}

/// Connectivity of the graph with `removed` deleted, on masks.
fn connected_without(adj: &[Mask], all: Mask, removed: Mask) -> bool {
    let left = all & !removed;
    if left == 0 {
        return true;
    }
    let mut seen = bit(left.trailing_zeros() as usize);
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0;
        for v in bits(frontier) {
            next |= adj[v];
        }
        frontier = next & left & !seen;
        seen |= frontier;
    }
    seen == left
}

fn host_masks(g: &Graph) -> Result<(Vec<Mask>, Mask)> {
    let adj = g
        .masks()
        .ok_or_else(|| Error::Unsupported("checks need at most 128 vertices".into()))?;
    let all = if adj.len() == 128 { Mask::MAX } else { bit(adj.len()) - 1 };
    Ok((adj, all))
}

fn separators(c: &Campaign, complex: &PolytopalComplex) -> Result<Tally<Value>> {
    let d = complex.dim().ok_or(Error::EmptySet)? + 1;
    let size = c.k.unwrap_or(d);
    let (g, ids) = complex.graph();
    let (adj, all) = host_masks(&g)?;
    let check = |set: &[usize], tally: &mut Tally<Value>| {
        tally.checked += 1;
        let m = set.iter().fold(0, |m, &v| m | bit(v));
        if connected_without(&adj, all, m) {
            return;
        }
        tally.branch("separator");
        if set.iter().any(|&v| adj[v] & m != 0) {
            tally.fail(|| {
                let orig: Vec<usize> = set.iter().map(|&v| ids[v]).collect();
                json!({ "separator": orig, "labels": orig.iter().map(|&v| complex.label(v)).collect::<Vec<_>>() })
            });
        }
    };
    let universe: Vec<usize> = (0..g.n()).collect();
    if size > g.n() {
        return Err(Error::InvalidProblem(format!("separator size {size} exceeds {} vertices", g.n())));
    }
    match c.mode {
        Mode::Exhaustive => sweep_exhaustive(&universe, &[], size, c.jobs, |set, tally| {
            check(set, tally);
            Ok(())
        }),
        Mode::Sampled { n, seed } => sweep_sampled(n, seed, c.jobs, |rng, tally| {
            check(&sample_subset(rng, &universe, size), tally);
            Ok(())
        }),
    }
}

fn k23(complex: &PolytopalComplex) -> Tally<Value> {
    let (g, _) = complex.graph();
    let mut tally = Tally {
        checked: 1,
        ..Tally::default()
    };
    if contains_k23(&g) {
        tally.fail(|| json!({ "contains_k23": true }));
    }
    tally
}

/// Reorders a pairing so that the pair holding `c` comes first, from `c`.
fn center_first(pairs: &mut [(usize, usize)], c: usize) {
    let i = pairs.iter().position(|&(s, t)| s == c || t == c).unwrap();
    pairs.swap(0, i);
    if pairs[0].1 == c {
        pairs[0] = (c, pairs[0].0);
    }
}

fn star_lemma(c: &Campaign, complex: &PolytopalComplex, center: Option<usize>) -> Result<Tally<Value>> {
    let center = center.unwrap_or(0);
    let star = if c.instance.kind == InstanceKind::StarOfVertex {
        complex.clone()
    } else {
        complex.star(complex.vertex_handle(center)?)?
    };
    let linker = StarLinker::new(&star, center)?.with_budget(c.budget);
    let verts = linker.vertex_mask();
    let adj = linker.frame().adj.clone();
    let host = star.universe_graph();
    let k = (linker.dim() + 1) / 2;
    let others: Vec<usize> = bits(verts & !bit(center)).collect();
    let check = |pairs: &[(usize, usize)], tally: &mut Tally<Value>| -> Result<()> {
        tally.checked += 1;
        let linked = solve_masked(&adj, verts, pairs, c.budget)?.is_some();
        let df = linker.configuration(pairs)?.is_some();
        let problem = match linker.link(pairs) {
            Ok(StarOutcome::Linked { linkage, branch }) => {
                tally.branch(branch);
                if !linked {
                    Some("linked where the oracle finds no linkage".to_string())
                } else if let Err(e) = linkage.validate(&host, pairs, &[]) {
                    Some(e.to_string())
                } else {
                    None
                }
            }
            Ok(StarOutcome::Refused { .. }) => {
                tally.branch("refused");
                linked.then(|| "refused a linked instance".to_string())
            }
            Err(e @ Error::BudgetExceeded(_)) => return Err(e),
            Err(e) => Some(e.to_string()),
        };
        let problem = problem.or_else(|| (linked == df).then(|| format!("oracle linked = {linked}, dF = {df}")));
        if let Some(why) = problem {
            tally.fail(|| json!({ "instance": terminal_witness(&star, pairs, &[]), "reason": why }));
        }
        Ok(())
    };
    match c.mode {
        Mode::Exhaustive => sweep_exhaustive(&others, &[center], 2 * k - 1, c.jobs, |set, tally| {
            let mut items = vec![center];
            items.extend(set.iter().copied().filter(|&v| v != center));
            for pairs in pairings(&items) {
                check(&pairs, tally)?;
            }
            Ok(())
        }),
        Mode::Sampled { n, seed } => sweep_sampled(n, seed, c.jobs, |rng, tally| {
            let mut items = sample_subset(rng, &others, 2 * k - 1);
            items.push(center);
            let mut pairs = sample_pairing(rng, &items);
            center_first(&mut pairs, center);
            check(&pairs, tally)
        }),
    }
}

/// Every vertex star: antistars of its facets are `(d-2)`-connected, and the
/// structural claims on `S12` hold for every valid frame `(s2, F1, F12)`.
fn technical(c: &Campaign, complex: &PolytopalComplex) -> Result<Tally<Value>> {
    let d = complex.dim().ok_or(Error::EmptySet)? + 1;
    let verts = complex.vertex_ids();
    let per_vertex = |s1: usize, pick: Option<&mut dyn FnMut(usize) -> usize>| -> Result<Tally<Value>> {
        let mut tally = Tally::default();
        let star = complex.star(complex.vertex_handle(s1)?)?;
        let facets = star.facets();
        let fsets: Vec<Vec<usize>> = facets.iter().map(|&f| star.face(f).map(<[usize]>::to_vec)).collect::<Result<_>>()?;
        let mut frames = Vec::new();
        for (i, &f) in facets.iter().enumerate() {
            if pick.is_none() {
                tally.checked += 1;
                tally.branch("antistar");
                let (g, _) = star.antistar(f)?.graph();
                if !is_k_connected(&g, d - 2) {
                    tally.fail(|| json!({ "center": s1, "facet": fsets[i], "claim": "antistar connectivity" }));
                }
            }
            for s2 in star.vertex_ids() {
                if s2 == s1 || fsets[i].contains(&s2) {
                    continue;
                }
                for (j, &f12) in facets.iter().enumerate() {
                    if fsets[j].contains(&s2) {
                        frames.push((s2, f, f12, i, j));
                    }
                }
            }
        }
        let chosen: Vec<usize> = match pick {
            Some(p) => vec![p(frames.len())],
            None => (0..frames.len()).collect(),
        };
        for fi in chosen {
            let (s2, f1, f12, i, j) = frames[fi];
            tally.checked += 1;
            tally.branch("frame");
            let r = technical_lemma_check(&star, s1, s2, f1, f12)?;
            if !r.holds() {
                tally.fail(|| {
                    json!({ "s1": s1, "s2": s2, "f1": fsets[i], "f12": fsets[j], "report": r })
                });
            }
        }
        Ok(tally)
    };
    match c.mode {
        Mode::Exhaustive => {
            use rayon::prelude::*;
            let parts = pool(c.jobs)?.install(|| {
                verts
                    .par_iter()
                    .map(|&s1| per_vertex(s1, None))
                    .collect::<Result<Vec<_>>>()
            })?;
            Ok(parts.into_iter().fold(Tally::default(), Tally::merge))
        }
        Mode::Sampled { n, seed } => sweep_sampled(n, seed, c.jobs, |rng, tally| {
            let s1 = verts[rng.gen_range(0..verts.len())];
            let mut pick = |len: usize| rng.gen_range(0..len);
            let part = per_vertex(s1, Some(&mut pick))?;
            *tally = std::mem::take(tally).merge(part);
            Ok(())
        }),
    }
}

fn construct(c: &Campaign, complex: &PolytopalComplex) -> Result<Tally<Value>> {
    if c.instance.kind == InstanceKind::StarOfVertex {
        return Err(Error::InvalidProblem("link_construct needs a polytope instance; use star_lemma".into()));
    }
    let linker = PolytopeLinker::new(complex)?.with_budget(c.budget);
    let d = linker.dim();
    let even = d % 2 == 0;
    let size = d + 1;
    let host = complex.universe_graph();
    let verts = complex.vertex_ids();
    let check = |pairs: &[(usize, usize)], x: Option<usize>, tally: &mut Tally<Value>| -> Result<()> {
        tally.checked += 1;
        let forbidden: Vec<usize> = x.into_iter().collect();
        let got = match x {
            Some(x) => linker.strong_link(pairs, x),
            None => linker.link(pairs),
        };
        let problem = match got {
            Ok(out) => {
                tally.branch(out.branch);
                if let Some(sb) = out.star_branch {
                    tally.branch(&format!("star.{sb}"));
                }
                x_valid(&out.linkage, &host, pairs, &forbidden).err()
            }
            Err(e @ Error::BudgetExceeded(_)) => return Err(e),
            Err(e) => Some(e.to_string()),
        };
        if let Some(why) = problem {
            tally.fail(|| json!({ "instance": terminal_witness(complex, pairs, &forbidden), "reason": why }));
        }
        Ok(())
    };
    match c.mode {
        Mode::Exhaustive => sweep_exhaustive(&verts, &[], size, c.jobs, |set, tally| {
            if even {
                for (xi, &x) in set.iter().enumerate() {
                    let rest: Vec<usize> = set.iter().enumerate().filter(|&(i, _)| i != xi).map(|(_, &v)| v).collect();
                    for pairs in pairings(&rest) {
                        check(&pairs, Some(x), tally)?;
                    }
                }
            } else {
                for pairs in pairings(set) {
                    check(&pairs, None, tally)?;
                }
            }
            Ok(())
        }),
        Mode::Sampled { n, seed } => sweep_sampled(n, seed, c.jobs, |rng, tally| {
            let mut set = sample_subset(rng, &verts, size);
            let x = even.then(|| set.swap_remove(rng.gen_range(0..set.len())));
            set.sort_unstable();
            let pairs = sample_pairing(rng, &set);
            check(&pairs, x, tally)
        }),
    }
}

/// Validity plus the requirement that no path passes through another
/// terminal.
fn x_valid(l: &Linkage, g: &Graph, pairs: &[(usize, usize)], forbidden: &[usize]) -> std::result::Result<(), String> {
    l.validate(g, pairs, forbidden).map_err(|e| e.to_string())?;
    let x: Mask = pairs.iter().fold(0, |m, &(s, t)| m | bit(s) | bit(t));
    for p in &l.paths {
        if p[1..p.len() - 1].iter().any(|&v| x & bit(v) != 0) {
            return Err(format!("path {p:?} passes through a terminal"));
        }
    }
    Ok(())
}
