//! Exhaustive and sampled linkedness campaigns.
//!
//! Terminal sets are enumerated in lexicographic order and split into chunks
//! by their first two elements; chunks run in parallel and merge in order, so
//! counts and the reported witness do not depend on the schedule.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

use super::search::{solve_masked, DEFAULT_BUDGET};
use super::symmetry::CubeSymmetry;
use super::LinkageProblem;
use crate::error::{Error, Result};
use crate::graph::{bit, Graph, Mask};

/// Lexicographic `r`-subsets of `0..n`.
pub fn combinations(n: usize, r: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (r <= n).then(|| (0..r).collect());
    std::iter::from_fn(move || {
        let out = cur.take()?;
        let mut next = out.clone();
        let mut i = r;
        while i > 0 {
            i -= 1;
            if next[i] < n - r + i {
                next[i] += 1;
                for j in i + 1..r {
                    next[j] = next[j - 1] + 1;
                }
                cur = Some(next);
                break;
            }
        }
        Some(out)
    })
}

/// All perfect matchings of `items` in lexicographic order; each pair keeps
/// the order of `items`, so sorted input gives pairs sorted by least element.
pub fn pairings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    if items.len() % 2 == 1 {
        return Vec::new();
    }
    let first = items[0];
    let mut out = Vec::new();
    for j in 1..items.len() {
        let rest: Vec<usize> = items[1..]
            .iter()
            .enumerate()
            .filter(|&(i, _)| i + 1 != j)
            .map(|(_, &v)| v)
            .collect();
        for mut tail in pairings(&rest) {
            tail.insert(0, (first, items[j]));
            out.push(tail);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Sampled { n: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    Counterexample,
    SampledPass,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub mode: Mode,
    /// Reduce terminal sets to orbit representatives; the graph must be the
    /// cube graph of the group's dimension.
    pub symmetry: Option<CubeSymmetry>,
    pub budget: u64,
    pub jobs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: Mode::Exhaustive,
            symmetry: None,
            budget: DEFAULT_BUDGET,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(rename = "checked")]
    pub instances_checked: u64,
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbits: Option<u64>,
    pub witness: Option<LinkageProblem>,
    pub elapsed_ms: u64,
    pub seed: Option<u64>,
}

/// Per-chunk counters; merging keeps the earliest witness.
#[derive(Clone, Debug)]
pub(crate) struct Tally<W> {
    pub checked: u64,
    pub failures: u64,
    pub orbits: u64,
    pub witness: Option<W>,
    pub branches: BTreeMap<String, u64>,
}

impl<W> Default for Tally<W> {
    fn default() -> Self {
        Tally {
            checked: 0,
            failures: 0,
            orbits: 0,
            witness: None,
            branches: BTreeMap::new(),
        }
    }
}

impl<W> Tally<W> {
    pub fn fail(&mut self, w: impl FnOnce() -> W) {
        self.failures += 1;
        if self.witness.is_none() {
            self.witness = Some(w());
        }
    }

    pub fn branch(&mut self, name: &str) {
        *self.branches.entry(name.to_string()).or_default() += 1;
    }

    pub fn merge(mut self, other: Tally<W>) -> Self {
        self.checked += other.checked;
        self.failures += other.failures;
        self.orbits += other.orbits;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        for (k, v) in other.branches {
            *self.branches.entry(k).or_default() += v;
        }
        self
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))
}

fn merge_all<W>(parts: Vec<Tally<W>>) -> Tally<W> {
    parts.into_iter().fold(Tally::default(), Tally::merge)
}

/// Calls `f` on every `size`-subset of `universe` joined with `fixed`, each
/// given sorted, in lexicographic order of the chosen positions.
pub(crate) fn sweep_exhaustive<W, F>(
    universe: &[usize],
    fixed: &[usize],
    size: usize,
    jobs: usize,
    f: F,
) -> Result<Tally<W>>
where
    W: Send,
    F: Fn(&[usize], &mut Tally<W>) -> Result<()> + Sync,
{
    let m = universe.len();
    let prefixes: Vec<Vec<usize>> = if size >= 2 {
        combinations(m, 2).filter(|p| m - p[1] > size - 2).collect()
    } else {
        vec![Vec::new()]
    };
    let run = |prefix: &Vec<usize>| -> Result<Tally<W>> {
        let mut tally = Tally::default();
        let start = prefix.last().map_or(0, |&p| p + 1);
        let mut set = Vec::with_capacity(fixed.len() + size);
        for tail in combinations(m - start, size - prefix.len()) {
            set.clear();
            set.extend_from_slice(fixed);
            set.extend(prefix.iter().map(|&i| universe[i]));
            set.extend(tail.iter().map(|&i| universe[start + i]));
            set.sort_unstable();
            f(&set, &mut tally)?;
        }
        Ok(tally)
    };
    let parts = pool(jobs)?.install(|| prefixes.par_iter().map(run).collect::<Result<Vec<_>>>())?;
    Ok(merge_all(parts))
}

pub(crate) const SAMPLE_CHUNK: u64 = 4096;

/// Calls `f` `samples` times; chunk `c` of [`SAMPLE_CHUNK`] draws uses stream
/// `c` of a generator seeded with `seed`.
pub(crate) fn sweep_sampled<W, F>(samples: u64, seed: u64, jobs: usize, f: F) -> Result<Tally<W>>
where
    W: Send,
    F: Fn(&mut ChaCha8Rng, &mut Tally<W>) -> Result<()> + Sync,
{
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let run = |c: u64| -> Result<Tally<W>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c);
        let mut tally = Tally::default();
        let count = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
        for _ in 0..count {
            f(&mut rng, &mut tally)?;
        }
        Ok(tally)
    };
    let parts = pool(jobs)?.install(|| (0..chunks).into_par_iter().map(run).collect::<Result<Vec<_>>>())?;
    Ok(merge_all(parts))
}

/// A uniformly random `size`-subset of `universe`, sorted.
pub(crate) fn sample_subset(rng: &mut impl Rng, universe: &[usize], size: usize) -> Vec<usize> {
    let mut set: Vec<usize> = rand::seq::index::sample(rng, universe.len(), size)
        .into_iter()
        .map(|i| universe[i])
        .collect();
    set.sort_unstable();
    set
}

/// A uniformly random pairing of `items`, normalized to enumeration order.
pub(crate) fn sample_pairing(rng: &mut impl Rng, items: &[usize]) -> Vec<(usize, usize)> {
    let mut shuffled = items.to_vec();
    shuffled.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = shuffled
        .chunks(2)
        .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
        .collect();
    pairs.sort_unstable();
    pairs
}

struct Host {
    adj: Vec<Mask>,
    all: Mask,
}

impl Host {
    fn new(g: &Graph) -> Result<Self> {
        let adj = g
            .masks()
            .ok_or_else(|| Error::Unsupported("verification needs at most 128 vertices".into()))?;
        let all = if adj.len() == 128 { Mask::MAX } else { bit(adj.len()) - 1 };
        Ok(Host { adj, all })
    }

    fn linked(&self, pairs: &[(usize, usize)], forbidden: &[usize], budget: u64) -> Result<bool> {
        let allowed = forbidden.iter().fold(self.all, |m, &v| m & !bit(v));
        Ok(solve_masked(&self.adj, allowed, pairs, budget)?.is_some())
    }
}

fn check_symmetry(g: &Graph, sym: &CubeSymmetry) -> Result<()> {
    let d = sym.dim();
    let is_cube = g.n() == 1 << d
        && (0..g.n()).all(|v| g.neighbors(v).len() == d && g.neighbors(v).iter().all(|&w| (v ^ w).count_ones() == 1));
    if is_cube {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!(
            "symmetry reduction needs the cube graph Q_{d}"
        )))
    }
}

type Witness = (Vec<(usize, usize)>, Vec<usize>);

/// `size` terminals, `unpaired` of which (0 or 1) are forbidden instead of
/// paired.
fn verify_shape(g: &Graph, k: usize, unpaired: usize, opts: &VerifyOptions) -> Result<Verdict> {
    let start = Instant::now();
    let size = 2 * k + unpaired;
    if k == 0 || k > 4 {
        return Err(Error::InvalidProblem(format!("k = {k} outside 1..=4")));
    }
    if g.n() < size {
        return Err(Error::InvalidProblem(format!(
            "{} vertices cannot hold {size} terminals",
            g.n()
        )));
    }
    let host = Host::new(g)?;
    let budget = opts.budget;
    // Checks every pairing for one terminal set.
    let each_instance = |set: &[usize], tally: &mut Tally<Witness>| -> Result<()> {
        for (ui, &x) in set.iter().enumerate().take(if unpaired == 1 { set.len() } else { 1 }) {
            let (rest, forbidden): (Vec<usize>, Vec<usize>) = if unpaired == 1 {
                let rest = set.iter().enumerate().filter(|&(i, _)| i != ui).map(|(_, &v)| v).collect();
                (rest, vec![x])
            } else {
                (set.to_vec(), Vec::new())
            };
            for pairs in pairings(&rest) {
                tally.checked += 1;
                if !host.linked(&pairs, &forbidden, budget)? {
                    tally.fail(|| (pairs.clone(), forbidden.clone()));
                }
            }
        }
        Ok(())
    };
    let universe: Vec<usize> = (0..g.n()).collect();
    let (tally, seed, exhaustive) = match opts.mode {
        Mode::Exhaustive => {
            let tally = match &opts.symmetry {
                Some(sym) => {
                    check_symmetry(g, sym)?;
                    sweep_exhaustive(&universe[1..], &[0], size - 1, opts.jobs, |set, tally| {
                        if sym.is_canonical(set) {
                            tally.orbits += 1;
                            each_instance(set, tally)?;
                        }
                        Ok(())
                    })?
                }
                None => sweep_exhaustive(&universe, &[], size, opts.jobs, each_instance)?,
            };
            (tally, None, true)
        }
        Mode::Sampled { n, seed } => {
            let tally = sweep_sampled(n, seed, opts.jobs, |rng, tally: &mut Tally<Witness>| {
                let mut set = sample_subset(rng, &universe, size);
                let forbidden = if unpaired == 1 {
                    vec![set.swap_remove(rng.gen_range(0..set.len()))]
                } else {
                    Vec::new()
                };
                set.sort_unstable();
                let pairs = sample_pairing(rng, &set);
                tally.checked += 1;
                if !host.linked(&pairs, &forbidden, budget)? {
                    tally.fail(|| (pairs, forbidden));
                }
                Ok(())
            })?;
            (tally, Some(seed), false)
        }
    };
    let status = match (tally.failures, exhaustive) {
        (0, true) => Status::Verified,
        (0, false) => Status::SampledPass,
        _ => Status::Counterexample,
    };
    let witness = tally
        .witness
        .map(|(pairs, forbidden)| LinkageProblem {
            graph: g.clone(),
            pairs,
            forbidden,
        });
    log::info!(
        "campaign finished: {:?}, {} instances, {} failures",
        status,
        tally.checked,
        tally.failures
    );
    Ok(Verdict {
        status,
        instances_checked: tally.checked,
        failures: tally.failures,
        orbits: opts.symmetry.as_ref().filter(|_| exhaustive).map(|_| tally.orbits),
        witness,
        elapsed_ms: start.elapsed().as_millis() as u64,
        seed,
    })
}

/// Checks that every `2k` vertices, under every pairing, are linked.
pub fn verify_k_linked(g: &Graph, k: usize, opts: &VerifyOptions) -> Result<Verdict> {
    verify_shape(g, k, 0, opts)
}

/// Checks every `2k + 1` vertices with one of them forbidden and the other
/// `2k` paired in every way.
pub fn verify_strongly_linked(g: &Graph, k: usize, opts: &VerifyOptions) -> Result<Verdict> {
    verify_shape(g, k, 1, opts)
}
