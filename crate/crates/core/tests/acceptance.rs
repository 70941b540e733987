//! Acceptance suite: one pass/fail line per criterion, with the stated size
//! and time tolerances. Runs as a plain binary so every line is printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubelink::campaign::{run, Campaign, Check, Report};
use cubelink::complex::PolytopalComplex;
use cubelink::generators::{cube_boundary, glued_cubes, InstanceSpec};
use cubelink::oracle::{
    combinations, contains_k23, max_disjoint_paths, menger_paths, pairings, solve_linkage, LinkageProblem, Mode,
    Status, DEFAULT_BUDGET,
};
use cubelink::Graph;

type Outcome = Result<String, String>;

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn campaign(instance: InstanceSpec, check: Check, k: Option<usize>, mode: Mode) -> Result<Report, String> {
    let mut c = Campaign::new(instance, check);
    c.k = k;
    c.mode = mode;
    c.jobs = jobs();
    run(&c).map_err(|e| e.to_string())
}

fn expect(r: &Report, status: Status, checked: Option<u64>) -> Result<(), String> {
    if r.status != status {
        return Err(format!(
            "{} on d={}: {:?}, {} failures, witness {:?}",
            r.check.name(),
            r.instance.dim,
            r.status,
            r.failures,
            r.witness
        ));
    }
    if let Some(n) = checked {
        if r.checked != n {
            return Err(format!("{} on d={}: checked {} instead of {n}", r.check.name(), r.instance.dim, r.checked));
        }
    }
    Ok(())
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("{what} took {t:.1?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn sampled(n: u64) -> Mode {
    Mode::Sampled { n, seed: 20_240_601 }
}

fn in_two_face(c: &PolytopalComplex, xs: &[usize]) -> bool {
    c.faces_of_dim(2).iter().any(|f| xs.iter().all(|v| f.contains(v)))
}

fn q3_not_2_linked() -> Outcome {
    let start = Instant::now();
    let r = campaign(InstanceSpec::cube(3), Check::KLinked, Some(2), Mode::Exhaustive)?;
    expect(&r, Status::Counterexample, Some(210))?;
    let q3 = cube_boundary(3).unwrap();
    let g = q3.universe_graph();
    let mut bad = 0;
    for set in combinations(8, 4) {
        for pairs in pairings(&set) {
            let p = LinkageProblem::new(g.clone(), pairs, vec![]).unwrap();
            if solve_linkage(&p, DEFAULT_BUDGET).unwrap().is_none() {
                bad += 1;
                if !in_two_face(&q3, &set) {
                    return Err(format!("unlinked {set:?} is not in a 2-face"));
                }
            }
        }
    }
    if bad != r.failures {
        return Err(format!("campaign found {} failures, recount {bad}", r.failures));
    }
    within(start, Duration::from_secs(1), "Q3 sweep")?;
    Ok(format!("210 instances, {bad} counterexamples, all inside one 2-face"))
}

fn q4_strongly_2_linked() -> Outcome {
    let start = Instant::now();
    let r = campaign(InstanceSpec::cube(4), Check::StronglyLinked, Some(2), Mode::Exhaustive)?;
    expect(&r, Status::Verified, Some(65_520))?;
    within(start, Duration::from_secs(60), "Q4 strong sweep")?;
    Ok(format!("65520 instances verified in {} ms", r.elapsed_ms))
}

fn q5_3_linked() -> Outcome {
    let start = Instant::now();
    let mut c = Campaign::new(InstanceSpec::cube(5), Check::KLinked);
    c.k = Some(3);
    c.symmetry = true;
    c.jobs = jobs();
    let r = run(&c).map_err(|e| e.to_string())?;
    expect(&r, Status::Verified, None)?;
    let orbits = r.orbits.ok_or("no orbit count")?;
    within(start, Duration::from_secs(30 * 60), "Q5 orbit sweep")?;
    let start = Instant::now();
    let s = campaign(InstanceSpec::cube(5), Check::KLinked, Some(3), sampled(1_000_000))?;
    expect(&s, Status::SampledPass, Some(1_000_000))?;
    within(start, Duration::from_secs(120), "Q5 sampled sweep")?;
    Ok(format!(
        "{orbits} orbits ({} instances) verified in {} ms; 10^6 samples in {} ms",
        r.checked, r.elapsed_ms, s.elapsed_ms
    ))
}

fn associated_pair_bound() -> Outcome {
    let r3 = campaign(InstanceSpec::cube(3), Check::Lemma6, None, Mode::Exhaustive)?;
    expect(&r3, Status::Verified, Some(255))?;
    let r4 = campaign(InstanceSpec::cube(4), Check::Lemma6, None, Mode::Exhaustive)?;
    expect(&r4, Status::Verified, Some(65_535))?;
    for d in [5, 6] {
        let r = campaign(InstanceSpec::cube(d), Check::Lemma6, None, sampled(1_000_000))?;
        expect(&r, Status::SampledPass, Some(1_000_000))?;
    }
    Ok("255 + 65535 subsets exhaustive, 10^6 random subsets for d = 5, 6".into())
}

fn separators_independent() -> Outcome {
    let r3 = campaign(InstanceSpec::cube(3), Check::Separators, None, Mode::Exhaustive)?;
    expect(&r3, Status::Verified, Some(56))?;
    let r4 = campaign(InstanceSpec::cube(4), Check::Separators, None, Mode::Exhaustive)?;
    expect(&r4, Status::Verified, Some(1_820))?;
    let count = |r: &Report| r.branches.get("separator").copied().unwrap_or(0);
    Ok(format!("56 + 1820 candidates, {} + {} separators, all independent", count(&r3), count(&r4)))
}

fn no_k23() -> Outcome {
    let mut graphs: Vec<(String, Graph)> = (3..=5)
        .map(|d| (format!("Q{d}"), cube_boundary(d).unwrap().graph().0))
        .collect();
    for d in [3, 4] {
        graphs.push((format!("glued d={d}"), glued_cubes(d, 2).unwrap().graph().0));
    }
    for (name, g) in &graphs {
        if contains_k23(g) {
            return Err(format!("{name} contains K_2,3"));
        }
    }
    Ok(format!("{} graphs, none contains K_2,3", graphs.len()))
}

fn star_iff() -> Outcome {
    let start = Instant::now();
    let star = InstanceSpec {
        kind: cubelink::generators::InstanceKind::StarOfVertex,
        center: Some(0),
        ..InstanceSpec::cube(5)
    };
    let r = campaign(star.clone(), Check::StarLemma, None, Mode::Exhaustive)?;
    expect(&r, Status::Verified, Some(142_506 * 15))?;
    within(start, Duration::from_secs(3600), "Q5 star sweep")?;
    let refused = r.branches.get("refused").copied().unwrap_or(0);
    let start = Instant::now();
    let s = campaign(star, Check::StarLemma, None, sampled(100_000))?;
    expect(&s, Status::SampledPass, Some(100_000))?;
    within(start, Duration::from_secs(300), "Q5 star samples")?;
    Ok(format!(
        "{} instances, {refused} refused exactly where unlinked, {} branches covered, {} ms; 10^5 samples in {} ms",
        r.checked,
        r.branches.len() - 1,
        r.elapsed_ms,
        s.elapsed_ms
    ))
}

fn polytope_linkage() -> Outcome {
    let g4 = campaign(InstanceSpec::glued(4, 2), Check::StronglyLinked, Some(2), Mode::Exhaustive)?;
    expect(&g4, Status::Verified, Some(637_560))?;
    let g5 = campaign(InstanceSpec::glued(5, 2), Check::KLinked, Some(3), sampled(1_000_000))?;
    expect(&g5, Status::SampledPass, Some(1_000_000))?;
    let c5 = campaign(InstanceSpec::glued(5, 2), Check::LinkConstruct, None, sampled(1_000_000))?;
    expect(&c5, Status::SampledPass, Some(1_000_000))?;
    let c5q = campaign(InstanceSpec::cube(5), Check::LinkConstruct, None, sampled(100_000))?;
    expect(&c5q, Status::SampledPass, Some(100_000))?;
    Ok(format!(
        "glued d=4 strong: 637560 verified; glued d=5: 10^6 samples linked, 10^6 constructions valid {:?}",
        c5.branches.iter().filter(|(k, _)| !k.starts_with("star.")).collect::<Vec<_>>()
    ))
}

fn strong_construction() -> Outcome {
    let q4 = campaign(InstanceSpec::cube(4), Check::LinkConstruct, None, Mode::Exhaustive)?;
    expect(&q4, Status::Verified, Some(65_520))?;
    let g4 = campaign(InstanceSpec::glued(4, 2), Check::LinkConstruct, None, Mode::Exhaustive)?;
    expect(&g4, Status::Verified, Some(637_560))?;
    Ok(format!("Q4 {:?}, glued d=4 {:?}, all valid and avoiding x", q4.branches, g4.branches))
}

fn star_structure() -> Outcome {
    let mut frames = 0;
    let mut antistars = 0;
    for spec in [InstanceSpec::cube(4), InstanceSpec::cube(5), InstanceSpec::glued(4, 2), InstanceSpec::glued(5, 2)] {
        let r = campaign(spec, Check::TechnicalLemma, None, Mode::Exhaustive)?;
        expect(&r, Status::Verified, None)?;
        frames += r.branches.get("frame").copied().unwrap_or(0);
        antistars += r.branches.get("antistar").copied().unwrap_or(0);
    }
    Ok(format!("{antistars} facet antistars (d-2)-connected, {frames} frames pass all three claims"))
}

/// Linkage by trying every simple path for each pair in turn.
fn naive(g: &Graph, pairs: &[(usize, usize)], forbidden: &[usize]) -> bool {
    let mut blocked = vec![false; g.n()];
    for &x in forbidden {
        blocked[x] = true;
    }
    naive_by_release(g, pairs, &mut blocked)
}

/// Routes pairs in order; the terminals of unrouted pairs are off limits.
fn naive_by_release(g: &Graph, pairs: &[(usize, usize)], used: &mut Vec<bool>) -> bool {
    let Some((&(s, t), rest)) = pairs.split_first() else {
        return true;
    };
    let mut off = used.clone();
    for &(a, b) in rest {
        off[a] = true;
        off[b] = true;
    }
    let mut path = vec![s];
    let mut on = vec![false; g.n()];
    on[s] = true;
    fn dfs(
        g: &Graph,
        t: usize,
        rest: &[(usize, usize)],
        used: &mut Vec<bool>,
        off: &[bool],
        on: &mut Vec<bool>,
        path: &mut Vec<usize>,
    ) -> bool {
        let v = *path.last().unwrap();
        if v == t {
            let saved = used.clone();
            for &p in path.iter() {
                used[p] = true;
            }
            let ok = naive_by_release(g, rest, used);
            *used = saved;
            return ok;
        }
        for &w in g.neighbors(v) {
            if on[w] || (off[w] && w != t) {
                continue;
            }
            on[w] = true;
            path.push(w);
            let ok = dfs(g, t, rest, used, off, on, path);
            path.pop();
            on[w] = false;
            if ok {
                return true;
            }
        }
        false
    }
    dfs(g, t, rest, used, &off, &mut on, &mut path)
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn min_cut(g: &Graph, a: &[usize], b: &[usize]) -> usize {
    let n = g.n();
    let mut best = a.len().min(b.len());
    for s in 0u32..1 << n {
        let size = s.count_ones() as usize;
        if size >= best {
            continue;
        }
        let removed: Vec<bool> = (0..n).map(|v| s >> v & 1 == 1).collect();
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = a.iter().copied().filter(|&v| !removed[v]).collect();
        for &v in &stack {
            seen[v] = true;
        }
        let mut reached = false;
        while let Some(v) = stack.pop() {
            if b.contains(&v) {
                reached = true;
                break;
            }
            for &w in g.neighbors(v) {
                if !removed[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if !reached {
            best = size;
        }
    }
    best
}

fn oracle_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut corpus: Vec<Graph> = vec![
        cube_boundary(3).unwrap().graph().0,
        glued_cubes(3, 2).unwrap().graph().0,
    ];
    let q3 = cube_boundary(3).unwrap();
    corpus.push(q3.star(q3.vertex_handle(0).unwrap()).unwrap().graph().0);
    corpus.push(cube_boundary(4).unwrap().star(cube_boundary(4).unwrap().vertex_handle(5).unwrap()).unwrap().graph().0);
    corpus.retain(|g| g.n() <= 14);
    let mut cases = 0;
    let mut linked = 0;
    while cases < 1_500 {
        let g = if cases % 3 == 0 {
            corpus[cases / 3 % corpus.len()].clone()
        } else {
            let n = rng.gen_range(6..=12);
            {
            let p = rng.gen_range(0.2..0.5);
            random_graph(&mut rng, n, p)
        }
        };
        let n = g.n();
        let k = rng.gen_range(1..=3.min(n / 2));
        let extra = usize::from(n > 2 * k && rng.gen_bool(0.3));
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(&mut rng);
        let pairs: Vec<(usize, usize)> = (0..k).map(|i| (vs[2 * i], vs[2 * i + 1])).collect();
        let forbidden: Vec<usize> = vs[2 * k..2 * k + extra].to_vec();
        let p = LinkageProblem::new(g.clone(), pairs.clone(), forbidden.clone()).map_err(|e| e.to_string())?;
        let got = solve_linkage(&p, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        if let Some(l) = &got {
            l.check(&p).map_err(|e| e.to_string())?;
            linked += 1;
        }
        if got.is_some() != naive(&g, &pairs, &forbidden) {
            return Err(format!("oracle and enumerator disagree on {pairs:?} in {g:?}"));
        }
        cases += 1;
    }
    let mut triples = 0;
    while triples < 1_000 {
        let n = rng.gen_range(6..=12);
        let p = rng.gen_range(0.15..0.5);
        let g = random_graph(&mut rng, n, p);
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(&mut rng);
        let na = rng.gen_range(1..=3);
        let nb = rng.gen_range(1..=3);
        let a: Vec<usize> = vs[..na].to_vec();
        let b: Vec<usize> = vs[na - usize::from(rng.gen_bool(0.2))..][..nb].to_vec();
        let flow = max_disjoint_paths(&g, &a, &b);
        let cut = min_cut(&g, &a, &b);
        if flow != cut {
            return Err(format!("{flow} paths but min cut {cut} for {a:?} {b:?} in {g:?}"));
        }
        if flow > 0 {
            let paths = menger_paths(&g, &a, &b, flow).map_err(|e| e.to_string())?;
            if paths.map(|p| p.len()) != Some(flow) {
                return Err("menger_paths disagrees with the flow value".into());
            }
        }
        triples += 1;
    }
    Ok(format!("{cases} linkage cases ({linked} linked) and {triples} cut triples agree"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("q3 not 2-linked, obstructions in 2-faces", q3_not_2_linked),
        ("q4 strongly 2-linked", q4_strongly_2_linked),
        ("q5 3-linked (orbits + samples)", q5_3_linked),
        ("associated pairs bounded by |Z| - 1", associated_pair_bound),
        ("size-d separators are independent", separators_independent),
        ("no K_2,3 subgraph", no_k23),
        ("q5 star: linked iff not dF, constructions valid", star_iff),
        ("glued bicubes linked, constructions valid", polytope_linkage),
        ("even-d strong construction avoids x", strong_construction),
        ("star antistars and frames", star_structure),
        ("oracle self-consistency", oracle_consistency),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} [{t:.1?}]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} [{t:.1?}]: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
