use cubelink::cube::cube_graph;
use cubelink::oracle::{
    max_disjoint_paths, menger_paths, solve_linkage, CubeSymmetry, LinkageProblem, DEFAULT_BUDGET,
};
use cubelink::Graph;
use proptest::prelude::*;

fn graph_from(n: usize, bits: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if bits[k] {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    (5usize..=8).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.45), n * (n - 1) / 2)
            .prop_map(move |bits| graph_from(n, &bits))
    })
}

// Plain backtracking over simple paths, one pair at a time.
fn naive(g: &Graph, pairs: &[(usize, usize)], used: &mut Vec<bool>) -> bool {
    let Some((&(s, t), rest)) = pairs.split_first() else { return true };
    fn walk(g: &Graph, at: usize, t: usize, rest: &[(usize, usize)], used: &mut Vec<bool>) -> bool {
        if at == t {
            return naive(g, rest, used);
        }
        for &w in g.neighbors(at) {
            if !used[w] || w == t {
                let was = used[w];
                used[w] = true;
                if walk(g, w, t, rest, used) {
                    used[w] = was;
                    return true;
                }
                used[w] = was;
            }
        }
        false
    }
    walk(g, s, t, rest, used)
}

fn naive_linkable(g: &Graph, pairs: &[(usize, usize)], forbidden: &[usize]) -> bool {
    let mut used = vec![false; g.n()];
    for &v in forbidden.iter().chain(pairs.iter().flat_map(|(s, t)| [s, t])) {
        used[v] = true;
    }
    naive(g, pairs, &mut used)
}

fn min_cut(g: &Graph, a: &[usize], b: &[usize]) -> usize {
    let n = g.n();
    (0u32..1 << n)
        .filter(|&cut| {
            let removed: Vec<bool> = (0..n).map(|v| cut >> v & 1 == 1).collect();
            let mut seen = removed.clone();
            let mut stack: Vec<usize> = a.iter().copied().filter(|&v| !removed[v]).collect();
            for &v in &stack {
                seen[v] = true;
            }
            while let Some(v) = stack.pop() {
                if b.contains(&v) {
                    return false;
                }
                for &w in g.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            true
        })
        .map(|cut| cut.count_ones() as usize)
        .min()
        .unwrap()
}

fn split(n: usize, order: &[usize], k: usize) -> (Vec<(usize, usize)>, Vec<usize>) {
    let pairs = (0..k).map(|i| (order[2 * i], order[2 * i + 1])).collect();
    let forbidden = order[2 * k..].iter().copied().filter(|&v| v < n).take(1).collect();
    (pairs, forbidden)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn search_agrees_with_brute_force(
        g in arb_graph(),
        order in Just((0..8).collect::<Vec<usize>>()).prop_shuffle(),
        k in 1usize..=2,
        forbid in any::<bool>(),
    ) {
        let order: Vec<usize> = order.into_iter().filter(|&v| v < g.n()).collect();
        let (pairs, mut forbidden) = split(g.n(), &order, k);
        if !forbid {
            forbidden.clear();
        }
        let p = LinkageProblem::new(g.clone(), pairs.clone(), forbidden.clone()).unwrap();
        let found = solve_linkage(&p, DEFAULT_BUDGET).unwrap();
        if let Some(l) = &found {
            l.check(&p).unwrap();
        }
        prop_assert_eq!(found.is_some(), naive_linkable(&g, &pairs, &forbidden));
    }

    #[test]
    fn menger_count_equals_min_cut(
        g in arb_graph(),
        order in Just((0..8).collect::<Vec<usize>>()).prop_shuffle(),
        na in 1usize..=3,
        nb in 1usize..=2,
    ) {
        let vs: Vec<usize> = order.into_iter().filter(|&v| v < g.n()).collect();
        let (a, b) = (&vs[..na], &vs[na..na + nb]);
        let k = max_disjoint_paths(&g, a, b);
        prop_assert_eq!(k, min_cut(&g, a, b));
        if k > 0 {
            let paths = menger_paths(&g, a, b, k).unwrap().unwrap();
            for p in &paths {
                prop_assert!(a.contains(&p[0]) && b.contains(p.last().unwrap()));
                prop_assert!(p[1..].iter().all(|v| !a.contains(v)));
                prop_assert!(p[..p.len() - 1].iter().all(|v| !b.contains(v)));
            }
            let mut all: Vec<usize> = paths.concat();
            all.sort_unstable();
            prop_assert!(all.windows(2).all(|w| w[0] != w[1]));
        }
        if k < na.min(nb) {
            prop_assert!(menger_paths(&g, a, b, k + 1).unwrap().is_none());
        }
    }

    #[test]
    fn cube_symmetries_preserve_linkability(
        order in Just((0..16).collect::<Vec<usize>>()).prop_shuffle(),
        elem in 0usize..384,
    ) {
        let sym = CubeSymmetry::new(4).unwrap();
        let g = cube_graph(4).unwrap();
        let pairs = vec![(order[0], order[1]), (order[2], order[3])];
        let image: Vec<(usize, usize)> =
            pairs.iter().map(|&(s, t)| (sym.apply(elem, s), sym.apply(elem, t))).collect();
        for (u, v) in g.edges() {
            prop_assert!(g.has_edge(sym.apply(elem, u), sym.apply(elem, v)));
        }
        let solve = |pairs: Vec<(usize, usize)>| {
            let p = LinkageProblem::new(g.clone(), pairs, vec![]).unwrap();
            solve_linkage(&p, DEFAULT_BUDGET).unwrap().is_some()
        };
        prop_assert_eq!(solve(pairs), solve(image));
    }

    #[test]
    fn forbidding_more_never_helps(
        g in arb_graph(),
        order in Just((0..8).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let vs: Vec<usize> = order.into_iter().filter(|&v| v < g.n()).collect();
        let pairs = vec![(vs[0], vs[1]), (vs[2], vs[3])];
        let solve = |forbidden: Vec<usize>| {
            let p = LinkageProblem::new(g.clone(), pairs.clone(), forbidden).unwrap();
            solve_linkage(&p, DEFAULT_BUDGET).unwrap().is_some()
        };
        if solve(vec![vs[4]]) {
            prop_assert!(solve(vec![]));
        }
    }
}

#[test]
fn canonical_forms_are_orbit_invariants() {
    let sym = CubeSymmetry::new(3).unwrap();
    let set = vec![0, 3, 5];
    let c = sym.canonical(&set);
    assert!(sym.is_canonical(&c));
    for e in 0..sym.order() {
        let mut img: Vec<usize> = set.iter().map(|&v| sym.apply(e, v)).collect();
        img.sort_unstable();
        assert_eq!(sym.canonical(&img), c);
    }
}
