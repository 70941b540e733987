//! Unit vertex-capacity max-flow for disjoint A-B paths.

use std::collections::VecDeque;

struct Net {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u8>,
}

impl Net {
    fn new(nodes: usize) -> Self {
        Net {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, u: usize, v: usize) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(1);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut via = vec![usize::MAX; self.head.len()];
        let mut queue = VecDeque::from([s]);
        via[s] = usize::MAX - 1;
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let w = self.to[e];
                if self.cap[e] > 0 && via[w] == usize::MAX {
                    via[w] = e;
                    if w == t {
                        let mut x = t;
                        while x != s {
                            let e = via[x];
                            self.cap[e] -= 1;
                            self.cap[e ^ 1] += 1;
                            x = self.to[e ^ 1];
                        }
                        return true;
                    }
                    queue.push_back(w);
                }
            }
        }
        false
    }
}

/// Up to `limit` vertex-disjoint A-B paths among the allowed vertices, each
/// meeting A only at its first vertex and B only at its last.
pub(crate) fn disjoint_ab_paths(
    adj: &[Vec<usize>],
    allowed: &dyn Fn(usize) -> bool,
    a: &[usize],
    b: &[usize],
    limit: usize,
) -> Vec<Vec<usize>> {
    let n = adj.len();
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = Net::new(2 * n + 2);
    let mut in_a = vec![false; n];
    let mut in_b = vec![false; n];
    for &v in a {
        in_a[v] = true;
    }
    for &v in b {
        in_b[v] = true;
    }
    for v in (0..n).filter(|&v| allowed(v)) {
        net.add(2 * v, 2 * v + 1);
        for &w in &adj[v] {
            if allowed(w) {
                net.add(2 * v + 1, 2 * w);
            }
        }
    }
    for &v in a {
        if allowed(v) {
            net.add(s, 2 * v);
        }
    }
    for &v in b {
        if allowed(v) {
            net.add(2 * v + 1, t);
        }
    }
    let mut flow = 0;
    while flow < limit && net.augment(s, t) {
        flow += 1;
    }
    // Forward edges have even index; used ones have residual capacity 0.
    let used = |net: &Net, e: usize| e % 2 == 0 && net.cap[e] == 0;
    let mut paths = Vec::with_capacity(flow);
    let mut taken = vec![false; net.to.len()];
    for &e0 in &net.head[s].clone() {
        if !used(&net, e0) {
            continue;
        }
        let mut walk = Vec::new();
        let mut node = net.to[e0];
        while node != t {
            if node % 2 == 0 {
                walk.push(node / 2);
            }
            let next = net.head[node]
                .iter()
                .copied()
                .find(|&e| used(&net, e) && !taken[e])
                .expect("flow conservation");
            taken[next] = true;
            node = net.to[next];
        }
        let end = walk.iter().position(|&v| in_b[v]).expect("path ends in B");
        let start = walk[..=end].iter().rposition(|&v| in_a[v]).expect("path starts in A");
        paths.push(walk[start..=end].to_vec());
    }
    paths
}
