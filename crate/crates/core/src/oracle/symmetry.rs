use crate::error::{Error, Result};

/// The hyperoctahedral group of `Q_d` acting on vertex ids: a coordinate
/// permutation followed by a reflection (xor with a mask).
#[derive(Clone, Debug)]
pub struct CubeSymmetry {
    d: usize,
    /// `tables[p][v]` is the image of `v` under the `p`-th permutation.
    tables: Vec<Vec<u16>>,
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for pos in 0..d {
            let mut q = p.clone();
            q.insert(pos, d - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

impl CubeSymmetry {
    pub fn new(d: usize) -> Result<Self> {
        if !(1..=7).contains(&d) {
            return Err(Error::DimensionOutOfRange(d, "1..=7"));
        }
        let tables = permutations(d)
            .into_iter()
            .map(|perm| {
                (0..1usize << d)
                    .map(|v| {
                        (0..d)
                            .filter(|&i| v >> i & 1 == 1)
                            .fold(0u16, |acc, i| acc | 1 << perm[i])
                    })
                    .collect()
            })
            .collect();
        Ok(CubeSymmetry { d, tables })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> usize {
        self.tables.len() << self.d
    }

    /// Image of `v` under group element `g` in `0..order()`.
    pub fn apply(&self, g: usize, v: usize) -> usize {
        let perm = g >> self.d;
        let flip = g & ((1 << self.d) - 1);
        self.tables[perm][v] as usize ^ flip
    }

    /// Whether the sorted set is the lexicographically least sorted image of
    /// itself. Only images containing 0 can beat a set that contains 0, so it
    /// suffices to translate each member to 0 before permuting.
    pub fn is_canonical(&self, set: &[usize]) -> bool {
        if set.first() != Some(&0) {
            return set.is_empty();
        }
        let mut image = vec![0usize; set.len()];
        for table in &self.tables {
            for &s in set {
                for (slot, &x) in image.iter_mut().zip(set) {
                    *slot = table[x ^ s] as usize;
                }
                image.sort_unstable();
                if image.as_slice() < set {
                    return false;
                }
            }
        }
        true
    }

    /// The lexicographically least sorted image of `set`.
    pub fn canonical(&self, set: &[usize]) -> Vec<usize> {
        let mut best: Option<Vec<usize>> = None;
        let mut image = vec![0usize; set.len()];
        for table in &self.tables {
            for &s in set {
                for (slot, &x) in image.iter_mut().zip(set) {
                    *slot = table[x ^ s] as usize;
                }
                image.sort_unstable();
                if best.as_ref().is_none_or(|b| image < *b) {
                    best = Some(image.clone());
                }
            }
        }
        best.unwrap_or_default()
    }
}
