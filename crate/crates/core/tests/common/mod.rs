//! Shared helpers for integration tests: instance generators and an
//! independent barcode oracle.
//!
//! The oracle computes, for every index interval [b, d], the rank of the map
//! from the limit to the colimit of the homology zigzag restricted to [b, d].
//! That rank counts the bars containing [b, d], so Möbius inversion recovers
//! the full barcode. It is slow and only meant for tiny complexes.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zzt_core::flagcomplex::{expand, FlagComplex};
use zzt_core::{LayerStack, NeighborGraph, PointCloud};

#[derive(Clone, PartialEq, Eq)]
struct Bv(Vec<u64>);

impl Bv {
    fn zeros(n: usize) -> Self {
        Bv(vec![0; n.div_ceil(64).max(1)])
    }
    fn unit(n: usize, i: usize) -> Self {
        let mut v = Bv::zeros(n);
        v.flip(i);
        v
    }
    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn xor(&mut self, o: &Bv) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a ^= b;
        }
    }
    fn lead(&self) -> Option<usize> {
        (0..self.0.len())
            .rev()
            .find(|&w| self.0[w] != 0)
            .map(|w| w * 64 + 63 - self.0[w].leading_zeros() as usize)
    }
    fn ones(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..n).filter(|&i| self.get(i))
    }
}

/// Column elimination that tracks, per stored vector, a tag describing how
/// it was assembled.
struct Elim {
    piv: HashMap<usize, (Bv, Bv)>,
}

impl Elim {
    fn new() -> Self {
        Elim {
            piv: HashMap::new(),
        }
    }
    fn reduce(&self, mut v: Bv, mut t: Bv) -> (Bv, Bv) {
        while let Some(l) = v.lead() {
            match self.piv.get(&l) {
                Some((pv, pt)) => {
                    v.xor(pv);
                    t.xor(pt);
                }
                None => break,
            }
        }
        (v, t)
    }
    /// Returns the tag of the zero combination when `v` is dependent.
    fn insert(&mut self, v: Bv, t: Bv) -> Option<Bv> {
        let (v, t) = self.reduce(v, t);
        match v.lead() {
            Some(l) => {
                self.piv.insert(l, (v, t));
                None
            }
            None => Some(t),
        }
    }
}

fn rank(cols: &[Bv]) -> usize {
    let mut e = Elim::new();
    cols.iter()
        .filter(|c| e.insert((*c).clone(), Bv::zeros(1)).is_none())
        .count()
}

/// Basis of the null space, as combinations of the columns.
fn kernel(cols: &[Bv]) -> Vec<Bv> {
    let mut e = Elim::new();
    cols.iter()
        .enumerate()
        .filter_map(|(j, c)| e.insert(c.clone(), Bv::unit(cols.len(), j)))
        .collect()
}

fn boundary(cx: &FlagComplex, p: usize) -> Vec<Bv> {
    if p == 0 || p > cx.max_dim() {
        return Vec::new();
    }
    let faces = cx.simplices(p - 1);
    cx.simplices(p)
        .iter()
        .map(|s| {
            let mut v = Bv::zeros(faces.len());
            for f in s.facets() {
                v.flip(faces.binary_search(&f).unwrap());
            }
            v
        })
        .collect()
}

struct Homology {
    elim: Elim,
    reps: Vec<Bv>,
    cap: usize,
}

impl Homology {
    fn new(cx: &FlagComplex, p: usize) -> Self {
        let n = cx.simplices(p).len();
        let cycles = if p == 0 {
            (0..n).map(|i| Bv::unit(n, i)).collect()
        } else {
            kernel(&boundary(cx, p))
        };
        let cap = cycles.len();
        let mut elim = Elim::new();
        for b in boundary(cx, p + 1) {
            elim.insert(b, Bv::zeros(cap));
        }
        let mut reps = Vec::new();
        for z in cycles {
            if elim.insert(z.clone(), Bv::unit(cap, reps.len())).is_none() {
                reps.push(z);
            }
        }
        Homology { elim, reps, cap }
    }

    fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Coordinates of a cycle's class in the representative basis.
    fn coords(&self, c: Bv) -> Vec<bool> {
        let (v, t) = self.elim.reduce(c, Bv::zeros(self.cap));
        assert!(v.lead().is_none(), "not a cycle");
        (0..self.dim()).map(|i| t.get(i)).collect()
    }
}

/// Matrix (column per source basis vector) of H_p(sub) → H_p(sup).
fn induced(
    sub: &FlagComplex,
    hs: &Homology,
    sup: &FlagComplex,
    ht: &Homology,
    p: usize,
) -> Vec<Vec<bool>> {
    let (from, to) = (sub.simplices(p), sup.simplices(p));
    hs.reps
        .iter()
        .map(|z| {
            let mut c = Bv::zeros(to.len());
            for i in z.ones(from.len()) {
                c.flip(sup.index_of(&from[i]).expect("sub-complex"));
            }
            ht.coords(c)
        })
        .collect()
}

/// Intervals `(birth, death)` of `H_p` for the zigzag
/// `states[0] ⊇ states[1] ⊆ states[2] ⊇ …`, one entry per bar.
pub fn barcode(states: &[FlagComplex], p: usize) -> Vec<(u32, u32)> {
    let n = states.len();
    let homs: Vec<Homology> = states.iter().map(|s| Homology::new(s, p)).collect();
    // maps[t]: the arrow between t and t+1 as (source, target, matrix).
    let maps: Vec<(usize, usize, Vec<Vec<bool>>)> = (0..n - 1)
        .map(|t| {
            let (s, u) = if t % 2 == 0 { (t + 1, t) } else { (t, t + 1) };
            (s, u, induced(&states[s], &homs[s], &states[u], &homs[u], p))
        })
        .collect();

    let mut rk = vec![vec![0usize; n + 1]; n + 1];
    for b in 0..n {
        for d in b..n {
            rk[b][d] = lim_colim_rank(&homs, &maps, b, d);
        }
    }
    let at = |b: isize, d: usize| -> isize {
        if b < 0 || d >= n {
            0
        } else {
            rk[b as usize][d] as isize
        }
    };
    let mut out = Vec::new();
    for b in 0..n {
        for d in b..n {
            let bi = b as isize;
            let m = at(bi, d) - at(bi - 1, d) - at(bi, d + 1) + at(bi - 1, d + 1);
            assert!(m >= 0, "negative multiplicity at [{b}, {d}]");
            out.extend(std::iter::repeat_n((b as u32, d as u32), m as usize));
        }
    }
    out
}

fn lim_colim_rank(
    homs: &[Homology],
    maps: &[(usize, usize, Vec<Vec<bool>>)],
    b: usize,
    d: usize,
) -> usize {
    let mut off = vec![0usize; d + 2];
    for t in b..=d {
        off[t + 1] = off[t] + homs[t].dim();
    }
    let total = off[d + 1];
    if total == 0 {
        return 0;
    }
    let arrows = &maps[b..d];
    // Target offsets of the compatibility equations, one block per arrow.
    let mut eq_off = vec![0usize];
    for (_, u, _) in arrows {
        eq_off.push(eq_off.last().unwrap() + homs[*u].dim());
    }
    let n_eq = *eq_off.last().unwrap();

    // A: ⊕V_t → ⊕ V_target, v ↦ F v_s − v_u for every arrow.
    let mut a_cols = vec![Bv::zeros(n_eq); total];
    // R: relations ι_s(w) − ι_u(F w) spanning the colimit quotient.
    let mut r_cols = Vec::new();
    for (k, (s, u, f)) in arrows.iter().enumerate() {
        for (j, col) in f.iter().enumerate() {
            let mut r = Bv::zeros(total);
            r.flip(off[*s] + j);
            for (i, &bit) in col.iter().enumerate() {
                if bit {
                    a_cols[off[*s] + j].flip(eq_off[k] + i);
                    r.flip(off[*u] + i);
                }
            }
            r_cols.push(r);
        }
        for i in 0..homs[*u].dim() {
            a_cols[off[*u] + i].flip(eq_off[k] + i);
        }
    }
    let lim = kernel(&a_cols);
    let mut cols = r_cols.clone();
    for v in &lim {
        let mut e = Bv::zeros(total);
        for i in off[b]..off[b + 1] {
            if v.get(i) {
                e.flip(i);
            }
        }
        cols.push(e);
    }
    rank(&cols) - rank(&r_cols)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph flag complexes, one per layer.
pub fn random_graph_layers(
    rng: &mut ChaCha8Rng,
    n: usize,
    layers: usize,
    density: f64,
    m: usize,
) -> Vec<FlagComplex> {
    (0..layers)
        .map(|_| {
            let mut pairs = Vec::new();
            for u in 0..n as u32 {
                for v in u + 1..n as u32 {
                    if rng.random_bool(density) {
                        pairs.push((u, v));
                    }
                }
            }
            expand(&NeighborGraph::from_pairs(n, &pairs).unwrap(), m).unwrap()
        })
        .collect()
}

/// Layers that perturb a shared base graph, so consecutive layers overlap.
pub fn drifting_graph_layers(
    rng: &mut ChaCha8Rng,
    n: usize,
    layers: usize,
    flip: f64,
    m: usize,
) -> Vec<FlagComplex> {
    let mut adj: Vec<bool> = (0..n * n).map(|_| rng.random_bool(0.4)).collect();
    (0..layers)
        .map(|_| {
            let mut pairs = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(flip) {
                        adj[u * n + v] = !adj[u * n + v];
                    }
                    if adj[u * n + v] {
                        pairs.push((u as u32, v as u32));
                    }
                }
            }
            expand(&NeighborGraph::from_pairs(n, &pairs).unwrap(), m).unwrap()
        })
        .collect()
}

/// Uniform random clouds in the unit cube.
pub fn random_stack(rng: &mut ChaCha8Rng, n: usize, layers: usize, dim: usize) -> LayerStack {
    let clouds = (0..layers)
        .map(|_| {
            let coords = (0..n * dim).map(|_| rng.random::<f32>()).collect();
            PointCloud::new(n, dim, coords).unwrap()
        })
        .collect();
    LayerStack::new(clouds).unwrap()
}
