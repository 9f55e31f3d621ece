//! Brute-force GF(2) homology on dense bitsets, used to check zigzag diagrams
//! on small instances. Shares no reduction code with the zigzag engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flagcomplex::FlagComplex;
use crate::zigzag::PersistenceDiagram;

pub const DEFAULT_ORACLE_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn leading(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    fn test(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Gaussian elimination keyed by leading bit.
#[derive(Default)]
struct Echelon {
    pivots: std::collections::HashMap<usize, Bits>,
}

impl Echelon {
    /// Reduces `v` against the basis; inserts it if independent.
    fn insert(&mut self, mut v: Bits) -> bool {
        while let Some(lead) = v.leading() {
            match self.pivots.get(&lead) {
                Some(p) => v.xor(p),
                None => {
                    self.pivots.insert(lead, v);
                    return true;
                }
            }
        }
        false
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn check_cap(cx: &FlagComplex, cap: usize) -> Result<()> {
    if cx.len() > cap {
        return Err(Error::OracleCap {
            size: cx.len(),
            cap,
        });
    }
    Ok(())
}

/// Columns of `∂_p` as bitsets over the `(p-1)`-simplices.
fn boundary_columns(cx: &FlagComplex, p: usize) -> Vec<Bits> {
    if p == 0 || p > cx.max_dim() {
        return Vec::new();
    }
    let faces = cx.simplices(p - 1);
    cx.simplices(p)
        .iter()
        .map(|s| {
            let mut col = Bits::zeros(faces.len());
            for f in s.facets() {
                col.set(faces.binary_search(&f).expect("face-closed"));
            }
            col
        })
        .collect()
}

fn boundary_rank(cx: &FlagComplex, p: usize) -> usize {
    let mut e = Echelon::default();
    for col in boundary_columns(cx, p) {
        e.insert(col);
    }
    e.rank()
}

pub fn betti(cx: &FlagComplex, p: usize) -> Result<usize> {
    betti_capped(cx, p, DEFAULT_ORACLE_CAP)
}

/// `dim ker ∂_p − rank ∂_{p+1}`.
pub fn betti_capped(cx: &FlagComplex, p: usize, cap: usize) -> Result<usize> {
    check_cap(cx, cap)?;
    let n_p = cx.simplices(p).len();
    Ok(n_p - boundary_rank(cx, p) - boundary_rank(cx, p + 1))
}

/// Basis of the `p`-cycles of `cx`, as bitsets over `cx.simplices(p)`.
fn cycle_basis(cx: &FlagComplex, p: usize) -> Vec<Bits> {
    let n_p = cx.simplices(p).len();
    let unit = |j: usize| {
        let mut b = Bits::zeros(n_p);
        b.set(j);
        b
    };
    if p == 0 {
        return (0..n_p).map(unit).collect();
    }
    // Reduce boundary columns while tracking the chain that produced them;
    // a column reducing to zero gives a cycle.
    let mut pivots: std::collections::HashMap<usize, (Bits, Bits)> = Default::default();
    let mut cycles = Vec::new();
    for (j, mut col) in boundary_columns(cx, p).into_iter().enumerate() {
        let mut chain = unit(j);
        loop {
            match col.leading() {
                None => {
                    cycles.push(chain);
                    break;
                }
                Some(lead) => match pivots.get(&lead) {
                    Some((pc, pchain)) => {
                        col.xor(pc);
                        chain.xor(pchain);
                    }
                    None => {
                        pivots.insert(lead, (col, chain));
                        break;
                    }
                },
            }
        }
    }
    cycles
}

/// Rank of `H_p(sub) → H_p(sup)` induced by inclusion.
pub fn induced_map_rank(sub: &FlagComplex, sup: &FlagComplex, p: usize) -> Result<usize> {
    induced_map_rank_capped(sub, sup, p, DEFAULT_ORACLE_CAP)
}

pub fn induced_map_rank_capped(
    sub: &FlagComplex,
    sup: &FlagComplex,
    p: usize,
    cap: usize,
) -> Result<usize> {
    check_cap(sub, cap)?;
    check_cap(sup, cap)?;
    if !sub.is_subcomplex_of(sup) {
        return Err(Error::Mismatch("not a subcomplex".into()));
    }
    let sup_p = sup.simplices(p);
    let mut boundaries = Echelon::default();
    for col in boundary_columns(sup, p + 1) {
        boundaries.insert(col);
    }
    let b_rank = boundaries.rank();
    // rank = dim(Z_sub + B_sup) − dim B_sup
    let sub_p = sub.simplices(p);
    let to_sup: Vec<usize> = sub_p
        .iter()
        .map(|s| sup_p.binary_search(s).expect("subcomplex"))
        .collect();
    for z in cycle_basis(sub, p) {
        let mut v = Bits::zeros(sup_p.len());
        for (j, &k) in to_sup.iter().enumerate() {
            if z.test(j) {
                v.set(k);
            }
        }
        boundaries.insert(v);
    }
    Ok(boundaries.rank() - b_rank)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Betti {
        index: usize,
        p: usize,
        expected: usize,
        found: usize,
    },
    Rank {
        arrow: usize,
        p: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    /// `betti[t][p]` at every zigzag index.
    pub betti: Vec<Vec<usize>>,
    /// `map_rank[t][p]` for the arrow between `t` and `t + 1`.
    pub map_rank: Vec<Vec<usize>>,
    pub violations: Vec<Violation>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks interval counts against Betti numbers at every index and against
/// induced-map ranks across every arrow.
pub fn verify_diagram(
    diagram: &PersistenceDiagram,
    states: &[FlagComplex],
) -> Result<OracleReport> {
    if states.len() != diagram.n_indices() {
        return Err(Error::Mismatch(format!(
            "{} states for {} zigzag indices",
            states.len(),
            diagram.n_indices()
        )));
    }
    let dims = diagram.n_dims();
    let mut report = OracleReport {
        betti: Vec::new(),
        map_rank: Vec::new(),
        violations: Vec::new(),
    };
    for (t, cx) in states.iter().enumerate() {
        let mut row = Vec::with_capacity(dims);
        for p in 0..dims {
            let expected = betti(cx, p)?;
            let found = diagram.betti_at(p, t as u32);
            if expected != found {
                report.violations.push(Violation::Betti {
                    index: t,
                    p,
                    expected,
                    found,
                });
            }
            row.push(expected);
        }
        report.betti.push(row);
    }
    for t in 0..states.len().saturating_sub(1) {
        let (sub, sup) = if t % 2 == 1 {
            (&states[t], &states[t + 1])
        } else {
            (&states[t + 1], &states[t])
        };
        let mut row = Vec::with_capacity(dims);
        for p in 0..dims {
            let expected = induced_map_rank(sub, sup, p)?;
            let found = diagram
                .intervals(p)
                .iter()
                .filter(|iv| iv.contains(t as u32) && iv.contains(t as u32 + 1))
                .count();
            if expected != found {
                report.violations.push(Violation::Rank {
                    arrow: t,
                    p,
                    expected,
                    found,
                });
            }
            row.push(expected);
        }
        report.map_rank.push(row);
    }
    Ok(report)
}
