//! Zigzag persistence through an ordinary filtration.
//!
//! Every maximal run of presence of a simplex becomes one cell (an
//! *instance*) of a Δ-complex `K̂`, with an entry index `b` and a last-alive
//! index `d`. The zigzag is the levelset zigzag of the time projection on the
//! mapping telescope of the sequence, and the telescope collapses onto `K̂`
//! with sublevel sets = instances entered by `t` and superlevel sets =
//! instances alive at or after `t`. Its extended persistence is computed as
//! one ordinary filtration:
//!
//! ```text
//! ω,  K̂ by (entry ↑, dim ↑),  ω·σ for σ ∈ K̂ by (last-alive ↓, dim ↑)
//! ```
//!
//! and each persistence pair is translated back to a zigzag interval:
//!
//! | birth cell | death cell | condition | interval | dimension |
//! |------------|------------|-----------|----------|-----------|
//! | σ          | τ          | `b_τ > b_σ` | `[b_σ, b_τ - 1]` | dim σ |
//! | σ          | ω·τ        | `b_σ ≤ d_τ` | `[b_σ, d_τ]` | dim σ |
//! | σ          | ω·τ        | `b_σ > d_τ` | `[d_τ + 1, b_σ - 1]` | dim σ - 1 |
//! | ω·σ        | ω·τ        | `d_σ > d_τ` | `[d_τ + 1, d_σ]` | dim σ |
//!
//! Pairs of equal filtration value are zero-length and dropped. The cone
//! apex `ω` enters first and is the single unpaired cell.

use std::cmp::Reverse;
use std::collections::HashMap;

use smallvec::SmallVec;

use super::diagram::{Interval, PersistenceDiagram};
use super::filtration::{EventKind, ZigzagFiltration};
use crate::error::{Error, Result};
use crate::flagcomplex::Simplex;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Instance {
    dim: u8,
    entry: u32,
    last_alive: u32,
    facets: SmallVec<[u32; 6]>,
    live_cofaces: u32,
}

/// Replays the events, checking face/coface validity, and returns the
/// simplex instances with their lifetimes.
fn collect_instances(f: &ZigzagFiltration) -> Result<Vec<Instance>> {
    let mut live: HashMap<Simplex, u32> = HashMap::new();
    let mut instances: Vec<Instance> = Vec::new();
    let mut prev = 0u32;
    for ev in f.events() {
        f.check_event(prev, ev)?;
        prev = ev.time;
        match ev.kind {
            EventKind::Insert => {
                if live.contains_key(&ev.simplex) {
                    return Err(Error::InvalidFiltration(format!(
                        "{:?} inserted while present",
                        ev.simplex
                    )));
                }
                let mut facets = SmallVec::new();
                for face in ev.simplex.facets() {
                    let Some(&id) = live.get(&face) else {
                        return Err(Error::InvalidFiltration(format!(
                            "{:?} inserted before its face {face:?}",
                            ev.simplex
                        )));
                    };
                    instances[id as usize].live_cofaces += 1;
                    facets.push(id);
                }
                live.insert(ev.simplex.clone(), instances.len() as u32);
                instances.push(Instance {
                    dim: ev.simplex.dim() as u8,
                    entry: ev.time,
                    last_alive: NONE,
                    facets,
                    live_cofaces: 0,
                });
            }
            EventKind::Delete => {
                let Some(id) = live.remove(&ev.simplex) else {
                    return Err(Error::InvalidFiltration(format!(
                        "{:?} deleted but not present",
                        ev.simplex
                    )));
                };
                let inst = &mut instances[id as usize];
                if inst.live_cofaces > 0 {
                    return Err(Error::InvalidFiltration(format!(
                        "{:?} deleted while a coface remains",
                        ev.simplex
                    )));
                }
                inst.last_alive = ev.time - 1;
                let facets = inst.facets.clone();
                for fid in facets {
                    instances[fid as usize].live_cofaces -= 1;
                }
            }
        }
    }
    let last = f.final_index();
    for inst in &mut instances {
        if inst.last_alive == NONE {
            inst.last_alive = last;
        }
    }
    Ok(instances)
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Apex,
    Plain(u32),
    Cone(u32),
}

/// Zigzag persistence diagram of `f` over GF(2), dimensions `0..max_dim`.
pub fn compute_zigzag(f: &ZigzagFiltration) -> Result<PersistenceDiagram> {
    let instances = collect_instances(f)?;
    let n = instances.len();

    let mut plain_order: Vec<u32> = (0..n as u32).collect();
    plain_order.sort_by_key(|&i| {
        let s = &instances[i as usize];
        (s.entry, s.dim, i)
    });
    let mut cone_order: Vec<u32> = (0..n as u32).collect();
    cone_order.sort_by_key(|&i| {
        let s = &instances[i as usize];
        (Reverse(s.last_alive), s.dim, i)
    });

    let mut plain_pos = vec![0u32; n];
    let mut cone_pos = vec![0u32; n];
    for (rank, &i) in plain_order.iter().enumerate() {
        plain_pos[i as usize] = 1 + rank as u32;
    }
    for (rank, &i) in cone_order.iter().enumerate() {
        cone_pos[i as usize] = 1 + (n + rank) as u32;
    }

    let total = 2 * n + 1;
    let mut cells = Vec::with_capacity(total);
    let mut dims = Vec::with_capacity(total);
    let mut columns: Vec<Vec<u32>> = Vec::with_capacity(total);
    cells.push(Cell::Apex);
    dims.push(0u8);
    columns.push(Vec::new());
    for &i in &plain_order {
        let s = &instances[i as usize];
        let mut col: Vec<u32> = s
            .facets
            .iter()
            .map(|&fid| plain_pos[fid as usize])
            .collect();
        col.sort_unstable();
        cells.push(Cell::Plain(i));
        dims.push(s.dim);
        columns.push(col);
    }
    for &i in &cone_order {
        let s = &instances[i as usize];
        let mut col: Vec<u32> = if s.dim == 0 {
            vec![0, plain_pos[i as usize]]
        } else {
            std::iter::once(plain_pos[i as usize])
                .chain(s.facets.iter().map(|&fid| cone_pos[fid as usize]))
                .collect()
        };
        col.sort_unstable();
        cells.push(Cell::Cone(i));
        dims.push(s.dim + 1);
        columns.push(col);
    }

    let pairs = reduce(&mut columns, &dims);

    let m = f.max_dim();
    let mut out: Vec<Vec<Interval>> = vec![Vec::new(); m];
    let mut push = |p: usize, b: u32, d: u32| {
        if p < m {
            out[p].push(Interval::new(b, d));
        }
    };
    for (birth, death) in pairs {
        match (cells[birth as usize], cells[death as usize]) {
            (Cell::Plain(a), Cell::Plain(b)) => {
                let (sa, sb) = (&instances[a as usize], &instances[b as usize]);
                if sb.entry > sa.entry {
                    push(sa.dim as usize, sa.entry, sb.entry - 1);
                }
            }
            (Cell::Plain(a), Cell::Cone(b)) => {
                let (sa, sb) = (&instances[a as usize], &instances[b as usize]);
                if sa.entry <= sb.last_alive {
                    push(sa.dim as usize, sa.entry, sb.last_alive);
                } else {
                    debug_assert!(sa.dim > 0);
                    push(sa.dim as usize - 1, sb.last_alive + 1, sa.entry - 1);
                }
            }
            (Cell::Cone(a), Cell::Cone(b)) => {
                let (sa, sb) = (&instances[a as usize], &instances[b as usize]);
                if sa.last_alive > sb.last_alive {
                    push(sa.dim as usize, sb.last_alive + 1, sa.last_alive);
                }
            }
            (x, y) => {
                return Err(Error::InvalidFiltration(format!(
                    "unexpected persistence pair {x:?} -> {y:?}"
                )))
            }
        }
    }
    PersistenceDiagram::new(f.n_layers(), out)
}

/// Standard column reduction over GF(2), high dimensions first so that
/// columns of cells known to be positive can be cleared. Returns
/// `(birth, death)` pairs of cell positions.
fn reduce(columns: &mut [Vec<u32>], dims: &[u8]) -> Vec<(u32, u32)> {
    let n = columns.len();
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); max_dim as usize + 1];
    for (j, &d) in dims.iter().enumerate() {
        by_dim[d as usize].push(j as u32);
    }

    let mut pivot_of = vec![NONE; n];
    let mut cleared = vec![false; n];
    let mut pairs = Vec::new();
    let mut scratch: Vec<u32> = Vec::new();
    for d in (1..=max_dim as usize).rev() {
        for &j in &by_dim[d] {
            let j = j as usize;
            if cleared[j] {
                columns[j] = Vec::new();
                continue;
            }
            let mut col = std::mem::take(&mut columns[j]);
            while let Some(&low) = col.last() {
                let other = pivot_of[low as usize];
                if other == NONE {
                    break;
                }
                add_into(&mut col, &columns[other as usize], &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_of[low as usize] = j as u32;
                cleared[low as usize] = true;
                pairs.push((low, j as u32));
            }
            columns[j] = col;
        }
    }
    pairs
}

/// `col += other` over GF(2) for sorted index lists.
fn add_into(col: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    scratch.reserve(col.len() + other.len());
    let (mut i, mut k) = (0, 0);
    while i < col.len() && k < other.len() {
        match col[i].cmp(&other[k]) {
            std::cmp::Ordering::Less => {
                scratch.push(col[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[k]);
                k += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                k += 1;
            }
        }
    }
    scratch.extend_from_slice(&col[i..]);
    scratch.extend_from_slice(&other[k..]);
    std::mem::swap(col, scratch);
}
