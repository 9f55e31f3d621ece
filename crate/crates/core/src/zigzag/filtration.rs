use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flagcomplex::{intersect, FlagComplex, Simplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Insert,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: u32,
    pub kind: EventKind,
    pub simplex: Simplex,
}

/// Insert/delete events indexed by zigzag time. Even index `2j` is layer `j`,
/// odd index `2j + 1` is the intersection of layers `j` and `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigzagFiltration {
    n_layers: usize,
    n_vertices: usize,
    max_dim: usize,
    events: Vec<Event>,
}

impl ZigzagFiltration {
    /// Wraps a raw event list. Ordering rules are checked when the filtration
    /// is replayed or reduced, not here.
    pub fn from_events(
        n_layers: usize,
        n_vertices: usize,
        max_dim: usize,
        events: Vec<Event>,
    ) -> Result<Self> {
        if n_layers < 2 {
            return Err(Error::invalid("a zigzag needs at least 2 layers"));
        }
        Ok(ZigzagFiltration {
            n_layers,
            n_vertices,
            max_dim,
            events,
        })
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Number of time indices, `2 (n_layers - 1) + 1`.
    pub fn n_indices(&self) -> usize {
        2 * (self.n_layers - 1) + 1
    }

    pub fn final_index(&self) -> u32 {
        (self.n_indices() - 1) as u32
    }

    /// Checks time ranges and the insert/delete parity rules. Face and coface
    /// conditions are checked during replay.
    pub(crate) fn check_event(&self, prev_time: u32, ev: &Event) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFiltration(msg));
        if ev.time < prev_time {
            return bad(format!("time goes backwards at {:?}", ev.simplex));
        }
        if ev.time as usize >= self.n_indices() {
            return bad(format!("time {} out of range", ev.time));
        }
        if ev.simplex.dim() > self.max_dim
            || ev
                .simplex
                .vertices()
                .iter()
                .any(|&v| v as usize >= self.n_vertices)
        {
            return bad(format!(
                "simplex {:?} outside the complex bounds",
                ev.simplex
            ));
        }
        let odd = ev.time % 2 == 1;
        match (ev.kind, odd) {
            (EventKind::Delete, false) => bad(format!(
                "deletion of {:?} at layer index {}",
                ev.simplex, ev.time
            )),
            (EventKind::Insert, true) => bad(format!(
                "insertion of {:?} at intersection index {}",
                ev.simplex, ev.time
            )),
            _ => Ok(()),
        }
    }

    /// Complex at every time index, by replaying the events.
    pub fn states(&self) -> Result<Vec<FlagComplex>> {
        let mut live: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); self.max_dim + 2];
        let mut out = Vec::with_capacity(self.n_indices());
        let mut prev = 0u32;
        let mut events = self.events.iter().peekable();
        for t in 0..self.n_indices() as u32 {
            while let Some(ev) = events.next_if(|e| e.time == t) {
                self.check_event(prev, ev)?;
                prev = ev.time;
                let p = ev.simplex.dim();
                match ev.kind {
                    EventKind::Insert => {
                        if p > 0 && ev.simplex.facets().any(|f| !live[p - 1].contains(&f)) {
                            return Err(Error::InvalidFiltration(format!(
                                "{:?} inserted before its faces",
                                ev.simplex
                            )));
                        }
                        if !live[p].insert(ev.simplex.clone()) {
                            return Err(Error::InvalidFiltration(format!(
                                "{:?} inserted twice",
                                ev.simplex
                            )));
                        }
                    }
                    EventKind::Delete => {
                        let has_coface = live[p + 1]
                            .iter()
                            .any(|c| c.facets().any(|f| f == ev.simplex));
                        if has_coface {
                            return Err(Error::InvalidFiltration(format!(
                                "{:?} deleted while a coface remains",
                                ev.simplex
                            )));
                        }
                        if !live[p].remove(&ev.simplex) {
                            return Err(Error::InvalidFiltration(format!(
                                "{:?} deleted but not present",
                                ev.simplex
                            )));
                        }
                    }
                }
            }
            let cx = FlagComplex::from_simplices(
                self.n_vertices,
                self.max_dim,
                live.iter().take(self.max_dim + 1).flatten().cloned(),
            )?;
            out.push(cx);
        }
        if let Some(ev) = events.next() {
            return Err(Error::InvalidFiltration(format!(
                "event at time {} is out of order or out of range",
                ev.time
            )));
        }
        Ok(out)
    }
}

/// Simplices of `a` missing from `b`, both sorted lexicographically.
fn sorted_difference<'a>(a: &'a [Simplex], b: &[Simplex]) -> Vec<&'a Simplex> {
    let mut out = Vec::new();
    let mut j = 0;
    for s in a {
        while j < b.len() && b[j] < *s {
            j += 1;
        }
        if j < b.len() && b[j].cmp(s) == Ordering::Equal {
            continue;
        }
        out.push(s);
    }
    out
}

fn check_compatible(layers: &[FlagComplex]) -> Result<()> {
    if layers.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 layer complexes, got {}",
            layers.len()
        )));
    }
    let (n, m) = (layers[0].n_vertices(), layers[0].max_dim());
    if let Some(bad) = layers
        .iter()
        .position(|c| c.n_vertices() != n || c.max_dim() != m)
    {
        return Err(Error::Mismatch(format!(
            "layer {bad} differs in vertex count or max dimension"
        )));
    }
    Ok(())
}

/// `K_0, K_0 ∩ K_1, K_1, K_1 ∩ K_2, ..., K_{L-1}`.
pub fn interleave_states(layers: &[FlagComplex]) -> Result<Vec<FlagComplex>> {
    check_compatible(layers)?;
    let mut out = Vec::with_capacity(2 * layers.len() - 1);
    for w in layers.windows(2) {
        out.push(w[0].clone());
        out.push(intersect(&w[0], &w[1])?);
    }
    out.push(layers[layers.len() - 1].clone());
    Ok(out)
}

/// Assembles the layer/intersection zigzag: at `2j + 1` every simplex of `K_j`
/// outside `K_j ∩ K_{j+1}` is deleted (cofaces first), at `2j + 2` every
/// simplex of `K_{j+1}` outside the intersection is inserted (faces first).
pub fn build_filtration(layers: &[FlagComplex]) -> Result<ZigzagFiltration> {
    check_compatible(layers)?;
    let m = layers[0].max_dim();
    let mut events = Vec::new();
    for p in 0..=m {
        for s in layers[0].simplices(p) {
            events.push(Event {
                time: 0,
                kind: EventKind::Insert,
                simplex: s.clone(),
            });
        }
    }
    for (j, w) in layers.windows(2).enumerate() {
        let (cur, next) = (&w[0], &w[1]);
        let t = 2 * j as u32;
        for p in (0..=m).rev() {
            for s in sorted_difference(cur.simplices(p), next.simplices(p)) {
                events.push(Event {
                    time: t + 1,
                    kind: EventKind::Delete,
                    simplex: s.clone(),
                });
            }
        }
        for p in 0..=m {
            for s in sorted_difference(next.simplices(p), cur.simplices(p)) {
                events.push(Event {
                    time: t + 2,
                    kind: EventKind::Insert,
                    simplex: s.clone(),
                });
            }
        }
    }
    ZigzagFiltration::from_events(layers.len(), layers[0].n_vertices(), m, events)
}
