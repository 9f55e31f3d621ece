//! Clique (flag) complexes of neighbour graphs, truncated at a maximum
//! simplex dimension.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::neighborhood::NeighborGraph;

/// Default cap on the number of simplices produced by one expansion.
pub const DEFAULT_SIMPLEX_CAP: usize = 50_000_000;

/// A simplex as its strictly ascending vertex list.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Simplex(SmallVec<[u32; 6]>);

impl Simplex {
    /// Sorts and checks distinctness.
    pub fn new(vertices: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut v: SmallVec<[u32; 6]> = vertices.into_iter().collect();
        v.sort_unstable();
        if v.is_empty() || v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("bad simplex vertices {v:?}")));
        }
        Ok(Simplex(v))
    }

    pub(crate) fn from_sorted(v: &[u32]) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Simplex(SmallVec::from_slice(v))
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in lexicographic order of the face.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        let range = if n > 1 { 0..n } else { 0..0 };
        range.rev().map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.as_slice().cmp(other.0.as_slice())
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// Simplicial complex stored per dimension, each list sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagComplex {
    n_vertices: usize,
    max_dim: usize,
    by_dim: Vec<Vec<Simplex>>,
}

impl FlagComplex {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Simplices of dimension `p` (empty above `max_dim`).
    pub fn simplices(&self, p: usize) -> &[Simplex] {
        self.by_dim.get(p).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.by_dim.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> Vec<usize> {
        self.by_dim.iter().map(Vec::len).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.by_dim.iter().flatten()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.by_dim
            .get(s.dim())
            .is_some_and(|list| list.binary_search(s).is_ok())
    }

    /// Position of `s` within `simplices(s.dim())`.
    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.by_dim.get(s.dim())?.binary_search(s).ok()
    }

    pub fn is_subcomplex_of(&self, other: &FlagComplex) -> bool {
        self.n_vertices == other.n_vertices && self.iter().all(|s| other.contains(s))
    }

    /// Every facet of every simplex is present.
    pub fn is_face_closed(&self) -> bool {
        self.iter().all(|s| s.facets().all(|f| self.contains(&f)))
    }

    /// Builds a complex from an explicit simplex list (must be face-closed).
    pub fn from_simplices(
        n_vertices: usize,
        max_dim: usize,
        simplices: impl IntoIterator<Item = Simplex>,
    ) -> Result<Self> {
        let mut by_dim = vec![Vec::new(); max_dim + 1];
        for s in simplices {
            if s.dim() > max_dim {
                return Err(Error::invalid(format!(
                    "{s:?} exceeds max dimension {max_dim}"
                )));
            }
            if s.vertices().iter().any(|&v| v as usize >= n_vertices) {
                return Err(Error::invalid(format!("{s:?} has a vertex out of range")));
            }
            by_dim[s.dim()].push(s);
        }
        for list in &mut by_dim {
            list.sort();
            list.dedup();
        }
        let cx = FlagComplex {
            n_vertices,
            max_dim,
            by_dim,
        };
        if !cx.is_face_closed() {
            return Err(Error::invalid("simplex list is not closed under faces"));
        }
        Ok(cx)
    }

    /// The 1-skeleton as a unit-length graph.
    pub fn edge_graph(&self) -> NeighborGraph {
        let pairs: Vec<(u32, u32)> = self
            .simplices(1)
            .iter()
            .map(|s| (s.vertices()[0], s.vertices()[1]))
            .collect();
        NeighborGraph::from_pairs(self.n_vertices, &pairs).expect("complex edges are valid")
    }
}

pub fn expand(graph: &NeighborGraph, m: usize) -> Result<FlagComplex> {
    expand_capped(graph, m, DEFAULT_SIMPLEX_CAP)
}

/// All cliques of `graph` with at most `m + 1` vertices. Each clique is found
/// once by extending only with higher-indexed common neighbours.
pub fn expand_capped(graph: &NeighborGraph, m: usize, cap: usize) -> Result<FlagComplex> {
    if m == 0 {
        return Err(Error::invalid(
            "maximum simplex dimension must be at least 1",
        ));
    }
    let n = graph.n_vertices();
    let up: Vec<Vec<u32>> = graph
        .adjacency()
        .into_iter()
        .enumerate()
        .map(|(v, nbrs)| nbrs.into_iter().filter(|&w| w as usize > v).collect())
        .collect();

    let mut by_dim: Vec<Vec<Simplex>> = vec![Vec::new(); m + 1];
    let mut total = 0usize;
    let mut stack: SmallVec<[u32; 6]> = SmallVec::new();
    for v in 0..n as u32 {
        stack.push(v);
        by_dim[0].push(Simplex::from_sorted(&stack));
        total += 1;
        extend(
            &up,
            m,
            &up[v as usize],
            &mut stack,
            &mut by_dim,
            &mut total,
            cap,
        )?;
        stack.pop();
    }
    if total > cap {
        return Err(Error::SimplexCap { cap });
    }
    Ok(FlagComplex {
        n_vertices: n,
        max_dim: m,
        by_dim,
    })
}

fn extend(
    up: &[Vec<u32>],
    m: usize,
    candidates: &[u32],
    stack: &mut SmallVec<[u32; 6]>,
    by_dim: &mut [Vec<Simplex>],
    total: &mut usize,
    cap: usize,
) -> Result<()> {
    if stack.len() > m {
        return Ok(());
    }
    for (i, &w) in candidates.iter().enumerate() {
        stack.push(w);
        by_dim[stack.len() - 1].push(Simplex::from_sorted(stack));
        *total += 1;
        if *total > cap {
            return Err(Error::SimplexCap { cap });
        }
        if stack.len() <= m {
            let next = sorted_intersection(&candidates[i + 1..], &up[w as usize]);
            if !next.is_empty() {
                extend(up, m, &next, stack, by_dim, total, cap)?;
            }
        }
        stack.pop();
    }
    Ok(())
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn sorted_merge_common(a: &[Simplex], b: &[Simplex]) -> Vec<Simplex> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Simplices present in both complexes.
pub fn intersect(a: &FlagComplex, b: &FlagComplex) -> Result<FlagComplex> {
    if a.max_dim != b.max_dim {
        return Err(Error::Mismatch(format!(
            "max dimension {} vs {}",
            a.max_dim, b.max_dim
        )));
    }
    if a.n_vertices != b.n_vertices {
        return Err(Error::Mismatch(format!(
            "vertex count {} vs {}",
            a.n_vertices, b.n_vertices
        )));
    }
    Ok(FlagComplex {
        n_vertices: a.n_vertices,
        max_dim: a.max_dim,
        by_dim: a
            .by_dim
            .iter()
            .zip(&b.by_dim)
            .map(|(x, y)| sorted_merge_common(x, y))
            .collect(),
    })
}

/// Sparse GF(2) matrix stored as sorted row indices per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    pub n_rows: usize,
    pub columns: Vec<Vec<usize>>,
}

impl Gf2Matrix {
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.columns[col].binary_search(&row).is_ok()
    }
}

/// Boundary map from `p`-chains to `(p-1)`-chains; rows and columns follow the
/// lexicographic order of `simplices(p - 1)` and `simplices(p)`.
pub fn boundary_matrix(cx: &FlagComplex, p: usize) -> Result<Gf2Matrix> {
    if p == 0 || p > cx.max_dim {
        return Err(Error::invalid(format!(
            "boundary dimension {p} must be in 1..={}",
            cx.max_dim
        )));
    }
    let faces = cx.simplices(p - 1);
    let columns = cx
        .simplices(p)
        .iter()
        .map(|s| {
            let mut col: Vec<usize> = s
                .facets()
                .map(|f| faces.binary_search(&f).expect("complex is face-closed"))
                .collect();
            col.sort_unstable();
            col
        })
        .collect();
    Ok(Gf2Matrix {
        n_rows: faces.len(),
        columns,
    })
}
