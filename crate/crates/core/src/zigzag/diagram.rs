use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[birth, death]` of zigzag time indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub birth: u32,
    pub death: u32,
}

impl Interval {
    pub fn new(birth: u32, death: u32) -> Self {
        debug_assert!(birth <= death);
        Interval { birth, death }
    }

    pub fn contains(&self, t: u32) -> bool {
        self.birth <= t && t <= self.death
    }
}

/// Interval multisets for homology dimensions `0..max_dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistenceDiagram {
    n_layers: usize,
    dims: Vec<Vec<Interval>>,
}

impl PersistenceDiagram {
    /// Intervals are sorted per dimension; `dims[p]` holds the `H_p` intervals.
    pub fn new(n_layers: usize, mut dims: Vec<Vec<Interval>>) -> Result<Self> {
        let last = 2 * (n_layers.max(1) as u32 - 1);
        for list in &mut dims {
            if list.iter().any(|iv| iv.birth > iv.death || iv.death > last) {
                return Err(Error::invalid(format!(
                    "interval outside [0, {last}] or with birth after death"
                )));
            }
            list.sort_unstable();
        }
        Ok(PersistenceDiagram { n_layers, dims })
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    /// Number of homology dimensions stored (`m` for a complex of dimension `m`).
    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn intervals(&self, p: usize) -> &[Interval] {
        self.dims.get(p).map_or(&[], Vec::as_slice)
    }

    pub fn final_index(&self) -> u32 {
        2 * (self.n_layers as u32 - 1)
    }

    pub fn n_indices(&self) -> usize {
        2 * (self.n_layers - 1) + 1
    }

    pub fn is_right_open(&self, iv: &Interval) -> bool {
        iv.death == self.final_index()
    }

    /// Number of `H_p` intervals alive at index `t`.
    pub fn betti_at(&self, p: usize, t: u32) -> usize {
        self.intervals(p).iter().filter(|iv| iv.contains(t)).count()
    }

    pub fn to_export(&self) -> DiagramExport {
        let eff = to_effective(self);
        DiagramExport {
            n_layers: self.n_layers,
            n_indices: self.n_indices(),
            dims: (0..self.n_dims())
                .map(|p| DimensionExport {
                    p,
                    raw: with_multiplicity(self.intervals(p).iter().map(|iv| (iv.birth, iv.death)))
                        .into_iter()
                        .map(|((b, d), k)| [b, d, k])
                        .collect(),
                    effective: with_multiplicity(
                        eff.intervals(p)
                            .iter()
                            .map(|e| (e.birth_layer, e.death_layer, e.right_open)),
                    )
                    .into_iter()
                    .map(|((b, d, open), k)| EffectiveRow(b, d, k, open))
                    .collect(),
                })
                .collect(),
        }
    }

    pub fn from_export(ex: &DiagramExport) -> Result<Self> {
        let dims = ex
            .dims
            .iter()
            .map(|d| {
                d.raw
                    .iter()
                    .flat_map(|&[b, death, k]| {
                        std::iter::repeat_n(Interval::new(b, death.max(b)), k as usize)
                    })
                    .collect()
            })
            .collect();
        Self::new(ex.n_layers, dims)
    }
}

fn with_multiplicity<T: Ord + Copy>(items: impl Iterator<Item = T>) -> Vec<(T, u32)> {
    let mut v: Vec<T> = items.collect();
    v.sort_unstable();
    let mut out: Vec<(T, u32)> = Vec::new();
    for x in v {
        match out.last_mut() {
            Some((y, k)) if *y == x => *k += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramExport {
    pub n_layers: usize,
    pub n_indices: usize,
    pub dims: Vec<DimensionExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionExport {
    pub p: usize,
    /// `[birth, death, multiplicity]` in zigzag time indices.
    pub raw: Vec<[u32; 3]>,
    /// `[birth_layer, death_layer, multiplicity, right_open]` in model layers.
    pub effective: Vec<EffectiveRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveRow(pub u32, pub u32, pub u32, pub bool);

/// Interval re-expressed on model layers only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EffectiveInterval {
    pub birth_layer: u32,
    pub death_layer: u32,
    /// The feature is still alive at the last layer.
    pub right_open: bool,
    /// The raw death is the intersection just before `death_layer`, so the
    /// feature is already gone at that layer.
    pub ends_on_intersection: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveDiagram {
    n_layers: usize,
    dims: Vec<Vec<EffectiveInterval>>,
}

impl EffectiveDiagram {
    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn intervals(&self, p: usize) -> &[EffectiveInterval] {
        self.dims.get(p).map_or(&[], Vec::as_slice)
    }
}

/// Moves an index sitting on an intersection to the following model layer.
pub fn shift_to_layer(index: u32) -> u32 {
    if index % 2 == 1 {
        index + 1
    } else {
        index
    }
}

/// Maps every interval `[b, d]` to `[b̂ / 2, d̂ / 2]` where odd endpoints are
/// shifted up by one.
pub fn to_effective(diagram: &PersistenceDiagram) -> EffectiveDiagram {
    let last = diagram.final_index();
    EffectiveDiagram {
        n_layers: diagram.n_layers,
        dims: diagram
            .dims
            .iter()
            .map(|list| {
                list.iter()
                    .map(|iv| EffectiveInterval {
                        birth_layer: shift_to_layer(iv.birth) / 2,
                        death_layer: shift_to_layer(iv.death) / 2,
                        right_open: iv.death == last,
                        ends_on_intersection: iv.death % 2 == 1,
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Square grid of interval counts indexed by (birth, death).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountGrid {
    pub size: usize,
    pub counts: Vec<u64>,
}

impl CountGrid {
    pub fn zeros(size: usize) -> Self {
        CountGrid {
            size,
            counts: vec![0; size * size],
        }
    }

    pub fn get(&self, birth: usize, death: usize) -> u64 {
        self.counts[birth * self.size + death]
    }

    pub fn add(&mut self, birth: usize, death: usize, k: u64) {
        self.counts[birth * self.size + death] += k;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Effective persistence image for one homology dimension: an
/// `n_layers × n_layers` grid of (birth layer, death layer) multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveImage {
    pub p: usize,
    pub n_layers: usize,
    pub grid: CountGrid,
    /// Per birth layer, how many of its intervals reach the last layer.
    pub right_open: Vec<u64>,
    /// Per death layer, how many of its intervals really end on the
    /// intersection before it (see [`EffectiveInterval::ends_on_intersection`]).
    pub ends_on_intersection: Vec<u64>,
}

impl EffectiveImage {
    pub fn zeros(p: usize, n_layers: usize) -> Self {
        EffectiveImage {
            p,
            n_layers,
            grid: CountGrid::zeros(n_layers),
            right_open: vec![0; n_layers],
            ends_on_intersection: vec![0; n_layers],
        }
    }

    pub fn get(&self, birth: usize, death: usize) -> u64 {
        self.grid.get(birth, death)
    }

    pub fn total(&self) -> u64 {
        self.grid.total()
    }

    /// Mass of the cells with `birth <= l <= death`. Counts features that
    /// die on the intersection just before `l` as alive at `l`.
    pub fn alive(&self, l: usize) -> u64 {
        let mut sum = 0;
        for b in 0..=l {
            for d in l..self.n_layers {
                sum += self.get(b, d);
            }
        }
        sum
    }

    /// Exact Betti number of the complex at layer `l`.
    pub fn betti(&self, l: usize) -> u64 {
        self.alive(l) - self.ends_on_intersection[l]
    }

    /// Element-wise sum; used to pool images over subsets.
    pub fn accumulate(&mut self, other: &EffectiveImage) -> Result<()> {
        if other.n_layers != self.n_layers || other.p != self.p {
            return Err(Error::Mismatch("effective images differ in shape".into()));
        }
        for (a, b) in self.grid.counts.iter_mut().zip(&other.grid.counts) {
            *a += b;
        }
        for (a, b) in self.right_open.iter_mut().zip(&other.right_open) {
            *a += b;
        }
        for (a, b) in self
            .ends_on_intersection
            .iter_mut()
            .zip(&other.ends_on_intersection)
        {
            *a += b;
        }
        Ok(())
    }
}

/// Grid accumulation of the effective intervals of dimension `p`.
pub fn effective_image(eff: &EffectiveDiagram, p: usize) -> EffectiveImage {
    let mut img = EffectiveImage::zeros(p, eff.n_layers);
    for iv in eff.intervals(p) {
        img.grid
            .add(iv.birth_layer as usize, iv.death_layer as usize, 1);
        if iv.right_open {
            img.right_open[iv.birth_layer as usize] += 1;
        }
        if iv.ends_on_intersection {
            img.ends_on_intersection[iv.death_layer as usize] += 1;
        }
    }
    img
}

pub fn effective_images(eff: &EffectiveDiagram) -> Vec<EffectiveImage> {
    (0..eff.n_dims()).map(|p| effective_image(eff, p)).collect()
}

/// Raw persistence image over all `2L - 1` zigzag indices.
pub fn raw_image(diagram: &PersistenceDiagram, p: usize) -> CountGrid {
    let mut grid = CountGrid::zeros(diagram.n_indices());
    for iv in diagram.intervals(p) {
        grid.add(iv.birth as usize, iv.death as usize, 1);
    }
    grid
}

/// Aggregates a raw image onto model layers: each even `(b, d)` cell collects
/// `PI(b, d) + PI(b-1, d) + PI(b, d-1) + PI(b-1, d-1)`, terms with a negative
/// index being absent.
pub fn aggregate_raw_image(raw: &CountGrid) -> CountGrid {
    let n_layers = raw.size.div_ceil(2);
    let mut out = CountGrid::zeros(n_layers);
    for lb in 0..n_layers {
        for ld in 0..n_layers {
            let (b, d) = (2 * lb, 2 * ld);
            let mut sum = raw.get(b, d);
            if b > 0 {
                sum += raw.get(b - 1, d);
            }
            if d > 0 {
                sum += raw.get(b, d - 1);
            }
            if b > 0 && d > 0 {
                sum += raw.get(b - 1, d - 1);
            }
            out.add(lb, ld, sum);
        }
    }
    out
}
