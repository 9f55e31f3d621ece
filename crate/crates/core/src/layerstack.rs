//! Layer-stack container: one point cloud per model layer, all with the same
//! number of points and the same embedding dimension.
//!
//! On disk a stack is a directory holding `manifest.json` and one raw
//! little-endian `f32` file per layer (row-major, `n_points × dim`, no header).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT_TAG: &str = "ZZLS";
pub const FORMAT_VERSION: u32 = 1;
pub const DTYPE_F32LE: &str = "f32le";

/// Row-major `n_points × dim` matrix of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    n_points: usize,
    dim: usize,
    coords: Vec<f32>,
}

impl PointCloud {
    pub fn new(n_points: usize, dim: usize, coords: Vec<f32>) -> Result<Self> {
        if coords.len() != n_points * dim {
            return Err(Error::InvalidStack(format!(
                "point cloud expects {} coordinates, got {}",
                n_points * dim,
                coords.len()
            )));
        }
        Ok(PointCloud {
            n_points,
            dim,
            coords,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidStack("ragged rows".into()));
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f32] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f32] {
        &self.coords
    }

    /// Rows `start..end` as a new cloud.
    pub fn slice_points(&self, start: usize, end: usize) -> PointCloud {
        PointCloud {
            n_points: end - start,
            dim: self.dim,
            coords: self.coords[start * self.dim..end * self.dim].to_vec(),
        }
    }

    fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.coords
            .iter()
            .position(|v| !v.is_finite())
            .map(|i| (i / self.dim.max(1), i % self.dim.max(1)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    layers: Vec<PointCloud>,
    meta: Option<serde_json::Value>,
}

impl LayerStack {
    /// Validates shape consistency, finiteness and `n_layers >= 2`.
    pub fn new(layers: Vec<PointCloud>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidStack(format!(
                "need at least 2 layers, got {}",
                layers.len()
            )));
        }
        let (n, d) = (layers[0].n_points, layers[0].dim);
        for (l, cloud) in layers.iter().enumerate() {
            if cloud.n_points != n || cloud.dim != d {
                return Err(Error::InvalidStack(format!(
                    "layer {l} has shape {}x{}, expected {n}x{d}",
                    cloud.n_points, cloud.dim
                )));
            }
            if let Some((point, coord)) = cloud.first_non_finite() {
                return Err(Error::NonFinite {
                    layer: l,
                    point,
                    coord,
                });
            }
        }
        Ok(LayerStack { layers, meta: None })
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn meta(&self) -> Option<&serde_json::Value> {
        self.meta.as_ref()
    }

    pub fn layers(&self) -> &[PointCloud] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> &PointCloud {
        &self.layers[l]
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn n_points(&self) -> usize {
        self.layers[0].n_points
    }

    pub fn dim(&self) -> usize {
        self.layers[0].dim
    }

    /// Points `start..end` of every layer.
    pub fn select_points(&self, start: usize, end: usize) -> LayerStack {
        LayerStack {
            layers: self
                .layers
                .iter()
                .map(|c| c.slice_points(start, end))
                .collect(),
            meta: self.meta.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub n_layers: usize,
    pub n_points: usize,
    pub dim: usize,
    pub dtype: String,
    pub layers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl Manifest {
    fn check(&self, path: &Path) -> Result<()> {
        let bad = |reason: String| Error::Manifest {
            path: path.to_path_buf(),
            reason,
        };
        if self.format != FORMAT_TAG {
            return Err(bad(format!(
                "format is {:?}, expected {FORMAT_TAG:?}",
                self.format
            )));
        }
        if self.version != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {}", self.version)));
        }
        if self.dtype != DTYPE_F32LE {
            return Err(bad(format!("unsupported dtype {:?}", self.dtype)));
        }
        if self.layers.len() != self.n_layers {
            return Err(bad(format!(
                "n_layers = {} but {} layer files listed",
                self.n_layers,
                self.layers.len()
            )));
        }
        Ok(())
    }
}

pub fn read_layerstack(dir: impl AsRef<Path>) -> Result<LayerStack> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
        path: manifest_path.clone(),
        reason: e.to_string(),
    })?;
    manifest.check(&manifest_path)?;

    let expected = (manifest.n_points * manifest.dim * 4) as u64;
    let mut layers = Vec::with_capacity(manifest.n_layers);
    for name in &manifest.layers {
        let path = dir.join(name);
        if !path.is_file() {
            return Err(Error::MissingLayer(path));
        }
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if bytes.len() as u64 != expected {
            return Err(Error::SizeMismatch {
                path,
                expected,
                found: bytes.len() as u64,
            });
        }
        let coords = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        layers.push(PointCloud::new(manifest.n_points, manifest.dim, coords)?);
    }
    let mut stack = LayerStack::new(layers)?;
    stack.meta = manifest.meta;
    Ok(stack)
}

pub fn write_layerstack(stack: &LayerStack, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let width = stack.n_layers().to_string().len().max(3);
    let names: Vec<String> = (0..stack.n_layers())
        .map(|l| format!("layer_{l:0width$}.f32"))
        .collect();
    for (cloud, name) in stack.layers.iter().zip(&names) {
        let path = dir.join(name);
        let mut bytes = Vec::with_capacity(cloud.coords.len() * 4);
        for v in &cloud.coords {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    let manifest = Manifest {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        n_layers: stack.n_layers(),
        n_points: stack.n_points(),
        dim: stack.dim(),
        dtype: DTYPE_F32LE.into(),
        layers: names,
        meta: stack.meta.clone(),
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// Index ranges of the consecutive, equally sized prompt blocks used as subsets.
/// Trailing points that do not fill a whole block are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPartition {
    pub subset_size: usize,
    pub subsets: Vec<std::ops::Range<usize>>,
}

impl SubsetPartition {
    pub fn new(n_points: usize, subset_size: usize) -> Result<Self> {
        if subset_size == 0 || subset_size > n_points {
            return Err(Error::invalid(format!(
                "subset size {subset_size} must be in 1..={n_points}"
            )));
        }
        let subsets = (0..n_points / subset_size)
            .map(|i| i * subset_size..(i + 1) * subset_size)
            .collect();
        Ok(SubsetPartition {
            subset_size,
            subsets,
        })
    }
}

pub fn partition_subsets(stack: &LayerStack, subset_size: usize) -> Result<Vec<LayerStack>> {
    let partition = SubsetPartition::new(stack.n_points(), subset_size)?;
    Ok(partition
        .subsets
        .iter()
        .map(|r| stack.select_points(r.start, r.end))
        .collect())
}
