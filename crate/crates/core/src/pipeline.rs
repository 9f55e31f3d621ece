//! End-to-end run: stack → kNN graphs → flag complexes → zigzag diagram →
//! effective images → descriptors, per subset of points.

use std::fs;
use std::io::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::descriptors::{
    betti_curve, births_relative_frequency, subset_stats, weighted_interlayer_series,
    DescriptorConfig, DescriptorSeries, Normalization,
};
use crate::error::{Error, Result};
use crate::flagcomplex::{expand_capped, FlagComplex, DEFAULT_SIMPLEX_CAP};
use crate::layerstack::{partition_subsets, LayerStack, SubsetPartition};
use crate::neighborhood::{
    calibrate_radius_with, filter_edges, knn_graphs, EdgeFilter, NeighborGraph,
};
use crate::zigzag::{
    build_filtration, compute_zigzag, effective_image, to_effective, DiagramExport, EffectiveImage,
    PersistenceDiagram,
};

/// β₀ window the per-layer radius filter is calibrated to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VrSettings {
    pub beta0_target: usize,
    pub beta0_tolerance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub k_nn: usize,
    /// Maximum simplex dimension of the flag expansion.
    pub m: usize,
    /// Clamped to the number of points in the stack.
    pub subset_size: usize,
    pub alphas: Vec<f64>,
    pub homology_dims: Vec<usize>,
    pub vr: Option<VrSettings>,
    pub edge_filter: EdgeFilter,
    pub simplex_cap: usize,
    pub inclusive_death: bool,
    pub normalization: Normalization,
    pub cache_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k_nn: 4,
            m: 4,
            subset_size: 500,
            alphas: vec![-1.0, 0.0, 0.5, 1.0, 2.0],
            homology_dims: vec![1],
            vr: None,
            edge_filter: EdgeFilter::RemoveShort,
            simplex_cap: DEFAULT_SIMPLEX_CAP,
            inclusive_death: true,
            normalization: Normalization::Global,
            cache_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_nn < 1 {
            return Err(Error::invalid("k_nn must be at least 1"));
        }
        if self.m < 2 {
            return Err(Error::invalid("m must be at least 2"));
        }
        if self.subset_size == 0 {
            return Err(Error::invalid("subset_size must be positive"));
        }
        if let Some(&p) = self.homology_dims.iter().find(|&&p| p >= self.m) {
            return Err(Error::invalid(format!(
                "homology dimension {p} not computable with m = {}",
                self.m
            )));
        }
        if self.alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("alphas must be finite"));
        }
        Ok(())
    }

    fn descriptor_config(&self, alpha: f64, p: usize) -> DescriptorConfig {
        DescriptorConfig {
            alpha,
            p,
            inclusive_death: self.inclusive_death,
            normalization: self.normalization,
        }
    }
}

/// Diagram of one subset together with the radii its layers were filtered at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetDiagram {
    pub points: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub diagram: DiagramExport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSet {
    pub p: usize,
    pub alpha: f64,
    pub births: DescriptorSeries,
    pub zbar: DescriptorSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiSet {
    pub p: usize,
    pub curve: DescriptorSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub n_layers: usize,
    pub subset_size: usize,
    pub subsets: Vec<SubsetDiagram>,
    /// Effective images summed over subsets, one per requested dimension.
    pub images: Vec<EffectiveImage>,
    pub descriptors: Vec<DescriptorSet>,
    pub betti: Vec<BettiSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn diagrams(&self) -> Result<Vec<PersistenceDiagram>> {
        self.subsets
            .iter()
            .map(|s| PersistenceDiagram::from_export(&s.diagram))
            .collect()
    }

    pub fn descriptor(&self, p: usize, alpha: f64) -> Option<&DescriptorSet> {
        self.descriptors
            .iter()
            .find(|d| d.p == p && d.alpha == alpha)
    }

    pub fn image(&self, p: usize) -> Option<&EffectiveImage> {
        self.images.iter().find(|i| i.p == p)
    }
}

/// Per-layer graphs after optional radius filtering, plus the radii used.
pub fn layer_graphs(
    stack: &LayerStack,
    cfg: &PipelineConfig,
) -> Result<(Vec<NeighborGraph>, Option<Vec<f64>>)> {
    let graphs = knn_graphs(stack.layers(), cfg.k_nn)?;
    let Some(vr) = cfg.vr else {
        return Ok((graphs, None));
    };
    let filtered: Vec<(NeighborGraph, f64)> = graphs
        .par_iter()
        .map(|g| {
            let r = calibrate_radius_with(g, vr.beta0_target, vr.beta0_tolerance, cfg.edge_filter)?;
            Ok((filter_edges(g, r, cfg.edge_filter), r))
        })
        .collect::<Result<_>>()?;
    let (graphs, radii) = filtered.into_iter().unzip();
    Ok((graphs, Some(radii)))
}

pub fn layer_complexes(
    stack: &LayerStack,
    cfg: &PipelineConfig,
) -> Result<(Vec<FlagComplex>, Option<Vec<f64>>)> {
    let (graphs, radii) = layer_graphs(stack, cfg)?;
    let complexes = graphs
        .par_iter()
        .map(|g| expand_capped(g, cfg.m, cfg.simplex_cap))
        .collect::<Result<_>>()?;
    Ok((complexes, radii))
}

fn compute_subset(
    stack: &LayerStack,
    cfg: &PipelineConfig,
) -> Result<(PersistenceDiagram, Option<Vec<f64>>)> {
    let (complexes, radii) = layer_complexes(stack, cfg)?;
    let filtration = build_filtration(&complexes)?;
    Ok((compute_zigzag(&filtration)?, radii))
}

/// Content-addressed store of subset diagrams. Only graph- and complex-level
/// settings enter the key, so descriptor parameters can change freely.
#[derive(Debug)]
pub struct DiagramCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    radii: Option<Vec<f64>>,
    diagram: DiagramExport,
}

impl DiagramCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiagramCache {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(stack: &LayerStack, cfg: &PipelineConfig) -> String {
        let mut h = Sha256::new();
        h.update(b"zzt-diagram-v1");
        for x in [
            stack.n_layers(),
            stack.n_points(),
            stack.dim(),
            cfg.k_nn,
            cfg.m,
        ] {
            h.update((x as u64).to_le_bytes());
        }
        match cfg.vr {
            Some(vr) => {
                h.update([1u8]);
                h.update((vr.beta0_target as u64).to_le_bytes());
                h.update((vr.beta0_tolerance as u64).to_le_bytes());
                h.update([cfg.edge_filter as u8]);
            }
            None => h.update([0u8]),
        }
        for layer in stack.layers() {
            for c in layer.coords() {
                h.update(c.to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Option<(PersistenceDiagram, Option<Vec<f64>>)> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        let diagram = PersistenceDiagram::from_export(&entry.diagram).ok()?;
        Some((diagram, entry.radii))
    }

    pub fn store(
        &self,
        key: &str,
        diagram: &PersistenceDiagram,
        radii: Option<&[f64]>,
    ) -> Result<()> {
        let entry = CacheEntry {
            radii: radii.map(<[f64]>::to_vec),
            diagram: diagram.to_export(),
        };
        let text = serde_json::to_string(&entry)?;
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let tmp = self.dir.join(format!("{key}.tmp"));
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(text.as_bytes())
            .map_err(|e| Error::io(&tmp, e))?;
        drop(f);
        let dest = self.path(key);
        fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))
    }
}

fn subset_size(stack: &LayerStack, cfg: &PipelineConfig) -> usize {
    cfg.subset_size.min(stack.n_points())
}

/// Zigzag diagram of every subset, in subset order.
pub fn subset_diagrams(
    stack: &LayerStack,
    cfg: &PipelineConfig,
) -> Result<Vec<(SubsetDiagram, PersistenceDiagram)>> {
    cfg.validate()?;
    let size = subset_size(stack, cfg);
    let ranges = SubsetPartition::new(stack.n_points(), size)?.subsets;
    let subsets = partition_subsets(stack, size)?;
    let cache = cfg.cache_dir.as_ref().map(DiagramCache::new);
    subsets
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(sub, range)| {
            let key = cache.as_ref().map(|_| DiagramCache::key(sub, cfg));
            let cached = cache
                .as_ref()
                .zip(key.as_deref())
                .and_then(|(c, k)| c.load(k));
            let (diagram, radii) = match cached {
                Some(hit) => hit,
                None => {
                    let fresh = compute_subset(sub, cfg)?;
                    if let (Some(c), Some(k)) = (&cache, &key) {
                        c.store(k, &fresh.0, fresh.1.as_deref())?;
                    }
                    fresh
                }
            };
            let export = SubsetDiagram {
                points: [range.start, range.end],
                radii,
                diagram: diagram.to_export(),
            };
            Ok((export, diagram))
        })
        .collect()
}

fn with_stats(
    pooled: DescriptorSeries,
    per_subset: &[DescriptorSeries],
) -> Result<DescriptorSeries> {
    if per_subset.len() < 2 {
        return Ok(pooled);
    }
    let stats = subset_stats(per_subset)?;
    Ok(DescriptorSeries {
        subset_mean: stats.subset_mean,
        subset_std: stats.subset_std,
        ..pooled
    })
}

/// Full pipeline. Descriptor values come from the image pooled over subsets;
/// with two or more subsets, per-subset mean and sample std are attached.
pub fn run(stack: &LayerStack, cfg: &PipelineConfig) -> Result<RunResult> {
    let computed = subset_diagrams(stack, cfg)?;
    let n_layers = stack.n_layers();
    let mut warnings = Vec::new();
    if computed.len() < 2 {
        warnings.push("single subset: subset standard deviation is undefined".to_string());
    }

    // images[subset][dim index]
    let per_subset: Vec<Vec<EffectiveImage>> = computed
        .iter()
        .map(|(_, d)| {
            let eff = to_effective(d);
            cfg.homology_dims
                .iter()
                .map(|&p| effective_image(&eff, p))
                .collect()
        })
        .collect();

    let mut images = Vec::new();
    let mut descriptors = Vec::new();
    let mut betti = Vec::new();
    for (j, &p) in cfg.homology_dims.iter().enumerate() {
        let mut pooled = EffectiveImage::zeros(p, n_layers);
        for imgs in &per_subset {
            pooled.accumulate(&imgs[j])?;
        }
        for &alpha in &cfg.alphas {
            let dc = cfg.descriptor_config(alpha, p);
            let births: Vec<_> = per_subset
                .iter()
                .map(|i| births_relative_frequency(&i[j], &dc))
                .collect();
            let zbar: Vec<_> = per_subset
                .iter()
                .map(|i| weighted_interlayer_series(&i[j], &dc))
                .collect();
            descriptors.push(DescriptorSet {
                p,
                alpha,
                births: with_stats(births_relative_frequency(&pooled, &dc), &births)?,
                zbar: with_stats(weighted_interlayer_series(&pooled, &dc), &zbar)?,
            });
        }
        let curves: Vec<_> = per_subset.iter().map(|i| betti_curve(&i[j])).collect();
        betti.push(BettiSet {
            p,
            curve: with_stats(betti_curve(&pooled), &curves)?,
        });
        if pooled.total() == 0 {
            warnings.push(format!("no H{p} features found; descriptors are all zero"));
        }
        images.push(pooled);
    }

    Ok(RunResult {
        n_layers,
        subset_size: subset_size(stack, cfg),
        subsets: computed.into_iter().map(|(s, _)| s).collect(),
        images,
        descriptors,
        betti,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: usize,
    /// Interval count per homology dimension `0..m`, summed over subsets.
    pub counts: Vec<usize>,
}

/// Total interval counts for each `k` in `ks`, sorted by `k`.
pub fn scan_k(
    stack: &LayerStack,
    ks: RangeInclusive<usize>,
    cfg: &PipelineConfig,
) -> Result<Vec<ScanRow>> {
    ks.map(|k| {
        let cfg = PipelineConfig {
            k_nn: k,
            ..cfg.clone()
        };
        let diagrams = subset_diagrams(stack, &cfg)?;
        let mut counts = vec![0; cfg.m];
        for (_, d) in &diagrams {
            for (p, c) in counts.iter_mut().enumerate() {
                *c += d.intervals(p).len();
            }
        }
        Ok(ScanRow { k, counts })
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthKind, SynthSpec};

    fn circle_cfg() -> PipelineConfig {
        PipelineConfig {
            k_nn: 2,
            m: 3,
            ..Default::default()
        }
    }

    #[test]
    fn config_json() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"k_nn":2,"m":3}"#).unwrap();
        assert_eq!(cfg.alphas, vec![-1.0, 0.0, 0.5, 1.0, 2.0]);
        assert_eq!(cfg.subset_size, 500);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"k":2}"#).is_err());
        let bad = PipelineConfig {
            homology_dims: vec![3],
            m: 3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn circle_descriptors() {
        let stack = generate(&SynthSpec::new(SynthKind::PersistentCircle, 12, 5)).unwrap();
        let r = run(&stack, &circle_cfg()).unwrap();
        assert_eq!(r.subsets.len(), 1);
        assert_eq!(r.warnings.len(), 1);
        for d in &r.descriptors {
            assert_eq!(d.births.values[0], 1.0);
            assert!(d.births.values[1..].iter().all(|&v| v == 0.0));
            assert!(d.zbar.values.iter().all(|&v| v == 1.0));
            assert!(d.births.subset_std.is_none());
        }
        assert_eq!(r.betti[0].curve.values, vec![1.0; 5]);
    }

    #[test]
    fn subsets_get_stats() {
        let stack = generate(
            &SynthSpec::new(SynthKind::RandomWalk, 60, 3)
                .noise(0.3)
                .seed(2),
        )
        .unwrap();
        let cfg = PipelineConfig {
            k_nn: 3,
            m: 2,
            subset_size: 20,
            homology_dims: vec![0, 1],
            ..Default::default()
        };
        let r = run(&stack, &cfg).unwrap();
        assert_eq!(r.subsets.len(), 3);
        assert_eq!(r.subsets[2].points, [40, 60]);
        let d = r.descriptor(0, 0.0).unwrap();
        assert_eq!(d.births.subset_mean.as_ref().unwrap().len(), 3);
        // H0 of each 20-point layer: β₀ summed over subsets equals the pooled curve.
        let total: u64 = r.image(0).unwrap().betti(1);
        assert_eq!(r.betti[0].curve.values[1], total as f64);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stack = generate(&SynthSpec::new(SynthKind::BlobMerge, 30, 3).seed(5)).unwrap();
        let cfg = PipelineConfig {
            k_nn: 3,
            m: 2,
            cache_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let a = run(&stack, &cfg).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        let b = run(
            &stack,
            &PipelineConfig {
                alphas: vec![3.0],
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_eq!(a.subsets, b.subsets);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        run(&stack, &PipelineConfig { k_nn: 4, ..cfg }).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
    }

    #[test]
    fn scan_circle() {
        let stack = generate(&SynthSpec::new(SynthKind::PersistentCircle, 12, 3)).unwrap();
        let rows = scan_k(&stack, 1..=3, &circle_cfg()).unwrap();
        assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(rows[0].counts[1], 0);
        assert_eq!(rows[1].counts[1], 1);
        assert!(rows.iter().all(|r| r.counts[1] <= rows[1].counts[1]));
        #[allow(clippy::reversed_empty_ranges)]
        let empty = scan_k(&stack, 3..=2, &circle_cfg()).unwrap();
        assert!(empty.is_empty());
    }
}
