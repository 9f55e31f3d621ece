//! Zigzag persistent homology of layer-indexed point clouds.
//!
//! A [`LayerStack`] holds one point cloud per layer, with point `i` tracking the
//! same input across layers. Each layer becomes a kNN flag complex; consecutive
//! complexes are joined through their intersections into a zigzag
//!
//! ```text
//! K_0 ⊇ K_0 ∩ K_1 ⊆ K_1 ⊇ K_1 ∩ K_2 ⊆ … ⊆ K_{L-1}
//! ```
//!
//! whose barcode ([`compute_zigzag`]) is summarised by effective persistence
//! images and layer-wise descriptors, which in turn drive layer pruning.
//!
//! ```
//! use zzt_core::{generate, run, PipelineConfig, SynthKind, SynthSpec};
//!
//! let stack = generate(&SynthSpec::new(SynthKind::PersistentCircle, 12, 3)).unwrap();
//! let cfg = PipelineConfig { k_nn: 2, m: 3, ..Default::default() };
//! let result = run(&stack, &cfg).unwrap();
//! assert_eq!(result.betti[0].curve.values, vec![1.0, 1.0, 1.0]);
//! ```

pub mod descriptors;
pub mod error;
pub mod flagcomplex;
pub mod layerstack;
pub mod neighborhood;
pub mod oracle;
pub mod pipeline;
pub mod pruning;
pub mod synth;
pub mod unionfind;
pub mod zigzag;

pub use descriptors::{
    betti_curve, births_relative_frequency, epi_difference, interlayer_persistence, subset_stats,
    variance_scaling_fit, weighted_interlayer, weighted_interlayer_series, DescriptorConfig,
    DescriptorSeries, Normalization, RealGrid,
};
pub use error::{Error, Result};
pub use flagcomplex::{expand, expand_capped, intersect, FlagComplex, Simplex};
pub use layerstack::{
    partition_subsets, read_layerstack, write_layerstack, LayerStack, PointCloud,
};
pub use neighborhood::{
    calibrate_radius, calibrate_radius_with, connected_components, filter_edges, knn_graph,
    EdgeFilter, NeighborGraph,
};
pub use oracle::{verify_diagram, OracleReport, Violation};
pub use pipeline::{run, scan_k, PipelineConfig, RunResult, ScanRow, VrSettings};
pub use pruning::{prune_layers, sliding_windows, PruneReport};
pub use synth::{generate, SynthKind, SynthSpec};
pub use zigzag::{
    build_filtration, compute_zigzag, effective_image, to_effective, EffectiveImage, Interval,
    PersistenceDiagram, ZigzagFiltration,
};
