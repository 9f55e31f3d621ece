//! Inputs shared by the benchmarks.

use zzt_core::{generate, LayerStack, SynthKind, SynthSpec};

/// A seeded random-walk stack: every layer is a small perturbation of the last.
pub fn walk_stack(n_points: usize, n_layers: usize, dim: usize) -> LayerStack {
    let spec = SynthSpec::new(SynthKind::RandomWalk, n_points, n_layers)
        .dim(dim)
        .noise(0.2)
        .seed(17);
    generate(&spec).expect("valid benchmark spec")
}
