//! Zigzag filtration of layer and intersection complexes, and its persistence.

mod diagram;
mod engine;
mod filtration;

pub use diagram::{
    aggregate_raw_image, effective_image, effective_images, raw_image, shift_to_layer,
    to_effective, CountGrid, DiagramExport, DimensionExport, EffectiveDiagram, EffectiveImage,
    EffectiveInterval, EffectiveRow, Interval, PersistenceDiagram,
};
pub use engine::compute_zigzag;
pub use filtration::{build_filtration, interleave_states, Event, EventKind, ZigzagFiltration};
