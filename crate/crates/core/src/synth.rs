//! Synthetic layer stacks with known topology.
//!
//! Every layer draws from its own ChaCha stream, so output does not depend on
//! the order layers are generated in.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layerstack::{LayerStack, PointCloud};

/// Shrink factor applied to collapsed layers of a vanishing circle.
pub const COLLAPSE_SCALE: f64 = 0.01;
/// Distance between blob centres before they merge.
pub const BLOB_SEPARATION: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    PersistentCircle,
    VanishingCircle,
    RandomWalk,
    BlobMerge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n_points: usize,
    pub n_layers: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub noise_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_layer: Option<usize>,
}

fn default_dim() -> usize {
    2
}

impl SynthSpec {
    pub fn new(kind: SynthKind, n_points: usize, n_layers: usize) -> Self {
        SynthSpec {
            kind,
            n_points,
            n_layers,
            dim: 2,
            noise_scale: 0.0,
            seed: 0,
            event_layer: None,
        }
    }

    pub fn dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn noise(mut self, noise_scale: f64) -> Self {
        self.noise_scale = noise_scale;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn event_layer(mut self, layer: usize) -> Self {
        self.event_layer = Some(layer);
        self
    }

    /// The event layer, defaulting to the middle of the stack.
    pub fn resolved_event_layer(&self) -> usize {
        self.event_layer.unwrap_or(self.n_layers / 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_layers < 2 {
            return Err(Error::invalid("a stack needs at least 2 layers"));
        }
        if self.n_points == 0 || self.dim == 0 {
            return Err(Error::invalid("n_points and dim must be positive"));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::invalid(
                "noise_scale must be finite and non-negative",
            ));
        }
        let circle = matches!(
            self.kind,
            SynthKind::PersistentCircle | SynthKind::VanishingCircle
        );
        if circle && (self.dim < 2 || self.n_points < 3) {
            return Err(Error::invalid(
                "circle stacks need dim >= 2 and at least 3 points",
            ));
        }
        if let Some(e) = self.event_layer {
            if e >= self.n_layers {
                return Err(Error::invalid(format!(
                    "event_layer {e} out of range for {} layers",
                    self.n_layers
                )));
            }
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn to_cloud(n: usize, dim: usize, coords: Vec<f64>) -> Result<PointCloud> {
    PointCloud::new(n, dim, coords.into_iter().map(|x| x as f32).collect())
}

fn circle(n: usize, dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * dim];
    for i in 0..n {
        let t = TAU * i as f64 / n as f64;
        c[i * dim] = t.cos();
        c[i * dim + 1] = t.sin();
    }
    c
}

/// The circle opened into a short segment at the origin, in angular order.
fn collapsed(n: usize, dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * dim];
    for i in 0..n {
        c[i * dim] = COLLAPSE_SCALE * (i as f64 / (n - 1) as f64 - 0.5);
    }
    c
}

fn jitter(base: &mut [f64], rng: &mut ChaCha8Rng, scale: f64) {
    if scale > 0.0 {
        let noise = gaussian(rng, base.len(), scale);
        for (x, e) in base.iter_mut().zip(noise) {
            *x += e;
        }
    }
}

/// Builds the stack described by `spec`; bit-identical for a given spec.
pub fn generate(spec: &SynthSpec) -> Result<LayerStack> {
    spec.validate()?;
    let (n, dim, seed, noise) = (spec.n_points, spec.dim, spec.seed, spec.noise_scale);
    let event = spec.resolved_event_layer();
    let layer_rng = |l: usize| stream(seed, l as u64 + 1);

    let coords: Vec<Vec<f64>> = match spec.kind {
        SynthKind::PersistentCircle => (0..spec.n_layers)
            .into_par_iter()
            .map(|l| {
                let mut c = circle(n, dim);
                jitter(&mut c, &mut layer_rng(l), noise);
                c
            })
            .collect(),
        SynthKind::VanishingCircle => (0..spec.n_layers)
            .into_par_iter()
            .map(|l| {
                let (mut c, scale) = if l < event {
                    (circle(n, dim), noise)
                } else {
                    (collapsed(n, dim), noise * COLLAPSE_SCALE)
                };
                jitter(&mut c, &mut layer_rng(l), scale);
                c
            })
            .collect(),
        SynthKind::RandomWalk => {
            let steps: Vec<Vec<f64>> = (1..spec.n_layers)
                .into_par_iter()
                .map(|l| gaussian(&mut layer_rng(l), n * dim, noise))
                .collect();
            let mut cur = gaussian(&mut stream(seed, 0), n * dim, 1.0);
            let mut out = vec![cur.clone()];
            for s in steps {
                for (x, d) in cur.iter_mut().zip(s) {
                    *x += d;
                }
                out.push(cur.clone());
            }
            out
        }
        SynthKind::BlobMerge => {
            let offsets = gaussian(&mut stream(seed, 0), n * dim, 1.0);
            (0..spec.n_layers)
                .into_par_iter()
                .map(|l| {
                    let half = if l < event {
                        BLOB_SEPARATION / 2.0
                    } else {
                        0.0
                    };
                    let mut c = offsets.clone();
                    for i in 0..n {
                        c[i * dim] += if i < n / 2 { -half } else { half };
                    }
                    jitter(&mut c, &mut layer_rng(l), noise);
                    c
                })
                .collect()
        }
    };

    let layers = coords
        .into_iter()
        .map(|c| to_cloud(n, dim, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(LayerStack::new(layers)?.with_meta(serde_json::json!({ "synth": spec })))
}
