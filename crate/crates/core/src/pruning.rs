//! Layer-pruning recommendations from the inter-layer persistence plateau.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.9;
pub const DEFAULT_PRUNE_ALPHA: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub layers: Vec<usize>,
    pub threshold: f64,
    pub alpha: f64,
    pub zbar: Vec<f64>,
}

/// Layers whose `zbar` exceeds `max(zbar) · threshold`, ascending.
pub fn prune_layers(zbar: &[f64], threshold: f64, alpha: f64) -> Result<PruneReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!(
            "threshold {threshold} must be in (0, 1]"
        )));
    }
    if zbar.is_empty() {
        return Err(Error::invalid("empty zbar series"));
    }
    if zbar.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("zbar contains non-finite values"));
    }
    let max = zbar.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(Error::invalid("zbar has no positive value"));
    }
    let cut = max * threshold;
    Ok(PruneReport {
        layers: zbar
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > cut)
            .map(|(l, _)| l)
            .collect(),
        threshold,
        alpha,
        zbar: zbar.to_vec(),
    })
}

/// Blocks `[s, s + window)` for `s = 0, step, 2·step, …` that fit in `n_layers`.
pub fn sliding_windows(n_layers: usize, window: usize, step: usize) -> Result<Vec<Vec<usize>>> {
    if window == 0 || window > n_layers || step == 0 {
        return Err(Error::invalid(format!(
            "window {window} / step {step} invalid for {n_layers} layers"
        )));
    }
    Ok((0..=n_layers - window)
        .step_by(step)
        .map(|s| (s..s + window).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZBAR: [f64; 7] = [0.1, 0.5, 0.92, 0.95, 1.0, 0.93, 0.4];

    #[test]
    fn worked_example() {
        let r = prune_layers(&ZBAR, 0.9, -1.0).unwrap();
        assert_eq!(r.layers, vec![2, 3, 4, 5]);
    }

    #[test]
    fn threshold_one_is_empty() {
        assert!(prune_layers(&ZBAR, 1.0, -1.0).unwrap().layers.is_empty());
    }

    #[test]
    fn constant_series_keeps_everything() {
        let r = prune_layers(&[0.4; 9], 0.9, -1.0).unwrap();
        assert_eq!(r.layers, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn errors() {
        assert!(prune_layers(&[0.0; 4], 0.9, 0.0).is_err());
        assert!(prune_layers(&[], 0.9, 0.0).is_err());
        assert!(prune_layers(&ZBAR, 0.0, 0.0).is_err());
        assert!(prune_layers(&ZBAR, 1.5, 0.0).is_err());
    }

    #[test]
    fn windows() {
        let w = sliding_windows(32, 5, 2).unwrap();
        assert_eq!(w.len(), 14);
        assert_eq!(w[0], vec![0, 1, 2, 3, 4]);
        assert_eq!(w[13], vec![26, 27, 28, 29, 30]);
        assert_eq!(sliding_windows(7, 7, 3).unwrap().len(), 1);
        assert_eq!(sliding_windows(5, 2, 1).unwrap().len(), 4);
        assert!(sliding_windows(5, 6, 1).is_err());
        assert!(sliding_windows(5, 2, 0).is_err());
    }
}
