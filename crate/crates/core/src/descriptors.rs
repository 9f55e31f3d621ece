//! Layer-wise summaries of effective persistence images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zigzag::EffectiveImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Births weighted and normalised to a distribution over layers.
    #[default]
    Global,
    /// Per-layer denominator `Σ_d ω(ℓ, d) · Σ_d PI(ℓ, d)`.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptorConfig {
    pub alpha: f64,
    pub p: usize,
    /// Count a feature as alive at its death layer (`d >= max(ℓ1, ℓ2)`).
    pub inclusive_death: bool,
    pub normalization: Normalization,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            alpha: 0.0,
            p: 1,
            inclusive_death: true,
            normalization: Normalization::Global,
        }
    }
}

impl DescriptorConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        DescriptorConfig {
            alpha,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSeries {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_std: Option<Vec<f64>>,
    /// Set when the input carried no usable mass and the values are all zero.
    #[serde(default)]
    pub degenerate: bool,
}

impl DescriptorSeries {
    pub fn new(values: Vec<f64>) -> Self {
        DescriptorSeries {
            values,
            subset_mean: None,
            subset_std: None,
            degenerate: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `layer,value,subset_mean,subset_std`; missing statistics are left blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,value,subset_mean,subset_std\n");
        for (l, v) in self.values.iter().enumerate() {
            let cell =
                |s: &Option<Vec<f64>>| s.as_ref().map(|x| x[l].to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{l},{v},{},{}\n",
                cell(&self.subset_mean),
                cell(&self.subset_std)
            ));
        }
        out
    }
}

/// `|ℓ - ℓ_i|^α`, with the diagonal weight fixed to zero for every `α`.
pub fn weight(l: usize, li: usize, alpha: f64) -> f64 {
    if l == li {
        0.0
    } else {
        (l.abs_diff(li) as f64).powf(alpha)
    }
}

pub fn births_relative_frequency(img: &EffectiveImage, cfg: &DescriptorConfig) -> DescriptorSeries {
    let n = img.n_layers;
    let numer: Vec<f64> = (0..n)
        .map(|l| {
            (l..n)
                .map(|d| weight(l, d, cfg.alpha) * img.get(l, d) as f64)
                .sum()
        })
        .collect();
    let values: Vec<f64> = match cfg.normalization {
        Normalization::Global => {
            let total: f64 = numer.iter().sum();
            if total > 0.0 {
                numer.iter().map(|x| x / total).collect()
            } else {
                vec![0.0; n]
            }
        }
        Normalization::PaperLiteral => (0..n)
            .map(|l| {
                let w: f64 = (l..n).map(|d| weight(l, d, cfg.alpha)).sum();
                let mass: f64 = (l..n).map(|d| img.get(l, d) as f64).sum();
                let denom = w * mass;
                if denom > 0.0 {
                    numer[l] / denom
                } else {
                    0.0
                }
            })
            .collect(),
    };
    let degenerate = numer.iter().all(|&x| x == 0.0);
    DescriptorSeries {
        degenerate,
        ..DescriptorSeries::new(values)
    }
}

/// Fraction of the image mass alive at `l1` that stays alive through `l2`.
pub fn interlayer_persistence(
    img: &EffectiveImage,
    l1: usize,
    l2: usize,
    cfg: &DescriptorConfig,
) -> f64 {
    let beta = img.alive(l1);
    if beta == 0 {
        return 0.0;
    }
    let (lo, hi) = (l1.min(l2), l1.max(l2));
    let first_death = if cfg.inclusive_death { hi } else { hi + 1 };
    let mut count = 0u64;
    for b in 0..=lo {
        for d in first_death..img.n_layers {
            count += img.get(b, d);
        }
    }
    count as f64 / beta as f64
}

/// Power-weighted average of `interlayer_persistence(l, ·)` over the other layers.
pub fn weighted_interlayer(img: &EffectiveImage, l: usize, cfg: &DescriptorConfig) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for li in (0..img.n_layers).filter(|&li| li != l) {
        let w = weight(l, li, cfg.alpha);
        num += w * interlayer_persistence(img, l, li, cfg);
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn weighted_interlayer_series(
    img: &EffectiveImage,
    cfg: &DescriptorConfig,
) -> DescriptorSeries {
    let values: Vec<f64> = (0..img.n_layers)
        .map(|l| weighted_interlayer(img, l, cfg))
        .collect();
    DescriptorSeries {
        degenerate: img.total() == 0,
        ..DescriptorSeries::new(values)
    }
}

/// Exact per-layer Betti numbers. The plain cell sum over `b <= ℓ <= d` would
/// also count features that already died on the intersection before `ℓ`.
pub fn betti_curve(img: &EffectiveImage) -> DescriptorSeries {
    DescriptorSeries::new((0..img.n_layers).map(|l| img.betti(l) as f64).collect())
}

/// Dense real-valued grid indexed by (birth layer, death layer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealGrid {
    pub size: usize,
    pub values: Vec<f64>,
}

impl RealGrid {
    pub fn get(&self, birth: usize, death: usize) -> f64 {
        self.values[birth * self.size + death]
    }
}

/// Difference of the two images after normalising each to unit mass.
pub fn epi_difference(a: &EffectiveImage, b: &EffectiveImage) -> Result<RealGrid> {
    if a.n_layers != b.n_layers {
        return Err(Error::Mismatch(format!(
            "images of size {} and {}",
            a.n_layers, b.n_layers
        )));
    }
    let (ta, tb) = (a.total(), b.total());
    if ta == 0 || tb == 0 {
        return Err(Error::invalid("cannot normalise an empty image"));
    }
    let values = a
        .grid
        .counts
        .iter()
        .zip(&b.grid.counts)
        .map(|(&x, &y)| x as f64 / ta as f64 - y as f64 / tb as f64)
        .collect();
    Ok(RealGrid {
        size: a.n_layers,
        values,
    })
}

/// Per-layer sample mean and standard deviation (divisor `n - 1`).
pub fn subset_stats(series: &[DescriptorSeries]) -> Result<DescriptorSeries> {
    if series.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 series for a standard deviation, got {}",
            series.len()
        )));
    }
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) {
        return Err(Error::Mismatch("series lengths differ".into()));
    }
    let k = series.len() as f64;
    let mean: Vec<f64> = (0..n)
        .map(|l| series.iter().map(|s| s.values[l]).sum::<f64>() / k)
        .collect();
    let std: Vec<f64> = (0..n)
        .map(|l| {
            let ss: f64 = series.iter().map(|s| (s.values[l] - mean[l]).powi(2)).sum();
            (ss / (k - 1.0)).sqrt()
        })
        .collect();
    Ok(DescriptorSeries {
        values: mean.clone(),
        subset_mean: Some(mean),
        subset_std: Some(std),
        degenerate: series.iter().all(|s| s.degenerate),
    })
}

/// Least-squares slope of `ln(variance)` against `ln(size)`.
pub fn variance_scaling_fit(sizes: &[f64], variances: &[f64]) -> Result<f64> {
    if sizes.len() != variances.len() || sizes.len() < 3 {
        return Err(Error::invalid("need at least 3 (size, variance) pairs"));
    }
    if sizes
        .iter()
        .chain(variances)
        .any(|&x| x <= 0.0 || !x.is_finite())
    {
        return Err(Error::invalid("sizes and variances must be positive"));
    }
    let xs: Vec<f64> = sizes.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = variances.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("sizes must not all be equal"));
    }
    Ok(sxy / sxx)
}
