#![allow(clippy::needless_range_loop)]

mod common;

use proptest::prelude::*;
use zzt_core::pipeline::layer_complexes;
use zzt_core::zigzag::interleave_states;
use zzt_core::{
    betti_curve, births_relative_frequency, build_filtration, compute_zigzag, effective_image,
    epi_difference, interlayer_persistence, oracle, to_effective, weighted_interlayer,
    DescriptorConfig, EffectiveImage, PipelineConfig,
};

const ALPHAS: [f64; 5] = [-1.0, 0.0, 0.5, 1.0, 2.0];

fn images(seed: u64, n: usize, layers: usize, k: usize) -> (Vec<EffectiveImage>, Vec<Vec<usize>>) {
    let mut r = common::rng(seed);
    let stack = common::random_stack(&mut r, n, layers, 3);
    let cfg = PipelineConfig {
        k_nn: k,
        m: 3,
        ..Default::default()
    };
    let (cx, _) = layer_complexes(&stack, &cfg).unwrap();
    let d = compute_zigzag(&build_filtration(&cx).unwrap()).unwrap();
    let states = interleave_states(&cx).unwrap();
    let betti = (0..3)
        .map(|p| {
            (0..layers)
                .map(|l| oracle::betti(&states[2 * l], p).unwrap())
                .collect()
        })
        .collect();
    let eff = to_effective(&d);
    ((0..3).map(|p| effective_image(&eff, p)).collect(), betti)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants(seed in any::<u64>(), n in 8usize..30, layers in 2usize..7, k in 1usize..5) {
        let (imgs, betti) = images(seed, n, layers, k);
        for img in &imgs {
            let curve = betti_curve(img);
            let want: Vec<f64> = betti[img.p].iter().map(|&b| b as f64).collect();
            prop_assert_eq!(curve.values, want);
            for alpha in ALPHAS {
                let cfg = DescriptorConfig { p: img.p, ..DescriptorConfig::with_alpha(alpha) };
                let b = births_relative_frequency(img, &cfg);
                if !b.degenerate {
                    prop_assert!((b.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
                for l1 in 0..layers {
                    let z = |l2| interlayer_persistence(img, l1, l2, &cfg);
                    if betti[img.p][l1] > 0 {
                        prop_assert_eq!(z(l1), 1.0);
                    }
                    for l2 in 0..layers {
                        prop_assert!((0.0..=1.0).contains(&z(l2)));
                    }
                    for l2 in l1 + 1..layers {
                        prop_assert!(z(l2) <= z(l2 - 1));
                    }
                    for l2 in (0..l1).rev() {
                        prop_assert!(z(l2) <= z(l2 + 1));
                    }
                    let zbar = weighted_interlayer(img, l1, &cfg);
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&zbar));
                }
            }
        }
        let (other, _) = images(seed ^ 0x5a5a, n, layers, k);
        for (a, b) in imgs.iter().zip(&other) {
            if a.total() > 0 && b.total() > 0 {
                let ab = epi_difference(a, b).unwrap();
                let ba = epi_difference(b, a).unwrap();
                for (x, y) in ab.values.iter().zip(&ba.values) {
                    prop_assert!((x + y).abs() < 1e-12);
                    prop_assert!((-1.0..=1.0).contains(x));
                }
            }
        }
    }
}
