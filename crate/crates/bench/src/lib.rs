//! Inputs shared by the benchmarks.

use bdrkit_core::{gen_target_bd, inject_corruption, BlockSpec, CorruptionSpec, SymmetricGraph};

/// Noisy block-diagonal graph with `k` blocks of `size` vertices and weak
/// similarity between every pair of blocks.
pub fn grouped_graph(k: usize, size: usize, seed: u64) -> SymmetricGraph {
    let within: Vec<f64> = (0..k).map(|i| 0.6 + 0.3 * i as f64 / k as f64).collect();
    let spec = BlockSpec::new(vec![size; k], within).with_jitter(0.01);
    let group = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        0.05 + 0.02 * ((i + j) % 3) as f64
                    }
                })
                .collect()
        })
        .collect();
    let corruption = CorruptionSpec {
        group_sim: group,
        ..Default::default()
    };
    let target = gen_target_bd(&spec, seed).expect("valid spec");
    inject_corruption(&target, &spec, &corruption, seed)
        .expect("valid corruption")
        .graph
}

/// Shuffles the vertices of `g` with a fixed stride permutation.
pub fn scrambled(g: &SymmetricGraph) -> SymmetricGraph {
    let n = g.len();
    let stride = (1..n).rev().find(|s| gcd(*s, n) == 1 && *s > n / 3).unwrap_or(1);
    let order: Vec<usize> = (0..n).map(|i| (i * stride) % n).collect();
    g.permuted(&order)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
