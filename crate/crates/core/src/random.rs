//! Reproducible random instances for experiments and property tests.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bundle::{HermitianBundle, Section};
use crate::error::Result;
use crate::graph::{MeasuredGraph, WeightedGraph};
use crate::linalg::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph on `2..=max_vertices` vertices: a random spanning tree
/// plus extra edges, weights in `[0.1, 2)`, `μ` in `[0.2, 3)` and `V` in `[-2, 2)`.
pub fn random_measured_graph(seed: u64, max_vertices: usize) -> Result<MeasuredGraph> {
    let mut r = rng(seed);
    let n = r.random_range(2..=max_vertices.max(2));
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for x in 1..n {
        let parent = r.random_range(0..x);
        edges.push((parent, x, r.random_range(0.1..2.0)));
    }
    let extra_p = 2.0 / n as f64;
    for x in 0..n {
        for y in (x + 1)..n {
            if edges.iter().any(|&(a, b, _)| (a, b) == (x, y)) {
                continue;
            }
            if r.random_bool(extra_p) {
                edges.push((x, y, r.random_range(0.1..2.0)));
            }
        }
    }
    let graph = WeightedGraph::from_indexed(ids, edges)?;
    let mu = (0..n).map(|_| r.random_range(0.2..3.0)).collect();
    let v = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
    MeasuredGraph::new(graph, mu, v)
}

/// Standard complex Gaussian section.
pub fn random_section(bundle: &HermitianBundle, r: &mut ChaCha8Rng) -> Section {
    let data = (0..bundle.total_dim())
        .map(|_| {
            let re: f64 = StandardNormal.sample(r);
            let im: f64 = StandardNormal.sample(r);
            C64::new(re, im)
        })
        .collect();
    Section::from_flat(bundle, data).expect("layout taken from the bundle")
}

pub fn random_real(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(r)).collect()
}

/// `φ(x) = c(x) f(x)` with random `c ≥ 0`, zero at roughly a fifth of the
/// vertices, so that `⟨f(x), φ(x)⟩ = |f(x)| |φ(x)|` everywhere.
pub fn aligned_section(f: &Section, r: &mut ChaCha8Rng) -> Section {
    let c: Vec<f64> = (0..f.len())
        .map(|_| if r.random_bool(0.2) { 0.0 } else { r.random_range(0.0..2.0) })
        .collect();
    f.scale_pointwise(&c)
}
