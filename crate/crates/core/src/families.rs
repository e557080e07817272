//! Generators for the standard example families: truncations of the integer
//! line, unions of complete graphs, and contact graphs of circle packings.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{MeasuredGraph, WeightedGraph};

/// Measure on a truncation of ℤ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineMeasure {
    /// `μ ≡ 1`.
    Uniform,
    /// `ν_α(k) = |k|^{-α}` for `k ≠ 0`, `ν_α(0) = 1`.
    NuAlpha(f64),
    /// `ν(k) = 2 k^{-4}` for `k ≠ 0`, `ν(0) = 2`.
    NuQuartic,
}

impl LineMeasure {
    pub fn at(self, k: i64) -> f64 {
        match self {
            LineMeasure::Uniform => 1.0,
            LineMeasure::NuAlpha(alpha) => {
                if k == 0 {
                    1.0
                } else {
                    (k.unsigned_abs() as f64).powf(-alpha)
                }
            }
            LineMeasure::NuQuartic => {
                if k == 0 {
                    2.0
                } else {
                    2.0 * (k as f64).powi(-4)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinePotential {
    Zero,
    /// `V(k) = k² / 2`.
    HalfSquare,
}

impl LinePotential {
    pub fn at(self, k: i64) -> f64 {
        match self {
            LinePotential::Zero => 0.0,
            LinePotential::HalfSquare => (k as f64) * (k as f64) / 2.0,
        }
    }
}

/// Vertex index of the integer `k` in a graph built by [`line_z`] with radius `n`.
pub fn line_index(n: usize, k: i64) -> usize {
    (k + n as i64) as usize
}

/// The integer carried by vertex index `i` of [`line_z`] with radius `n`.
pub fn line_value(n: usize, i: usize) -> i64 {
    i as i64 - n as i64
}

/// `{-n, …, n}` with unit weights between neighbours. Vertex ids are the
/// decimal integers, in increasing order; `±n` form the section boundary.
pub fn line_z(n: usize, measure: LineMeasure, potential: LinePotential) -> Result<MeasuredGraph> {
    if n == 0 {
        return Err(Error::BadParameter("line truncation radius must be at least 1".into()));
    }
    if let LineMeasure::NuAlpha(a) = measure {
        if !a.is_finite() {
            return Err(Error::BadParameter("alpha must be finite".into()));
        }
    }
    let ks: Vec<i64> = (-(n as i64)..=n as i64).collect();
    let ids = ks.iter().map(|k| k.to_string()).collect();
    let edges = (0..ks.len() - 1).map(|i| (i, i + 1, 1.0)).collect();
    let graph = WeightedGraph::from_indexed(ids, edges)?.with_section_boundary(vec![0, 2 * n]);
    let mu = ks.iter().map(|&k| measure.at(k)).collect();
    let v = ks.iter().map(|&k| potential.at(k)).collect();
    MeasuredGraph::new(graph, mu, v)
}

/// Disjoint union of `K_1, …, K_{n_max}` with unit weights and counting
/// measure. With `connect`, a unit bridge joins the last vertex of block `n`
/// to the first vertex of block `n + 1`. Ids are `"n:i"`.
pub fn complete_union(n_max: usize, connect: bool) -> Result<MeasuredGraph> {
    if n_max == 0 {
        return Err(Error::BadParameter("n_max must be at least 1".into()));
    }
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    let mut block_start = Vec::new();
    for n in 1..=n_max {
        let start = ids.len();
        block_start.push(start);
        for i in 0..n {
            ids.push(format!("{n}:{i}"));
        }
        for i in 0..n {
            for j in i + 1..n {
                edges.push((start + i, start + j, 1.0));
            }
        }
    }
    if connect {
        for n in 1..n_max {
            let last_of_block = block_start[n] - 1;
            edges.push((last_of_block, block_start[n], 1.0));
        }
    }
    let last = block_start[n_max - 1];
    let boundary = (last..ids.len()).collect();
    let graph = WeightedGraph::from_indexed(ids, edges)?.with_section_boundary(boundary);
    Ok(MeasuredGraph::counting(graph))
}

/// Indices of the vertices of block `K_n` in a [`complete_union`] graph.
pub fn complete_union_block(n: usize) -> core::ops::Range<usize> {
    let start = n * (n - 1) / 2;
    start..start + n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

pub const DEFAULT_TANGENCY_TOL: f64 = 1e-9;

/// Contact graph of a circle packing. Vertices sit at the centres (ids
/// `"c<i>"`); tangent circles are joined by a unit edge. The measure is the
/// smallest one for which the Euclidean distance of the centres is intrinsic.
pub fn circle_packing_nerve(circles: &[Circle], tol: f64) -> Result<(MeasuredGraph, Vec<Vec<f64>>)> {
    if !(tol > 0.0) {
        return Err(Error::BadParameter("tangency tolerance must be positive".into()));
    }
    let mut edges = Vec::new();
    for (i, a) in circles.iter().enumerate() {
        if !(a.radius > 0.0) {
            return Err(Error::BadParameter(format!("circle {i} has non-positive radius")));
        }
        for (j, b) in circles.iter().enumerate().skip(i + 1) {
            let d = distance(&a.center, &b.center);
            let touch = a.radius + b.radius;
            if d < touch - tol {
                return Err(Error::OverlappingCircles(i, j));
            }
            if d <= touch + tol {
                edges.push((i, j, 1.0));
            }
        }
    }
    let ids: Vec<String> = (0..circles.len()).map(|i| format!("c{i}")).collect();
    let graph = WeightedGraph::from_indexed(ids, edges)?;
    let coords: Vec<Vec<f64>> = circles.iter().map(|c| c.center.to_vec()).collect();
    let mu: Vec<f64> = (0..graph.len())
        .map(|x| {
            graph
                .neighbors(x)
                .iter()
                .map(|n| n.weight * sq_distance(&coords[x], &coords[n.vertex]))
                .sum()
        })
        .collect();
    if let Some(x) = mu.iter().position(|&m| m <= 0.0) {
        return Err(Error::DegenerateMeasure(graph.id(x).to_string()));
    }
    let n = graph.len();
    Ok((MeasuredGraph::new(graph, mu, vec![0.0; n])?, coords))
}

/// Unit circles centred on a hexagonal lattice, all hexagonal rings up to `rings`.
pub fn hex_patch(rings: usize) -> Vec<Circle> {
    let r = rings as i64;
    let mut out = Vec::new();
    for q in -r..=r {
        for s in (-r).max(-q - r)..=r.min(-q + r) {
            let x = 2.0 * (q as f64) + (s as f64);
            let y = (s as f64) * 3.0.sqrt();
            out.push(Circle { center: [x, y], radius: 1.0 });
        }
    }
    out
}

fn sq_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    sq_distance(a, b).sqrt()
}

/// `f_α(0) = 1`, `f_α(n) = 1 + sgn(n) Σ_{k=1}^{|n|} k^{-α}`. With
/// `signed = false` the sign is dropped, giving a function that tends to
/// infinity along both ends of the line.
pub fn f_alpha(n: i64, alpha: f64, signed: bool) -> f64 {
    let partial: f64 = (1..=n.unsigned_abs()).map(|k| (k as f64).powf(-alpha)).sum();
    if signed && n < 0 {
        1.0 - partial
    } else {
        1.0 + partial
    }
}

/// `f_α` on every vertex of a [`line_z`] truncation of radius `radius`.
pub fn f_alpha_on_line(radius: usize, alpha: f64, signed: bool) -> Vec<f64> {
    let mut out = vec![0.0; 2 * radius + 1];
    // cumulative sums, one pass per side
    let mut partial = 0.0;
    out[radius] = 1.0;
    for k in 1..=radius {
        partial += (k as f64).powf(-alpha);
        out[radius + k] = 1.0 + partial;
        out[radius - k] = if signed { 1.0 - partial } else { 1.0 + partial };
    }
    out
}

/// `g_α = f_{α/2} / √2` on a [`line_z`] truncation.
pub fn g_alpha_on_line(radius: usize, alpha: f64) -> Vec<f64> {
    let s = 2.0.sqrt();
    f_alpha_on_line(radius, alpha / 2.0, true)
        .into_iter()
        .map(|v| v / s)
        .collect()
}

/// Embedding `ι(k) = 2 - 1/k` (`ι(0) = 0`) of the line into ℝ.
pub fn iota_z(k: i64) -> f64 {
    if k == 0 {
        0.0
    } else {
        2.0 - 1.0 / (k as f64)
    }
}

/// Truncated tree of the bounded-diameter counterexample: a spine
/// `(n,0)` for `n = 1..=n_max` with `b((n,0),(n+1,0)) = n⁻²`, and a unit
/// edge `(n,0) - (n,1)` at every spine vertex. Ids are `"n,i"`; counting measure.
pub fn keller_tree(n_max: usize) -> Result<MeasuredGraph> {
    if n_max == 0 {
        return Err(Error::BadParameter("n_max must be positive".into()));
    }
    let mut ids = Vec::with_capacity(2 * n_max);
    for n in 1..=n_max {
        ids.push(format!("{n},0"));
        ids.push(format!("{n},1"));
    }
    let mut edges = Vec::new();
    for n in 1..=n_max {
        let spine = 2 * (n - 1);
        edges.push((spine, spine + 1, 1.0));
        if n < n_max {
            edges.push((spine, spine + 2, 1.0 / (n * n) as f64));
        }
    }
    Ok(MeasuredGraph::counting(WeightedGraph::from_indexed(ids, edges)?))
}

/// `D((n,i)) = i + Σ_{k≥n} k⁻²`, the distance to the Cauchy boundary point of
/// the untruncated tree, in [`keller_tree`] vertex order.
pub fn keller_boundary_distance(n_max: usize) -> Vec<f64> {
    // Σ_{k≥1} k⁻² = π²/6, so the tail is π²/6 minus the head
    let mut head = 0.0;
    let mut out = Vec::with_capacity(2 * n_max);
    for n in 1..=n_max {
        let tail = core::f64::consts::PI * core::f64::consts::PI / 6.0 - head;
        out.push(tail);
        out.push(1.0 + tail);
        head += 1.0 / (n * n) as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_sizes() {
        let mg = line_z(2, LineMeasure::Uniform, LinePotential::Zero).unwrap();
        assert_eq!(mg.len(), 5);
        assert_eq!(mg.graph.edges().len(), 4);
        assert!(mg.graph.is_connected());
        assert!(line_z(0, LineMeasure::Uniform, LinePotential::Zero).is_err());
    }

    #[test]
    fn quartic_measure_values() {
        let mg = line_z(1, LineMeasure::NuQuartic, LinePotential::Zero).unwrap();
        assert_eq!(mg.mu(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn nu_alpha_value() {
        let mg = line_z(2, LineMeasure::NuAlpha(4.0), LinePotential::HalfSquare).unwrap();
        assert_eq!(mg.mu()[line_index(2, 2)], 1.0 / 16.0);
        assert_eq!(mg.potential()[line_index(2, -2)], 2.0);
    }

    #[test]
    fn complete_union_counts() {
        let a = complete_union(2, false).unwrap();
        assert_eq!((a.len(), a.graph.edges().len()), (3, 1));
        let b = complete_union(3, true).unwrap();
        assert_eq!((b.len(), b.graph.edges().len()), (6, 1 + 3 + 2));
        let c = complete_union(1, false).unwrap();
        assert_eq!((c.len(), c.graph.edges().len()), (1, 0));
        assert_eq!(complete_union(5, false).unwrap().graph.components().1, 5);
        assert_eq!(complete_union_block(3), 3..6);
    }

    #[test]
    fn tangent_circles() {
        let unit = |x: f64| Circle { center: [x, 0.0], radius: 1.0 };
        let (mg, _) = circle_packing_nerve(&[unit(0.0), unit(2.0)], DEFAULT_TANGENCY_TOL).unwrap();
        assert_eq!(mg.graph.edges().len(), 1);
        assert_eq!(mg.mu(), &[4.0, 4.0]);

        assert!(matches!(
            circle_packing_nerve(&[unit(0.0)], DEFAULT_TANGENCY_TOL),
            Err(Error::DegenerateMeasure(_))
        ));

        let (chain, _) =
            circle_packing_nerve(&[unit(0.0), unit(2.0), unit(4.0)], DEFAULT_TANGENCY_TOL).unwrap();
        assert_eq!(chain.graph.edges().len(), 2);
        assert!(chain.graph.adjacent(0, 1) && chain.graph.adjacent(1, 2));
        assert!(!chain.graph.adjacent(0, 2));

        assert!(matches!(
            circle_packing_nerve(&[unit(0.0), unit(1.5)], DEFAULT_TANGENCY_TOL),
            Err(Error::OverlappingCircles(0, 1))
        ));
    }

    #[test]
    fn hex_patch_is_a_packing() {
        let circles = hex_patch(2);
        assert_eq!(circles.len(), 19);
        let (mg, _) = circle_packing_nerve(&circles, DEFAULT_TANGENCY_TOL).unwrap();
        // 9 r² + 3 r contacts for r rings
        assert_eq!(mg.graph.edges().len(), 42);
        assert!((0..mg.len()).all(|x| mg.graph.degree_at(x) <= 6.0));
    }

    #[test]
    fn f_alpha_matches_pointwise_formula() {
        let v = f_alpha_on_line(5, 0.75, true);
        for k in -5..=5 {
            assert!((v[line_index(5, k)] - f_alpha(k, 0.75, true)).abs() < 1e-14);
        }
        assert_eq!(f_alpha(0, 0.5, true), 1.0);
        assert_eq!(f_alpha(1, 0.5, true), 2.0);
        assert_eq!(f_alpha(-1, 0.5, true), 0.0);
        assert_eq!(f_alpha(-1, 0.5, false), 2.0);
    }

    #[test]
    fn keller_tree_shape() {
        let mg = keller_tree(4).unwrap();
        assert_eq!(mg.len(), 8);
        assert_eq!(mg.graph.edges().len(), 7);
        let (a, b) = (mg.graph.index_of("2,0").unwrap(), mg.graph.index_of("3,0").unwrap());
        assert_eq!(mg.graph.weight(a, b), 0.25);
        let d = keller_boundary_distance(3);
        assert!((d[0] - core::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
        assert!((d[3] - d[2] - 1.0).abs() < 1e-15);
        assert!((d[0] - d[2] - 1.0).abs() < 1e-15);
    }
}
