//! Small Ising models solved by exhaustive enumeration.
//!
//! Spins take values 0/1 and `H(x)` counts the edges whose endpoints agree,
//! so the Gibbs weight of `x` at inverse temperature β is `exp(β H(x))`.
//! Everything the TPA update needs is the law of `H(X)`, which is read off a
//! histogram of Hamiltonian levels built once per graph.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::tpa::NestedGibbsFamily;

/// Enumeration is limited to 2^24 configurations.
pub const MAX_VERTICES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeGraph {
    /// Grid dimensions, when the graph is a grid.
    pub dims: Option<(usize, usize)>,
    pub vertex_count: usize,
    /// Edges as `(u, v)` with `u < v`, sorted, without duplicates.
    pub edges: Vec<(usize, usize)>,
}

impl LatticeGraph {
    /// `width × height` grid with 4-neighbour bonds and free boundary.
    pub fn grid(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGraph(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        let vertex_count = width.checked_mul(height).ok_or_else(|| {
            Error::InvalidGraph(format!("grid {width}x{height} is too large"))
        })?;
        if vertex_count > MAX_VERTICES {
            return Err(Error::SizeExceeded {
                vertices: vertex_count,
                limit: MAX_VERTICES,
            });
        }
        let mut edges = Vec::new();
        for row in 0..height {
            for col in 0..width {
                let v = row * width + col;
                if col + 1 < width {
                    edges.push((v, v + 1));
                }
                if row + 1 < height {
                    edges.push((v, v + width));
                }
            }
        }
        edges.sort_unstable();
        Ok(Self {
            dims: Some((width, height)),
            vertex_count,
            edges,
        })
    }

    /// Arbitrary simple graph. Rejects self-loops, duplicate edges and out-of-range vertices.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count > MAX_VERTICES {
            return Err(Error::SizeExceeded {
                vertices: vertex_count,
                limit: MAX_VERTICES,
            });
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a vertex >= {vertex_count}"
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self {
            dims: None,
            vertex_count,
            edges: seen.into_iter().collect(),
        })
    }

    /// Parses the `u v` per line edge-list format (0-indexed; `#` starts a
    /// comment). The vertex count defaults to one past the largest index.
    pub fn parse_edge_list(text: &str, vertex_count: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| {
                    Error::InvalidGraph(format!("line {}: bad vertex index {s:?}", lineno + 1))
                })
            };
            match fields.as_slice() {
                [u, v] => edges.push((parse(u)?, parse(v)?)),
                _ => {
                    return Err(Error::InvalidGraph(format!(
                        "line {}: expected two vertex indices, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let implied = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::from_edges(vertex_count.unwrap_or(implied), &edges)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Number of configurations at each Hamiltonian level `0..=#E`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianHistogram {
    pub vertex_count: usize,
    pub counts: Vec<u64>,
    #[serde(skip)]
    ln_counts: Vec<f64>,
}

impl HamiltonianHistogram {
    pub fn from_counts(vertex_count: usize, counts: Vec<u64>) -> Self {
        let ln_counts = counts
            .iter()
            .map(|&c| if c == 0 { f64::NEG_INFINITY } else { (c as f64).ln() })
            .collect();
        Self {
            vertex_count,
            counts,
            ln_counts,
        }
    }

    pub fn max_level(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Level weights `ln(count_h) + β h`.
    fn log_weights(&self, beta: f64) -> impl Iterator<Item = f64> + '_ {
        self.ln_counts
            .iter()
            .enumerate()
            .map(move |(h, &lc)| if lc.is_finite() { lc + beta * h as f64 } else { f64::NEG_INFINITY })
    }

    fn max_log_weight(&self, beta: f64) -> f64 {
        self.log_weights(beta).fold(f64::NEG_INFINITY, f64::max)
    }

    /// ln Z(β), stable for any β.
    pub fn ln_partition_function(&self, beta: f64) -> f64 {
        let top = self.max_log_weight(beta);
        top + self.log_weights(beta).map(|w| (w - top).exp()).sum::<f64>().ln()
    }
}

/// Exact level histogram by enumerating all `2^V` configurations.
///
/// Edges are grouped by index offset `d = v - u`; for each offset the
/// agreements are `popcount(!(x ^ (x >> d)) & mask_d)` where `mask_d` marks
/// the lower endpoints.
pub fn build_histogram(graph: &LatticeGraph) -> Result<HamiltonianHistogram> {
    let n = graph.vertex_count;
    if n > MAX_VERTICES {
        return Err(Error::SizeExceeded {
            vertices: n,
            limit: MAX_VERTICES,
        });
    }
    let mut masks: BTreeMap<usize, u32> = BTreeMap::new();
    for &(u, v) in &graph.edges {
        *masks.entry(v - u).or_default() |= 1 << u;
    }
    let masks: Vec<(u32, u32)> = masks.into_iter().map(|(d, m)| (d as u32, m)).collect();
    let levels = graph.edge_count() + 1;
    let states: u32 = 1 << n;

    const CHUNK: u32 = 1 << 14;
    let counts = (0..states.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut local = vec![0u64; levels];
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(states);
            for x in start..end {
                let h: u32 = masks
                    .iter()
                    .map(|&(d, m)| (!(x ^ (x >> d)) & m).count_ones())
                    .sum();
                local[h as usize] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; levels],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(HamiltonianHistogram::from_counts(n, counts))
}

/// `Z(β) = Σ_h count_h e^{β h}`.
pub fn partition_function(hist: &HamiltonianHistogram, beta: f64) -> f64 {
    if beta == 0.0 {
        return hist.total() as f64;
    }
    hist.ln_partition_function(beta).exp()
}

/// Draws a level `h` with probability `count_h e^{β h} / Z(β)`.
pub fn sample_hamiltonian(hist: &HamiltonianHistogram, beta: f64, rng: &mut RngStream) -> u64 {
    if hist.counts.len() == 1 {
        return 0;
    }
    let top = hist.max_log_weight(beta);
    let mut cumulative = [0.0f64; 64];
    let mut buf;
    let cum: &mut [f64] = if hist.counts.len() <= cumulative.len() {
        &mut cumulative[..hist.counts.len()]
    } else {
        buf = vec![0.0; hist.counts.len()];
        &mut buf
    };
    let mut total = 0.0;
    for (slot, w) in cum.iter_mut().zip(hist.log_weights(beta)) {
        total += (w - top).exp();
        *slot = total;
    }
    let target = rng.uniform() * total;
    let level = cum.partition_point(|&c| c <= target);
    // never return an empty level, even at the rounding edge
    let mut h = level.min(cum.len() - 1);
    while hist.counts[h] == 0 && h > 0 {
        h -= 1;
    }
    h as u64
}

/// The Ising Gibbs family indexed by β, restricted to `[beta_inner, beta_outer]`.
#[derive(Debug, Clone)]
pub struct IsingFamily {
    hist: HamiltonianHistogram,
    beta_outer: f64,
    beta_inner: f64,
}

impl IsingFamily {
    pub fn new(hist: HamiltonianHistogram) -> Self {
        Self::with_betas(hist, 1.0, 0.0).expect("0 < 1")
    }

    pub fn with_betas(hist: HamiltonianHistogram, beta_outer: f64, beta_inner: f64) -> Result<Self> {
        if !(beta_inner < beta_outer) {
            return Err(crate::error::domain(
                "beta_inner",
                beta_inner,
                "(-inf, beta_outer)",
            ));
        }
        Ok(Self {
            hist,
            beta_outer,
            beta_inner,
        })
    }

    pub fn histogram(&self) -> &HamiltonianHistogram {
        &self.hist
    }

    /// Exact `ln(Z(beta_outer) / Z(beta_inner))`.
    pub fn ln_ratio(&self) -> f64 {
        self.hist.ln_partition_function(self.beta_outer)
            - self.hist.ln_partition_function(self.beta_inner)
    }
}

impl NestedGibbsFamily for IsingFamily {
    fn sample_hamiltonian(&self, beta: f64, rng: &mut RngStream) -> f64 {
        sample_hamiltonian(&self.hist, beta, rng) as f64
    }

    fn beta_outer(&self) -> f64 {
        self.beta_outer
    }

    fn beta_inner(&self) -> f64 {
        self.beta_inner
    }

    fn max_hamiltonian(&self) -> f64 {
        self.hist.max_level() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct enumeration over explicit spin vectors.
    fn brute_force(graph: &LatticeGraph) -> Vec<u64> {
        let mut counts = vec![0u64; graph.edge_count() + 1];
        for x in 0..(1u32 << graph.vertex_count) {
            let spin = |v: usize| (x >> v) & 1;
            let h = graph.edges.iter().filter(|&&(u, v)| spin(u) == spin(v)).count();
            counts[h] += 1;
        }
        counts
    }

    #[test]
    fn grid_edge_counts() {
        for (w, h) in [(1, 1), (1, 2), (2, 2), (3, 5), (4, 4), (4, 6)] {
            let g = LatticeGraph::grid(w, h).unwrap();
            assert_eq!(g.edge_count(), w * (h - 1) + h * (w - 1));
            let unique: BTreeSet<_> = g.edges.iter().collect();
            assert_eq!(unique.len(), g.edge_count());
            assert!(g.edges.iter().all(|&(u, v)| u < v));
        }
    }

    #[test]
    fn grid_size_limit() {
        assert!(matches!(
            LatticeGraph::grid(5, 5),
            Err(Error::SizeExceeded { vertices: 25, .. })
        ));
        assert!(LatticeGraph::grid(0, 3).is_err());
    }

    #[test]
    fn single_edge_histogram() {
        let g = LatticeGraph::grid(1, 2).unwrap();
        assert_eq!(build_histogram(&g).unwrap().counts, vec![2, 2]);
    }

    #[test]
    fn two_by_two_histogram() {
        let g = LatticeGraph::grid(2, 2).unwrap();
        let hist = build_histogram(&g).unwrap();
        assert_eq!(hist.counts, brute_force(&g));
        assert_eq!(hist.counts, vec![2, 0, 12, 0, 2]);
    }

    #[test]
    fn histogram_matches_brute_force() {
        for g in [
            LatticeGraph::grid(3, 3).unwrap(),
            LatticeGraph::grid(2, 5).unwrap(),
            LatticeGraph::from_edges(6, &[(0, 5), (1, 3), (2, 4), (0, 1), (3, 5), (0, 4)]).unwrap(),
        ] {
            let hist = build_histogram(&g).unwrap();
            assert_eq!(hist.counts, brute_force(&g));
            assert_eq!(hist.total(), 1 << g.vertex_count);
            assert!(*hist.counts.last().unwrap() >= 2);
        }
    }

    #[test]
    fn four_by_four_total() {
        let hist = build_histogram(&LatticeGraph::grid(4, 4).unwrap()).unwrap();
        assert_eq!(hist.total(), 65_536);
        assert_eq!(hist.max_level(), 24);
    }

    #[test]
    fn partition_function_values() {
        let hist = build_histogram(&LatticeGraph::grid(2, 2).unwrap()).unwrap();
        assert_eq!(partition_function(&hist, 0.0), 16.0);
        let e = std::f64::consts::E;
        let want = 2.0 * e.powi(4) + 12.0 * e.powi(2) + 2.0;
        assert!((partition_function(&hist, 1.0) / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partition_function_increasing() {
        let hist = build_histogram(&LatticeGraph::grid(3, 2).unwrap()).unwrap();
        let mut prev = 0.0;
        for i in -20..=20 {
            let z = partition_function(&hist, i as f64 * 0.1);
            assert!(z > prev);
            prev = z;
        }
    }

    #[test]
    fn empty_graph_level_sampler() {
        let hist = build_histogram(&LatticeGraph::grid(1, 1).unwrap()).unwrap();
        assert_eq!(hist.counts, vec![2]);
        let mut rng = RngStream::new(0, 0);
        assert!((0..100).all(|_| sample_hamiltonian(&hist, 0.7, &mut rng) == 0));
    }

    #[test]
    fn large_beta_does_not_overflow() {
        let hist = build_histogram(&LatticeGraph::grid(4, 4).unwrap()).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert_eq!(sample_hamiltonian(&hist, 2_000.0, &mut rng), 24);
        assert!(hist.ln_partition_function(2_000.0).is_finite());
    }

    #[test]
    fn edge_list_parsing() {
        let g = LatticeGraph::parse_edge_list("# square\n0 1\n1 2\n\n2 3 # last\n3 0\n", None).unwrap();
        assert_eq!(g.vertex_count, 4);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(build_histogram(&g).unwrap().counts, vec![2, 0, 12, 0, 2]);
        assert!(LatticeGraph::parse_edge_list("0 0\n", None).is_err());
        assert!(LatticeGraph::parse_edge_list("0 1\n1 0\n", None).is_err());
        assert!(LatticeGraph::parse_edge_list("0 x\n", None).is_err());
        assert!(LatticeGraph::parse_edge_list("0 1 2\n", None).is_err());
        assert!(LatticeGraph::parse_edge_list("0 1\n", Some(1)).is_err());
        assert!(LatticeGraph::parse_edge_list("0 30\n", None).is_err());
        assert_eq!(LatticeGraph::parse_edge_list("0 1\n", Some(5)).unwrap().vertex_count, 5);
    }
}
