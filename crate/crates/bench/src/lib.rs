//! Fixtures shared by the benchmarks.

use deltamass::{NetworkGraph, PointConfiguration};

/// `h, 2h, …, n·h`.
pub fn uniform_config(n: usize, h: f64) -> PointConfiguration {
    let xs: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    PointConfiguration::from_reals(&xs, true).expect("increasing points")
}

/// A connected graph with about `2n` edges.
pub fn sparse_graph(n: usize, seed: u64) -> NetworkGraph {
    NetworkGraph::random_connected(n, n, 0.5, 2.0, seed).expect("connected")
}
