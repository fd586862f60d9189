//! Workloads shared by the benchmarks.

use netclust::partition::{synthesize_aep_graph, CellLink, CellSpec, QuotientSpec};
use netclust::{Edge, EdgeKind, NetworkGraph, Partition};

/// Damper ring on `n` unit masses with weights `1, 2, …`.
pub fn ring(n: usize) -> NetworkGraph {
    let edges = (0..n).map(|i| Edge::damper(i, (i + 1) % n, 1.0 + i as f64)).collect();
    NetworkGraph::new(vec![1.0; n], edges, vec![0]).expect("valid ring")
}

/// Chain of `cells` cells of `size` unit masses each, linked completely
/// between neighbours, with an input in the first cell.
pub fn clustered_chain(cells: usize, size: usize) -> (NetworkGraph, Partition) {
    let spec = QuotientSpec {
        cells: (0..cells).map(|_| CellSpec { masses: vec![1.0; size] }).collect(),
        links: (1..cells).map(|c| CellLink { a: c - 1, b: c, weight: 1.0 + c as f64, kind: EdgeKind::Damper }).collect(),
        inputs: vec![0],
        ..Default::default()
    };
    synthesize_aep_graph(&spec).expect("valid quotient")
}
