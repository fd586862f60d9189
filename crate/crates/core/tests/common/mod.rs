//! Seeded random networks shared by the integration suites.
#![allow(dead_code)]

use netclust::partition::{synthesize_aep_graph, CellLink, CellSpec, IntraEdge, QuotientSpec};
use netclust::{Edge, EdgeKind, NetworkGraph, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weight(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.1..=10.0)
}

/// Connected damper network on `n` vertices: a random spanning tree plus
/// extra edges, random masses and weights in `[0.1, 10]`, and one to three
/// inputs (repeats allowed).
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> NetworkGraph {
    let masses = (0..n).map(|_| weight(rng)).collect();
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        let w = weight(rng);
        edges.push(oriented(rng, u, v, w, EdgeKind::Damper));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.3) {
                let w = weight(rng);
                edges.push(oriented(rng, u, v, w, EdgeKind::Damper));
            }
        }
    }
    let inputs = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..n)).collect();
    NetworkGraph::new(masses, edges, inputs).expect("valid random graph")
}

/// Network with small-integer masses and weights, so that nontrivial almost
/// equitable partitions are common.
pub fn random_structured(rng: &mut ChaCha8Rng, n: usize) -> NetworkGraph {
    let masses = (0..n).map(|_| rng.random_range(1..=2) as f64).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.5) {
                let w = rng.random_range(1..=2) as f64;
                edges.push(oriented(rng, u, v, w, EdgeKind::Damper));
            }
        }
    }
    NetworkGraph::new(masses, edges, vec![0]).expect("valid structured graph")
}

fn oriented(rng: &mut ChaCha8Rng, u: usize, v: usize, w: f64, kind: EdgeKind) -> Edge {
    if rng.random_bool(0.5) {
        Edge::new(u, v, w, kind)
    } else {
        Edge::new(v, u, w, kind)
    }
}

/// Options for [`random_quotient`].
#[derive(Debug, Clone, Copy)]
pub struct QuotientShape {
    pub max_n: usize,
    pub max_cells: usize,
    pub springs: bool,
    /// Put every input on a singleton cell.
    pub singleton_inputs: bool,
}

/// Random quotient description whose synthesized network has a connected
/// damper graph and is almost equitable by construction.
pub fn random_quotient(rng: &mut ChaCha8Rng, shape: QuotientShape) -> QuotientSpec {
    let k = rng.random_range(1..=shape.max_cells.min(shape.max_n));
    let mut sizes = vec![1usize; k];
    let mut n = k;
    while n < shape.max_n && rng.random_bool(0.6) {
        sizes[rng.random_range(0..k)] += 1;
        n += 1;
    }
    if shape.singleton_inputs {
        // Keep at least one singleton cell to force.
        sizes[0] = 1;
    }
    let cells: Vec<CellSpec> = sizes.iter().map(|&s| CellSpec { masses: vec![weight(rng); s] }).collect();
    let mut links = Vec::new();
    for c in 1..k {
        links.push(CellLink { a: rng.random_range(0..c), b: c, weight: weight(rng), kind: EdgeKind::Damper });
    }
    for a in 0..k {
        for b in a + 1..k {
            if rng.random_bool(0.3) {
                links.push(CellLink { a, b, weight: weight(rng), kind: EdgeKind::Damper });
            }
            if shape.springs && rng.random_bool(0.6) {
                links.push(CellLink { a, b, weight: weight(rng), kind: EdgeKind::Spring });
            }
        }
    }
    let mut intra = Vec::new();
    for (c, &s) in sizes.iter().enumerate() {
        for i in 1..s {
            intra.push(IntraEdge { cell: c, i: i - 1, j: i, weight: weight(rng), kind: EdgeKind::Damper });
            if shape.springs && rng.random_bool(0.5) {
                intra.push(IntraEdge { cell: c, i: rng.random_range(0..i), j: i, weight: weight(rng), kind: EdgeKind::Spring });
            }
        }
    }
    let inputs = if shape.singleton_inputs {
        let singles: Vec<usize> = offsets(&sizes).into_iter().zip(&sizes).filter(|(_, &s)| s == 1).map(|(o, _)| o).collect();
        (0..rng.random_range(1..=2)).map(|_| singles[rng.random_range(0..singles.len())]).collect()
    } else {
        (0..rng.random_range(1..=2)).map(|_| rng.random_range(0..n)).collect()
    };
    QuotientSpec { cells, links, intra, inputs }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    sizes.iter().scan(0, |acc, &s| {
        let o = *acc;
        *acc += s;
        Some(o)
    }).collect()
}

pub fn random_aep(rng: &mut ChaCha8Rng, shape: QuotientShape) -> (NetworkGraph, Partition) {
    synthesize_aep_graph(&random_quotient(rng, shape)).expect("synthesized network")
}

/// Multiplies every link weight by its own random factor and every intra-cell
/// weight by an arbitrary one; the partition stays almost equitable.
pub fn rescale(rng: &mut ChaCha8Rng, spec: &QuotientSpec) -> QuotientSpec {
    let mut out = spec.clone();
    for l in &mut out.links {
        l.weight *= rng.random_range(0.2..=5.0);
    }
    for e in &mut out.intra {
        e.weight *= rng.random_range(0.2..=5.0);
    }
    out
}

/// Unit path `0 - 1 - 2` with an input at vertex 0.
pub fn path3() -> NetworkGraph {
    NetworkGraph::new(vec![1.0; 3], vec![Edge::damper(0, 1, 1.0), Edge::damper(1, 2, 1.0)], vec![0]).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}
