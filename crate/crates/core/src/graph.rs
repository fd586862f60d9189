//! Vertex- and edge-weighted network graphs.
//!
//! A [`NetworkGraph`] carries a positive mass per vertex, a list of oriented
//! edges tagged as dampers or springs, and the list of forced vertices (one per
//! input channel). From it we build the incidence matrix `D`, the weighted
//! Laplacian `L = D R Dᵀ`, the effective Laplacian `M⁻¹ L` and the input
//! matrix `E`. All of these are orientation independent except `D` itself.
//!
//! Vertices are 0-based here; the file formats in the CLI are 1-based.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type Matrix = DMatrix<f64>;
/// Dense real column vector.
pub type Vector = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Damper,
    Spring,
}

/// Selects which edges participate in a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindFilter {
    #[default]
    Damper,
    Spring,
    All,
}

impl KindFilter {
    pub fn accepts(self, kind: EdgeKind) -> bool {
        match self {
            KindFilter::All => true,
            KindFilter::Damper => kind == EdgeKind::Damper,
            KindFilter::Spring => kind == EdgeKind::Spring,
        }
    }
}

impl std::fmt::Display for KindFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            KindFilter::Damper => "damper",
            KindFilter::Spring => "spring",
            KindFilter::All => "all",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for KindFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "damper" => Ok(KindFilter::Damper),
            "spring" => Ok(KindFilter::Spring),
            "all" => Ok(KindFilter::All),
            other => Err(Error::InvalidNetwork(format!("unknown edge kind filter `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn new(tail: usize, head: usize, weight: f64, kind: EdgeKind) -> Self {
        Edge { tail, head, weight, kind }
    }

    pub fn damper(tail: usize, head: usize, weight: f64) -> Self {
        Edge::new(tail, head, weight, EdgeKind::Damper)
    }

    pub fn spring(tail: usize, head: usize, weight: f64) -> Self {
        Edge::new(tail, head, weight, EdgeKind::Spring)
    }

    /// The same edge with tail and head swapped.
    pub fn reversed(self) -> Self {
        Edge { tail: self.head, head: self.tail, ..self }
    }
}

/// Undirected network with weighted vertices and weighted edges, stored with
/// an explicit orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    masses: Vec<f64>,
    edges: Vec<Edge>,
    forced: Vec<usize>,
}

impl NetworkGraph {
    pub fn new(masses: Vec<f64>, edges: Vec<Edge>, forced: Vec<usize>) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("a network needs at least one vertex".into()));
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidNetwork(format!("mass of vertex {i} must be positive and finite, got {m}")));
        }
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge {k} ({} -> {}) references a vertex outside 0..{n}",
                    e.tail, e.head
                )));
            }
            if e.tail == e.head {
                return Err(Error::InvalidNetwork(format!("edge {k} is a self-loop at vertex {}", e.tail)));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "edge {k} weight must be nonnegative and finite, got {}",
                    e.weight
                )));
            }
        }
        if let Some(&index) = forced.iter().find(|&&i| i >= n) {
            return Err(Error::InputOutOfRange { index, n });
        }
        Ok(NetworkGraph { masses, edges, forced })
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Forced vertex of each input channel, in channel order.
    pub fn forced(&self) -> &[usize] {
        &self.forced
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn mass_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&Vector::from_column_slice(&self.masses))
    }

    pub fn inverse_mass_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&Vector::from_iterator(self.n(), self.masses.iter().map(|m| 1.0 / m)))
    }

    /// Indices (into [`edges`](Self::edges)) of the edges accepted by `kind`.
    pub fn edge_indices(&self, kind: KindFilter) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| kind.accepts(e.kind))
            .map(|(k, _)| k)
            .collect()
    }

    /// Copy of the graph with the same data and a different forcing list.
    pub fn with_forced(&self, forced: Vec<usize>) -> Result<Self> {
        NetworkGraph::new(self.masses.clone(), self.edges.clone(), forced)
    }

    /// Copy of the graph with new edge list.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Result<Self> {
        NetworkGraph::new(self.masses.clone(), edges, self.forced.clone())
    }

    /// Incidence matrix `D` of the filtered edges: `-1` at the tail, `+1` at
    /// the head, one column per edge in edge-list order.
    pub fn incidence_matrix(&self, kind: KindFilter) -> Matrix {
        let idx = self.edge_indices(kind);
        let mut d = Matrix::zeros(self.n(), idx.len());
        for (col, &k) in idx.iter().enumerate() {
            let e = self.edges[k];
            d[(e.tail, col)] = -1.0;
            d[(e.head, col)] = 1.0;
        }
        d
    }

    /// Diagonal of `R` (or `K`) for the filtered edges.
    pub fn edge_weights(&self, kind: KindFilter) -> Vec<f64> {
        self.edges.iter().filter(|e| kind.accepts(e.kind)).map(|e| e.weight).collect()
    }

    /// `L = D R Dᵀ`, assembled edge by edge so that the result is exactly
    /// symmetric and independent of orientation.
    pub fn weighted_laplacian(&self, kind: KindFilter) -> Matrix {
        let n = self.n();
        let mut l = Matrix::zeros(n, n);
        for e in self.edges.iter().filter(|e| kind.accepts(e.kind)) {
            let (i, j) = (e.tail, e.head);
            l[(i, i)] += e.weight;
            l[(j, j)] += e.weight;
            l[(i, j)] -= e.weight;
            l[(j, i)] -= e.weight;
        }
        l
    }

    /// `L_eff = M⁻¹ L`. Off-diagonal entry `(i, j)` is minus the total
    /// effective weight vertex `i` receives from edges joining it to `j`.
    pub fn effective_laplacian(&self, kind: KindFilter) -> Matrix {
        let mut l = self.weighted_laplacian(kind);
        for (i, mut row) in l.row_iter_mut().enumerate() {
            row /= self.masses[i];
        }
        l
    }

    /// `E`: one column per input, a single 1 at the forced vertex.
    pub fn input_matrix(&self) -> Matrix {
        let mut e = Matrix::zeros(self.n(), self.forced.len());
        for (col, &v) in self.forced.iter().enumerate() {
            e[(v, col)] = 1.0;
        }
        e
    }

    /// Whether the subgraph of strictly positive filtered edges is connected.
    pub fn is_connected(&self, kind: KindFilter) -> bool {
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = n;
        for e in self.edges.iter().filter(|e| kind.accepts(e.kind) && e.weight > 0.0) {
            let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components == 1
    }
}
