//! Vertex partitions and almost equitable partitions (AEPs).
//!
//! A partition is almost equitable for a weighted network when every vertex of
//! a cell `C_p` receives the same total effective weight (edge weight divided
//! by its own mass) from the edges into any other cell `C_q`. Two independent
//! tests are provided: the combinatorial per-vertex sums
//! ([`check_aep_definition`]) and the invariance of `im P` under the effective
//! Laplacian ([`check_aep_subspace`]). They must always agree.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeKind, KindFilter, Matrix, NetworkGraph};

/// Default tolerance of both AEP checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default vertex cap for exhaustive enumeration; Bell(12) is about 4.2 million.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// Partition of `{0..n}` into nonempty disjoint cells, kept in canonical form:
/// each cell sorted, cells ordered by their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(cells: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::InvalidPartition(format!("cell {c} is empty")));
            }
            for &v in cell {
                if v >= n {
                    return Err(Error::InvalidPartition(format!("vertex {v} outside 0..{n}")));
                }
                if labels[v] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("vertex {v} appears in more than one cell")));
                }
                labels[v] = c;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidPartition(format!("vertex {v} is not covered by any cell")));
        }
        Ok(Partition::from_labels_unchecked(&labels))
    }

    /// Builds a partition from per-vertex cell labels (any labelling).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPartition("empty vertex set".into()));
        }
        Ok(Partition::from_labels_unchecked(labels))
    }

    fn from_labels_unchecked(labels: &[usize]) -> Self {
        // Relabel by first appearance, which orders cells by smallest element.
        let mut remap = std::collections::HashMap::new();
        let mut canon = Vec::with_capacity(labels.len());
        let mut cells: Vec<Vec<usize>> = Vec::new();
        for (v, l) in labels.iter().enumerate() {
            let next = remap.len();
            let c = *remap.entry(*l).or_insert(next);
            if c == cells.len() {
                cells.push(Vec::new());
            }
            cells[c].push(v);
            canon.push(c);
        }
        Partition { cells, labels: canon }
    }

    pub fn singletons(n: usize) -> Self {
        Partition::from_labels_unchecked(&(0..n).collect::<Vec<_>>())
    }

    pub fn single_cell(n: usize) -> Self {
        Partition::from_labels_unchecked(&vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Cell index of every vertex. This is the restricted growth string of
    /// the partition.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cell_of(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn is_singleton(&self, v: usize) -> bool {
        self.cells[self.labels[v]].len() == 1
    }

    /// `n × n̂` characteristic matrix `P`.
    pub fn characteristic_matrix(&self) -> Matrix {
        let mut p = Matrix::zeros(self.n(), self.num_cells());
        for (v, &c) in self.labels.iter().enumerate() {
            p[(v, c)] = 1.0;
        }
        p
    }

    /// Composite partition of a two-stage clustering: `self` partitions the
    /// vertices, `coarser` partitions the cells of `self`. The characteristic
    /// matrix of the result is `P_self · P_coarser`.
    pub fn compose(&self, coarser: &Partition) -> Result<Partition> {
        if coarser.n() != self.num_cells() {
            return Err(Error::InvalidPartition(format!(
                "outer partition covers {} elements but the inner one has {} cells",
                coarser.n(),
                self.num_cells()
            )));
        }
        let labels: Vec<usize> = self.labels.iter().map(|&c| coarser.labels[c]).collect();
        Ok(Partition::from_labels_unchecked(&labels))
    }

    /// True when every cell of `self` lies inside a cell of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.n() == other.n()
            && self.cells.iter().all(|cell| cell.iter().all(|&v| other.labels[v] == other.labels[cell[0]]))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order of restricted growth strings.
impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.labels.cmp(&other.labels)
    }
}

/// Effective-weight sums from cell `p` towards cell `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSums {
    pub p: usize,
    pub q: usize,
    /// One entry per vertex of `C_p`, in cell order.
    pub sums: Vec<f64>,
    /// Common value when almost equitable; reported as the mean.
    pub w_pq: f64,
    /// `max - min` of `sums`.
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AepCriterion {
    Definition,
    Subspace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AepWitness {
    pub verdict: bool,
    pub criterion: AepCriterion,
    pub tol: f64,
    pub pairs: Vec<PairSums>,
    /// `‖(I − P(PᵀP)⁻¹Pᵀ) L_eff P‖_F / max(1, ‖L_eff P‖_F)`.
    pub subspace_residual: f64,
}

/// `sums[i][q]`: total effective weight vertex `i` receives from edges whose
/// other endpoint lies in cell `q` (intra-cell edges included for its own cell).
fn effective_sums(g: &NetworkGraph, part: &Partition, kind: KindFilter) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; part.num_cells()]; g.n()];
    let m = g.masses();
    for e in g.edges().iter().filter(|e| kind.accepts(e.kind)) {
        sums[e.tail][part.cell_of(e.head)] += e.weight / m[e.tail];
        sums[e.head][part.cell_of(e.tail)] += e.weight / m[e.head];
    }
    sums
}

fn pair_table(sums: &[Vec<f64>], part: &Partition) -> Vec<PairSums> {
    let mut pairs = Vec::new();
    for (p, cell) in part.cells().iter().enumerate() {
        for q in (0..part.num_cells()).filter(|&q| q != p) {
            let s: Vec<f64> = cell.iter().map(|&i| sums[i][q]).collect();
            let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let w_pq = s.iter().sum::<f64>() / s.len() as f64;
            pairs.push(PairSums { p, q, sums: s, w_pq, spread: hi - lo });
        }
    }
    pairs
}

fn check_dims(g: &NetworkGraph, part: &Partition) -> Result<()> {
    if g.n() != part.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} vertices but the network has {}",
            part.n(),
            g.n()
        )));
    }
    Ok(())
}

/// Residual of the invariant-subspace test: the part of `L_eff P` outside
/// `im P`, i.e. each entry minus its cell mean, measured relative to `L_eff P`.
pub fn subspace_residual(g: &NetworkGraph, part: &Partition, kind: KindFilter) -> f64 {
    let lp = g.effective_laplacian(kind) * part.characteristic_matrix();
    let mut off = 0.0;
    for q in 0..lp.ncols() {
        for cell in part.cells() {
            let mean = cell.iter().map(|&i| lp[(i, q)]).sum::<f64>() / cell.len() as f64;
            off += cell.iter().map(|&i| (lp[(i, q)] - mean).powi(2)).sum::<f64>();
        }
    }
    off.sqrt() / lp.norm().max(1.0)
}

/// Combinatorial AEP test: for every ordered pair of distinct cells, the
/// per-vertex effective-weight sums must agree within `tol·(1 + |w_pq|)`.
pub fn check_aep_definition(g: &NetworkGraph, part: &Partition, kind: KindFilter, tol: f64) -> Result<AepWitness> {
    check_dims(g, part)?;
    let pairs = pair_table(&effective_sums(g, part, kind), part);
    let verdict = pairs.iter().all(|p| p.spread <= tol * (1.0 + p.w_pq.abs()));
    Ok(AepWitness {
        verdict,
        criterion: AepCriterion::Definition,
        tol,
        pairs,
        subspace_residual: subspace_residual(g, part, kind),
    })
}

/// Invariant-subspace AEP test: `L_eff im P ⊂ im P` up to `tol`.
pub fn check_aep_subspace(g: &NetworkGraph, part: &Partition, kind: KindFilter, tol: f64) -> Result<AepWitness> {
    check_dims(g, part)?;
    let rho = subspace_residual(g, part, kind);
    Ok(AepWitness {
        verdict: rho <= tol,
        criterion: AepCriterion::Subspace,
        tol,
        pairs: pair_table(&effective_sums(g, part, kind), part),
        subspace_residual: rho,
    })
}

/// Allocation-light version of the definition check used by enumeration.
fn is_aep(g: &NetworkGraph, part: &Partition, kind: KindFilter, tol: f64) -> bool {
    let sums = effective_sums(g, part, kind);
    part.cells().iter().enumerate().all(|(p, cell)| {
        (0..part.num_cells()).filter(|&q| q != p).all(|q| {
            let (lo, hi, tot) = cell.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, t), &i| {
                let x = sums[i][q];
                (lo.min(x), hi.max(x), t + x)
            });
            hi - lo <= tol * (1.0 + (tot / cell.len() as f64).abs())
        })
    })
}

/// Iterator over all set partitions of `{0..n}` as restricted growth strings,
/// in lexicographic order.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    rgs: Vec<usize>,
    maxes: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        SetPartitions { rgs: vec![0; n], maxes: vec![0; n], done: n == 0 }
    }
}

impl Iterator for SetPartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let current = Partition::from_labels_unchecked(&self.rgs);
        // maxes[i] = max(rgs[0..i]); position i may take values 0..=maxes[i]+1.
        let n = self.rgs.len();
        match (1..n).rev().find(|&i| self.rgs[i] <= self.maxes[i]) {
            Some(i) => {
                self.rgs[i] += 1;
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.maxes[j] = self.maxes[j - 1].max(self.rgs[j - 1]);
                }
            }
            None => self.done = true,
        }
        Some(current)
    }
}

/// All almost equitable partitions of `g` (by the definition check), in
/// restricted-growth-string order.
pub fn enumerate_aeps(g: &NetworkGraph, kind: KindFilter, tol: f64, cap: usize) -> Result<Vec<Partition>> {
    if g.n() > cap {
        return Err(Error::TooLarge { n: g.n(), cap });
    }
    Ok(SetPartitions::new(g.n()).filter(|p| is_aep(g, p, kind, tol)).collect())
}

/// Cell of a synthesized network: one mass per member vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub masses: Vec<f64>,
}

/// Complete bipartite coupling of two distinct cells with a common weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLink {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

/// Free edge between members `i` and `j` of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntraEdge {
    pub cell: usize,
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

/// Quotient-level description of a network that has a known AEP.
///
/// Vertices are numbered cell by cell: the members of cell 0 first, then
/// those of cell 1, and so on. `inputs` holds global vertex indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuotientSpec {
    pub cells: Vec<CellSpec>,
    pub links: Vec<CellLink>,
    pub intra: Vec<IntraEdge>,
    pub inputs: Vec<usize>,
}

/// Builds a network together with a partition that is almost equitable for
/// every edge kind: inter-cell edges are complete bipartite with a common
/// weight per link, masses are uniform inside each cell, and intra-cell edges
/// are unconstrained.
pub fn synthesize_aep_graph(spec: &QuotientSpec) -> Result<(NetworkGraph, Partition)> {
    let mut offsets = Vec::with_capacity(spec.cells.len());
    let mut masses = Vec::new();
    for (c, cell) in spec.cells.iter().enumerate() {
        let Some(&first) = cell.masses.first() else {
            return Err(Error::InvalidPartition(format!("cell {c} has no vertices")));
        };
        if cell.masses.iter().any(|&m| m != first) {
            return Err(Error::InvalidPartition(format!(
                "masses in cell {c} are not uniform; the partition would not be almost equitable"
            )));
        }
        offsets.push(masses.len());
        masses.extend_from_slice(&cell.masses);
    }
    let size = |c: usize| spec.cells[c].masses.len();
    let mut edges = Vec::new();
    for link in &spec.links {
        if link.a >= spec.cells.len() || link.b >= spec.cells.len() {
            return Err(Error::InvalidPartition(format!("link {}-{} references a missing cell", link.a, link.b)));
        }
        if link.a == link.b {
            return Err(Error::InvalidPartition(format!("link joins cell {} to itself; use an intra-cell edge", link.a)));
        }
        for u in 0..size(link.a) {
            for v in 0..size(link.b) {
                edges.push(Edge::new(offsets[link.a] + u, offsets[link.b] + v, link.weight, link.kind));
            }
        }
    }
    for e in &spec.intra {
        if e.cell >= spec.cells.len() || e.i >= size(e.cell) || e.j >= size(e.cell) {
            return Err(Error::InvalidPartition(format!(
                "intra-cell edge {}-{} in cell {} is out of range",
                e.i, e.j, e.cell
            )));
        }
        edges.push(Edge::new(offsets[e.cell] + e.i, offsets[e.cell] + e.j, e.weight, e.kind));
    }
    let labels: Vec<usize> = spec.cells.iter().enumerate().flat_map(|(c, cell)| std::iter::repeat_n(c, cell.masses.len())).collect();
    let graph = NetworkGraph::new(masses, edges, spec.inputs.clone())?;
    Ok((graph, Partition::from_labels(&labels)?))
}
