//! First-order network models and their clustered reduction.
//!
//! The full model in momentum coordinates is `ẋ = −D R Dᵀ M⁻¹ x + E u` with
//! damper outputs `y = R^{1/2} Dᵀ M⁻¹ x`. Clustering by a partition `P` keeps
//! only the edges joining distinct cells, merges the masses of each cell and
//! maps every input to the cell of its forced vertex. The result is again a
//! network of the same class.

use crate::error::{Error, Result};
use crate::graph::{Edge, KindFilter, Matrix, NetworkGraph};
use crate::linalg::{diag_inverse, hstack, orthonormal_complement, vstack};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coordinates {
    /// State `x` holds vertex momenta.
    #[default]
    Momentum,
    /// State `v = M⁻¹ x` holds vertex velocities.
    Velocity,
}

/// State-space realization `(A, B, C)` of a mass–damper network.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderModel {
    pub coords: Coordinates,
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub graph: NetworkGraph,
}

/// Builds the first-order model of `g` from its damper edges.
pub fn assemble_first_order(g: &NetworkGraph, coords: Coordinates) -> FirstOrderModel {
    let l = g.weighted_laplacian(KindFilter::Damper);
    let m_inv = g.inverse_mass_matrix();
    let d = g.incidence_matrix(KindFilter::Damper);
    let r_sqrt = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d.ncols(),
        g.edge_weights(KindFilter::Damper).into_iter().map(f64::sqrt),
    ));
    let e = g.input_matrix();
    let (a, b, c) = match coords {
        Coordinates::Momentum => (-(&l * &m_inv), e, &r_sqrt * d.transpose() * &m_inv),
        Coordinates::Velocity => (-(&m_inv * &l), &m_inv * e, &r_sqrt * d.transpose()),
    };
    FirstOrderModel { coords, a, b, c, graph: g.clone() }
}

impl FirstOrderModel {
    /// Transfer matrix `C (sI − A)⁻¹ B` at a real point `s` outside the spectrum.
    pub fn transfer_at(&self, s: f64) -> Option<Matrix> {
        let n = self.a.nrows();
        let resolvent = (Matrix::identity(n, n) * s - &self.a).try_inverse()?;
        Some(&self.c * resolvent * &self.b)
    }
}

/// Clustered network with the bookkeeping needed to compare it against the
/// original.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub reduced: NetworkGraph,
    pub partition: Partition,
    /// `V = M P (Pᵀ M P)⁻¹`.
    pub v: Matrix,
    /// `W = P`.
    pub w: Matrix,
    /// For each original edge, its index in the reduced edge list, or `None`
    /// when it joined two vertices of the same cell.
    pub edge_map: Vec<Option<usize>>,
}

impl ReductionResult {
    /// Channel alignment for outputs built from `kind` edges: entry `k` is the
    /// reduced channel matching the `k`-th filtered edge of the original.
    pub fn channel_map(&self, original: &NetworkGraph, kind: KindFilter) -> Vec<Option<usize>> {
        let reduced_pos: Vec<Option<usize>> = {
            let mut pos = vec![None; self.reduced.edges().len()];
            for (slot, k) in self.reduced.edge_indices(kind).into_iter().enumerate() {
                pos[k] = Some(slot);
            }
            pos
        };
        original
            .edge_indices(kind)
            .into_iter()
            .map(|k| self.edge_map[k].and_then(|r| reduced_pos[r]))
            .collect()
    }

    pub fn reduced_model(&self, coords: Coordinates) -> FirstOrderModel {
        assemble_first_order(&self.reduced, coords)
    }
}

fn check_partition(g: &NetworkGraph, part: &Partition) -> Result<()> {
    if part.n() != g.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} vertices but the network has {}",
            part.n(),
            g.n()
        )));
    }
    Ok(())
}

/// Quotient network: one vertex per cell with the summed mass, the inter-cell
/// edges (parallel edges kept distinct, orientation inherited), and inputs
/// moved to the cell of their forced vertex.
pub fn reduce_graph(g: &NetworkGraph, part: &Partition) -> Result<(NetworkGraph, Vec<Option<usize>>)> {
    check_partition(g, part)?;
    let masses: Vec<f64> = part.cells().iter().map(|cell| cell.iter().map(|&v| g.masses()[v]).sum()).collect();
    let mut edges = Vec::new();
    let mut edge_map = Vec::with_capacity(g.edges().len());
    for e in g.edges() {
        let (ct, ch) = (part.cell_of(e.tail), part.cell_of(e.head));
        if ct == ch {
            edge_map.push(None);
        } else {
            edge_map.push(Some(edges.len()));
            edges.push(Edge { tail: ct, head: ch, ..*e });
        }
    }
    let forced = g.forced().iter().map(|&v| part.cell_of(v)).collect();
    Ok((NetworkGraph::new(masses, edges, forced)?, edge_map))
}

/// `(V, W)` with `W = P` and `V = M P (Pᵀ M P)⁻¹`, so that `WᵀV = I`.
pub fn petrov_galerkin_factors(g: &NetworkGraph, part: &Partition) -> Result<(Matrix, Matrix)> {
    check_partition(g, part)?;
    let p = part.characteristic_matrix();
    let mp = g.mass_matrix() * &p;
    let m_hat = p.transpose() * &mp;
    Ok((mp * diag_inverse(&m_hat), p))
}

/// Clusters `g` by `part`. Any partition is allowed; almost equitability only
/// matters for the error analysis.
pub fn reduce_first_order(g: &NetworkGraph, part: &Partition) -> Result<ReductionResult> {
    let (reduced, edge_map) = reduce_graph(g, part)?;
    let (v, w) = petrov_galerkin_factors(g, part)?;
    Ok(ReductionResult { reduced, partition: part.clone(), v, w, edge_map })
}

/// Change of coordinates `z = [Pᵀ; Sᵀ] x` splitting the momentum-coordinate
/// dynamics into the clustered part and its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct DecouplingTransform {
    /// `n × (n − n̂)` orthonormal basis with `Sᵀ M P = 0`.
    pub s: Matrix,
    /// State matrix in `z` coordinates.
    pub transformed: Matrix,
    /// Top-left `n̂ × n̂` block; the reduced state matrix under an AEP.
    pub reduced_block: Matrix,
    /// Bottom-right block, the error dynamics.
    pub error_block: Matrix,
    pub coupling_top_right: f64,
    pub coupling_bottom_left: f64,
    /// Frobenius norm of both off-diagonal blocks relative to
    /// `max(1, ‖transformed‖_F)`.
    pub coupling_residual: f64,
}

pub fn decoupling_transform(g: &NetworkGraph, part: &Partition) -> Result<DecouplingTransform> {
    check_partition(g, part)?;
    let n = g.n();
    let nh = part.num_cells();
    let p = part.characteristic_matrix();
    let m = g.mass_matrix();
    let s = orthonormal_complement(&(&m * &p));
    let (v, _) = petrov_galerkin_factors(g, part)?;
    let ms = &m * &s;
    let sms_inv = (s.transpose() * &ms).try_inverse().unwrap_or_else(|| Matrix::zeros(0, 0));
    let t = vstack(&p.transpose(), &s.transpose());
    let t_inv = hstack(&v, &(ms * sms_inv));
    let a = -(g.weighted_laplacian(KindFilter::Damper) * g.inverse_mass_matrix());
    let transformed = &t * a * &t_inv;
    let top_right = transformed.view((0, nh), (nh, n - nh)).norm();
    let bottom_left = transformed.view((nh, 0), (n - nh, nh)).norm();
    let coupling_residual = (top_right.powi(2) + bottom_left.powi(2)).sqrt() / transformed.norm().max(1.0);
    Ok(DecouplingTransform {
        reduced_block: transformed.view((0, 0), (nh, nh)).into_owned(),
        error_block: transformed.view((nh, nh), (n - nh, n - nh)).into_owned(),
        s,
        transformed,
        coupling_top_right: top_right,
        coupling_bottom_left: bottom_left,
        coupling_residual,
    })
}
