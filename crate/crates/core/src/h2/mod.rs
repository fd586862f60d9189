//! H₂ norms of mass–damper networks and of their clustering error.
//!
//! With damper outputs `y = R^{1/2} Dᵀ M⁻¹ x` the squared H₂ norm of a
//! connected network only depends on the masses of the forced vertices:
//!
//! ```text
//! ‖G‖²     = ½ Σ_{i∈V_f} (1/mᵢ − 1/σ_M)
//! ‖Ĝ‖²     = ½ Σ_{i∈V_f} (1/σ_Mⁱ − 1/σ_M)
//! ‖G − Ĝ‖² = ½ Σ_{i∈V_f} (1/mᵢ − 1/σ_Mⁱ)      (almost equitable partitions)
//! ```
//!
//! where `σ_M` is the total mass and `σ_Mⁱ` the mass of the cell of `i`. Sums
//! run over input channels, so a vertex forced twice counts twice.
//!
//! The closed forms are checked against oracles that never use them: a modal
//! eigen-sum ([`modal`]) and adaptive time-domain quadrature ([`quadrature`]).

pub mod modal;
pub mod quadrature;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{KindFilter, Matrix, NetworkGraph};
use crate::linalg::StateSpace;
use crate::partition::{check_aep_definition, check_aep_subspace, Partition, DEFAULT_TOL};
use crate::reduction::{assemble_first_order, reduce_first_order, Coordinates, FirstOrderModel};
use crate::second_order;

pub use modal::{eigen_decomposition, EigenDecomposition, ModalForm};
pub use quadrature::{QuadratureOptions, QuadratureOutcome};

fn require_connected(g: &NetworkGraph) -> Result<()> {
    if g.is_connected(KindFilter::Damper) {
        Ok(())
    } else {
        Err(Error::Disconnected { kind: KindFilter::Damper.to_string() })
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

/// `X = ½ (M − M𝟙𝟙ᵀM / σ_M)`, the value of `∫ e^{−LM⁻¹t} L e^{−M⁻¹Lt} dt`.
pub fn gramian_closed_form(g: &NetworkGraph) -> Result<Matrix> {
    require_connected(g)?;
    let m = g.masses();
    let sigma = g.total_mass();
    Ok(Matrix::from_fn(g.n(), g.n(), |i, j| {
        let diag = if i == j { m[i] } else { 0.0 };
        0.5 * (diag - m[i] * m[j] / sigma)
    }))
}

/// `‖G‖²` of the full mass–damper network.
pub fn h2_full_closed_form(g: &NetworkGraph) -> Result<f64> {
    require_connected(g)?;
    let sigma = g.total_mass();
    Ok(0.5 * g.forced().iter().map(|&i| 1.0 / g.masses()[i] - 1.0 / sigma).sum::<f64>())
}

/// Mass of the cell containing each vertex.
pub fn cell_masses(g: &NetworkGraph, part: &Partition) -> Vec<f64> {
    let per_cell: Vec<f64> = part.cells().iter().map(|c| c.iter().map(|&v| g.masses()[v]).sum()).collect();
    (0..g.n()).map(|v| per_cell[part.cell_of(v)]).collect()
}

/// `‖Ĝ‖²` of the network clustered by `part`.
pub fn h2_reduced_closed_form(g: &NetworkGraph, part: &Partition) -> Result<f64> {
    check_partition(g, part)?;
    require_connected(g)?;
    let sigma = g.total_mass();
    let cell = cell_masses(g, part);
    Ok(0.5 * g.forced().iter().map(|&i| 1.0 / cell[i] - 1.0 / sigma).sum::<f64>())
}

/// `Ξ = ½ Σ_{i∈V_f} (1/mᵢ − 1/σ_Mⁱ)`. An exact error only for almost
/// equitable partitions; computed for any partition.
pub fn reduction_error_formula(g: &NetworkGraph, part: &Partition) -> Result<f64> {
    check_partition(g, part)?;
    let cell = cell_masses(g, part);
    Ok(0.5 * g.forced().iter().map(|&i| 1.0 / g.masses()[i] - 1.0 / cell[i]).sum::<f64>())
}

/// Eigen-sum oracle for a first-order network model. Uses the symmetrized
/// eigen-decomposition of `M⁻¹L` and the model's own `B` and `C`.
pub fn h2_oracle(model: &FirstOrderModel) -> Result<f64> {
    modal::first_order_modal_form(model).h2_squared().map(|h| h.value)
}

/// Oracle for an arbitrary realization: modal eigen-sum when `A` can be
/// reliably diagonalized, adaptive quadrature otherwise.
pub fn h2_oracle_state_space(sys: &StateSpace) -> Result<f64> {
    match modal::general_modal_form(sys) {
        Some(form) => form.h2_squared().map(|h| h.value),
        None => {
            log::debug!("state matrix not reliably diagonalizable; falling back to quadrature");
            quadrature::h2_squared(sys, &QuadratureOptions::default())
        }
    }
}

/// Output matrix of the reduced model laid out on the original damper
/// channels, with zero rows for channels whose edge was dropped.
pub(crate) fn embed_outputs(c_reduced: &Matrix, channel_map: &[Option<usize>]) -> Matrix {
    let mut c = Matrix::zeros(channel_map.len(), c_reduced.ncols());
    for (row, slot) in channel_map.iter().enumerate() {
        if let Some(r) = slot {
            c.row_mut(row).copy_from(&c_reduced.row(*r));
        }
    }
    c
}

/// Full and reduced first-order models with the reduced outputs aligned on
/// the full model's channels, as a difference system.
pub fn first_order_error_system(g: &NetworkGraph, part: &Partition) -> Result<StateSpace> {
    let full = assemble_first_order(g, Coordinates::Momentum);
    let red = reduce_first_order(g, part)?;
    let rm = red.reduced_model(Coordinates::Momentum);
    let c_hat = embed_outputs(&rm.c, &red.channel_map(g, KindFilter::Damper));
    Ok(StateSpace::new(full.a, full.b, full.c).difference(&StateSpace::new(rm.a, rm.b, c_hat)))
}

/// `‖G − Ĝ‖²` by the eigen-sum over the stacked full and reduced models.
pub fn h2_error_oracle(g: &NetworkGraph, part: &Partition) -> Result<f64> {
    check_partition(g, part)?;
    let full = assemble_first_order(g, Coordinates::Momentum);
    let red = reduce_first_order(g, part)?;
    let rm = red.reduced_model(Coordinates::Momentum);
    let c_hat = -embed_outputs(&rm.c, &red.channel_map(g, KindFilter::Damper));
    let full_modes = modal::first_order_modal_form(&full);
    let red_eig = eigen_decomposition(&red.reduced, KindFilter::Damper);
    let red_modes = modal::first_order_modes(&red_eig, Coordinates::Momentum, &rm.b, &c_hat, rm.a.norm());
    full_modes.concat(red_modes).h2_squared().map(|h| h.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    #[default]
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub order: Order,
    /// Also run the numerical oracles.
    pub oracle: bool,
    pub tol: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { order: Order::First, oracle: true, tol: DEFAULT_TOL }
    }
}

/// One input channel's contribution to the error formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcedTerm {
    pub channel: usize,
    pub vertex: usize,
    pub mass: f64,
    pub cell_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Report {
    pub order: Order,
    pub h2_full_closed: f64,
    pub h2_full_oracle: Option<f64>,
    pub h2_reduced_closed: Option<f64>,
    pub h2_reduced_oracle: Option<f64>,
    pub xi_formula: Option<f64>,
    pub xi_oracle: Option<f64>,
    /// `|‖G‖² − ‖G−Ĝ‖² − ‖Ĝ‖²|` from the oracle values.
    pub pythagoras_residual: Option<f64>,
    pub forced: Vec<ForcedTerm>,
    /// Almost equitability of the partition (joint damper/spring for second order).
    pub aep: Option<bool>,
    /// The formula value is an exact error only for almost equitable partitions.
    pub xi_is_exact: Option<bool>,
}

/// Closed forms for `g` (and `part`, when given), plus oracle cross-checks
/// when `opts.oracle` is set.
pub fn build_report(g: &NetworkGraph, part: Option<&Partition>, opts: &ReportOptions) -> Result<H2Report> {
    let h2_full_closed = h2_full_closed_form(g)?;
    let h2_full_oracle = match (opts.oracle, opts.order) {
        (false, _) => None,
        (true, Order::First) => Some(h2_oracle(&assemble_first_order(g, Coordinates::Momentum))?),
        (true, Order::Second) => Some(second_order::h2_oracle_second_order(&second_order::assemble_second_order(g))?),
    };
    let mut report = H2Report {
        order: opts.order,
        h2_full_closed,
        h2_full_oracle,
        h2_reduced_closed: None,
        h2_reduced_oracle: None,
        xi_formula: None,
        xi_oracle: None,
        pythagoras_residual: None,
        forced: vec![],
        aep: None,
        xi_is_exact: None,
    };
    let Some(part) = part else {
        return Ok(report);
    };
    check_partition(g, part)?;
    let cell = cell_masses(g, part);
    report.forced = g
        .forced()
        .iter()
        .enumerate()
        .map(|(channel, &v)| ForcedTerm { channel, vertex: v, mass: g.masses()[v], cell_mass: cell[v] })
        .collect();
    report.h2_reduced_closed = Some(h2_reduced_closed_form(g, part)?);
    report.xi_formula = Some(reduction_error_formula(g, part)?);
    let aep = match opts.order {
        Order::First => {
            let def = check_aep_definition(g, part, KindFilter::Damper, opts.tol)?;
            let sub = check_aep_subspace(g, part, KindFilter::Damper, opts.tol)?;
            def.verdict && sub.verdict
        }
        Order::Second => {
            let (d, s) = second_order::check_joint_aep(g, part, opts.tol)?;
            d.verdict && s.verdict
        }
    };
    report.aep = Some(aep);
    report.xi_is_exact = Some(aep);
    if opts.oracle {
        let (reduced, error) = match opts.order {
            Order::First => {
                let red = reduce_first_order(g, part)?;
                (h2_oracle(&red.reduced_model(Coordinates::Momentum))?, h2_error_oracle(g, part)?)
            }
            Order::Second => {
                let red = second_order::reduce_second_order(g, part)?;
                let xi = second_order::h2_error_second_order(g, part)?;
                (second_order::h2_oracle_second_order(&red)?, xi.oracle)
            }
        };
        report.h2_reduced_oracle = Some(reduced);
        report.xi_oracle = Some(error);
        report.pythagoras_residual = report.h2_full_oracle.map(|full| (full - error - reduced).abs());
    }
    Ok(report)
}
