//! Mass–spring–damper networks in port-Hamiltonian form.
//!
//! State `(q, p)`: spring elongations and vertex momenta. With
//! `H(q, p) = ½ pᵀM⁻¹p + ½ qᵀKq`,
//!
//! ```text
//! [q̇]   [ 0     D_sᵀ      ] [K q  ]   [0]
//! [ṗ] = [−D_s  −D_d R D_dᵀ] [M⁻¹p] + [E] u,    y = R^{1/2} D_dᵀ M⁻¹ p
//! ```
//!
//! Clustering keeps the inter-cell springs and dampers and builds the same
//! structure on the quotient graph.

use crate::error::{Error, Result};
use crate::graph::{KindFilter, Matrix, NetworkGraph, Vector};
use crate::h2::quadrature::{self, QuadratureOptions};
use crate::h2::{embed_outputs, modal, reduction_error_formula};
use crate::linalg::{block_diag, StateSpace};
use crate::partition::{check_aep_definition, AepWitness, Partition, DEFAULT_TOL};
use crate::reduction::{reduce_graph, ReductionResult};

/// Port-Hamiltonian realization of a mass–spring–damper network.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderModel {
    pub d_spring: Matrix,
    pub d_damper: Matrix,
    pub spring_constants: Vec<f64>,
    pub damper_constants: Vec<f64>,
    pub masses: Vec<f64>,
    pub e: Matrix,
    /// `(k_s + n) × (k_s + n)` state matrix over `(q, p)`.
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

/// Split state of a [`SecondOrderModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderState {
    pub q: Vector,
    pub p: Vector,
}

impl SecondOrderState {
    pub fn from_stacked(model: &SecondOrderModel, x: &Vector) -> Self {
        let ks = model.num_springs();
        SecondOrderState { q: x.rows(0, ks).into_owned(), p: x.rows(ks, model.n()).into_owned() }
    }

    pub fn stacked(&self) -> Vector {
        Vector::from_iterator(self.q.len() + self.p.len(), self.q.iter().chain(self.p.iter()).copied())
    }
}

fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_column_slice(values))
}

impl SecondOrderModel {
    pub fn from_parts(d_spring: Matrix, d_damper: Matrix, spring_constants: Vec<f64>, damper_constants: Vec<f64>, masses: Vec<f64>, e: Matrix) -> Self {
        let n = masses.len();
        let ks = d_spring.ncols();
        let m_inv = Matrix::from_diagonal(&Vector::from_iterator(n, masses.iter().map(|m| 1.0 / m)));
        let k = diag(&spring_constants);
        let r = diag(&damper_constants);
        let dissipation = &d_damper * &r * d_damper.transpose();
        let mut a = Matrix::zeros(ks + n, ks + n);
        a.view_mut((0, ks), (ks, n)).copy_from(&(d_spring.transpose() * &m_inv));
        a.view_mut((ks, 0), (n, ks)).copy_from(&(-(&d_spring * &k)));
        a.view_mut((ks, ks), (n, n)).copy_from(&(-(dissipation * &m_inv)));
        let mut b = Matrix::zeros(ks + n, e.ncols());
        b.view_mut((ks, 0), e.shape()).copy_from(&e);
        let r_sqrt = diag(&damper_constants.iter().map(|x| x.sqrt()).collect::<Vec<_>>());
        let mut c = Matrix::zeros(d_damper.ncols(), ks + n);
        c.view_mut((0, ks), (d_damper.ncols(), n)).copy_from(&(r_sqrt * d_damper.transpose() * m_inv));
        SecondOrderModel { d_spring, d_damper, spring_constants, damper_constants, masses, e, a, b, c }
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn num_springs(&self) -> usize {
        self.d_spring.ncols()
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace::new(self.a.clone(), self.b.clone(), self.c.clone())
    }

    /// Structure matrix `J − R_d` with `A = (J − R_d) Q`.
    pub fn structure_matrix(&self) -> Matrix {
        let (ks, n) = (self.num_springs(), self.n());
        let mut jr = Matrix::zeros(ks + n, ks + n);
        jr.view_mut((0, ks), (ks, n)).copy_from(&self.d_spring.transpose());
        jr.view_mut((ks, 0), (n, ks)).copy_from(&(-&self.d_spring));
        jr.view_mut((ks, ks), (n, n)).copy_from(&(-(&self.d_damper * diag(&self.damper_constants) * self.d_damper.transpose())));
        jr
    }

    /// Hessian `Q = diag(K, M⁻¹)` of the Hamiltonian.
    pub fn energy_hessian(&self) -> Matrix {
        block_diag(&diag(&self.spring_constants), &diag(&self.masses.iter().map(|m| 1.0 / m).collect::<Vec<_>>()))
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Spring and dissipation parts of the structure: the interconnection
    /// must be skew-symmetric and the dissipation symmetric negative
    /// semidefinite and confined to the momentum block. Returns the worst
    /// violation.
    pub fn structure_defect(&self) -> f64 {
        let (ks, n) = (self.num_springs(), self.n());
        let jr = self.structure_matrix();
        let mut interconnection = jr.clone();
        interconnection.view_mut((ks, ks), (n, n)).fill(0.0);
        let skew = (&interconnection + interconnection.transpose()).amax();
        let dissipation = jr.view((ks, ks), (n, n)).into_owned();
        let symmetric = (&dissipation - dissipation.transpose()).amax();
        let (eigs, _) = crate::linalg::symmetric_eigen(&dissipation);
        let nsd = eigs.last().copied().unwrap_or(0.0).max(0.0) / dissipation.amax().max(1.0);
        let qblock = jr.view((0, 0), (ks, ks)).amax();
        let a_defect = (&jr * self.energy_hessian() - &self.a).amax();
        skew.max(symmetric).max(nsd).max(qblock).max(a_defect)
    }

    /// Second-order form `p̈ + L_d M⁻¹ ṗ + L_s M⁻¹ p = E u̇`-free residual:
    /// with `u = 0`, `p̈` from the state equations against
    /// `−D_d R D_dᵀ M⁻¹ ṗ − D_s K D_sᵀ M⁻¹ p`.
    pub fn second_order_residual(&self, x: &Vector) -> f64 {
        let ks = self.num_springs();
        let n = self.n();
        let xdot = &self.a * x;
        let xddot = &self.a * &xdot;
        let p = x.rows(ks, n);
        let pdot = xdot.rows(ks, n);
        let pddot = xddot.rows(ks, n);
        let m_inv = diag(&self.masses.iter().map(|m| 1.0 / m).collect::<Vec<_>>());
        let ld = &self.d_damper * diag(&self.damper_constants) * self.d_damper.transpose();
        let ls = &self.d_spring * diag(&self.spring_constants) * self.d_spring.transpose();
        (pddot + &ld * &m_inv * pdot + &ls * &m_inv * p).amax()
    }
}

pub fn assemble_second_order(g: &NetworkGraph) -> SecondOrderModel {
    SecondOrderModel::from_parts(
        g.incidence_matrix(KindFilter::Spring),
        g.incidence_matrix(KindFilter::Damper),
        g.edge_weights(KindFilter::Spring),
        g.edge_weights(KindFilter::Damper),
        g.masses().to_vec(),
        g.input_matrix(),
    )
}

/// `H(q, p) = ½ pᵀM⁻¹p + ½ qᵀKq`.
pub fn hamiltonian(model: &SecondOrderModel, state: &SecondOrderState) -> f64 {
    let kinetic: f64 = state.p.iter().zip(&model.masses).map(|(p, m)| p * p / m).sum();
    let potential: f64 = state.q.iter().zip(&model.spring_constants).map(|(q, k)| k * q * q).sum();
    0.5 * (kinetic + potential)
}

/// Almost equitability with respect to the damper and the spring effective
/// Laplacians. The joint verdict is the conjunction of both.
pub fn check_joint_aep(g: &NetworkGraph, part: &Partition, tol: f64) -> Result<(AepWitness, AepWitness)> {
    Ok((
        check_aep_definition(g, part, KindFilter::Damper, tol)?,
        check_aep_definition(g, part, KindFilter::Spring, tol)?,
    ))
}

/// Clusters the mass–spring–damper network by `part`.
pub fn reduce_second_order(g: &NetworkGraph, part: &Partition) -> Result<SecondOrderModel> {
    let (reduced, _) = reduce_graph(g, part)?;
    Ok(assemble_second_order(&reduced))
}

/// Reduced model together with the clustering bookkeeping.
pub fn reduce_second_order_with_map(g: &NetworkGraph, part: &Partition) -> Result<(SecondOrderModel, ReductionResult)> {
    let red = crate::reduction::reduce_first_order(g, part)?;
    Ok((assemble_second_order(&red.reduced), red))
}

/// Largest entry of `W_extᵀ A V_ext − Â`, where `V_ext`, `W_ext` act as the
/// clustering factors on `p` and select the surviving springs on `q`.
pub fn projection_defect(g: &NetworkGraph, part: &Partition) -> Result<f64> {
    let full = assemble_second_order(g);
    let (red, map) = reduce_second_order_with_map(g, part)?;
    let (v, w) = crate::reduction::petrov_galerkin_factors(g, part)?;
    let springs = map.channel_map(g, KindFilter::Spring);
    let mut select = Matrix::zeros(red.num_springs(), full.num_springs());
    for (i, slot) in springs.iter().enumerate() {
        if let Some(j) = slot {
            select[(*j, i)] = 1.0;
        }
    }
    let w_ext = block_diag(&select, &w.transpose());
    let v_ext = block_diag(&select.transpose(), &v);
    Ok((w_ext * &full.a * v_ext - &red.a).amax())
}

/// Stored energy that can still be dissipated: `H(x)` minus the energy of the
/// rigid motion carrying the same total momentum, which is conserved.
pub fn dissipatable_energy(model: &SecondOrderModel, x: &Vector) -> f64 {
    let state = SecondOrderState::from_stacked(model, x);
    let momentum: f64 = state.p.sum();
    (hamiltonian(model, &state) - momentum * momentum / (2.0 * model.total_mass())).max(0.0)
}

fn tail_bound_for<'a>(models: &'a [&'a SecondOrderModel]) -> impl Fn(&Matrix) -> f64 + 'a {
    move |x: &Matrix| {
        // ‖y − ŷ‖² ≤ 2‖y‖² + 2‖ŷ‖², and each ∫‖y‖² is bounded by the energy
        // that can still be dissipated.
        let factor = if models.len() > 1 { 2.0 } else { 1.0 };
        let mut total = 0.0;
        for col in x.column_iter() {
            let mut offset = 0;
            for m in models {
                let dim = m.a.nrows();
                total += factor * dissipatable_energy(m, &col.rows(offset, dim).into_owned());
                offset += dim;
            }
        }
        total
    }
}

/// `‖G‖²` of a second-order model by quadrature with an energy tail bound.
pub fn h2_oracle_second_order(model: &SecondOrderModel) -> Result<f64> {
    let models = [model];
    let bound = tail_bound_for(&models);
    let opts = QuadratureOptions { tail_bound: Some(&bound), ..Default::default() };
    quadrature::h2_squared(&model.state_space(), &opts)
}

/// Outcome of the second-order error check.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderError {
    /// `‖G − Ĝ‖²` from the numerical oracle.
    pub oracle: f64,
    /// The first-order error formula evaluated on the same masses and partition.
    pub formula: f64,
    pub damper_aep: bool,
    pub spring_aep: bool,
    /// `|oracle − formula| ≤ 1e−6 (1 + formula)`.
    pub matches: bool,
    pub horizon: f64,
    pub tail_bound: Option<f64>,
}

/// Stacked error system of full and reduced mass–spring–damper models, with
/// the reduced damper outputs aligned on the full damper channels. The
/// `q` and `q̂` blocks remain separate states.
pub fn second_order_error_system(g: &NetworkGraph, part: &Partition) -> Result<(SecondOrderModel, SecondOrderModel, StateSpace)> {
    let full = assemble_second_order(g);
    let (red, map) = reduce_second_order_with_map(g, part)?;
    let c_hat = embed_outputs(&red.c, &map.channel_map(g, KindFilter::Damper));
    let sys = full.state_space().difference(&StateSpace::new(red.a.clone(), red.b.clone(), c_hat));
    Ok((full, red, sys))
}

/// `‖G − Ĝ‖²` for the second-order reduction by quadrature, next to the
/// first-order error formula.
pub fn h2_error_second_order(g: &NetworkGraph, part: &Partition) -> Result<SecondOrderError> {
    let (full, red, sys) = second_order_error_system(g, part)?;
    let models = [&full, &red];
    let bound = tail_bound_for(&models);
    let opts = QuadratureOptions { tail_bound: Some(&bound), ..Default::default() };
    let outcome = quadrature::output_gramian(&sys, &opts)?;
    let oracle = outcome.h2_squared();
    let formula = reduction_error_formula(g, part)?;
    let (d, s) = check_joint_aep(g, part, DEFAULT_TOL)?;
    Ok(SecondOrderError {
        oracle,
        formula,
        damper_aep: d.verdict,
        spring_aep: s.verdict,
        matches: (oracle - formula).abs() <= 1e-6 * (1.0 + formula),
        horizon: outcome.horizon,
        tail_bound: outcome.tail_bound,
    })
}

/// Same quantity by the general eigen-sum, with the number of deflated
/// marginal modes (rigid-body momentum, spring-cycle modes).
pub fn h2_error_second_order_eigen(g: &NetworkGraph, part: &Partition) -> Result<(f64, usize)> {
    let (_, _, sys) = second_order_error_system(g, part)?;
    let form = modal::general_modal_form(&sys)
        .ok_or_else(|| Error::H2Undefined("error system is not reliably diagonalizable".into()))?;
    let h = form.h2_squared()?;
    Ok((h.value, h.deflated))
}
