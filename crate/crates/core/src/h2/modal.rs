//! Modal (eigen-sum) evaluation of squared H₂ norms.
//!
//! For a diagonalizable `A = Σ rᵢ μᵢ lᵢᵀ` the impulse response is
//! `C e^{At} B = Σ Fᵢ e^{μᵢ t}` with `Fᵢ = (C rᵢ)(lᵢᵀ B)`, so
//!
//! ```text
//! ‖G‖² = Σᵢⱼ tr(Fᵢ Fⱼᴴ) / −(μᵢ + μ̄ⱼ)
//! ```
//!
//! Marginal modes (`Re μ ≥ −tol_λ`) are dropped when their residue `Fᵢ`
//! vanishes and are a hard error otherwise.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::graph::{KindFilter, Matrix, NetworkGraph};
use crate::linalg::{symmetric_eigen, to_complex, CMatrix, StateSpace};
use crate::reduction::{Coordinates, FirstOrderModel};

/// Relative threshold on `Re μ` below which a mode counts as marginal.
pub const MARGINAL_RATE_TOL: f64 = 1e-10;
/// Relative threshold on a marginal mode's residue for it to be deflated.
pub const MARGINAL_RESIDUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Mode {
    /// Eigenvalue of `A`.
    pub eigenvalue: Complex<f64>,
    /// Residue `(C r)(lᵀ B)`.
    pub residue: CMatrix,
}

#[derive(Debug, Clone)]
pub struct ModalForm {
    pub modes: Vec<Mode>,
    /// Norm of the state matrix, used to scale the marginal threshold.
    pub a_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalH2 {
    pub value: f64,
    pub deflated: usize,
}

impl ModalForm {
    /// Modal form of a block-diagonal stack: the modes of both parts with
    /// residues already formed against the stacked `B` and `C`.
    pub fn concat(mut self, other: ModalForm) -> ModalForm {
        self.modes.extend(other.modes);
        self.a_norm = self.a_norm.max(other.a_norm);
        self
    }

    pub fn h2_squared(&self) -> Result<ModalH2> {
        let tol_rate = MARGINAL_RATE_TOL * self.a_norm.max(f64::MIN_POSITIVE);
        let residue_norm = |m: &Mode| m.residue.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale = self.modes.iter().map(residue_norm).fold(1.0_f64, f64::max);
        let mut kept = Vec::with_capacity(self.modes.len());
        let mut deflated = 0;
        for mode in &self.modes {
            if mode.eigenvalue.re >= -tol_rate {
                let r = residue_norm(mode);
                if r <= MARGINAL_RESIDUE_TOL * scale {
                    deflated += 1;
                    continue;
                }
                return Err(Error::H2Undefined(format!(
                    "mode at {:.3e}{:+.3e}i is marginal but its residue {r:.3e} is not negligible",
                    mode.eigenvalue.re, mode.eigenvalue.im
                )));
            }
            kept.push(mode);
        }
        if deflated > 0 {
            log::debug!("eigen-sum: deflated {deflated} marginal unobservable/uncontrollable modes");
        }
        let mut total = Complex::new(0.0, 0.0);
        for mi in &kept {
            for mj in &kept {
                let inner: Complex<f64> = mi.residue.iter().zip(mj.residue.iter()).map(|(a, b)| a * b.conj()).sum();
                total += inner / -(mi.eigenvalue + mj.eigenvalue.conj());
            }
        }
        Ok(ModalH2 { value: total.re, deflated })
    }
}

/// Eigenvalues and biorthogonal eigenvectors of `M⁻¹ L`, obtained from the
/// symmetric matrix `M^{-1/2} L M^{-1/2}`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Right eigenvectors `vᵢ` as columns.
    pub right: Matrix,
    /// Left eigenvectors `wᵢ` as columns, with `wᵢᵀ vⱼ = δᵢⱼ`.
    pub left: Matrix,
}

/// When `kind` is connected the zero mode is scaled so that `v₁ = 𝟙` and
/// `w₁ = M𝟙/σ_M`.
pub fn eigen_decomposition(g: &NetworkGraph, kind: KindFilter) -> EigenDecomposition {
    let n = g.n();
    let sqrt_m: Vec<f64> = g.masses().iter().map(|m| m.sqrt()).collect();
    let mut sym = g.weighted_laplacian(kind);
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] /= sqrt_m[i] * sqrt_m[j];
        }
    }
    let (eigenvalues, q) = symmetric_eigen(&sym);
    let mut right = q.clone();
    let mut left = q;
    for i in 0..n {
        right.row_mut(i).scale_mut(1.0 / sqrt_m[i]);
        left.row_mut(i).scale_mut(sqrt_m[i]);
    }
    if g.is_connected(kind) {
        let c = right.column(0).mean();
        right.column_mut(0).scale_mut(1.0 / c);
        left.column_mut(0).scale_mut(c);
    }
    EigenDecomposition { eigenvalues, right, left }
}

/// Modal form of a first-order realization `(A, B, C)` of `g`, where `A` is
/// `−L M⁻¹` (momentum) or `−M⁻¹ L` (velocity).
pub fn first_order_modes(eig: &EigenDecomposition, coords: Coordinates, b: &Matrix, c: &Matrix, a_norm: f64) -> ModalForm {
    // In momentum coordinates A = −(M⁻¹L)ᵀ, so the roles of the eigenvectors swap.
    let (right, left) = match coords {
        Coordinates::Velocity => (&eig.right, &eig.left),
        Coordinates::Momentum => (&eig.left, &eig.right),
    };
    let modes = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let cr = c * right.column(i);
            let lb = left.column(i).transpose() * b;
            Mode { eigenvalue: Complex::new(-lambda, 0.0), residue: to_complex(&(cr * lb)) }
        })
        .collect();
    ModalForm { modes, a_norm }
}

pub fn first_order_modal_form(model: &FirstOrderModel) -> ModalForm {
    let eig = eigen_decomposition(&model.graph, KindFilter::Damper);
    first_order_modes(&eig, model.coords, &model.b, &model.c, model.a.norm())
}

/// General diagonalization of a real state matrix: eigenvalues from the real
/// Schur form, eigenvectors from the null space of `A − μI` for each cluster
/// of (numerically) equal eigenvalues. Returns `None` when `A` looks defective
/// or the eigenvector basis is too ill-conditioned to trust.
pub fn general_modal_form(sys: &StateSpace) -> Option<ModalForm> {
    let n = sys.a.nrows();
    let a_norm = sys.a.norm();
    if n == 0 {
        return Some(ModalForm { modes: vec![], a_norm });
    }
    let scale = a_norm.max(1.0);
    let mut eigs: Vec<Complex<f64>> = sys.a.complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    let cluster_tol = 1e-7 * scale;
    let mut clusters: Vec<Vec<Complex<f64>>> = Vec::new();
    for z in eigs {
        match clusters.iter_mut().find(|c| (c[0] - z).norm() <= cluster_tol) {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }

    let ac = to_complex(&sys.a);
    let mut vectors = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for cluster in &clusters {
        let k = cluster.len();
        let mu = cluster.iter().sum::<Complex<f64>>() / k as f64;
        let shifted = &ac - CMatrix::identity(n, n) * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        if svd.singular_values[order[k - 1]] > 1e-6 * scale {
            return None;
        }
        for &idx in order.iter().take(k) {
            vectors.push(v_t.row(idx).adjoint());
            values.push(mu);
        }
    }
    let right = CMatrix::from_columns(&vectors);
    let sv = right.clone().svd(false, false).singular_values;
    let (smax, smin) = sv.iter().fold((0.0_f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if !(smin > 0.0 && smax / smin <= 1e10) {
        return None;
    }
    let left = right.clone().try_inverse()?;
    let lambda = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.clone()));
    if (&ac * &right - &right * lambda).norm() > 1e-8 * scale * smax {
        return None;
    }
    let bc = to_complex(&sys.b);
    let cc = to_complex(&sys.c);
    let modes = values
        .into_iter()
        .enumerate()
        .map(|(i, mu)| Mode { eigenvalue: mu, residue: (&cc * right.column(i)) * (left.row(i) * &bc) })
        .collect();
    Some(ModalForm { modes, a_norm })
}
