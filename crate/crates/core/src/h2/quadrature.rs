//! Adaptive time-domain quadrature of `∫₀^∞ (C e^{At} B)(C e^{At} B)ᵀ dt`.
//!
//! The state `X(t) = e^{At} B` is propagated exactly with matrix
//! exponentials; each step integrates the output energy with 8-point
//! Gauss–Legendre, and accepts the step only when a single panel and two
//! half panels agree. The horizon grows until the output power has stayed
//! below `power_ratio × peak` for several consecutive steps and, when an
//! energy bound is supplied, until the remaining stored energy is negligible.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Matrix;
use crate::linalg::{expm, StateSpace};

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Upper bound on the output energy still to come from state `X(T)`.
pub type TailBound<'a> = &'a dyn Fn(&Matrix) -> f64;

#[derive(Clone, Copy)]
pub struct QuadratureOptions<'a> {
    /// Absolute tolerance on the integral.
    pub abs_tol: f64,
    /// Output power threshold, relative to the running peak, for stopping.
    pub power_ratio: f64,
    /// Give up (with an error) if the response has not died out by then.
    pub max_time: f64,
    pub tail_bound: Option<TailBound<'a>>,
}

impl Default for QuadratureOptions<'_> {
    fn default() -> Self {
        QuadratureOptions { abs_tol: 1e-10, power_ratio: 1e-12, max_time: 1e7, tail_bound: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureOutcome {
    /// `∫ Y Yᵀ dt` with `Y = C e^{At} B`.
    pub gramian: Matrix,
    pub horizon: f64,
    pub steps: usize,
    /// Energy bound on the neglected tail, when one was supplied.
    pub tail_bound: Option<f64>,
}

impl QuadratureOutcome {
    pub fn h2_squared(&self) -> f64 {
        self.gramian.trace()
    }
}

struct Panel {
    propagator: Matrix,
    nodes: Vec<Matrix>,
}

struct Panels<'s> {
    a: &'s Matrix,
    base: f64,
    cache: HashMap<i32, Panel>,
}

impl Panels<'_> {
    fn step(&self, level: i32) -> f64 {
        self.base * 2f64.powi(level)
    }

    fn get(&mut self, level: i32) -> &Panel {
        let h = self.step(level);
        let a = self.a;
        self.cache.entry(level).or_insert_with(|| Panel {
            propagator: expm(&(a * h)),
            nodes: GL_NODES.iter().map(|x| expm(&(a * (h * 0.5 * (1.0 + x))))).collect(),
        })
    }
}

/// Gauss–Legendre panel of width `h` starting from state `x`. Returns the
/// integral, the largest node power, and the state at the panel's end.
fn panel(panels: &mut Panels, level: i32, c: &Matrix, x: &Matrix) -> (Matrix, f64, Matrix) {
    let h = panels.step(level);
    let p = panels.get(level);
    let mut acc = Matrix::zeros(c.nrows(), c.nrows());
    let mut peak = 0.0_f64;
    for (node, w) in p.nodes.iter().zip(GL_WEIGHTS) {
        let y = c * (node * x);
        peak = peak.max(y.norm_squared());
        acc += (&y * y.transpose()) * (0.5 * h * w);
    }
    (acc, peak, &p.propagator * x)
}

/// Quadrature of the output Gramian `∫₀^∞ C e^{At} B Bᵀ e^{Aᵀt} Cᵀ dt`.
pub fn output_gramian(sys: &StateSpace, opts: &QuadratureOptions) -> Result<QuadratureOutcome> {
    let k = sys.c.nrows();
    let zero = || QuadratureOutcome { gramian: Matrix::zeros(k, k), horizon: 0.0, steps: 0, tail_bound: None };
    if sys.b.ncols() == 0 || k == 0 || sys.a.nrows() == 0 {
        return Ok(zero());
    }
    let a_norm = sys.a.norm();
    if a_norm == 0.0 {
        return if (&sys.c * &sys.b).norm() == 0.0 {
            Ok(zero())
        } else {
            Err(Error::H2Undefined("constant nonzero impulse response".into()))
        };
    }

    let mut panels = Panels { a: &sys.a, base: 0.5 / a_norm, cache: HashMap::new() };
    let mut level = 0_i32;
    let mut x = sys.b.clone();
    let mut t = 0.0;
    let mut total = Matrix::zeros(k, k);
    let mut peak = (&sys.c * &x).norm_squared();
    // Guards the quiet test against responses that are round-off throughout.
    let power_floor = (sys.c.norm() * sys.b.norm()).powi(2);
    let mut quiet = 0;
    let mut steps = 0;
    let max_steps = 50_000_000usize;

    loop {
        let (coarse, _, _) = panel(&mut panels, level, &sys.c, &x);
        let (first, p1, mid) = panel(&mut panels, level - 1, &sys.c, &x);
        let (second, p2, end) = panel(&mut panels, level - 1, &sys.c, &mid);
        let fine = first + second;
        let err = (&coarse - &fine).trace().abs();
        let local_tol = 1e-3 * opts.abs_tol + 1e-12 * total.trace().abs();
        if err > local_tol && level > -60 {
            level -= 1;
            continue;
        }
        total += fine;
        t += panels.step(level);
        x = end;
        steps += 1;
        let step_peak = p1.max(p2).max((&sys.c * &x).norm_squared());
        peak = peak.max(step_peak);
        quiet = if step_peak <= opts.power_ratio * peak.max(power_floor) { quiet + 1 } else { 0 };
        if err <= 1e-4 * local_tol && level < 60 {
            level += 1;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::H2Undefined(format!("impulse response diverged at t = {t:.3e}")));
        }
        if quiet >= 4 {
            let tail = opts.tail_bound.map(|f| f(&x));
            let settled = tail.is_none_or(|b| b <= opts.abs_tol.max(1e-9 * total.trace().abs()));
            if settled {
                return Ok(QuadratureOutcome { gramian: total, horizon: t, steps, tail_bound: tail });
            }
        }
        if t > opts.max_time || steps > max_steps {
            return Err(Error::H2Undefined(format!(
                "output power has not decayed by t = {t:.3e}; a marginal mode is likely observable"
            )));
        }
    }
}

pub fn h2_squared(sys: &StateSpace, opts: &QuadratureOptions) -> Result<f64> {
    output_gramian(sys, opts).map(|o| o.h2_squared())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay() {
        let sys = StateSpace::new(Matrix::from_element(1, 1, -1.0), Matrix::from_element(1, 1, 1.0), Matrix::from_element(1, 1, 1.0));
        let v = h2_squared(&sys, &QuadratureOptions::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-10, "{v}");
    }

    #[test]
    fn stiff_two_rate() {
        // y = e^{-t} + e^{-1000 t}: ∫ y² = 1/2 + 2/1001 + 1/2000.
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1000.0]));
        let sys = StateSpace::new(a, Matrix::from_row_slice(2, 1, &[1.0, 1.0]), Matrix::from_row_slice(1, 2, &[1.0, 1.0]));
        let v = h2_squared(&sys, &QuadratureOptions::default()).unwrap();
        assert!((v - (0.5 + 2.0 / 1001.0 + 1.0 / 2000.0)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn oscillator() {
        let (zeta, omega) = (0.05, 4.0);
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -omega * omega, -2.0 * zeta * omega]);
        let sys = StateSpace::new(a, Matrix::from_row_slice(2, 1, &[0.0, 1.0]), Matrix::from_row_slice(1, 2, &[0.0, 1.0]));
        let v = h2_squared(&sys, &QuadratureOptions::default()).unwrap();
        assert!((v - 1.0 / (4.0 * zeta * omega)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn round_off_response_terminates() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0]));
        let c = Matrix::from_row_slice(1, 2, &[1.0, -1.0 + 1e-16]);
        let sys = StateSpace::new(a, Matrix::from_row_slice(2, 1, &[1.0, 1.0]), c);
        let v = h2_squared(&sys, &QuadratureOptions::default()).unwrap();
        assert!(v.abs() < 1e-20);
    }

    #[test]
    fn observable_integrator_is_refused() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0]);
        let sys = StateSpace::new(a, Matrix::from_row_slice(2, 1, &[1.0, 1.0]), Matrix::from_row_slice(1, 2, &[1.0, 1.0]));
        let opts = QuadratureOptions { max_time: 1e3, ..Default::default() };
        assert!(matches!(h2_squared(&sys, &opts), Err(Error::H2Undefined(_))));
    }
}
