//! Fixed-step RK4 simulation of full and reduced models.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::graph::{Matrix, Vector};
use crate::linalg::StateSpace;
use crate::reduction::{Coordinates, FirstOrderModel};
use crate::second_order::SecondOrderModel;

/// A linear model `ẋ = Ax + Bu`, `y = Cx` with a quadratic storage function
/// `½ xᵀQx` and a conserved linear momentum `wᵀx`.
pub trait LinearSystem {
    fn a(&self) -> &Matrix;
    fn b(&self) -> &Matrix;
    fn c(&self) -> &Matrix;
    /// `Q` in `E(x) = ½ xᵀQx`.
    fn energy_hessian(&self) -> Matrix;
    /// `w` in the total momentum `wᵀx`.
    fn momentum_weights(&self) -> Vector;

    fn state_dim(&self) -> usize {
        self.a().nrows()
    }

    fn energy(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(self.energy_hessian() * x))
    }
}

impl LinearSystem for FirstOrderModel {
    fn a(&self) -> &Matrix {
        &self.a
    }
    fn b(&self) -> &Matrix {
        &self.b
    }
    fn c(&self) -> &Matrix {
        &self.c
    }
    fn energy_hessian(&self) -> Matrix {
        match self.coords {
            Coordinates::Momentum => self.graph.inverse_mass_matrix(),
            Coordinates::Velocity => self.graph.mass_matrix(),
        }
    }
    fn momentum_weights(&self) -> Vector {
        match self.coords {
            Coordinates::Momentum => Vector::from_element(self.graph.n(), 1.0),
            Coordinates::Velocity => Vector::from_column_slice(self.graph.masses()),
        }
    }
}

impl LinearSystem for SecondOrderModel {
    fn a(&self) -> &Matrix {
        &self.a
    }
    fn b(&self) -> &Matrix {
        &self.b
    }
    fn c(&self) -> &Matrix {
        &self.c
    }
    fn energy_hessian(&self) -> Matrix {
        SecondOrderModel::energy_hessian(self)
    }
    fn momentum_weights(&self) -> Vector {
        let ks = self.num_springs();
        Vector::from_fn(ks + self.n(), |i, _| if i < ks { 0.0 } else { 1.0 })
    }
}

/// A bare realization; storage `½‖x‖²` and no conserved momentum.
impl LinearSystem for StateSpace {
    fn a(&self) -> &Matrix {
        &self.a
    }
    fn b(&self) -> &Matrix {
        &self.b
    }
    fn c(&self) -> &Matrix {
        &self.c
    }
    fn energy_hessian(&self) -> Matrix {
        Matrix::identity(self.a.nrows(), self.a.nrows())
    }
    fn momentum_weights(&self) -> Vector {
        Vector::zeros(self.a.nrows())
    }
}

/// Input signal, by channel (0-based column of `B`).
#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    Zero,
    /// Unit impulse, realized as the jump `x₀ + B e_channel` at `t = 0`.
    Impulse(usize),
    /// Unit step from `t = 0`.
    Step(usize),
    /// Piecewise-linear interpolation of `values[k]` (one entry per channel)
    /// at `times[k]`, held constant outside the sampled range.
    Samples { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl InputSignal {
    fn check(&self, inputs: usize) -> Result<()> {
        match self {
            InputSignal::Zero => Ok(()),
            InputSignal::Impulse(ch) | InputSignal::Step(ch) if *ch >= inputs => {
                Err(Error::InputOutOfRange { index: *ch, n: inputs })
            }
            InputSignal::Impulse(_) | InputSignal::Step(_) => Ok(()),
            InputSignal::Samples { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Dimension("sampled input needs one value row per sample time".into()));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Dimension("sample times must be strictly increasing".into()));
                }
                if values.iter().any(|v| v.len() != inputs) {
                    return Err(Error::Dimension(format!("each sample needs {inputs} channel values")));
                }
                Ok(())
            }
        }
    }

    /// Value at time `t ≥ 0`.
    pub fn at(&self, t: f64, inputs: usize) -> Vector {
        match self {
            InputSignal::Zero | InputSignal::Impulse(_) => Vector::zeros(inputs),
            InputSignal::Step(ch) => Vector::from_fn(inputs, |i, _| if i == *ch { 1.0 } else { 0.0 }),
            InputSignal::Samples { times, values } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    return Vector::from_column_slice(&values[0]);
                }
                if k == times.len() {
                    return Vector::from_column_slice(&values[k - 1]);
                }
                let (t0, t1) = (times[k - 1], times[k]);
                let s = (t - t0) / (t1 - t0);
                Vector::from_fn(inputs, |i, _| (1.0 - s) * values[k - 1][i] + s * values[k][i])
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            InputSignal::Zero => "zero".into(),
            InputSignal::Impulse(ch) => format!("impulse({})", ch + 1),
            InputSignal::Step(ch) => format!("step({})", ch + 1),
            InputSignal::Samples { times, .. } => format!("samples({})", times.len()),
        }
    }
}

/// Sampled solution of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub outputs: Vec<Vector>,
    pub energy: Vec<f64>,
    pub inputs: Vec<Vector>,
    pub description: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Step size of the uniform grid.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// CSV with header `t,state_1..,y_1..,energy`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let nx = self.states.first().map_or(0, |x| x.len());
        let ny = self.outputs.first().map_or(0, |y| y.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=nx).map(|i| format!("state_{i}")));
        header.extend((1..=ny).map(|i| format!("y_{i}")));
        header.push("energy".into());
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![format!("{:.14e}", self.times[k])];
            row.extend(self.states[k].iter().map(|v| format!("{v:.14e}")));
            row.extend(self.outputs[k].iter().map(|v| format!("{v:.14e}")));
            row.push(format!("{:.14e}", self.energy[k]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Classical fourth-order Runge–Kutta on a uniform grid. The step is shrunk
/// to `t_end / ⌈t_end / dt⌉` so the grid ends exactly at `t_end`.
pub fn integrate<S: LinearSystem + ?Sized>(sys: &S, input: &InputSignal, x0: &Vector, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Integration(format!("need dt > 0 and t_end > 0, got dt = {dt}, t_end = {t_end}")));
    }
    let (a, b, c) = (sys.a(), sys.b(), sys.c());
    if x0.len() != a.nrows() {
        return Err(Error::Dimension(format!("initial state has length {}, expected {}", x0.len(), a.nrows())));
    }
    let m = b.ncols();
    input.check(m)?;
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let q = sys.energy_hessian();
    let energy = |x: &Vector| 0.5 * x.dot(&(&q * x));

    let mut x = x0.clone();
    if let InputSignal::Impulse(ch) = input {
        x += b.column(*ch);
    }
    let f = |x: &Vector, u: &Vector| a * x + b * u;

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        outputs: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        inputs: Vec::with_capacity(steps + 1),
        description: input.describe(),
    };
    let record = |traj: &mut Trajectory, t: f64, x: &Vector, u: Vector| {
        traj.times.push(t);
        traj.outputs.push(c * x);
        traj.energy.push(energy(x));
        traj.states.push(x.clone());
        traj.inputs.push(u);
    };
    record(&mut traj, 0.0, &x, input.at(0.0, m));
    for k in 0..steps {
        let t = k as f64 * h;
        let u0 = input.at(t, m);
        let um = input.at(t + 0.5 * h, m);
        let u1 = input.at(t + h, m);
        let k1 = f(&x, &u0);
        let k2 = f(&(&x + &k1 * (0.5 * h)), &um);
        let k3 = f(&(&x + &k2 * (0.5 * h)), &um);
        let k4 = f(&(&x + &k3 * h), &u1);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Integration(format!("non-finite state at t = {:.6e}", t + h)));
        }
        record(&mut traj, (k + 1) as f64 * h, &x, u1);
    }
    Ok(traj)
}

/// `(t_k, dE/dt + ‖y‖² − ∇E·Bu)` at interior grid points, with centered
/// differences for `dE/dt`.
pub fn dissipation_residuals<S: LinearSystem + ?Sized>(traj: &Trajectory, sys: &S) -> Vec<(f64, f64)> {
    let n = traj.len();
    if n < 3 {
        return Vec::new();
    }
    let qb = sys.energy_hessian() * sys.b();
    (1..n - 1)
        .map(|k| {
            let de = (traj.energy[k + 1] - traj.energy[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]);
            let supply = traj.states[k].dot(&(&qb * &traj.inputs[k]));
            (traj.times[k], de + traj.outputs[k].norm_squared() - supply)
        })
        .collect()
}

/// Largest magnitude of [`dissipation_residuals`].
pub fn dissipation_residual<S: LinearSystem + ?Sized>(traj: &Trajectory, sys: &S) -> f64 {
    dissipation_residuals(traj, sys).iter().map(|(_, r)| r.abs()).fold(0.0, f64::max)
}

/// Largest one-step increase of the energy trace.
pub fn max_energy_increase(traj: &Trajectory) -> f64 {
    traj.energy.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Largest deviation of the total momentum from its initial value.
pub fn momentum_drift<S: LinearSystem + ?Sized>(traj: &Trajectory, sys: &S) -> f64 {
    let w = sys.momentum_weights();
    let Some(first) = traj.states.first() else { return 0.0 };
    let p0 = w.dot(first);
    traj.states.iter().map(|x| (w.dot(x) - p0).abs()).fold(0.0, f64::max)
}

/// Full-vs-reduced output error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// `∫ ‖y − ŷ‖² dt` by the trapezoidal rule.
    pub l2_squared: f64,
    pub max_abs: f64,
}

/// Compares outputs on a shared grid. `channel_map[i]` is the reduced output
/// channel matching full channel `i`; unmatched channels are compared with 0.
pub fn compare(full: &Trajectory, reduced: &Trajectory, channel_map: &[Option<usize>]) -> Result<Comparison> {
    if full.len() != reduced.len()
        || full.times.iter().zip(&reduced.times).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::Dimension("trajectories are sampled on different grids".into()));
    }
    let ny = full.outputs.first().map_or(0, |y| y.len());
    if channel_map.len() != ny {
        return Err(Error::Dimension(format!("channel map has {} entries, expected {ny}", channel_map.len())));
    }
    let mut power = Vec::with_capacity(full.len());
    let mut max_abs = 0.0_f64;
    for (y, yr) in full.outputs.iter().zip(&reduced.outputs) {
        let mut p = 0.0;
        for (i, slot) in channel_map.iter().enumerate() {
            let d = y[i] - slot.map_or(0.0, |j| yr[j]);
            max_abs = max_abs.max(d.abs());
            p += d * d;
        }
        power.push(p);
    }
    let l2_squared = full.times.windows(2).zip(power.windows(2)).map(|(t, p)| 0.5 * (t[1] - t[0]) * (p[0] + p[1])).sum();
    Ok(Comparison { l2_squared, max_abs })
}
