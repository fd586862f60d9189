mod common;

use common::{path3, random_aep, random_connected, rng, QuotientShape};
use netclust::graph::Vector;
use netclust::h2::{eigen_decomposition, h2_error_oracle};
use netclust::simulate::{compare, dissipation_residual, max_energy_increase, momentum_drift};
use netclust::{assemble_first_order, assemble_second_order, integrate, reduce_first_order, Coordinates, InputSignal, KindFilter, LinearSystem, Partition};

fn dissipation_order<S: LinearSystem>(sys: &S, input: &InputSignal, t_end: f64) -> f64 {
    let dt = 0.02 / sys.a().norm();
    let x0 = Vector::zeros(sys.state_dim());
    let coarse = dissipation_residual(&integrate(sys, input, &x0, t_end, dt).unwrap(), sys);
    let fine = dissipation_residual(&integrate(sys, input, &x0, t_end, dt / 2.0).unwrap(), sys);
    (coarse / fine).log2()
}

#[test]
fn dissipation_residual_converges() {
    let mut r = rng(51);
    for n in 2..6 {
        let g = random_connected(&mut r, n);
        let model = assemble_first_order(&g, Coordinates::Momentum);
        assert!(dissipation_order(&model, &InputSignal::Impulse(0), 2.0) >= 1.9);
    }
    let shape = QuotientShape { max_n: 6, max_cells: 3, springs: true, singleton_inputs: false };
    let (g, _) = random_aep(&mut r, shape);
    assert!(dissipation_order(&assemble_second_order(&g), &InputSignal::Impulse(0), 2.0) >= 1.9);
}

#[test]
fn consensus_limit_of_simulation() {
    let mut r = rng(52);
    let g = random_connected(&mut r, 4);
    let model = assemble_first_order(&g, Coordinates::Velocity);
    let lambda2 = eigen_decomposition(&g, KindFilter::Damper).eigenvalues[1];
    let v0 = Vector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
    let traj = integrate(&model, &InputSignal::Zero, &v0, 40.0 / lambda2, 0.01 / model.a.norm()).unwrap();
    let m = Vector::from_column_slice(g.masses());
    let consensus = m.dot(&v0) / g.total_mass();
    let last = traj.states.last().unwrap();
    assert!(last.iter().all(|v| (v - consensus).abs() <= 1e-8), "{last} vs {consensus}");
    assert!(max_energy_increase(&traj) <= 1e-10);
    assert!(momentum_drift(&traj, &model) <= 1e-10);
}

#[test]
fn second_order_energy_and_momentum() {
    let mut r = rng(53);
    let shape = QuotientShape { max_n: 6, max_cells: 3, springs: true, singleton_inputs: false };
    let (g, _) = random_aep(&mut r, shape);
    let model = assemble_second_order(&g);
    let traj = integrate(&model, &InputSignal::Impulse(0), &Vector::zeros(model.state_dim()), 10.0, 1e-3).unwrap();
    assert!(max_energy_increase(&traj) <= 1e-10);
    assert!(momentum_drift(&traj, &model) <= 1e-10);
}

#[test]
fn impulse_error_energy_approaches_xi() {
    let g = path3();
    let part = Partition::new(vec![vec![0, 2], vec![1]], 3).unwrap();
    let red = reduce_first_order(&g, &part).unwrap();
    let full = assemble_first_order(&g, Coordinates::Momentum);
    let small = red.reduced_model(Coordinates::Momentum);
    let (t_end, dt) = (40.0, 1e-3);
    let a = integrate(&full, &InputSignal::Impulse(0), &Vector::zeros(3), t_end, dt).unwrap();
    let b = integrate(&small, &InputSignal::Impulse(0), &Vector::zeros(2), t_end, dt).unwrap();
    let cmp = compare(&a, &b, &red.channel_map(&g, KindFilter::Damper)).unwrap();
    let xi = h2_error_oracle(&g, &part).unwrap();
    assert!((cmp.l2_squared - xi).abs() <= 1e-3, "{} vs {xi}", cmp.l2_squared);
}

#[test]
fn rk4_global_error_is_fourth_order() {
    let mut r = rng(53);
    let g = random_connected(&mut r, 5);
    let model = assemble_first_order(&g, Coordinates::Momentum);
    let x0 = model.b.column(0).into_owned();
    let exact = netclust::linalg::expm(&model.a) * &x0;
    let err = |dt: f64| {
        let traj = integrate(&model, &InputSignal::Zero, &x0, 1.0, dt).unwrap();
        (traj.states.last().unwrap() - &exact).amax()
    };
    let dt = 0.1 / model.a.norm();
    let order = (err(dt) / err(dt / 2.0)).log2();
    assert!(order > 3.8, "order {order}");
}
