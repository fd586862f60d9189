//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{path3, random_aep, random_connected, random_quotient, random_structured, rescale, rng, QuotientShape};
use netclust::h2::{
    build_report, eigen_decomposition, h2_error_oracle, h2_full_closed_form, h2_oracle, reduction_error_formula,
    ReportOptions,
};
use netclust::partition::{check_aep_definition, check_aep_subspace, synthesize_aep_graph, SetPartitions, DEFAULT_TOL};
use netclust::reduction::petrov_galerkin_factors;
use netclust::second_order::h2_error_second_order;
use netclust::simulate::{compare, dissipation_residuals};
use netclust::{
    assemble_first_order, assemble_second_order, integrate, reduce_first_order, reduce_second_order, Coordinates, InputSignal, KindFilter,
    LinearSystem, Matrix, NetworkGraph, Partition, Vector,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

const AEP_SHAPE: QuotientShape = QuotientShape { max_n: 10, max_cells: 4, springs: false, singleton_inputs: false };
const SINGLETON_SHAPE: QuotientShape = QuotientShape { max_n: 10, max_cells: 4, springs: false, singleton_inputs: true };
const SECOND_ORDER_SHAPE: QuotientShape = QuotientShape { max_n: 8, max_cells: 3, springs: true, singleton_inputs: false };

fn aep_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1001);
    let (mut checked, mut disagreements, mut nontrivial) = (0usize, 0usize, 0usize);
    for trial in 0..500 {
        let n = 1 + trial % 8;
        let g = if trial % 3 == 2 { random_structured(&mut r, n) } else { random_connected(&mut r, n) };
        for part in SetPartitions::new(n) {
            let d = check_aep_definition(&g, &part, KindFilter::Damper, DEFAULT_TOL).unwrap().verdict;
            let s = check_aep_subspace(&g, &part, KindFilter::Damper, DEFAULT_TOL).unwrap().verdict;
            checked += 1;
            disagreements += usize::from(d != s);
            nontrivial += usize::from(d && part.num_cells() > 1 && part.num_cells() < n);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        disagreements == 0 && within(elapsed, 120),
        format!(
            "500 graphs, {checked} partitions ({nontrivial} nontrivial AEPs), {disagreements} disagreements, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn closed_form_h2() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1002);
    let mut worst = 0.0_f64;
    for trial in 0..200 {
        let g = random_connected(&mut r, 2 + trial % 9);
        let closed = h2_full_closed_form(&g).unwrap();
        let oracle = h2_oracle(&assemble_first_order(&g, Coordinates::Momentum)).unwrap();
        worst = worst.max((closed - oracle).abs() / (1.0 + closed));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && within(elapsed, 30),
        format!("200 graphs, worst relative gap {worst:.2e} (limit 1e-8), {:.2} s", elapsed.as_secs_f64()),
    )
}

fn theorem_error() -> Outcome {
    let mut r = rng(1003);
    let (mut worst_xi, mut worst_pyth) = (0.0_f64, 0.0_f64);
    let mut all_aep = true;
    for _ in 0..100 {
        let (g, part) = random_aep(&mut r, AEP_SHAPE);
        let rep = build_report(&g, Some(&part), &ReportOptions::default()).unwrap();
        let xi = rep.xi_formula.unwrap();
        all_aep &= rep.aep == Some(true);
        worst_xi = worst_xi.max((xi - rep.xi_oracle.unwrap()).abs() / (1.0 + xi));
        worst_pyth = worst_pyth.max(rep.pythagoras_residual.unwrap());
    }
    let g = path3();
    let part = Partition::new(vec![vec![0, 2], vec![1]], 3).unwrap();
    let rep = build_report(&g, Some(&part), &ReportOptions::default()).unwrap();
    let expected = [1.0 / 3.0, 1.0 / 12.0, 0.25];
    let closed = [rep.h2_full_closed, rep.h2_reduced_closed.unwrap(), rep.xi_formula.unwrap()];
    let oracle = [rep.h2_full_oracle.unwrap(), rep.h2_reduced_oracle.unwrap(), rep.xi_oracle.unwrap()];
    let desk_closed = closed.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let desk_oracle = oracle.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        all_aep && worst_xi <= 1e-7 && worst_pyth <= 1e-7 && desk_closed <= 1e-9 && desk_oracle <= 1e-7,
        format!(
            "100 synthesized instances: worst error gap {worst_xi:.2e}, worst Pythagoras residual {worst_pyth:.2e}; \
             path-3 desk case off by {desk_closed:.1e} (closed) / {desk_oracle:.1e} (oracle)"
        ),
    )
}

fn weight_independence() -> Outcome {
    let mut r = rng(1004);
    let shape = QuotientShape { max_n: 10, max_cells: 4, springs: false, singleton_inputs: false };
    let mut spec = random_quotient(&mut r, shape);
    while spec.cells.len() < 2 {
        spec = random_quotient(&mut r, shape);
    }
    let (g, part) = synthesize_aep_graph(&spec).unwrap();
    let xi = reduction_error_formula(&g, &part).unwrap();
    let oracle = h2_error_oracle(&g, &part).unwrap();
    let (mut formula_changes, mut worst) = (0usize, 0.0_f64);
    for _ in 0..50 {
        let (h, hp) = synthesize_aep_graph(&rescale(&mut r, &spec)).unwrap();
        formula_changes += usize::from(reduction_error_formula(&h, &hp).unwrap().to_bits() != xi.to_bits());
        worst = worst.max((h2_error_oracle(&h, &hp).unwrap() - oracle).abs());
    }
    outcome(
        formula_changes == 0 && worst <= 1e-7,
        format!("50 rescalings: formula changed {formula_changes} times, oracle moved at most {worst:.2e} (limit 1e-7)"),
    )
}

fn singleton_forced() -> Outcome {
    let mut r = rng(1005);
    let (mut nonzero_formula, mut worst) = (0usize, 0.0_f64);
    for _ in 0..100 {
        let (g, part) = random_aep(&mut r, SINGLETON_SHAPE);
        nonzero_formula += usize::from(reduction_error_formula(&g, &part).unwrap() != 0.0);
        worst = worst.max(h2_error_oracle(&g, &part).unwrap().abs());
    }
    outcome(
        nonzero_formula == 0 && worst <= 1e-9,
        format!("100 instances: {nonzero_formula} nonzero formula values, largest oracle error {worst:.2e} (limit 1e-9)"),
    )
}

fn second_order_claim() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1006);
    let mut worst = 0.0_f64;
    let mut joint = 0;
    for _ in 0..50 {
        let (g, part) = random_aep(&mut r, SECOND_ORDER_SHAPE);
        let e = h2_error_second_order(&g, &part).unwrap();
        joint += usize::from(e.damper_aep && e.spring_aep);
        worst = worst.max((e.oracle - e.formula).abs() / (1.0 + e.formula));
    }
    let elapsed = start.elapsed();
    outcome(
        joint == 50 && worst <= 1e-6 && within(elapsed, 300),
        format!("50 joint-AEP instances ({joint} verified), worst relative gap {worst:.2e} (limit 1e-6), {:.1} s", elapsed.as_secs_f64()),
    )
}

fn structural_defect(g: &NetworkGraph, part: &Partition) -> f64 {
    let (v, w) = petrov_galerkin_factors(g, part).unwrap();
    let k = part.num_cells();
    let red = reduce_first_order(g, part).unwrap();
    let m_hat_inv = red.reduced.inverse_mass_matrix();
    let biorth = (w.transpose() * &v - Matrix::identity(k, k)).amax();
    let mass_metric = (v.transpose() * g.inverse_mass_matrix() * &v - &m_hat_inv).amax() / m_hat_inv.amax().max(1.0);
    let mass_sum = (red.reduced.total_mass() - g.total_mass()).abs() / g.total_mass();
    let connected = if g.is_connected(KindFilter::Damper) && !red.reduced.is_connected(KindFilter::Damper) { 1.0 } else { 0.0 };
    let full = assemble_second_order(g);
    let reduced = reduce_second_order(g, part).unwrap();
    let ph = full.structure_defect().max(reduced.structure_defect());
    biorth.max(mass_metric).max(mass_sum).max(connected).max(ph)
}

fn structural_invariants() -> Outcome {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for (seed, shape) in [(1003, AEP_SHAPE), (1005, SINGLETON_SHAPE), (1006, SECOND_ORDER_SHAPE)] {
        let mut r = rng(seed);
        let runs = if seed == 1006 { 50 } else { 100 };
        for _ in 0..runs {
            let (g, part) = random_aep(&mut r, shape);
            worst = worst.max(structural_defect(&g, &part));
            count += 1;
        }
    }
    let mut r = rng(1007);
    for n in (1..=8).cycle().take(100) {
        let g = random_connected(&mut r, n);
        for part in SetPartitions::new(n).step_by(7) {
            worst = worst.max(structural_defect(&g, &part));
            count += 1;
        }
    }
    outcome(worst <= 1e-12, format!("{count} (network, partition) pairs, worst defect {worst:.2e} (limit 1e-12)"))
}

/// Slack on a two-level order estimate; the estimate approaches 2 from below.
const ORDER_MARGIN: f64 = 0.01;

fn convergence_order<S: LinearSystem>(sys: &S) -> f64 {
    let dt = 0.01 / sys.a().norm();
    let x0 = Vector::zeros(sys.state_dim());
    let input = InputSignal::Impulse(0);
    let coarse = dissipation_residuals(&integrate(sys, &input, &x0, 2.0, dt).unwrap(), sys);
    let fine = dissipation_residuals(&integrate(sys, &input, &x0, 2.0, dt / 2.0).unwrap(), sys);
    let worst_coarse = coarse.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
    // Fine-grid points 2k+1 share their times with coarse points k.
    let worst_fine = fine.iter().skip(1).step_by(2).map(|(_, r)| r.abs()).fold(0.0, f64::max);
    (worst_coarse / worst_fine).log2()
}

fn impulse_error(g: &NetworkGraph, part: &Partition) -> (f64, f64) {
    let lambda2 = eigen_decomposition(g, KindFilter::Damper).eigenvalues[1];
    let (t_end, dt) = (50.0 / lambda2, 1e-4);
    let red = reduce_first_order(g, part).unwrap();
    let full = assemble_first_order(g, Coordinates::Momentum);
    let small = red.reduced_model(Coordinates::Momentum);
    let input = InputSignal::Impulse(0);
    let a = integrate(&full, &input, &Vector::zeros(g.n()), t_end, dt).unwrap();
    let b = integrate(&small, &input, &Vector::zeros(part.num_cells()), t_end, dt).unwrap();
    let l2 = compare(&a, &b, &red.channel_map(g, KindFilter::Damper)).unwrap().l2_squared;
    (l2, h2_error_oracle(g, part).unwrap())
}

fn simulation_physics() -> Outcome {
    let mut r = rng(1008);
    let mut min_order = f64::INFINITY;
    for n in 2..=7 {
        min_order = min_order.min(convergence_order(&assemble_first_order(&random_connected(&mut r, n), Coordinates::Momentum)));
        let (g, _) = random_aep(&mut r, SECOND_ORDER_SHAPE);
        min_order = min_order.min(convergence_order(&assemble_second_order(&g)));
    }

    let mut consensus_gap = 0.0_f64;
    for n in 2..=6 {
        let g = random_connected(&mut r, n);
        let model = assemble_first_order(&g, Coordinates::Velocity);
        let lambda2 = eigen_decomposition(&g, KindFilter::Damper).eigenvalues[1];
        let v0 = Vector::from_fn(n, |i, _| (i as f64 * 1.7).sin() * 3.0);
        let traj = integrate(&model, &InputSignal::Zero, &v0, 40.0 / lambda2, 0.02 / model.a.norm()).unwrap();
        let target = Vector::from_column_slice(g.masses()).dot(&v0) / g.total_mass();
        consensus_gap = consensus_gap.max(traj.states.last().unwrap().iter().map(|v| (v - target).abs()).fold(0.0, f64::max));
    }

    let pair = NetworkGraph::new(vec![1.0, 1.0], vec![netclust::Edge::damper(0, 1, 1.0)], vec![0]).unwrap();
    let cases = [(path3(), Partition::new(vec![vec![0, 2], vec![1]], 3).unwrap()), (pair, Partition::single_cell(2))];
    let mut l2_gap = 0.0_f64;
    for (g, part) in &cases {
        let (l2, xi) = impulse_error(g, part);
        l2_gap = l2_gap.max((l2 - xi).abs());
    }
    outcome(
        min_order >= 2.0 - ORDER_MARGIN && consensus_gap <= 1e-8 && l2_gap <= 1e-3,
        format!(
            "dissipation residual order {min_order:.3} (need 2 within {ORDER_MARGIN}), consensus limit gap {consensus_gap:.1e} (limit 1e-8), \
             impulse L2 error vs oracle gap {l2_gap:.1e} (limit 1e-3)"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests");
    let net = dir.join("fixtures/path3.json");
    let part = dir.join("fixtures/path3_aep.json");
    let runs: [(&str, Vec<&Path>); 3] =
        [("reduce", vec![&net, &part]), ("enumerate", vec![&net]), ("h2", vec![&net, &part])];
    let mut mismatches = Vec::new();
    for (cmd, args) in &runs {
        let expected = fs::read(dir.join(format!("golden/{cmd}_path3.json"))).unwrap();
        for _ in 0..3 {
            let out = Command::new(env!("CARGO_BIN_EXE_netclust")).arg(cmd).args(args).env_remove("NETCLUST_TOL").output().unwrap();
            if !out.status.success() || out.stdout != expected {
                mismatches.push(*cmd);
            }
        }
    }
    outcome(mismatches.is_empty(), format!("reduce, enumerate, h2 x3 runs each, byte mismatches: {mismatches:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AEP equivalence", aep_equivalence),
        ("closed-form H2 vs eigen oracle", closed_form_h2),
        ("reduction error formula", theorem_error),
        ("edge-weight independence", weight_independence),
        ("singleton-forced zero error", singleton_forced),
        ("second-order error", second_order_claim),
        ("structural invariants", structural_invariants),
        ("simulation physics", simulation_physics),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {} [{}] {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
