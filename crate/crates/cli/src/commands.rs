use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use netclust::h2::{build_report, reduction_error_formula, H2Report, Order, ReportOptions};
use netclust::partition::{check_aep_definition, check_aep_subspace, enumerate_aeps, synthesize_aep_graph, AepCriterion, AepWitness};
use netclust::second_order::reduce_second_order_with_map;
use netclust::simulate::{compare, dissipation_residual, momentum_drift, Comparison};
use netclust::{
    assemble_first_order, assemble_second_order, integrate, reduce_first_order, Coordinates, InputSignal, KindFilter, LinearSystem,
    NetworkGraph, Partition, Trajectory, Vector,
};
use serde::Serialize;

use crate::files::{one_based_cells, read_json, read_network, read_partition, to_json, write_json, NetworkFile, PartitionFile, QuotientFile};

#[derive(Serialize)]
struct PairOut {
    from_cell: usize,
    to_cell: usize,
    sums: Vec<f64>,
    w_pq: f64,
    spread: f64,
}

#[derive(Serialize)]
struct WitnessOut {
    verdict: bool,
    criterion: AepCriterion,
    tol: f64,
    subspace_residual: f64,
    pairs: Vec<PairOut>,
}

impl From<AepWitness> for WitnessOut {
    fn from(w: AepWitness) -> Self {
        WitnessOut {
            verdict: w.verdict,
            criterion: w.criterion,
            tol: w.tol,
            subspace_residual: w.subspace_residual,
            pairs: w
                .pairs
                .into_iter()
                .map(|p| PairOut { from_cell: p.p + 1, to_cell: p.q + 1, sums: p.sums, w_pq: p.w_pq, spread: p.spread })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct CheckOut {
    aep: bool,
    kind: KindFilter,
    cells: Vec<Vec<usize>>,
    definition: WitnessOut,
    subspace: WitnessOut,
}

/// Exit code 0 when almost equitable, 1 otherwise.
pub fn check_aep(network: &Path, partition: &Path, kind: KindFilter, tol: f64) -> Result<u8> {
    let g = read_network(network)?;
    let part = read_partition(partition, g.n())?;
    let def = check_aep_definition(&g, &part, kind, tol)?;
    let sub = check_aep_subspace(&g, &part, kind, tol)?;
    if def.verdict != sub.verdict {
        log::warn!("definition and subspace checks disagree; reporting the definition verdict");
    }
    let aep = def.verdict;
    let out = CheckOut { aep, kind, cells: one_based_cells(&part), definition: def.into(), subspace: sub.into() };
    print!("{}", to_json(&out)?);
    Ok(if aep { 0 } else { 1 })
}

#[derive(Serialize)]
struct EdgeMapOut {
    edge: usize,
    reduced_edge: Option<usize>,
}

#[derive(Serialize)]
struct MappingOut {
    order: u8,
    vertex_to_cell: Vec<usize>,
    edges: Vec<EdgeMapOut>,
}

#[derive(Serialize)]
struct ReduceOut {
    network: NetworkFile,
    mapping: MappingOut,
}

/// First order keeps only damper edges of the reduced network; second order
/// keeps springs and dampers.
pub fn reduce(network: &Path, partition: &Path, order: u8, out: Option<&Path>, mapping: Option<&Path>) -> Result<u8> {
    let g = read_network(network)?;
    let part = read_partition(partition, g.n())?;
    let red = reduce_first_order(&g, &part)?;
    let (reduced, edge_map) = if order == 1 {
        let keep = red.reduced.edge_indices(KindFilter::Damper);
        let mut renumber = vec![None; red.reduced.edges().len()];
        for (new, &old) in keep.iter().enumerate() {
            renumber[old] = Some(new);
        }
        let edges = keep.iter().map(|&k| red.reduced.edges()[k]).collect();
        (red.reduced.with_edges(edges)?, red.edge_map.iter().map(|e| e.and_then(|k| renumber[k])).collect::<Vec<_>>())
    } else {
        (red.reduced.clone(), red.edge_map.clone())
    };
    let mapping_out = MappingOut {
        order,
        vertex_to_cell: part.labels().iter().map(|c| c + 1).collect(),
        edges: edge_map.iter().enumerate().map(|(i, e)| EdgeMapOut { edge: i + 1, reduced_edge: e.map(|k| k + 1) }).collect(),
    };
    let file = NetworkFile::from_graph(&reduced);
    match out {
        Some(path) => {
            write_json(path, &file)?;
            let map_path = mapping.map(Path::to_path_buf).unwrap_or_else(|| path.with_extension("mapping.json"));
            write_json(&map_path, &mapping_out)?;
        }
        None => {
            if let Some(path) = mapping {
                write_json(path, &mapping_out)?;
            }
            print!("{}", to_json(&ReduceOut { network: file, mapping: mapping_out })?);
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct ForcedOut {
    channel: usize,
    vertex: usize,
    mass: f64,
    cell_mass: f64,
}

#[derive(Serialize)]
struct ReportOut {
    order: Order,
    #[serde(skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<Vec<usize>>>,
    h2_full_closed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    h2_full_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h2_reduced_closed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h2_reduced_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi_formula: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pythagoras_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aep: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi_is_exact: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    forced: Vec<ForcedOut>,
}

impl ReportOut {
    fn new(r: H2Report, part: Option<&Partition>) -> Self {
        ReportOut {
            order: r.order,
            cells: part.map(one_based_cells),
            h2_full_closed: r.h2_full_closed,
            h2_full_oracle: r.h2_full_oracle,
            h2_reduced_closed: r.h2_reduced_closed,
            h2_reduced_oracle: r.h2_reduced_oracle,
            xi_formula: r.xi_formula,
            xi_oracle: r.xi_oracle,
            pythagoras_residual: r.pythagoras_residual,
            aep: r.aep,
            xi_is_exact: r.xi_is_exact,
            forced: r
                .forced
                .into_iter()
                .map(|f| ForcedOut { channel: f.channel + 1, vertex: f.vertex + 1, mass: f.mass, cell_mass: f.cell_mass })
                .collect(),
        }
    }
}

pub fn h2(network: &Path, partition: Option<&Path>, order: u8, oracle: bool, tol: f64) -> Result<u8> {
    let g = read_network(network)?;
    let part = partition.map(|p| read_partition(p, g.n())).transpose()?;
    let order = if order == 1 { Order::First } else { Order::Second };
    let report = build_report(&g, part.as_ref(), &ReportOptions { order, oracle, tol })?;
    print!("{}", to_json(&ReportOut::new(report, part.as_ref()))?);
    Ok(0)
}

#[derive(Serialize)]
struct RankedOut {
    cells: Vec<Vec<usize>>,
    xi: f64,
}

#[derive(Serialize)]
struct EnumerateOut {
    kind: KindFilter,
    n: usize,
    count: usize,
    partitions: Vec<RankedOut>,
}

/// All almost equitable partitions, by ascending error formula value; ties
/// keep the canonical enumeration order.
pub fn enumerate(network: &Path, kind: KindFilter, max_n: usize, tol: f64) -> Result<u8> {
    let g = read_network(network)?;
    let parts = enumerate_aeps(&g, kind, tol, max_n)?;
    let mut ranked = parts
        .iter()
        .map(|p| Ok(RankedOut { cells: one_based_cells(p), xi: reduction_error_formula(&g, p)? }))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    print!("{}", to_json(&EnumerateOut { kind, n: g.n(), count: ranked.len(), partitions: ranked })?);
    Ok(0)
}

/// `zero`, `impulse:K`, `step:K` (K a 1-based input channel) or
/// `samples:FILE` with a CSV of rows `t,u_1,…,u_m` after a header line.
pub fn parse_input(spec: &str) -> Result<InputSignal> {
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let channel = || -> Result<usize> {
        let k: usize = arg.parse().with_context(|| format!("`{spec}`: expected a channel number after `{head}:`"))?;
        if k == 0 {
            bail!("`{spec}`: input channels are numbered from 1");
        }
        Ok(k - 1)
    };
    Ok(match head {
        "zero" if arg.is_empty() => InputSignal::Zero,
        "impulse" => InputSignal::Impulse(channel()?),
        "step" => InputSignal::Step(channel()?),
        "samples" => read_samples(Path::new(arg))?,
        _ => bail!("unknown input signal `{spec}`; use zero, impulse:K, step:K or samples:FILE"),
    })
}

fn read_samples(path: &Path) -> Result<InputSignal> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for row in reader.deserialize::<Vec<f64>>() {
        let row = row.with_context(|| format!("malformed sample row in {}", path.display()))?;
        let Some((&t, u)) = row.split_first() else { bail!("empty sample row in {}", path.display()) };
        times.push(t);
        values.push(u.to_vec());
    }
    Ok(InputSignal::Samples { times, values })
}

#[derive(Serialize)]
struct RunSummary {
    states: usize,
    outputs: usize,
    final_energy: f64,
    dissipation_residual: f64,
    momentum_drift: f64,
}

#[derive(Serialize)]
struct SimulateOut {
    order: u8,
    input: String,
    t_end: f64,
    dt: f64,
    steps: usize,
    full: RunSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduced: Option<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l2_squared_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi_formula: Option<f64>,
}

fn run<S: LinearSystem>(sys: &S, input: &InputSignal, t_end: f64, dt: f64) -> Result<(Trajectory, RunSummary)> {
    let traj = integrate(sys, input, &Vector::zeros(sys.state_dim()), t_end, dt)?;
    let summary = RunSummary {
        states: sys.state_dim(),
        outputs: sys.c().nrows(),
        final_energy: traj.energy.last().copied().unwrap_or(0.0),
        dissipation_residual: dissipation_residual(&traj, sys),
        momentum_drift: momentum_drift(&traj, sys),
    };
    Ok((traj, summary))
}

fn write_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    traj.write_csv(BufWriter::new(file))?;
    Ok(())
}

pub struct SimulateArgs<'a> {
    pub network: &'a Path,
    pub partition: Option<&'a Path>,
    pub order: u8,
    pub input: &'a str,
    pub t_end: f64,
    pub dt: f64,
    pub out_csv: Option<&'a Path>,
    pub reduced_csv: Option<&'a Path>,
}

/// Simulates from rest; impulses are applied as an initial state jump.
pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    let g = read_network(args.network)?;
    let part = args.partition.map(|p| read_partition(p, g.n())).transpose()?;
    let input = parse_input(args.input)?;
    let (full_traj, full) = simulate_full(&g, args.order, &input, args.t_end, args.dt)?;
    let mut out = SimulateOut {
        order: args.order,
        input: input.describe(),
        t_end: args.t_end,
        dt: full_traj.dt(),
        steps: full_traj.len().saturating_sub(1),
        full,
        reduced: None,
        l2_squared_error: None,
        max_abs_error: None,
        xi_formula: None,
    };
    if let Some(path) = args.out_csv {
        write_csv(path, &full_traj)?;
    }
    if let Some(part) = &part {
        let (red_traj, summary, cmp) = simulate_reduced(&g, part, args.order, &input, args.t_end, args.dt, &full_traj)?;
        out.reduced = Some(summary);
        out.l2_squared_error = Some(cmp.l2_squared);
        out.max_abs_error = Some(cmp.max_abs);
        out.xi_formula = Some(reduction_error_formula(&g, part)?);
        let reduced_path = args.reduced_csv.map(Path::to_path_buf).or_else(|| args.out_csv.map(|p| p.with_extension("reduced.csv")));
        if let Some(path) = reduced_path {
            write_csv(&path, &red_traj)?;
        }
    }
    print!("{}", to_json(&out)?);
    Ok(0)
}

fn simulate_full(g: &NetworkGraph, order: u8, input: &InputSignal, t_end: f64, dt: f64) -> Result<(Trajectory, RunSummary)> {
    if order == 1 {
        run(&assemble_first_order(g, Coordinates::Momentum), input, t_end, dt)
    } else {
        run(&assemble_second_order(g), input, t_end, dt)
    }
}

fn simulate_reduced(
    g: &NetworkGraph,
    part: &Partition,
    order: u8,
    input: &InputSignal,
    t_end: f64,
    dt: f64,
    full: &Trajectory,
) -> Result<(Trajectory, RunSummary, Comparison)> {
    let (traj, summary, channels) = if order == 1 {
        let red = reduce_first_order(g, part)?;
        let (t, s) = run(&red.reduced_model(Coordinates::Momentum), input, t_end, dt)?;
        (t, s, red.channel_map(g, KindFilter::Damper))
    } else {
        let (model, red) = reduce_second_order_with_map(g, part)?;
        let (t, s) = run(&model, input, t_end, dt)?;
        (t, s, red.channel_map(g, KindFilter::Damper))
    };
    let cmp = compare(full, &traj, &channels)?;
    Ok((traj, summary, cmp))
}

#[derive(Serialize)]
struct SynthOut {
    network: NetworkFile,
    partition: PartitionFile,
}

pub fn synth(spec: &Path, out: Option<&Path>, partition_out: Option<&Path>) -> Result<u8> {
    let spec = read_json::<QuotientFile>(spec)?.to_spec()?;
    let (g, part) = synthesize_aep_graph(&spec)?;
    let network = NetworkFile::from_graph(&g);
    let partition = PartitionFile::from_partition(&part);
    match out {
        Some(path) => {
            write_json(path, &network)?;
            let part_path: PathBuf = partition_out.map(Path::to_path_buf).unwrap_or_else(|| path.with_extension("partition.json"));
            write_json(&part_path, &partition)?;
        }
        None => {
            if let Some(path) = partition_out {
                write_json(path, &partition)?;
            }
            print!("{}", to_json(&SynthOut { network, partition })?);
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_specs() {
        assert_eq!(parse_input("zero").unwrap(), InputSignal::Zero);
        assert_eq!(parse_input("impulse:2").unwrap(), InputSignal::Impulse(1));
        assert_eq!(parse_input("step:1").unwrap(), InputSignal::Step(0));
        assert!(parse_input("impulse:0").is_err());
        assert!(parse_input("ramp:1").is_err());
        assert!(parse_input("zero:1").is_err());
    }
}
