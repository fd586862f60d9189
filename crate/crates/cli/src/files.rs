//! On-disk JSON formats. Vertex ids, cell members and input entries are
//! 1-based in files and 0-based in memory.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use netclust::partition::{CellLink, CellSpec, IntraEdge, QuotientSpec};
use netclust::{Edge, EdgeKind, NetworkGraph, Partition};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default)]
    pub inputs: Vec<usize>,
}

fn to_index(id: usize, n: usize, what: &str) -> Result<usize> {
    if id == 0 || id > n {
        bail!("{what} {id} is not a vertex id (expected 1..={n})");
    }
    Ok(id - 1)
}

impl NetworkFile {
    pub fn to_graph(&self) -> Result<NetworkGraph> {
        let n = self.vertices.len();
        let mut masses = vec![None; n];
        for v in &self.vertices {
            let i = to_index(v.id, n, "vertex id")?;
            if masses[i].replace(v.mass).is_some() {
                bail!("vertex id {} appears twice", v.id);
            }
        }
        let masses: Vec<f64> = masses.into_iter().map(|m| m.expect("ids are a permutation of 1..=n")).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Ok(Edge::new(to_index(e.tail, n, "edge tail")?, to_index(e.head, n, "edge head")?, e.weight, e.kind)))
            .collect::<Result<Vec<_>>>()?;
        let inputs = self.inputs.iter().map(|&i| to_index(i, n, "input")).collect::<Result<Vec<_>>>()?;
        Ok(NetworkGraph::new(masses, edges, inputs)?)
    }

    pub fn from_graph(g: &NetworkGraph) -> Self {
        NetworkFile {
            vertices: g.masses().iter().enumerate().map(|(i, &mass)| VertexEntry { id: i + 1, mass }).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeEntry { tail: e.tail + 1, head: e.head + 1, weight: e.weight, kind: e.kind })
                .collect(),
            inputs: g.forced().iter().map(|i| i + 1).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub cells: Vec<Vec<usize>>,
}

impl PartitionFile {
    pub fn to_partition(&self, n: usize) -> Result<Partition> {
        let cells = self
            .cells
            .iter()
            .map(|c| c.iter().map(|&v| to_index(v, n, "cell member")).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Partition::new(cells, n)?)
    }

    pub fn from_partition(p: &Partition) -> Self {
        PartitionFile { cells: one_based_cells(p) }
    }
}

pub fn one_based_cells(p: &Partition) -> Vec<Vec<usize>> {
    p.cells().iter().map(|c| c.iter().map(|v| v + 1).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntraEntry {
    pub cell: usize,
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

/// Input of `synth`. Cells, members and inputs are 1-based; `masses` lists
/// one (equal) mass per member of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientFile {
    pub cells: Vec<Vec<f64>>,
    #[serde(default)]
    pub links: Vec<LinkEntry>,
    #[serde(default)]
    pub intra: Vec<IntraEntry>,
    #[serde(default)]
    pub inputs: Vec<usize>,
}

impl QuotientFile {
    pub fn to_spec(&self) -> Result<QuotientSpec> {
        let k = self.cells.len();
        let cell = |c: usize| to_index(c, k, "cell");
        let n: usize = self.cells.iter().map(Vec::len).sum();
        Ok(QuotientSpec {
            cells: self.cells.iter().map(|m| CellSpec { masses: m.clone() }).collect(),
            links: self
                .links
                .iter()
                .map(|l| Ok(CellLink { a: cell(l.a)?, b: cell(l.b)?, weight: l.weight, kind: l.kind }))
                .collect::<Result<_>>()?,
            intra: self
                .intra
                .iter()
                .map(|e| {
                    let c = cell(e.cell)?;
                    let size = self.cells[c].len();
                    Ok(IntraEdge {
                        cell: c,
                        i: to_index(e.i, size, "cell member")?,
                        j: to_index(e.j, size, "cell member")?,
                        weight: e.weight,
                        kind: e.kind,
                    })
                })
                .collect::<Result<_>>()?,
            inputs: self.inputs.iter().map(|&i| to_index(i, n, "input")).collect::<Result<_>>()?,
        })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn read_network(path: &Path) -> Result<NetworkGraph> {
    read_json::<NetworkFile>(path)?.to_graph().with_context(|| format!("invalid network in {}", path.display()))
}

pub fn read_partition(path: &Path, n: usize) -> Result<Partition> {
    read_json::<PartitionFile>(path)?.to_partition(n).with_context(|| format!("invalid partition in {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?).with_context(|| format!("cannot write {}", path.display()))
}
