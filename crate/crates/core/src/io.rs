//! File formats.
//!
//! - graph: CSV `i,j,L`
//! - data: CSV `i,j,wins,L` (`wins` may be fractional for exact data)
//! - scores: JSON array of numbers
//! - partition: JSON array of arrays of node indices
//! - resistances: CSV `k,l,omega`
//! - bounds: CSV `k,l,omega,B,Q,V`
//! - traces: CSV `iteration,loss,grad_norm,linf_to_reference`

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ConvergenceTrace;
use crate::graph::{ComparisonGraph, Partition, PartitionMode};
use crate::laplacian::ResistanceMatrix;
use crate::metrics::BoundQuantities;
use crate::model::{ComparisonData, EdgeObservation, ScoreVector, Wins};

#[derive(Debug, Serialize, Deserialize)]
struct GraphRow {
    i: usize,
    j: usize,
    #[serde(rename = "L")]
    l: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DataRow {
    i: usize,
    j: usize,
    wins: f64,
    #[serde(rename = "L")]
    l: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResistanceRow {
    k: usize,
    l: usize,
    omega: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BoundRow {
    k: usize,
    l: usize,
    omega: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "Q")]
    q: f64,
    #[serde(rename = "V")]
    v: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    iteration: usize,
    loss: f64,
    grad_norm: f64,
    linf_to_reference: Option<f64>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

pub fn write_graph<W: Write>(graph: &ComparisonGraph, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for e in graph.edges() {
        out.serialize(GraphRow { i: e.i, j: e.j, l: e.count })?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a graph; `n` defaults to one more than the largest index.
pub fn read_graph<R: Read>(r: R, n: Option<usize>) -> Result<ComparisonGraph> {
    let rows: Vec<GraphRow> = csv::Reader::from_reader(r).deserialize().collect::<std::result::Result<_, _>>()?;
    let n = n.unwrap_or_else(|| rows.iter().map(|e| e.i.max(e.j) + 1).max().unwrap_or(0));
    ComparisonGraph::new(n, rows.into_iter().map(|e| (e.i, e.j, e.l)))
}

pub fn save_graph(graph: &ComparisonGraph, path: &Path) -> Result<()> {
    write_graph(graph, create(path)?)
}

pub fn load_graph(path: &Path) -> Result<ComparisonGraph> {
    read_graph(open(path)?, None)
}

pub fn write_data<W: Write>(data: &ComparisonData, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in data.records() {
        out.serialize(DataRow {
            i: r.i,
            j: r.j,
            wins: r.wins_f64(),
            l: r.count,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Reads data for `graph`. Integer win counts are read as observed counts,
/// anything else as an exact fraction `wins / L`.
pub fn read_data<R: Read>(r: R, graph: &ComparisonGraph) -> Result<ComparisonData> {
    let rows: Vec<DataRow> = csv::Reader::from_reader(r).deserialize().collect::<std::result::Result<_, _>>()?;
    let records = rows
        .into_iter()
        .map(|row| {
            if !(row.wins >= 0.0 && row.wins <= row.l as f64) {
                return Err(Error::InvalidInput(format!(
                    "wins {} outside [0, {}] on ({}, {})",
                    row.wins, row.l, row.i, row.j
                )));
            }
            let wins = if row.wins.fract() == 0.0 {
                Wins::Observed(row.wins as u64)
            } else {
                Wins::Expected(row.wins / row.l as f64)
            };
            Ok(EdgeObservation {
                i: row.i,
                j: row.j,
                count: row.l,
                wins,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ComparisonData::for_graph(graph, records)
}

pub fn save_data(data: &ComparisonData, path: &Path) -> Result<()> {
    write_data(data, create(path)?)
}

pub fn load_data(path: &Path, graph: &ComparisonGraph) -> Result<ComparisonData> {
    read_data(open(path)?, graph)
}

pub fn save_scores(scores: &ScoreVector, path: &Path) -> Result<()> {
    if !scores.is_finite() {
        return Err(Error::InvalidInput("scores contain non-finite values".into()));
    }
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, scores.values())?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Loads scores and shifts them to the zero-sum gauge.
pub fn load_scores(path: &Path) -> Result<ScoreVector> {
    let v: Vec<f64> = serde_json::from_reader(open(path)?)?;
    Ok(ScoreVector::zero_sum(v))
}

pub fn save_partition(partition: &Partition, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, partition.subsets())?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn load_partition(path: &Path, n: usize, mode: PartitionMode) -> Result<Partition> {
    let subsets: Vec<Vec<usize>> = serde_json::from_reader(open(path)?)?;
    Partition::new(n, subsets, mode)
}

pub fn write_resistances<W: Write>(omega: &ResistanceMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for &(k, l, omega) in omega.entries() {
        out.serialize(ResistanceRow { k, l, omega })?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_resistances(omega: &ResistanceMatrix, path: &Path) -> Result<()> {
    write_resistances(omega, create(path)?)
}

/// `(k, l, Ω_kl)` rows.
pub fn load_resistances(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let rows: Vec<ResistanceRow> = csv::Reader::from_reader(open(path)?)
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    Ok(rows.into_iter().map(|r| (r.k, r.l, r.omega)).collect())
}

pub fn write_bounds<W: Write>(bounds: &BoundQuantities, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for e in &bounds.entries {
        out.serialize(BoundRow {
            k: e.k,
            l: e.l,
            omega: e.omega,
            b: e.b,
            q: e.q,
            v: e.v,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_bounds(bounds: &BoundQuantities, path: &Path) -> Result<()> {
    write_bounds(bounds, create(path)?)
}

pub fn write_trace<W: Write>(trace: &ConvergenceTrace, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in &trace.records {
        out.serialize(TraceRow {
            iteration: r.iteration,
            loss: r.loss,
            grad_norm: r.grad_norm,
            linf_to_reference: r.linf_to_reference,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_trace(trace: &ConvergenceTrace, path: &Path) -> Result<()> {
    write_trace(trace, create(path)?)
}
