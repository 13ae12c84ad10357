//! JSON system, topology and gain files, and the trace CSV.
//!
//! All indices in files are 0-based.

use std::collections::BTreeSet;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{FusionMode, TopologyDesign};
use crate::numerics::{GainMatrix, GainResult, NumericParams, SimulationTrace};
use crate::pattern::SparsityPattern;

fn json_error(what: &str, e: serde_json::Error) -> Error {
    Error::parse(
        format!("{what} line {} column {}", e.line(), e.column()),
        e.to_string(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericBlock {
    pub seed: u64,
    pub rho_target: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub x0_range: (f64, f64),
}

impl NumericBlock {
    pub fn params(&self) -> NumericParams {
        NumericParams {
            seed: self.seed,
            rho_target: Some(self.rho_target),
            v: self.v,
            r: self.r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub id: String,
    pub c: SparsityPattern,
}

/// A structured system with named agents and optional numeric parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDescription {
    pub n: usize,
    pub a: SparsityPattern,
    pub agents: Vec<AgentSpec>,
    pub numeric: Option<NumericBlock>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    id: String,
    #[serde(rename = "C")]
    c: Vec<(usize, usize)>,
    /// Row count; defaults to one past the largest row index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n: usize,
    #[serde(rename = "A")]
    a: Vec<(usize, usize)>,
    agents: Vec<RawAgent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    numeric: Option<NumericBlock>,
}

fn coords_in_bounds(
    coords: &[(usize, usize)],
    rows: usize,
    cols: usize,
    field: &str,
) -> Result<SparsityPattern> {
    for (k, &(r, c)) in coords.iter().enumerate() {
        if r >= rows || c >= cols {
            return Err(Error::parse(
                format!("{field}[{k}]"),
                format!("[{r}, {c}] outside {rows}x{cols}"),
            ));
        }
    }
    SparsityPattern::new(rows, cols, coords.iter().copied())
}

impl SystemDescription {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawSystem = serde_json::from_str(text).map_err(|e| json_error("system", e))?;
        let n = raw.n;
        let a = coords_in_bounds(&raw.a, n, n, "A")?;
        let mut seen = BTreeSet::new();
        let mut agents = Vec::with_capacity(raw.agents.len());
        for (i, ag) in raw.agents.into_iter().enumerate() {
            if !seen.insert(ag.id.clone()) {
                return Err(Error::parse(
                    format!("agents[{i}].id"),
                    format!("duplicate agent id {:?}", ag.id),
                ));
            }
            let rows = ag
                .p
                .unwrap_or_else(|| ag.c.iter().map(|&(r, _)| r + 1).max().unwrap_or(0));
            let c = coords_in_bounds(&ag.c, rows, n, &format!("agents[{i}].C"))?;
            agents.push(AgentSpec { id: ag.id, c });
        }
        if let Some(num) = &raw.numeric {
            let checks = [
                (num.v >= 0.0, "numeric.V", "must be nonnegative"),
                (num.r >= 0.0, "numeric.R", "must be nonnegative"),
                (num.rho_target > 0.0, "numeric.rho_target", "must be positive"),
                (num.x0_range.0 <= num.x0_range.1, "numeric.x0_range", "lower bound exceeds upper"),
            ];
            if let Some(&(_, field, msg)) = checks.iter().find(|c| !c.0) {
                return Err(Error::parse(field, msg));
            }
        }
        Ok(Self {
            n,
            a,
            agents,
            numeric: raw.numeric,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RawSystem {
            n: self.n,
            a: self.a.iter().collect(),
            agents: self
                .agents
                .iter()
                .map(|ag| RawAgent {
                    id: ag.id.clone(),
                    c: ag.c.iter().collect(),
                    p: Some(ag.c.rows()),
                })
                .collect(),
            numeric: self.numeric.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }

    pub fn cs(&self) -> Vec<SparsityPattern> {
        self.agents.iter().map(|a| a.c.clone()).collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.agents.iter().map(|a| a.id.clone()).collect()
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }
}

/// A topology referring to agents by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub agents: Vec<String>,
    pub flow_edges: Vec<(String, String)>,
    pub mode: FusionMode,
}

impl TopologyFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| json_error("topology", e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_design(topo: &TopologyDesign, ids: &[String]) -> Self {
        Self {
            agents: ids.to_vec(),
            flow_edges: topo
                .flow_edges()
                .iter()
                .map(|&(u, v)| (ids[u].clone(), ids[v].clone()))
                .collect(),
            mode: topo.mode,
        }
    }

    /// Resolves ids against the system's agent list (which fixes the order).
    pub fn to_design(&self, ids: &[String]) -> Result<TopologyDesign> {
        let listed: BTreeSet<&String> = self.agents.iter().collect();
        let expected: BTreeSet<&String> = ids.iter().collect();
        if listed != expected || listed.len() != self.agents.len() {
            return Err(Error::parse(
                "topology.agents",
                format!("agent ids {:?} do not match the system's {:?}", self.agents, ids),
            ));
        }
        let index = |id: &String, k: usize, end: usize| {
            ids.iter().position(|x| x == id).ok_or_else(|| {
                Error::parse(format!("flow_edges[{k}][{end}]"), format!("unknown agent {id:?}"))
            })
        };
        let mut edges = Vec::with_capacity(self.flow_edges.len());
        for (k, (u, v)) in self.flow_edges.iter().enumerate() {
            let (ui, vi) = (index(u, k, 0)?, index(v, k, 1)?);
            if ui == vi {
                return Err(Error::parse(
                    format!("flow_edges[{k}]"),
                    format!("self edge on {u:?}; the diagonal is implied"),
                ));
            }
            edges.push((ui, vi));
        }
        TopologyDesign::new(ids.len(), edges, self.mode)
    }
}

/// Per-agent gain blocks with the synthesis outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GainFile {
    pub agents: Vec<String>,
    pub n: usize,
    pub gain: GainMatrix,
    pub rho: f64,
    pub method: String,
    pub iterations: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGain {
    agents: Vec<String>,
    n: usize,
    blocks: Vec<Vec<Vec<f64>>>,
    rho: f64,
    method: String,
    iterations: usize,
}

impl GainFile {
    pub fn new(ids: &[String], n: usize, result: &GainResult) -> Self {
        Self {
            agents: ids.to_vec(),
            n,
            gain: result.gain.clone(),
            rho: result.rho,
            method: result.method.clone(),
            iterations: result.iterations,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawGain = serde_json::from_str(text).map_err(|e| json_error("gain", e))?;
        let n = raw.n;
        if raw.blocks.len() != raw.agents.len() {
            return Err(Error::parse(
                "blocks",
                format!("{} blocks for {} agents", raw.blocks.len(), raw.agents.len()),
            ));
        }
        let mut blocks = Vec::with_capacity(raw.blocks.len());
        for (i, rows) in raw.blocks.iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::parse(format!("blocks[{i}]"), format!("expected {n}x{n}")));
            }
            blocks.push(DMatrix::from_fn(n, n, |r, c| rows[r][c]));
        }
        Ok(Self {
            agents: raw.agents,
            n,
            gain: GainMatrix { blocks },
            rho: raw.rho,
            method: raw.method,
            iterations: raw.iterations,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RawGain {
            agents: self.agents.clone(),
            n: self.n,
            blocks: self
                .gain
                .blocks
                .iter()
                .map(|b| b.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
            rho: self.rho,
            method: self.method.clone(),
            iterations: self.iterations,
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }

    /// The gain in the system's agent order.
    pub fn gain_for(&self, ids: &[String], n: usize) -> Result<GainMatrix> {
        if self.n != n {
            return Err(Error::parse("n", format!("gain is for n = {}, system has {n}", self.n)));
        }
        let blocks = ids
            .iter()
            .map(|id| {
                self.agents
                    .iter()
                    .position(|a| a == id)
                    .map(|k| self.gain.blocks[k].clone())
                    .ok_or_else(|| Error::parse("agents", format!("no gain block for agent {id:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if self.agents.len() != ids.len() {
            return Err(Error::parse("agents", "gain file lists agents unknown to the system"));
        }
        Ok(GainMatrix { blocks })
    }
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros dropped.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const TRACE_HEADER: &str = "step,agent_id,sq_error_sum";

/// Writes one row per (step, agent).
pub fn write_trace_csv(trace: &SimulationTrace, ids: &[String], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for (step, row) in trace.sq_errors.iter().enumerate() {
        for (id, &e) in ids.iter().zip(row) {
            writeln!(out, "{step},{id},{}", format_sig9(e))?;
        }
    }
    Ok(())
}
