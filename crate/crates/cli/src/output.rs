//! The `_sol`, `_log` and `_oracle` artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::ser::Formatter;

use moxp_core::{ObjectiveSense, OracleStats, Problem, Solution};

/// Writes every float with 17 significant digits so that it parses back to
/// the same bits.
struct SigFigs;

impl Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

#[derive(Serialize)]
pub struct SolFile {
    pub solver: SolverInfo,
    pub problem: String,
    pub input: String,
    pub exact: bool,
    pub epsilon: f64,
    pub normalized: bool,
    pub termination: String,
    pub objectives: Vec<ObjectiveInfo>,
    pub ideal_point: Vec<f64>,
    pub points: Vec<SolPoint>,
    pub stats: SolStats,
}

#[derive(Serialize)]
pub struct SolverInfo {
    pub name: &'static str,
    pub version: &'static str,
    pub oracle: String,
}

#[derive(Serialize)]
pub struct ObjectiveInfo {
    pub name: String,
    pub sense: &'static str,
}

#[derive(Serialize)]
pub struct SolPoint {
    pub y: Vec<f64>,
    pub weight: Vec<f64>,
    pub x: BTreeMap<String, f64>,
}

#[derive(Serialize)]
pub struct SolStats {
    pub iterations: usize,
    pub oracle_calls: usize,
    pub cuts: usize,
    pub dual_vertices: usize,
    pub dual_facets: usize,
    pub degeneracy_events: usize,
}

impl SolFile {
    pub fn new(p: &Problem, input: &Path, oracle: &str, epsilon: f64, normalized: bool, sol: &Solution) -> Self {
        Self {
            solver: SolverInfo {
                name: "moxp",
                version: env!("CARGO_PKG_VERSION"),
                oracle: oracle.to_string(),
            },
            problem: p.name.clone(),
            input: input.display().to_string(),
            exact: sol.exact(),
            epsilon,
            normalized,
            termination: sol.termination.as_str().to_string(),
            objectives: objective_info(p),
            ideal_point: sol.ideal.clone(),
            points: sol
                .points
                .iter()
                .map(|r| SolPoint {
                    y: r.y.clone(),
                    weight: r.weight.clone(),
                    x: p.variables.iter().map(|v| v.name.clone()).zip(r.x.iter().copied()).collect(),
                })
                .collect(),
            stats: SolStats {
                iterations: sol.set.stats.iterations,
                oracle_calls: sol.oracle_calls,
                cuts: sol.set.stats.cuts,
                dual_vertices: sol.set.dual_vertices.len(),
                dual_facets: sol.set.dual_facets.len(),
                degeneracy_events: sol.set.stats.degeneracy_events,
            },
        }
    }

    /// An empty, inexact result for runs stopped before any approximation existed.
    pub fn aborted(p: &Problem, input: &Path, oracle: &str, epsilon: f64, normalized: bool, why: &str) -> Self {
        Self {
            solver: SolverInfo {
                name: "moxp",
                version: env!("CARGO_PKG_VERSION"),
                oracle: oracle.to_string(),
            },
            problem: p.name.clone(),
            input: input.display().to_string(),
            exact: false,
            epsilon,
            normalized,
            termination: why.to_string(),
            objectives: objective_info(p),
            ideal_point: Vec::new(),
            points: Vec::new(),
            stats: SolStats {
                iterations: 0,
                oracle_calls: 0,
                cuts: 0,
                dual_vertices: 0,
                dual_facets: 0,
                degeneracy_events: 0,
            },
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
        self.serialize(&mut ser).map_err(io::Error::other)?;
        buf.push(b'\n');
        fs::write(path, buf)
    }
}

fn objective_info(p: &Problem) -> Vec<ObjectiveInfo> {
    p.objectives
        .iter()
        .map(|o| ObjectiveInfo {
            name: o.name.clone(),
            sense: match o.sense {
                ObjectiveSense::Minimize => "min",
                ObjectiveSense::Maximize => "max",
            },
        })
        .collect()
}

pub fn artifact(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}_{suffix}"))
}

/// Timestamped log lines, optionally echoed to stderr.
pub struct RunLog {
    lines: Vec<String>,
    verbose: bool,
}

impl RunLog {
    pub fn new(verbose: bool) -> Self {
        Self {
            lines: Vec::new(),
            verbose,
        }
    }

    pub fn line(&mut self, phase: &str, msg: impl AsRef<str>) {
        let ts = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
        let line = format!("{ts} [{phase}] {}", msg.as_ref());
        if self.verbose {
            eprintln!("{line}");
        }
        self.lines.push(line);
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        fs::write(path, text)
    }
}

pub fn write_oracle_stats(path: &Path, name: &str, stats: &OracleStats) -> io::Result<()> {
    let text = format!(
        "oracle {name}\ncalls {}\nlp_solves {}\npivots {}\nnodes {}\n",
        stats.calls, stats.lp_solves, stats.pivots, stats.nodes
    );
    fs::write(path, text)
}
