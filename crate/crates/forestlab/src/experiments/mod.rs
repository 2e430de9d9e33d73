//! The experiment runners behind the CLI subcommands. Each takes a parsed
//! config (plus a seed where sampling is involved), verifies its own claims,
//! and returns a convergence table, human-readable check lines, and any extra
//! artifacts to write next to the table.

use anyhow::{bail, Result};
use forestlab_core::graph::quotient::build_quotient;
use forestlab_core::{EdgeId, Graph, GroupAction, LatticeSpec, QuotientGraph, VertexId};

use crate::config::ExperimentConfig;
use crate::table::ConvergenceTable;

pub mod couple;
pub mod decompose;
pub mod exhaust;
pub mod marginals;
pub mod sample;
pub mod sot;
pub mod topology;
pub mod tower;

/// Exact-identity tolerance used across experiments.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Artifact {
    /// Suffix appended to the output stem, e.g. "coupling.csv".
    pub name: String,
    pub content: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: ConvergenceTable,
    pub notes: Vec<String>,
    pub passed: bool,
    pub artifacts: Vec<Artifact>,
}

/// Accumulates named pass/fail checks and free-form notes.
pub struct Checks {
    notes: Vec<String>,
    passed: bool,
}

impl Checks {
    pub fn new() -> Self {
        Checks {
            notes: Vec::new(),
            passed: true,
        }
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl std::fmt::Display) {
        self.notes.push(format!(
            "check {name}: {} ({detail})",
            if ok { "ok" } else { "FAIL" }
        ));
        self.passed &= ok;
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn finish(self, table: ConvergenceTable, artifacts: Vec<Artifact>) -> Result<Outcome> {
        table.audit()?;
        Ok(Outcome {
            table,
            notes: self.notes,
            passed: self.passed,
            artifacts,
        })
    }
}

impl Default for Checks {
    fn default() -> Self {
        Self::new()
    }
}

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    match cfg.experiment.as_str() {
        "decompose" => decompose::run(cfg),
        "marginals" => marginals::run(cfg),
        "sample" => sample::run(cfg, seed),
        "couple" => couple::run(cfg),
        "tower" => tower::run(cfg),
        "exhaust" => exhaust::run(cfg),
        "topology" => topology::run(cfg, seed),
        "sot" => sot::run(cfg),
        other => bail!("unknown experiment {other:?}"),
    }
}

/// Build the quotient named by the config; a missing [action] section means
/// the trivial action on a finite graph.
pub(crate) fn quotient_from_config(cfg: &ExperimentConfig) -> Result<QuotientGraph> {
    let lattice = cfg.lattice()?;
    let action = cfg.action()?.unwrap_or(GroupAction::Trivial);
    Ok(build_quotient(lattice, action)?)
}

/// The translation action producing a tower level on an infinite base.
pub(crate) fn translation_action(base: LatticeSpec, period: u32) -> Result<GroupAction> {
    match base {
        LatticeSpec::Line => Ok(GroupAction::LineTranslation { period }),
        LatticeSpec::Grid => Ok(GroupAction::GridTranslation { period }),
        other => bail!("{other:?} has no translation tower"),
    }
}

/// True if the edge subset touches every vertex and is connected.
pub(crate) fn connected_spanning(g: &Graph, edges: &[EdgeId]) -> bool {
    if g.vertex_count() == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for &e in edges {
        let (t, h) = g.endpoints(e);
        adj[t.idx()].push(h);
        adj[h.idx()].push(t);
    }
    let mut seen = vec![false; g.vertex_count()];
    seen[0] = true;
    let mut stack = vec![VertexId(0)];
    while let Some(v) = stack.pop() {
        for &w in &adj[v.idx()] {
            if !seen[w.idx()] {
                seen[w.idx()] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Edge ids set in a subset mask.
pub(crate) fn mask_edges(mask: u32, ground: usize) -> Vec<EdgeId> {
    (0..ground as u32)
        .map(EdgeId)
        .filter(|e| mask >> e.idx() & 1 == 1)
        .collect()
}
