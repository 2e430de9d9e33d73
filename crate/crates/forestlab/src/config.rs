//! Experiment configuration: a small TOML schema shared by every subcommand.
//!
//! ```toml
//! experiment = "tower"
//!
//! [graph]
//! family = "grid"
//!
//! [action]
//! kind = "grid-translation"
//!
//! [params]
//! levels = [2, 3, 4]
//! window = [{ x = 0, y = 0, axis = "x" }]
//! mode = "tilde"
//! ```

use anyhow::{bail, Context, Result};
use forestlab_core::{Axis, BaseEdgeRef, EdgeId, GroupAction, LatticeSpec, LiftMode};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub graph: Option<GraphSpec>,
    pub action: Option<ActionSpec>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub family: String,
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub radius: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub kind: String,
    pub period: Option<u32>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Quotient periods for tower-style experiments.
    #[serde(default)]
    pub levels: Vec<u32>,
    /// Box radii for exhaustion experiments.
    #[serde(default)]
    pub radii: Vec<u32>,
    /// "wired", "free", or "both" (the default).
    pub boundary: Option<String>,
    pub samples: Option<u64>,
    #[serde(default)]
    pub window: Vec<WindowEdge>,
    /// "tilde" or "hat".
    pub mode: Option<String>,
}

/// One window position: either a lattice edge (coordinates plus axis) or an
/// edge id of a finite graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowEdge {
    #[serde(default)]
    pub x: i64,
    #[serde(default)]
    pub y: i64,
    pub axis: Option<String>,
    pub edge: Option<u32>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(ExperimentConfig, String)> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok((cfg, text))
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        let g = match &self.graph {
            Some(g) => g,
            None => bail!("config needs a [graph] section"),
        };
        let n = || g.n.context("graph family needs `n`");
        let spec = match g.family.as_str() {
            "line" => LatticeSpec::Line,
            "grid" => LatticeSpec::Grid,
            "cycle" => LatticeSpec::Cycle { n: n()? },
            "complete" => LatticeSpec::Complete { n: n()? },
            "complete-bipartite" => LatticeSpec::CompleteBipartite {
                m: g.m.context("complete-bipartite needs `m`")?,
                n: n()?,
            },
            "torus" => LatticeSpec::Torus { n: n()? },
            "box" => LatticeSpec::Box2 {
                radius: g.radius.context("box needs `radius`")?,
            },
            other => bail!("unknown graph family {other:?}"),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The deck action, if an [action] section is present.
    pub fn action(&self) -> Result<Option<GroupAction>> {
        let a = match &self.action {
            Some(a) => a,
            None => return Ok(None),
        };
        let period = || a.period.context("translation action needs `period`");
        let action = match a.kind.as_str() {
            "trivial" => GroupAction::Trivial,
            "line-translation" => GroupAction::LineTranslation { period: period()? },
            "grid-translation" => GroupAction::GridTranslation { period: period()? },
            other => bail!("unknown action kind {other:?}"),
        };
        Ok(Some(action))
    }

    pub fn window(&self) -> Result<Vec<BaseEdgeRef>> {
        self.params
            .window
            .iter()
            .map(|w| match (&w.axis, w.edge) {
                (Some(_), Some(_)) => bail!("window entry sets both `axis` and `edge`"),
                (None, Some(id)) => Ok(BaseEdgeRef::Finite(EdgeId(id))),
                (Some(axis), None) => Ok(BaseEdgeRef::lattice(
                    w.x,
                    w.y,
                    match axis.as_str() {
                        "x" => Axis::X,
                        "y" => Axis::Y,
                        other => bail!("axis must be \"x\" or \"y\", got {other:?}"),
                    },
                )),
                (None, None) => bail!("window entry needs `axis` (lattice) or `edge` (finite)"),
            })
            .collect()
    }

    pub fn lift_mode(&self) -> Result<LiftMode> {
        match self.params.mode.as_deref() {
            None | Some("tilde") => Ok(LiftMode::Tilde),
            Some("hat") => Ok(LiftMode::Hat),
            Some(other) => bail!("mode must be \"tilde\" or \"hat\", got {other:?}"),
        }
    }

    pub fn boundaries(&self) -> Result<Vec<Boundary>> {
        match self.params.boundary.as_deref() {
            None | Some("both") => Ok(vec![Boundary::Wired, Boundary::Free]),
            Some("wired") => Ok(vec![Boundary::Wired]),
            Some("free") => Ok(vec![Boundary::Free]),
            Some(other) => {
                bail!("boundary must be \"wired\", \"free\" or \"both\", got {other:?}")
            }
        }
    }

    pub fn samples(&self, default: u64) -> u64 {
        self.params.samples.unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Wired,
    Free,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Wired => "wired",
            Boundary::Free => "free",
        })
    }
}
