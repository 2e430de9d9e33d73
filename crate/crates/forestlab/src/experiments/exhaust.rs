//! Exhaustion study: spanning-tree marginal of a fixed edge in growing boxes
//! of the line or the square lattice, under free (induced subgraph) and wired
//! (boundary identified to a hub) conditions, against the current-splitting
//! reference.

use anyhow::{bail, ensure, Context, Result};
use forestlab_core::flow::{star_space, EdgeVector};
use forestlab_core::graph::lattice::{
    build_box2_indexed, build_box2_wired, build_segment_indexed, build_segment_wired,
};
use forestlab_core::{BaseEdge, BaseEdgeRef, LatticeSpec, OrientedEdge};

use super::{Checks, Outcome};
use crate::config::{Boundary, ExperimentConfig};
use crate::oracle;
use crate::table::ConvergenceTable;

/// Convergence tolerance at the largest radius; empirical, not a rate claim.
pub const FINAL_GAP_TOL: f64 = 0.05;

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let base = cfg.lattice()?;
    ensure!(
        matches!(base, LatticeSpec::Line | LatticeSpec::Grid),
        "exhaustion needs an infinite base lattice"
    );
    let radii = &cfg.params.radii;
    ensure!(!radii.is_empty(), "exhaustion config needs `radii`");
    ensure!(
        radii.windows(2).all(|w| w[0] < w[1]),
        "radii must be strictly increasing"
    );
    let window = cfg.window()?;
    let edge = match window.as_slice() {
        [] => BaseEdge::new(0, 0, forestlab_core::Axis::X),
        [BaseEdgeRef::Lattice(e)] => *e,
        _ => bail!("exhaustion window must be a single lattice edge"),
    };
    let reference = oracle::lattice_reference_marginal(base)?;

    let mut t = ConvergenceTable::new();
    let mut checks = Checks::new();
    for boundary in cfg.boundaries()? {
        let quantity = format!("ust_marginal_{boundary}");
        for &radius in radii {
            let (g, index) = match (base, boundary) {
                (LatticeSpec::Grid, Boundary::Free) => build_box2_indexed(radius),
                (LatticeSpec::Grid, Boundary::Wired) => build_box2_wired(radius),
                (LatticeSpec::Line, Boundary::Free) => build_segment_indexed(radius),
                (LatticeSpec::Line, Boundary::Wired) => build_segment_wired(radius),
                _ => unreachable!("base checked above"),
            };
            let e = *index.get(&edge).with_context(|| {
                format!("window edge {edge:?} is outside the radius-{radius} box")
            })?;
            // The marginal is the squared norm of the projected unit flow.
            let chi = EdgeVector::chi(&g, OrientedEdge::forward(e))?;
            let marginal = star_space(&g).project(&chi)?.norm().powi(2);
            t.push(radius.to_string(), &quantity, marginal, reference);
        }
        checks.check(
            &format!("{quantity} gaps nonincreasing in the radius"),
            t.gaps_nonincreasing(&quantity),
            format!("{:?}", t.gaps(&quantity)),
        );
        let final_gap = *t.gaps(&quantity).last().expect("radii nonempty");
        checks.check(
            &format!("{quantity} within {FINAL_GAP_TOL} of the reference at the largest radius"),
            final_gap <= FINAL_GAP_TOL + 1e-12,
            format!("final gap {final_gap:.6}"),
        );
    }
    checks.note(format!(
        "reference marginal from current splitting: {reference}"
    ));
    checks.finish(t, Vec::new())
}
