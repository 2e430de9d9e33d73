//! Window-subspace stabilization along a tower: project the star and cycle
//! families onto a fixed window, from the infinite base lattice and from each
//! quotient level, and report when the two projections coincide. They must
//! coincide from the first level whose fundamental domain covers the window's
//! incident edges.

use anyhow::{ensure, Result};
use forestlab_core::flow::window::{domain_covers_window, family_distance, FlowFamily};
use forestlab_core::graph::quotient::build_quotient;
use forestlab_core::LatticeSpec;

use super::{translation_action, Checks, EXACT_TOL, Outcome};
use crate::config::ExperimentConfig;
use crate::table::ConvergenceTable;

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let base = cfg.lattice()?;
    ensure!(
        matches!(base, LatticeSpec::Line | LatticeSpec::Grid),
        "stabilization diagnostics need an infinite base lattice"
    );
    let levels = &cfg.params.levels;
    ensure!(!levels.is_empty(), "sot config needs `levels`");
    ensure!(
        levels.windows(2).all(|w| w[0] < w[1]),
        "levels must be strictly increasing"
    );
    let window = cfg.window()?;
    ensure!(!window.is_empty(), "sot config needs a window");

    let mut t = ConvergenceTable::new();
    let mut checks = Checks::new();
    let mut first_covered: Option<u32> = None;
    let mut first_stable: Option<u32> = None;
    for &n in levels {
        let q = build_quotient(base, translation_action(base, n)?)?;
        let ds = family_distance(base, &q, &window, FlowFamily::Stars)?;
        let dc = family_distance(base, &q, &window, FlowFamily::Cycles)?;
        let covered = domain_covers_window(base, &q, &window)?;
        t.push(n.to_string(), "star_family_distance", ds, 0.0);
        t.push(n.to_string(), "cycle_family_distance", dc, 0.0);
        if covered && first_covered.is_none() {
            first_covered = Some(n);
        }
        let stable = ds <= EXACT_TOL && dc <= EXACT_TOL;
        if stable && first_stable.is_none() {
            first_stable = Some(n);
        }
        if covered {
            checks.check(
                &format!("level {n}: covered window projections coincide"),
                stable,
                format!("star {ds:.3e}, cycle {dc:.3e}"),
            );
        } else {
            checks.note(format!(
                "level {n}: window not covered by the fundamental domain (star {ds:.3e}, cycle {dc:.3e})"
            ));
        }
    }
    for quantity in ["star_family_distance", "cycle_family_distance"] {
        checks.check(
            &format!("{quantity} nonincreasing along the tower"),
            t.gaps_nonincreasing(quantity),
            format!("{:?}", t.gaps(quantity)),
        );
    }
    match (first_covered, first_stable) {
        (Some(c), Some(s)) => {
            checks.check(
                "distances reach the tolerance by the first covering level",
                s <= c,
                format!("first stable level {s}, first covering level {c}"),
            );
        }
        (Some(c), None) => {
            checks.check(
                "distances reach the tolerance by the first covering level",
                false,
                format!("covered from level {c} but never stable"),
            );
        }
        (None, _) => {
            checks.check(
                "some level covers the window",
                false,
                "no configured level covers the window; extend `levels`",
            );
        }
    }
    checks.finish(t, Vec::new())
}
