//! Quotient-tower convergence: lift both forest measures through increasing
//! periods and track a window edge's marginal against the infinite-lattice
//! reference from the current-splitting oracle.

use anyhow::{ensure, Result};
use forestlab_core::determinantal::{fsf_kernel, lifted_window_pmf, wsf_kernel};
use forestlab_core::graph::quotient::build_quotient;
use forestlab_core::{BaseEdgeRef, LatticeSpec, LiftMode};

use super::{translation_action, Checks, EXACT_TOL, Outcome};
use crate::config::ExperimentConfig;
use crate::oracle;
use crate::table::ConvergenceTable;

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let base = cfg.lattice()?;
    ensure!(
        matches!(base, LatticeSpec::Line | LatticeSpec::Grid),
        "tower experiments need an infinite base lattice"
    );
    let levels = &cfg.params.levels;
    ensure!(!levels.is_empty(), "tower config needs `levels`");
    ensure!(
        levels.windows(2).all(|w| w[0] < w[1]),
        "levels must be strictly increasing"
    );
    let window = cfg.window()?;
    let edge = match window.as_slice() {
        [] => BaseEdgeRef::lattice(0, 0, forestlab_core::Axis::X),
        [e @ BaseEdgeRef::Lattice(_)] => *e,
        _ => anyhow::bail!("tower window must be a single lattice edge"),
    };
    let mode = cfg.lift_mode()?;
    let reference = oracle::lattice_reference_marginal(base)?;

    let mut t = ConvergenceTable::new();
    let mut checks = Checks::new();
    for &n in levels {
        let q = build_quotient(base, translation_action(base, n)?)?;
        let wsf = lifted_window_pmf(&wsf_kernel(q.graph()), &q, &[edge], mode)?[1];
        let fsf = lifted_window_pmf(&fsf_kernel(&q)?, &q, &[edge], mode)?[1];
        t.push(n.to_string(), "wsf_window_marginal", wsf, reference);
        t.push(n.to_string(), "fsf_window_marginal", fsf, reference);

        match base {
            LatticeSpec::Grid => {
                // Torus closed forms put both marginals 1/(2n^2) away from
                // the grid reference, one from each side.
                let expected_gap = 1.0 / (2.0 * (n as f64) * (n as f64));
                checks.check(
                    &format!("level {n}: gaps equal 1/(2n^2)"),
                    ((wsf - reference).abs() - expected_gap).abs() <= EXACT_TOL
                        && ((fsf - reference).abs() - expected_gap).abs() <= EXACT_TOL,
                    format!("wsf {wsf:.8}, fsf {fsf:.8}, expected gap {expected_gap:.8}"),
                );
                checks.check(
                    &format!("level {n}: marginals straddle the reference symmetrically"),
                    (wsf + fsf - 2.0 * reference).abs() <= EXACT_TOL,
                    format!("sum {:.12}", wsf + fsf),
                );
            }
            _ => {
                // Cycle tower: the tree measure misses one edge uniformly,
                // the free measure keeps everything.
                let expected = (n as f64 - 1.0) / n as f64;
                checks.check(
                    &format!("level {n}: cycle marginals"),
                    (wsf - expected).abs() <= EXACT_TOL && (fsf - 1.0).abs() <= EXACT_TOL,
                    format!("wsf {wsf:.8}, fsf {fsf:.8}"),
                );
            }
        }

        // Inside the fundamental domain the two lift conventions agree.
        if q.in_domain(edge)? {
            let hat = lifted_window_pmf(&wsf_kernel(q.graph()), &q, &[edge], LiftMode::Hat)?[1];
            let tilde = lifted_window_pmf(&wsf_kernel(q.graph()), &q, &[edge], LiftMode::Tilde)?[1];
            checks.check(
                &format!("level {n}: hat and tilde lifts agree on the domain"),
                hat == tilde,
                format!("{hat:.12} vs {tilde:.12}"),
            );
        }
    }
    for quantity in ["wsf_window_marginal", "fsf_window_marginal"] {
        // On the cycle tower the free marginal already sits at the reference,
        // so a flat-at-zero gap sequence counts as converged.
        let gaps = t.gaps(quantity);
        let converged = gaps.iter().all(|g| *g <= EXACT_TOL);
        checks.check(
            &format!("{quantity} gaps strictly decrease along the tower"),
            converged || t.gaps_strictly_decreasing(quantity),
            format!("{gaps:?}"),
        );
    }
    checks.note(format!(
        "reference marginal from current splitting: {reference}"
    ));
    checks.finish(t, Vec::new())
}
