//! Edge marginals of the two forest measures, checked against closed forms
//! on edge-transitive families, against the brute-force tree oracle on small
//! graphs, and against the trace identity everywhere. Dumps both kernels as
//! artifacts.

use anyhow::Result;
use forestlab_core::determinantal::{fsf_kernel, wsf_kernel};
use forestlab_core::flow::true_cycle_space;
use forestlab_core::LatticeSpec;

use super::{quotient_from_config, Artifact, Checks, EXACT_TOL, Outcome};
use crate::config::ExperimentConfig;
use crate::oracle;
use crate::table::ConvergenceTable;

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lattice = cfg.lattice()?;
    let q = quotient_from_config(cfg)?;
    let g = q.graph();
    let edges = g.edge_count() as f64;
    let level = q.level().to_string();
    let mut t = ConvergenceTable::new();
    let mut checks = Checks::new();
    let mut artifacts = Vec::new();

    let kw = wsf_kernel(g);
    let kf = fsf_kernel(&q)?;
    for (kernel, name) in [(&kw, "wsf"), (&kf, "fsf")] {
        let d = kernel.diagnostics();
        checks.check(
            &format!("{name} kernel well-formed"),
            d.ok(),
            format!(
                "symmetry {:.1e}, idempotence {:.1e}, trace offset {:.1e}",
                d.max_symmetry_gap, d.max_idempotency_gap, d.trace_gap
            ),
        );
        let mut dump = Vec::new();
        kernel.write_matrix(&mut dump)?;
        artifacts.push(Artifact {
            name: format!("{name}_kernel.txt"),
            content: String::from_utf8(dump)?,
        });
    }
    t.push(
        &level,
        "wsf_dim",
        kw.dim() as f64,
        (g.vertex_count() - 1) as f64,
    );
    let true_dim = true_cycle_space(&q).dim();
    t.push(
        &level,
        "fsf_dim",
        kf.dim() as f64,
        (g.edge_count() - true_dim) as f64,
    );
    checks.check(
        "kernel dimensions",
        kw.dim() == g.vertex_count() - 1 && kf.dim() == g.edge_count() - true_dim,
        format!("wsf {} / fsf {}", kw.dim(), kf.dim()),
    );

    // Per-edge references. Edge-transitive families pin every marginal to
    // dim/|E|; otherwise small graphs fall back to the tree-count oracle for
    // the tree measure.
    let transitive = matches!(
        lattice,
        LatticeSpec::Cycle { .. }
            | LatticeSpec::Complete { .. }
            | LatticeSpec::CompleteBipartite { .. }
            | LatticeSpec::Torus { .. }
    ) || q.deck_rank() > 0;
    let oracle_marginals = if !transitive && g.edge_count() <= oracle::ORACLE_EDGE_CAP {
        let masks = oracle::spanning_tree_masks(g)?;
        Some(
            g.edges()
                .map(|e| {
                    masks.iter().filter(|m| *m >> e.idx() & 1 == 1).count() as f64
                        / masks.len() as f64
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let mut worst = 0.0f64;
    for e in g.edges() {
        let wm = kw.entry(e, e);
        let fm = kf.entry(e, e);
        let wref = if transitive {
            kw.dim() as f64 / edges
        } else if let Some(o) = &oracle_marginals {
            o[e.idx()]
        } else {
            wm
        };
        let fref = if transitive {
            kf.dim() as f64 / edges
        } else if q.deck_rank() == 0 {
            // Trivial deck group: the two measures coincide.
            wm
        } else {
            fm
        };
        t.push(&level, format!("wsf_marginal_e{}", e.idx()), wm, wref);
        t.push(&level, format!("fsf_marginal_e{}", e.idx()), fm, fref);
        worst = worst.max((wm - wref).abs()).max((fm - fref).abs());
    }
    checks.check(
        "per-edge marginals match references",
        worst <= EXACT_TOL,
        format!("worst gap {worst:.3e}"),
    );
    if q.deck_rank() == 2 {
        let n = q.level() as f64;
        checks.note(format!(
            "torus closed forms: wsf (n^2-1)/(2n^2) = {}, fsf (n^2+1)/(2n^2) = {}",
            (n * n - 1.0) / (2.0 * n * n),
            (n * n + 1.0) / (2.0 * n * n)
        ));
    }

    checks.finish(t, artifacts)
}
